#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mfloc/errors.hpp"

namespace mfloc {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

inline std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

inline Index shape_product(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

/// Dense row-major array of rank 1-4.
///
/// Axis order is [batch,] channels, height, width. Rank-2 tensors are a single
/// H x W plane; rank-3 tensors are C planes of H x W. Each plane is exposed as
/// an Eigen row-major map so per-channel math stays in Eigen expressions.
template <typename Scalar>
class Tensor {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Plane = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using PlaneMap = Eigen::Map<Plane>;
    using ConstPlaneMap = Eigen::Map<const Plane>;

    Tensor() = default;

    explicit Tensor(Shape shape) : shape_(std::move(shape)) {
        validate_shape(shape_);
        data_ = Vector::Zero(shape_product(shape_));
    }

    Tensor(Shape shape, Vector data) : shape_(std::move(shape)), data_(std::move(data)) {
        validate_shape(shape_);
        if (data_.size() != shape_product(shape_)) {
            throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                                 " does not match shape " + shape_string(shape_));
        }
    }

    Tensor(Shape shape, std::initializer_list<Scalar> values)
        : Tensor(std::move(shape), Vector(Eigen::Map<const Vector>(values.begin(),
                                                                    static_cast<Index>(values.size())))) {}

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    static Tensor constant(Shape shape, Scalar value) {
        Tensor t(std::move(shape));
        t.data_.setConstant(value);
        return t;
    }

    /// Wraps a single plane as a rank-2 tensor.
    template <typename Derived>
    static Tensor from_plane(const Eigen::DenseBase<Derived>& plane) {
        Tensor t(Shape{plane.rows(), plane.cols()});
        t.plane(0) = plane;
        return t;
    }

    const Shape& shape() const { return shape_; }
    Index rank() const { return static_cast<Index>(shape_.size()); }
    Index dim(Index axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
    Index size() const { return data_.size(); }
    bool empty() const { return shape_.empty(); }

    Vector& data() { return data_; }
    const Vector& data() const { return data_; }

    // Spatial conventions: the last two axes are height and width; everything
    // before them is folded into the plane count.
    Index height() const { return shape_.size() >= 2 ? shape_[shape_.size() - 2] : 1; }
    Index width() const { return shape_.empty() ? 0 : shape_.back(); }
    Index planes() const { return height() * width() == 0 ? 0 : size() / (height() * width()); }
    Index channels() const { return shape_.size() >= 3 ? shape_[shape_.size() - 3] : 1; }

    PlaneMap plane(Index p) {
        check_plane(p);
        return PlaneMap(data_.data() + p * height() * width(), height(), width());
    }
    ConstPlaneMap plane(Index p) const {
        check_plane(p);
        return ConstPlaneMap(data_.data() + p * height() * width(), height(), width());
    }

    /// Channel-by-location view (planes x H*W); column i is the feature vector at
    /// flattened spatial location i (row-major).
    PlaneMap features() { return PlaneMap(data_.data(), planes(), height() * width()); }
    ConstPlaneMap features() const { return ConstPlaneMap(data_.data(), planes(), height() * width()); }

    Scalar& operator()(Index y, Index x) { return data_[y * width() + x]; }
    Scalar operator()(Index y, Index x) const { return data_[y * width() + x]; }
    Scalar& operator()(Index c, Index y, Index x) { return data_[(c * height() + y) * width() + x]; }
    Scalar operator()(Index c, Index y, Index x) const { return data_[(c * height() + y) * width() + x]; }
    Scalar& operator()(Index n, Index c, Index y, Index x) {
        return data_[((n * dim(1) + c) * height() + y) * width() + x];
    }
    Scalar operator()(Index n, Index c, Index y, Index x) const {
        return data_[((n * dim(1) + c) * height() + y) * width() + x];
    }

    Tensor reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

    bool all_finite() const { return data_.allFinite(); }

    template <typename Other>
    Tensor<Other> cast() const {
        return Tensor<Other>(shape_, data_.template cast<Other>());
    }

    friend bool operator==(const Tensor& a, const Tensor& b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    static void validate_shape(const Shape& shape) {
        if (shape.empty() || shape.size() > 4) {
            throw DimensionError("tensor rank must be 1-4, got " + std::to_string(shape.size()));
        }
        for (Index extent : shape) {
            if (extent <= 0) throw DimensionError("tensor extents must be positive: " + shape_string(shape));
        }
    }

    void check_plane(Index p) const {
        if (p < 0 || p >= planes()) {
            throw DimensionError("plane index " + std::to_string(p) + " out of range for " + shape_string(shape_));
        }
    }

    Shape shape_;
    Vector data_;
};

using TensorD = Tensor<double>;

}  // namespace mfloc
