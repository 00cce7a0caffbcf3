#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "mfloc/tensor.hpp"

namespace mfloc {

using BitGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// 2-D boolean grid, true = manipulated pixel.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(Index height, Index width);
    explicit BinaryMask(BitGrid bits);

    static BinaryMask full(Index height, Index width);

    Index height() const { return bits_.rows(); }
    Index width() const { return bits_.cols(); }
    Index area() const { return bits_.size(); }
    Index count() const { return bits_.count(); }
    bool none() const { return count() == 0; }

    bool operator()(Index y, Index x) const { return bits_(y, x); }
    BitGrid::Scalar& operator()(Index y, Index x) { return bits_(y, x); }

    const BitGrid& bits() const { return bits_; }
    BitGrid& bits() { return bits_; }

    BinaryMask complement() const;
    bool subset_of(const BinaryMask& other) const;

    friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
        return a.height() == b.height() && a.width() == b.width() && (a.bits_ == b.bits_).all();
    }

private:
    BitGrid bits_;
};

BinaryMask operator|(const BinaryMask& a, const BinaryMask& b);
BinaryMask operator&(const BinaryMask& a, const BinaryMask& b);

/// Odd-sized binary probe with its origin at the center cell.
class StructuringElement {
public:
    explicit StructuringElement(BitGrid bits);

    /// size x size all-ones element (size odd).
    static StructuringElement square(Index size);
    static StructuringElement origin_only() { return square(1); }

    Index height() const { return bits_.rows(); }
    Index width() const { return bits_.cols(); }
    Index radius_y() const { return height() / 2; }
    Index radius_x() const { return width() / 2; }
    const BitGrid& bits() const { return bits_; }

    /// Point reflection through the origin.
    StructuringElement reflected() const;

    struct Offset {
        Index dy;
        Index dx;
    };
    /// Set cells as (dy, dx) offsets from the origin.
    std::vector<Offset> offsets() const;

private:
    BitGrid bits_;
};

inline constexpr Index kDefaultStructuringSize = 5;

/// M (+) B: z is set iff some b in B has z - b in M. Outside-image cells are background.
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se);

/// M (-) B: z is set iff z + b lies inside the image and in M for every b in B.
BinaryMask erode(const BinaryMask& mask, const StructuringElement& se);

/// (M_lfdl (+) B) | (M_mitl (-) B).
BinaryMask mdmf_fuse(const BinaryMask& lfdl, const BinaryMask& mitl, const StructuringElement& se);

/// Pixel-wise OR of two masks.
BinaryMask naive_fuse(const BinaryMask& a, const BinaryMask& b);

inline constexpr double kDefaultBinarizeThreshold = 0.5;

/// Pixel set iff prob >= threshold; threshold must lie in (0,1).
BinaryMask binarize(const TensorD& prob, double threshold = kDefaultBinarizeThreshold);

/// Probability-style view of a mask (1.0 / 0.0).
TensorD to_tensor(const BinaryMask& mask);

/// 8-connected component labels (0 = background, 1..n = components in
/// raster order of their first pixel).
struct ComponentLabels {
    Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> labels;
    std::int32_t count = 0;
};
ComponentLabels label_components(const BinaryMask& mask);

}  // namespace mfloc
