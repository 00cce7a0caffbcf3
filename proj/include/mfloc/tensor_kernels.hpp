#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "mfloc/tensor.hpp"

namespace mfloc {

enum class Padding { Same, Valid };

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw DimensionError(what);
}

}  // namespace detail

/// Multi-channel 2-D cross-correlation (no kernel flip).
///
/// input is [C,H,W] (a rank-2 input is treated as C=1), kernels is [K,C,kh,kw]
/// with odd kh, kw. Padding::Same zero-pads so the output keeps H x W;
/// Padding::Valid yields (H-kh+1) x (W-kw+1).
template <typename Scalar>
Tensor<Scalar> conv2d(const Tensor<Scalar>& input, const Tensor<Scalar>& kernels, Padding pad = Padding::Same) {
    detail::require(input.rank() == 2 || input.rank() == 3,
                    "conv2d input must be [C,H,W], got " + shape_string(input.shape()));
    detail::require(kernels.rank() == 4, "conv2d kernels must be [K,C,kh,kw], got " + shape_string(kernels.shape()));
    const Index channels = input.channels();
    const Index count = kernels.dim(0);
    const Index kh = kernels.dim(2);
    const Index kw = kernels.dim(3);
    detail::require(kernels.dim(1) == channels, "conv2d channel mismatch: input " + shape_string(input.shape()) +
                                                    " vs kernels " + shape_string(kernels.shape()));
    detail::require(kh % 2 == 1 && kw % 2 == 1, "conv2d kernel extents must be odd");

    const Index in_h = input.height();
    const Index in_w = input.width();
    Index out_h = in_h;
    Index out_w = in_w;
    Index shift_y = kh / 2;
    Index shift_x = kw / 2;
    if (pad == Padding::Valid) {
        out_h = in_h - kh + 1;
        out_w = in_w - kw + 1;
        detail::require(out_h > 0 && out_w > 0, "conv2d valid padding: kernel larger than input");
        shift_y = 0;
        shift_x = 0;
    }

    Tensor<Scalar> out(Shape{count, out_h, out_w});
    for (Index k = 0; k < count; ++k) {
        auto acc = out.plane(k);
        for (Index c = 0; c < channels; ++c) {
            const auto src = input.plane(c);
            for (Index ky = 0; ky < kh; ++ky) {
                for (Index kx = 0; kx < kw; ++kx) {
                    const Scalar w = kernels(k, c, ky, kx);
                    if (w == Scalar(0)) continue;
                    // out(y,x) += w * in(y + dy, x + dx), restricted to in-bounds source rows/cols.
                    const Index dy = ky - shift_y;
                    const Index dx = kx - shift_x;
                    const Index y0 = std::max<Index>(0, -dy);
                    const Index x0 = std::max<Index>(0, -dx);
                    const Index y1 = std::min(out_h, in_h - dy);
                    const Index x1 = std::min(out_w, in_w - dx);
                    if (y1 <= y0 || x1 <= x0) continue;
                    acc.block(y0, x0, y1 - y0, x1 - x0).noalias() +=
                        w * src.block(y0 + dy, x0 + dx, y1 - y0, x1 - x0);
                }
            }
        }
    }
    return out;
}

/// Per-location cosine similarity of the channel vectors of A and B.
/// Locations where either vector has zero norm map to 0.
template <typename Scalar>
Tensor<Scalar> cosine_map(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
    detail::require(a.shape() == b.shape(),
                    "cosine_map shape mismatch: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
    detail::require(a.rank() == 3, "cosine_map expects [C,H,W], got " + shape_string(a.shape()));
    const auto fa = a.features();
    const auto fb = b.features();
    const auto dots = (fa.array() * fb.array()).colwise().sum().eval();
    const auto norms = (fa.colwise().norm().array() * fb.colwise().norm().array()).eval();

    Tensor<Scalar> out(Shape{a.height(), a.width()});
    for (Index i = 0; i < dots.size(); ++i) {
        if (norms[i] == Scalar(0)) continue;
        out.data()[i] = std::clamp(dots[i] / norms[i], Scalar(-1), Scalar(1));
    }
    return out;
}

/// Row-wise softmax with max subtraction.
template <typename Derived>
auto softmax_rows(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    using Result = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    if (!m.allFinite()) throw ParameterError("softmax_rows: non-finite input");
    Result out = (m.colwise() - m.rowwise().maxCoeff()).array().exp().matrix();
    out.array().colwise() /= out.array().rowwise().sum();
    return out;
}

template <typename Scalar>
Tensor<Scalar> softmax_rows(const Tensor<Scalar>& m) {
    detail::require(m.rank() == 2, "softmax_rows expects a matrix, got " + shape_string(m.shape()));
    return Tensor<Scalar>::from_plane(softmax_rows(m.plane(0)));
}

/// Interpolation operator for one axis: (to x from) matrix whose rows are the
/// bilinear weights under half-pixel center alignment, clamped at the edges.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> bilinear_axis(Index from, Index to) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> r =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(to, from);
    const Scalar scale = Scalar(from) / Scalar(to);
    for (Index i = 0; i < to; ++i) {
        Scalar src = (Scalar(i) + Scalar(0.5)) * scale - Scalar(0.5);
        src = std::clamp(src, Scalar(0), Scalar(from - 1));
        const auto lo = static_cast<Index>(std::floor(src));
        const Index hi = std::min(lo + 1, from - 1);
        const Scalar frac = src - Scalar(lo);
        r(i, lo) += Scalar(1) - frac;
        r(i, hi) += frac;
    }
    return r;
}

/// Bilinear resize of every plane to out_h x out_w (half-pixel centers).
template <typename Scalar>
Tensor<Scalar> resize_bilinear(const Tensor<Scalar>& t, Index out_h, Index out_w) {
    detail::require(out_h >= 1 && out_w >= 1, "resize_bilinear: target extents must be >= 1");
    detail::require(t.rank() >= 2, "resize_bilinear expects at least [H,W], got " + shape_string(t.shape()));
    if (out_h == t.height() && out_w == t.width()) return t;

    const auto ry = bilinear_axis<Scalar>(t.height(), out_h);
    const auto rx = bilinear_axis<Scalar>(t.width(), out_w);
    Shape shape = t.shape();
    shape[shape.size() - 2] = out_h;
    shape.back() = out_w;
    Tensor<Scalar> out(shape);
    for (Index p = 0; p < t.planes(); ++p) {
        out.plane(p).noalias() = ry * t.plane(p) * rx.transpose();
    }
    return out;
}

/// Non-overlapping average pooling by an integer factor on both axes.
template <typename Scalar>
Tensor<Scalar> avg_pool(const Tensor<Scalar>& t, Index factor) {
    detail::require(factor >= 1, "avg_pool factor must be >= 1");
    detail::require(t.height() % factor == 0 && t.width() % factor == 0,
                    "avg_pool: extents " + shape_string(t.shape()) + " not divisible by " + std::to_string(factor));
    if (factor == 1) return t;
    Shape shape = t.shape();
    shape[shape.size() - 2] = t.height() / factor;
    shape.back() = t.width() / factor;
    Tensor<Scalar> out(shape);
    const Scalar inv = Scalar(1) / Scalar(factor * factor);
    for (Index p = 0; p < t.planes(); ++p) {
        const auto src = t.plane(p);
        auto dst = out.plane(p);
        for (Index y = 0; y < dst.rows(); ++y) {
            for (Index x = 0; x < dst.cols(); ++x) {
                dst(y, x) = src.block(y * factor, x * factor, factor, factor).sum() * inv;
            }
        }
    }
    return out;
}

/// Stacks the planes of two tensors with equal spatial extents: [a; b].
template <typename Scalar>
Tensor<Scalar> concat_channels(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
    detail::require(a.height() == b.height() && a.width() == b.width(),
                    "concat_channels spatial mismatch: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
    Tensor<Scalar> out(Shape{a.planes() + b.planes(), a.height(), a.width()});
    out.data().head(a.size()) = a.data();
    out.data().tail(b.size()) = b.data();
    return out;
}

/// Copies planes [first, first+count) into a new [count,H,W] tensor.
template <typename Scalar>
Tensor<Scalar> slice_channels(const Tensor<Scalar>& t, Index first, Index count) {
    detail::require(first >= 0 && count >= 1 && first + count <= t.planes(), "slice_channels: range out of bounds");
    const Index plane = t.height() * t.width();
    return Tensor<Scalar>(Shape{count, t.height(), t.width()}, t.data().segment(first * plane, count * plane));
}

template <typename Scalar>
Tensor<Scalar> relu(Tensor<Scalar> t) {
    t.data() = t.data().cwiseMax(Scalar(0));
    return t;
}

template <typename Scalar>
Tensor<Scalar> logistic(Tensor<Scalar> t) {
    t.data() = (Scalar(1) / (Scalar(1) + (-t.data().array()).exp())).matrix();
    return t;
}

}  // namespace mfloc
