#pragma once

#include <array>
#include <cstdint>

#include "mfloc/tensor.hpp"

namespace mfloc {

inline constexpr Index kScaleBranches = 8;

/// Eight quarter-resolution probability maps ordered (l1,g1,l2,g2,l3,g3,l4,g4).
struct ScalePredictions {
    std::array<TensorD, kScaleBranches> branches;  // each [H/4, W/4], values in [0,1]
    Index source_height = 0;
    Index source_width = 0;

    const TensorD& local(Index scale) const { return branches.at(static_cast<std::size_t>(2 * scale)); }
    const TensorD& global(Index scale) const { return branches.at(static_cast<std::size_t>(2 * scale + 1)); }

    /// Throws unless all branches share one shape and lie in [0,1].
    void validate() const;
};

/// Per-pixel convex weights over the eight branches, stored channel-first [8, h, w].
class WeightMap {
public:
    explicit WeightMap(TensorD weights);

    const TensorD& weights() const { return weights_; }
    Index height() const { return weights_.height(); }
    Index width() const { return weights_.width(); }

private:
    TensorD weights_;
};

/// Deterministic stand-ins for the local (CNN) and global (transformer)
/// encoder/decoder pairs. Local branch s convolves I_h with a seeded 3x3
/// filter and average-pools by 4*2^s; global branch s mixes I_l channels with
/// seeded 1x1 weights, pools by 4*2^s and applies a 3x3 box filter. Each map is
/// squashed with the logistic function and upsampled to H/4 x W/4.
ScalePredictions stub_scale_predictions(const TensorD& high_input, const TensorD& low_input, std::uint64_t seed);

/// Channel stack of the branches in (l1,g1,...,l4,g4) order: [8, H/4, W/4].
TensorD merge_predictions(const ScalePredictions& predictions);

/// Seeded 3x3 convolution 9 -> 8 channels, 4x average pooling, then a
/// per-pixel softmax across channels.
WeightMap stub_weighting(const TensorD& composite, std::uint64_t seed);

/// sum_j W_j * M_j at quarter resolution.
TensorD amw_weighted_sum(const TensorD& merged, const WeightMap& weights);

/// amw_weighted_sum followed by bilinear upsampling to out_h x out_w.
TensorD amw_fuse(const TensorD& merged, const WeightMap& weights, Index out_h, Index out_w);

/// Whole mesoscopic branch on an RGB image [3,H,W]: frequency split, I_h/I_l
/// construction, stub predictions and weights, adaptive fusion. Returns an
/// [H,W] probability map.
TensorD mitl_forward(const TensorD& rgb, double cutoff, std::uint64_t seed);

}  // namespace mfloc
