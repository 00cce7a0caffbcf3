#include "mfloc/meso_fusion.hpp"

#include <cmath>
#include <random>

#include "mfloc/frequency.hpp"
#include "mfloc/tensor_kernels.hpp"

namespace mfloc {

namespace {

constexpr Index kScales = 4;

TensorD seeded_kernels(Index count, Index channels, Index size, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    TensorD k(Shape{count, channels, size, size});
    for (Index i = 0; i < k.size(); ++i) k.data()[i] = dist(rng);
    return k;
}

TensorD box_kernel(Index size) {
    return TensorD::constant(Shape{1, 1, size, size}, 1.0 / static_cast<double>(size * size));
}

void require_pyramid_input(const TensorD& t, const char* name) {
    if (t.rank() != 3 || t.dim(0) != 6) {
        throw DimensionError(std::string("stub_scale_predictions: ") + name + " must be [6,H,W], got " +
                             shape_string(t.shape()));
    }
    if (t.height() % 32 != 0 || t.width() % 32 != 0) {
        throw DimensionError(std::string("stub_scale_predictions: ") + name + " extents must be divisible by 32, got " +
                             shape_string(t.shape()));
    }
}

}  // namespace

void ScalePredictions::validate() const {
    const Shape& shape = branches.front().shape();
    for (const auto& b : branches) {
        if (b.rank() != 2 || b.shape() != shape) throw DimensionError("scale branches must share one [h,w] shape");
        if ((b.data().array() < 0.0).any() || (b.data().array() > 1.0).any() || !b.all_finite()) {
            throw ParameterError("scale branch values must lie in [0,1]");
        }
    }
}

WeightMap::WeightMap(TensorD weights) : weights_(std::move(weights)) {
    if (weights_.rank() != 3 || weights_.dim(0) != kScaleBranches) {
        throw DimensionError("weight map must be [8,h,w], got " + shape_string(weights_.shape()));
    }
    const auto f = weights_.features();
    if ((f.array() < 0.0).any() || !f.allFinite()) throw ParameterError("weight map entries must be finite and >= 0");
    if (((f.colwise().sum().array() - 1.0).abs() > 1e-6).any()) {
        throw ParameterError("weight map must sum to 1 at every pixel");
    }
}

ScalePredictions stub_scale_predictions(const TensorD& high_input, const TensorD& low_input, std::uint64_t seed) {
    require_pyramid_input(high_input, "I_h");
    require_pyramid_input(low_input, "I_l");
    if (high_input.shape() != low_input.shape()) throw DimensionError("stub_scale_predictions: I_h and I_l differ");

    const Index h = high_input.height();
    const Index w = high_input.width();
    std::mt19937_64 rng(seed);
    ScalePredictions out;
    out.source_height = h;
    out.source_width = w;
    for (Index s = 0; s < kScales; ++s) {
        const Index factor = Index{4} << s;
        const TensorD local_kernel = seeded_kernels(1, 6, 3, rng);
        const TensorD global_mix = seeded_kernels(1, 6, 1, rng);

        TensorD local = avg_pool(conv2d(high_input, local_kernel), factor);
        TensorD global = conv2d(avg_pool(conv2d(low_input, global_mix), factor), box_kernel(3));

        local = resize_bilinear(logistic(std::move(local)), h / 4, w / 4);
        global = resize_bilinear(logistic(std::move(global)), h / 4, w / 4);
        out.branches[static_cast<std::size_t>(2 * s)] = local.reshaped(Shape{h / 4, w / 4});
        out.branches[static_cast<std::size_t>(2 * s + 1)] = global.reshaped(Shape{h / 4, w / 4});
    }
    return out;
}

TensorD merge_predictions(const ScalePredictions& predictions) {
    predictions.validate();
    const auto& first = predictions.branches.front();
    TensorD merged(Shape{kScaleBranches, first.height(), first.width()});
    for (Index j = 0; j < kScaleBranches; ++j) merged.plane(j) = predictions.branches[static_cast<std::size_t>(j)].plane(0);
    return merged;
}

WeightMap stub_weighting(const TensorD& composite, std::uint64_t seed) {
    if (composite.rank() != 3 || composite.dim(0) != 9) {
        throw DimensionError("stub_weighting expects [9,H,W] (x, x_h, x_l), got " + shape_string(composite.shape()));
    }
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const TensorD kernels = seeded_kernels(kScaleBranches, 9, 3, rng);
    TensorD logits = avg_pool(conv2d(composite, kernels), 4);

    // Softmax across the eight channels at each pixel.
    auto f = logits.features();
    f = (f.rowwise() - f.colwise().maxCoeff()).array().exp().matrix();
    f.array().rowwise() /= f.colwise().sum().array();
    return WeightMap(std::move(logits));
}

TensorD amw_weighted_sum(const TensorD& merged, const WeightMap& weights) {
    if (merged.rank() != 3 || merged.shape() != weights.weights().shape()) {
        throw DimensionError("amw_fuse: merged predictions " + shape_string(merged.shape()) + " vs weights " +
                             shape_string(weights.weights().shape()));
    }
    const Eigen::RowVectorXd fused = (merged.features().array() * weights.weights().features().array()).colwise().sum();
    return TensorD(Shape{merged.height(), merged.width()}, fused.transpose());
}

TensorD amw_fuse(const TensorD& merged, const WeightMap& weights, Index out_h, Index out_w) {
    return resize_bilinear(amw_weighted_sum(merged, weights), out_h, out_w);
}

TensorD mitl_forward(const TensorD& rgb, double cutoff, std::uint64_t seed) {
    if (rgb.rank() != 3 || rgb.dim(0) != 3) throw DimensionError("mitl_forward expects [3,H,W]");
    const FrequencySplit split = frequency_split(rgb, cutoff);
    const TensorD high_input = freq_concat(rgb, split.high);
    const TensorD low_input = freq_concat(rgb, split.low);
    const ScalePredictions predictions = stub_scale_predictions(high_input, low_input, seed);
    const WeightMap weights = stub_weighting(concat_channels(high_input, split.low), seed);
    return amw_fuse(merge_predictions(predictions), weights, rgb.height(), rgb.width());
}

}  // namespace mfloc
