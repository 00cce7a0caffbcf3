#include "mfloc/local_stream.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mfloc/frequency.hpp"
#include "mfloc/tensor_kernels.hpp"

namespace mfloc {

namespace {

void require_rank3(const TensorD& t, const char* op) {
    if (t.rank() != 3) throw DimensionError(std::string(op) + " expects [C,H,W], got " + shape_string(t.shape()));
}

double cosine(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
    const double norms = a.norm() * b.norm();
    if (norms == 0.0) return 0.0;
    return std::clamp(a.dot(b) / norms, -1.0, 1.0);
}

}  // namespace

Projection::Projection(Matrix weights) : Projection(weights, Eigen::VectorXd::Zero(weights.rows())) {}

Projection::Projection(Matrix weights, Eigen::VectorXd bias) : weights_(std::move(weights)), bias_(std::move(bias)) {
    if (weights_.size() == 0) throw DimensionError("projection weights must be non-empty");
    if (bias_.size() != weights_.rows()) throw DimensionError("projection bias length must equal out_dim");
    if (!weights_.allFinite() || !bias_.allFinite()) throw ParameterError("projection entries must be finite");
}

Projection Projection::identity(Index dim) { return Projection(Matrix::Identity(dim, dim)); }

Projection Projection::seeded(Index out_dim, Index in_dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    Matrix w(out_dim, in_dim);
    for (Index r = 0; r < out_dim; ++r)
        for (Index c = 0; c < in_dim; ++c) w(r, c) = dist(rng);
    return Projection(std::move(w));
}

Projection::Matrix Projection::apply(const Eigen::Ref<const Matrix>& columns) const {
    if (columns.rows() != in_dim()) {
        throw DimensionError("projection expects " + std::to_string(in_dim()) + "-dim inputs, got " +
                             std::to_string(columns.rows()));
    }
    return (weights_ * columns).colwise() + bias_;
}

PatchGrid PatchGrid::tile(Index map_h, Index map_w, Index patch_h, Index patch_w) {
    if (patch_h <= 0 || patch_w <= 0 || map_h <= 0 || map_w <= 0) {
        throw DimensionError("patch grid extents must be positive");
    }
    if (map_h % patch_h != 0 || map_w % patch_w != 0) {
        throw DimensionError("map " + std::to_string(map_h) + "x" + std::to_string(map_w) +
                             " is not tiled by patches of " + std::to_string(patch_h) + "x" + std::to_string(patch_w));
    }
    return {patch_h, patch_w, map_h / patch_h, map_w / patch_w};
}

TensorD replicate_pad_to_multiple(const TensorD& t, Index patch_h, Index patch_w) {
    const Index h = (t.height() + patch_h - 1) / patch_h * patch_h;
    const Index w = (t.width() + patch_w - 1) / patch_w * patch_w;
    if (h == t.height() && w == t.width()) return t;
    Shape shape = t.shape();
    shape[shape.size() - 2] = h;
    shape.back() = w;
    TensorD out(shape);
    for (Index p = 0; p < t.planes(); ++p) {
        const auto src = t.plane(p);
        auto dst = out.plane(p);
        for (Index y = 0; y < h; ++y)
            for (Index x = 0; x < w; ++x) dst(y, x) = src(std::min(y, t.height() - 1), std::min(x, t.width() - 1));
    }
    return out;
}

FaceBox adaptive_crop_window(Index image_h, Index image_w, const FaceBox& box, double area_lo, double margin) {
    if (!(area_lo > 0.0 && area_lo < 1.0)) throw ParameterError("adaptive_crop: area_lo must lie in (0,1)");
    if (!(margin >= 1.0)) throw ParameterError("adaptive_crop: margin must be >= 1");
    if (box.w <= 0 || box.h <= 0 || box.x < 0 || box.y < 0 || box.x + box.w > image_w || box.y + box.h > image_h) {
        throw ParameterError("adaptive_crop: face box is empty or outside the image");
    }
    const double area = static_cast<double>(box.w * box.h) / static_cast<double>(image_h * image_w);
    if (area < area_lo) return {0, 0, image_w, image_h};

    const double cx = static_cast<double>(box.x) + 0.5 * static_cast<double>(box.w);
    const double cy = static_cast<double>(box.y) + 0.5 * static_cast<double>(box.h);
    const double half_w = 0.5 * margin * static_cast<double>(box.w);
    const double half_h = 0.5 * margin * static_cast<double>(box.h);
    const Index x0 = std::clamp<Index>(static_cast<Index>(std::floor(cx - half_w)), 0, image_w - 1);
    const Index y0 = std::clamp<Index>(static_cast<Index>(std::floor(cy - half_h)), 0, image_h - 1);
    const Index x1 = std::clamp<Index>(static_cast<Index>(std::ceil(cx + half_w)), x0 + 1, image_w);
    const Index y1 = std::clamp<Index>(static_cast<Index>(std::ceil(cy + half_h)), y0 + 1, image_h);
    return {x0, y0, x1 - x0, y1 - y0};
}

TensorD adaptive_crop(const TensorD& image, const FaceBox& box, double area_lo, double margin) {
    require_rank3(image, "adaptive_crop");
    const FaceBox window = adaptive_crop_window(image.height(), image.width(), box, area_lo, margin);
    if (window.w == image.width() && window.h == image.height()) return image;
    TensorD out(Shape{image.dim(0), window.h, window.w});
    for (Index c = 0; c < image.dim(0); ++c) out.plane(c) = image.plane(c).block(window.y, window.x, window.h, window.w);
    return out;
}

TensorD cmce_refine(const TensorD& rgb_features, const TensorD& srm_features) {
    const TensorD corr = cosine_map(rgb_features, srm_features);
    const Eigen::RowVectorXd weight = corr.features().row(0);
    const auto fr = rgb_features.features();
    const auto fh = srm_features.features();
    TensorD out(rgb_features.shape());
    out.features() = (fr.array() + fh.array().rowwise() * weight.array()).cwiseMax(0.0) +
                     (fh.array() + fr.array().rowwise() * weight.array()).cwiseMax(0.0);
    return out;
}

TensorD lfga_attention(const TensorD& features, const Projection& g) {
    require_rank3(features, "lfga_attention");
    if (g.in_dim() != features.dim(0)) {
        throw DimensionError("lfga_attention: projection in_dim " + std::to_string(g.in_dim()) +
                             " != feature channels " + std::to_string(features.dim(0)));
    }
    const Eigen::MatrixXd projected = g.apply(features.features());
    const Eigen::MatrixXd gram = projected.transpose() * projected;
    return TensorD::from_plane(softmax_rows(gram));
}

TensorD lfga_recalibrate(const TensorD& features, const TensorD& attention, const Projection& h) {
    require_rank3(features, "lfga_recalibrate");
    const Index locations = features.height() * features.width();
    if (attention.rank() != 2 || attention.dim(0) != locations || attention.dim(1) != locations) {
        throw DimensionError("lfga_recalibrate: attention must be " + std::to_string(locations) + "x" +
                             std::to_string(locations) + ", got " + shape_string(attention.shape()));
    }
    if (h.out_dim() != features.dim(0) || h.in_dim() != features.dim(0)) {
        throw DimensionError("lfga_recalibrate: projection must map C -> C");
    }
    const Eigen::MatrixXd attended = h.apply(features.features()) * attention.plane(0);
    TensorD out(features.shape());
    out.features() = (attended + features.features()).cwiseMax(0.0);
    return out;
}

TensorD mpff_patch_consistency(const TensorD& high_res, const TensorD& low_res, const PatchGrid& grid,
                               const Projection& theta, double normalizer) {
    require_rank3(high_res, "mpff_patch_consistency");
    require_rank3(low_res, "mpff_patch_consistency");
    if (high_res.height() % low_res.height() != 0 || high_res.width() % low_res.width() != 0) {
        throw DimensionError("mpff_patch_consistency: non-integral scale ratio between " +
                             shape_string(high_res.shape()) + " and " + shape_string(low_res.shape()));
    }
    if (grid.rows != low_res.height() || grid.cols != low_res.width() || grid.map_height() != high_res.height() ||
        grid.map_width() != high_res.width()) {
        throw DimensionError("mpff_patch_consistency: patch grid does not match the scale ratio");
    }
    if (high_res.dim(0) != theta.in_dim() || low_res.dim(0) != theta.in_dim()) {
        throw DimensionError("mpff_patch_consistency: shared projection in_dim must equal both channel counts");
    }
    const double c = normalizer > 0.0 ? normalizer : std::sqrt(static_cast<double>(theta.out_dim()));

    const Eigen::MatrixXd cells = theta.apply(low_res.features());   // out x (h1*w1)
    const Eigen::MatrixXd fine = theta.apply(high_res.features());   // out x (h2*w2)
    const Index per_patch = grid.patch_h * grid.patch_w;
    TensorD out(Shape{grid.patch_count(), per_patch});
    const double bound = std::nextafter(1.0, 0.0);
    for (Index py = 0; py < grid.rows; ++py) {
        for (Index px = 0; px < grid.cols; ++px) {
            const Index k = py * grid.cols + px;
            for (Index sy = 0; sy < grid.patch_h; ++sy) {
                for (Index sx = 0; sx < grid.patch_w; ++sx) {
                    const Index loc = (py * grid.patch_h + sy) * high_res.width() + px * grid.patch_w + sx;
                    const double v = std::tanh(fine.col(loc).dot(cells.col(k)) / c);
                    out(k, sy * grid.patch_w + sx) = std::clamp(v, -bound, bound);
                }
            }
        }
    }
    return out;
}

BinaryMask sspsl_pseudo_mask(const TensorD& features, const Eigen::VectorXd& real_prototype,
                             const Eigen::VectorXd& forged_prototype) {
    require_rank3(features, "sspsl_pseudo_mask");
    if (real_prototype.size() != features.dim(0) || forged_prototype.size() != features.dim(0)) {
        throw DimensionError("sspsl_pseudo_mask: prototype length must equal feature channels");
    }
    if (real_prototype.norm() == 0.0 || forged_prototype.norm() == 0.0) {
        throw ParameterError("sspsl_pseudo_mask: prototype vectors must be nonzero");
    }
    const auto f = features.features();
    BinaryMask mask(features.height(), features.width());
    for (Index i = 0; i < f.cols(); ++i) {
        const double diff = cosine(f.col(i), real_prototype) - cosine(f.col(i), forged_prototype);
        mask.bits().data()[i] = !(diff >= 0.0);
    }
    return mask;
}

Eigen::VectorXd mean_pool_region(const TensorD& features, const FaceBox& region) {
    require_rank3(features, "mean_pool_region");
    if (region.w <= 0 || region.h <= 0 || region.x < 0 || region.y < 0 || region.x + region.w > features.width() ||
        region.y + region.h > features.height()) {
        throw ParameterError("mean_pool_region: region is empty or outside the feature map");
    }
    Eigen::VectorXd mean(features.dim(0));
    for (Index c = 0; c < features.dim(0); ++c) {
        mean[c] = features.plane(c).block(region.y, region.x, region.h, region.w).mean();
    }
    return mean;
}

BinaryMask patch_labels(const BinaryMask& mask, const PatchGrid& grid) {
    if (mask.height() != grid.map_height() || mask.width() != grid.map_width()) {
        throw DimensionError("patch_labels: grid does not tile the mask");
    }
    BinaryMask labels(grid.rows, grid.cols);
    for (Index py = 0; py < grid.rows; ++py)
        for (Index px = 0; px < grid.cols; ++px)
            labels(py, px) = mask.bits().block(py * grid.patch_h, px * grid.patch_w, grid.patch_h, grid.patch_w).any();
    return labels;
}

TrainingLosses training_losses(const Eigen::ArrayXd& patch_probs, const Eigen::ArrayXd& patch_labels,
                               double image_prob, double image_label) {
    if (patch_probs.size() != patch_labels.size() || patch_probs.size() == 0) {
        throw DimensionError("training_losses: prediction and label counts must match and be non-empty");
    }
    if (((patch_labels != 0.0) && (patch_labels != 1.0)).any() || (image_label != 0.0 && image_label != 1.0)) {
        throw ParameterError("training_losses: labels must be 0 or 1");
    }
    if (!patch_probs.allFinite() || !std::isfinite(image_prob)) {
        throw ParameterError("training_losses: probabilities must be finite");
    }
    const Eigen::ArrayXd p = patch_probs.cwiseMax(kBceEpsilon).cwiseMin(1.0 - kBceEpsilon);
    const double q = std::clamp(image_prob, kBceEpsilon, 1.0 - kBceEpsilon);

    TrainingLosses losses;
    losses.loc = -(patch_labels * p.log() + (1.0 - patch_labels) * (1.0 - p).log()).mean();
    losses.cls = -(image_label * std::log(q) + (1.0 - image_label) * std::log(1.0 - q));
    losses.total = losses.loc + losses.cls;
    return losses;
}

TensorD lfdl_forward(const TensorD& rgb, const FaceBox& face, std::uint64_t seed, double area_lo, double margin) {
    if (rgb.rank() != 3 || rgb.dim(0) != 3) throw DimensionError("lfdl_forward expects [3,H,W]");
    constexpr Index kChannels = 8;
    const FaceBox window = adaptive_crop_window(rgb.height(), rgb.width(), face, area_lo, margin);
    const TensorD crop = adaptive_crop(rgb, face, area_lo, margin);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    const auto stem = [&](Index in_channels) {
        TensorD k(Shape{kChannels, in_channels, 3, 3});
        for (Index i = 0; i < k.size(); ++i) k.data()[i] = dist(rng);
        return k;
    };
    const TensorD rgb_features = relu(conv2d(crop, stem(3)));
    const TensorD srm_features = relu(conv2d(srm_residual(crop, ValueRange::Unit), stem(3)));
    const TensorD fused = cmce_refine(rgb_features, srm_features);

    TensorD refined(fused.shape());
    std::uint64_t scale_seed = seed;
    for (const Index side : {Index{16}, Index{8}}) {
        const TensorD coarse = resize_bilinear(fused, side, side);
        const Projection g = Projection::seeded(kChannels, kChannels, ++scale_seed);
        const Projection h = Projection::seeded(kChannels, kChannels, ++scale_seed);
        const TensorD attended = lfga_recalibrate(coarse, lfga_attention(coarse, g), h);
        refined.data() += resize_bilinear(attended, crop.height(), crop.width()).data();
    }

    const Eigen::RowVectorXd saliency = refined.features().colwise().mean();
    const Eigen::RowVectorXd centered = saliency.array() - saliency.mean();
    TensorD prob = logistic(TensorD(Shape{crop.height(), crop.width()}, centered.transpose()));

    TensorD full(Shape{rgb.height(), rgb.width()});
    full.plane(0).block(window.y, window.x, window.h, window.w) = prob.plane(0);
    return full;
}

}  // namespace mfloc
