#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "mfloc/morphology.hpp"
#include "mfloc/tensor.hpp"

namespace mfloc {

/// Affine map on channel vectors: y = W x + b.
class Projection {
public:
    using Matrix = Eigen::MatrixXd;

    explicit Projection(Matrix weights);
    Projection(Matrix weights, Eigen::VectorXd bias);

    static Projection identity(Index dim);
    /// Weights drawn from uniform(-0.1, 0.1) with a fixed seed, zero bias.
    static Projection seeded(Index out_dim, Index in_dim, std::uint64_t seed);

    Index in_dim() const { return weights_.cols(); }
    Index out_dim() const { return weights_.rows(); }
    const Matrix& weights() const { return weights_; }
    const Eigen::VectorXd& bias() const { return bias_; }

    /// Applies the map to each column of a (in_dim x N) matrix.
    Matrix apply(const Eigen::Ref<const Matrix>& columns) const;

private:
    Matrix weights_;
    Eigen::VectorXd bias_;
};

/// Non-overlapping tiling of a rows x cols map into patch_h x patch_w cells.
struct PatchGrid {
    Index patch_h = 1;
    Index patch_w = 1;
    Index rows = 1;  // patches along y
    Index cols = 1;  // patches along x

    /// Throws DimensionError unless the map extents are multiples of the patch extents.
    static PatchGrid tile(Index map_h, Index map_w, Index patch_h, Index patch_w);

    Index map_height() const { return rows * patch_h; }
    Index map_width() const { return cols * patch_w; }
    Index patch_count() const { return rows * cols; }
};

/// Replicate-pads the planes of t on the bottom/right to the next multiple of
/// (patch_h, patch_w), which PatchGrid::tile requires.
TensorD replicate_pad_to_multiple(const TensorD& t, Index patch_h, Index patch_w);

struct FaceBox {
    Index x = 0;
    Index y = 0;
    Index w = 0;
    Index h = 0;
};

inline constexpr double kDefaultCropAreaFraction = 0.04;
inline constexpr double kDefaultCropMargin = 1.3;

/// Crop rectangle chosen by adaptive_crop; the whole image when no crop applies.
FaceBox adaptive_crop_window(Index image_h, Index image_w, const FaceBox& box, double area_lo = kDefaultCropAreaFraction,
                             double margin = kDefaultCropMargin);

/// Crops the face box grown by `margin` about its center (clipped to the
/// image) when the box covers at least area_lo of the image; otherwise
/// returns the image unchanged.
TensorD adaptive_crop(const TensorD& image, const FaceBox& box, double area_lo = kDefaultCropAreaFraction,
                      double margin = kDefaultCropMargin);

/// Cross-modal consistency enhancement:
/// ReLU(F_r + Corr * F_h) + ReLU(F_h + Corr * F_r), Corr the per-location cosine.
TensorD cmce_refine(const TensorD& rgb_features, const TensorD& srm_features);

/// (HW x HW) row-softmax of the Gram matrix of projected location features.
TensorD lfga_attention(const TensorD& features, const Projection& g);

/// ReLU(reshape(h(F_c) * Att) + F_c), locations flattened row-major.
TensorD lfga_recalibrate(const TensorD& features, const TensorD& attention, const Projection& h);

/// Intra-patch consistency between high-resolution features and the
/// low-resolution cell each patch sits under.
///
/// Returns a [patch_count, patch_h*patch_w] tensor: row k is low-resolution
/// cell k (row-major), column j the sub-location within its patch (row-major),
/// value tanh(<theta(p_k^j), theta(f_l^k)> / c). c <= 0 selects the default
/// sqrt(theta.out_dim()).
TensorD mpff_patch_consistency(const TensorD& high_res, const TensorD& low_res, const PatchGrid& grid,
                               const Projection& theta, double normalizer = 0.0);

/// Pseudo-mask label per location: 0 when cos(f, f_real) >= cos(f, f_forged), else 1.
BinaryMask sspsl_pseudo_mask(const TensorD& features, const Eigen::VectorXd& real_prototype,
                             const Eigen::VectorXd& forged_prototype);

/// Mean feature vector over a rectangle [y, y+h) x [x, x+w), used to form the
/// real/forged prototypes from a caller-designated region.
Eigen::VectorXd mean_pool_region(const TensorD& features, const FaceBox& region);

/// Per-patch label: 1 iff any pixel of the patch is set. Result is rows x cols.
BinaryMask patch_labels(const BinaryMask& mask, const PatchGrid& grid);

inline constexpr double kBceEpsilon = 1e-7;

struct TrainingLosses {
    double loc = 0.0;
    double cls = 0.0;
    double total = 0.0;
};

/// Binary cross-entropy objectives; probabilities are clamped to [eps, 1-eps].
/// loc is the mean BCE over patches, cls the image-level BCE, total their sum.
TrainingLosses training_losses(const Eigen::ArrayXd& patch_probs, const Eigen::ArrayXd& patch_labels,
                               double image_prob, double image_label);

/// Deterministic stand-in for the two-stream local branch on an RGB image
/// [3,H,W] with values in [0,1]: adaptive crop, seeded RGB and SRM feature
/// stubs, CMCE, then LFGA at a 16x16 and an 8x8 scale. Returns an [H,W]
/// probability map, zero outside the crop window.
TensorD lfdl_forward(const TensorD& rgb, const FaceBox& face, std::uint64_t seed,
                     double area_lo = kDefaultCropAreaFraction, double margin = kDefaultCropMargin);

}  // namespace mfloc
