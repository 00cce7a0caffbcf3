#pragma once

#include <Eigen/Dense>

#include "mfloc/tensor.hpp"

namespace mfloc {

/// Low/high frequency decomposition of a [C,H,W] image. high + low == source.
struct FrequencySplit {
    TensorD high;
    TensorD low;
    double cutoff = 0.25;
};

inline constexpr double kDefaultFrequencyCutoff = 0.25;

/// Orthonormal DCT-II basis of size n (rows are frequencies).
Eigen::MatrixXd dct_basis(Index n);

/// Orthonormal 2-D DCT-II of a single [H,W] plane, and its inverse (DCT-III).
TensorD dct2(const TensorD& channel);
TensorD idct2(const TensorD& coeffs);

/// Coefficient (u,v) is low-frequency iff sqrt((u/H)^2 + (v/W)^2) <= cutoff * sqrt(2).
Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> low_frequency_mask(Index h, Index w,
                                                                                        double cutoff);

/// Full-image DCT split of every channel into complementary low/high bands.
FrequencySplit frequency_split(const TensorD& image, double cutoff = kDefaultFrequencyCutoff);

/// Channel concatenation [x; comp], e.g. I_h = concat(x, x_h).
TensorD freq_concat(const TensorD& image, const TensorD& component);

enum class ValueRange { Unit, Byte };

// Residual truncation threshold.
inline constexpr double kSrmTruncation = 2.0;

/// The three fixed high-pass kernels used for noise residuals, as a [3,1,5,5]
/// tensor already divided by their normalizers:
///   0: first-order horizontal difference        (normalizer 1)
///   1: 3x3 second-order "square" kernel          (normalizer 4)
///   2: 5x5 KV kernel                              (normalizer 12)
TensorD srm_kernels();

/// Grayscale (BT.601 luma) -> three high-pass residual maps, clamped to
/// [-2, 2]. Unit-range input is rescaled to the 0..255 scale first so the
/// truncation threshold means the same thing in both conventions.
TensorD srm_residual(const TensorD& rgb, ValueRange range = ValueRange::Byte);

}  // namespace mfloc
