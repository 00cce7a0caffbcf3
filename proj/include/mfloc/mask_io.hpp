#pragma once

#include <filesystem>
#include <vector>

#include "mfloc/metrics.hpp"
#include "mfloc/morphology.hpp"
#include "mfloc/tensor.hpp"

namespace mfloc {

/// Reads an 8-bit single-channel PNG or PGM (P2/P5) as an [H,W] map of v/255.
/// Multi-channel files and bit depths other than 8 are rejected with IoError.
TensorD load_probability_map(const std::filesystem::path& path);

/// load_probability_map followed by binarize(threshold).
BinaryMask load_mask(const std::filesystem::path& path, double threshold = kDefaultBinarizeThreshold);

/// Writes 0/255 pixels. The format follows the extension: .pgm writes binary
/// PGM, anything else PNG.
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

/// Writes an [H,W] map in [0,1] as 8-bit grayscale (rounded v*255).
void save_probability_map(const TensorD& map, const std::filesystem::path& path);

/// True for the mask file extensions the loaders accept.
bool is_mask_file(const std::filesystem::path& path);

/// Mask files directly inside dir (or the file itself), sorted by path.
std::vector<std::filesystem::path> list_mask_files(const std::filesystem::path& dir_or_file);

/// Detection scores CSV with the header `id,score,label`.
std::vector<DetectionSample> load_scores(const std::filesystem::path& path);
void save_scores(const std::vector<DetectionSample>& samples, const std::filesystem::path& path);

}  // namespace mfloc
