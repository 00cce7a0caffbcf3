#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mfloc/metrics.hpp"
#include "mfloc/morphology.hpp"

namespace mfloc {

/// Degradations that imitate the two branches' failure modes: the local
/// branch under-covers (eroded, fragments dropped, holes), the mesoscopic
/// branch over-extends (dilated, spurious blobs).
struct SynthParams {
    std::uint64_t seed = 42;
    Index lfdl_erosion_radius = 2;
    double fragment_drop_probability = 0.3;  // also the per-fragment hole probability
    Index hole_size = 3;
    Index mitl_dilation_radius = 3;
    Index spurious_blob_count = 2;
    Index spurious_blob_size = 5;
    double score_noise = 0.05;

    void validate() const;
};

struct SynthSample {
    BinaryMask lfdl;
    BinaryMask mitl;
    DetectionSample detection;
};

/// Degrades one ground-truth mask. Deterministic in (params.seed, index).
SynthSample synthesize_sample(const BinaryMask& gt, const std::string& id, std::uint64_t index,
                              const SynthParams& params);

struct ManifestEntry {
    std::string id;
    std::filesystem::path gt;
    std::filesystem::path lfdl;
    std::filesystem::path mitl;
    double score = 0.0;
    int label = 0;
};

/// Writes <out>/lfdl/<id>.png, <out>/mitl/<id>.png, <out>/scores.csv and
/// <out>/manifest.csv for every mask in gt_dir. Throws IoError if gt_dir has
/// no masks.
std::vector<ManifestEntry> synth_corpus(const std::filesystem::path& gt_dir, const SynthParams& params,
                                        const std::filesystem::path& out_dir);

/// Populates dir with `count` seeded ground-truth masks: filled ellipses on a
/// height x width canvas, with roughly authentic_fraction of them empty.
std::vector<std::filesystem::path> generate_gt_masks(const std::filesystem::path& dir, Index count, std::uint64_t seed,
                                                     Index height = 64, Index width = 64,
                                                     double authentic_fraction = 0.2);

}  // namespace mfloc
