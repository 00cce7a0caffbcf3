#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mfloc/frequency.hpp"
#include "mfloc/local_stream.hpp"
#include "mfloc/metrics.hpp"
#include "mfloc/morphology.hpp"

namespace mfloc {

enum class FusionMode { Mdmf, Naive, LfdlOnly, MitlOnly };

const char* to_string(FusionMode mode);
FusionMode parse_fusion_mode(const std::string& text);

struct PipelineConfig {
    std::filesystem::path lfdl;    // LFDL masks (dir or single file)
    std::filesystem::path mitl;    // MITL masks (dir or single file)
    std::filesystem::path gt;      // ground-truth masks
    std::filesystem::path scores;  // id,score,label CSV
    std::filesystem::path out;     // fused masks are written here
    std::filesystem::path report;  // metrics JSON
    FusionMode mode = FusionMode::Mdmf;
    Index se_size = kDefaultStructuringSize;
    double threshold = kDefaultBinarizeThreshold;
    double cutoff = kDefaultFrequencyCutoff;
    double area_lo = kDefaultCropAreaFraction;
    double margin = kDefaultCropMargin;
    std::uint64_t seed = 42;
    Aggregation aggregation = Aggregation::Macro;

    /// Throws ConfigError on out-of-range parameters.
    void validate() const;

    /// Ordered key/value view, echoed into the report.
    std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Parses `key = value` lines ('#' starts a comment). Relative paths resolve
/// against base_dir.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

/// Fuses one LFDL/MITL pair according to mode.
BinaryMask fuse_masks(const BinaryMask& lfdl, const BinaryMask& mitl, FusionMode mode, const StructuringElement& se);

struct ImageError {
    std::string id;
    std::string message;
};

struct PipelineResult {
    MetricsReport report;
    std::vector<ImageError> errors;
    std::vector<std::pair<std::string, std::string>> config_echo;
};

/// Loads, binarizes, fuses and evaluates every stem present in the inputs.
///
/// Stems missing from one of the required directories, and per-image load
/// or shape failures, are recorded in `errors` and skipped. Throws IoError
/// when no stem is usable at all. Writes fused masks to config.out and the
/// report to config.report when those are set.
PipelineResult run_pipeline(const PipelineConfig& config);

struct FuseSummary {
    std::vector<std::string> written;
    std::vector<ImageError> errors;
};

/// The `fuse` subcommand: fuse paired masks and write them as PNG into out_dir.
FuseSummary fuse_directory(const std::filesystem::path& lfdl, const std::filesystem::path& mitl, FusionMode mode,
                           Index se_size, double threshold, const std::filesystem::path& out_dir);

/// The `eval` subcommand: score predicted masks against ground truth.
PipelineResult evaluate_directory(const std::filesystem::path& pred, const std::filesystem::path& gt,
                                  const std::filesystem::path& scores, double threshold,
                                  Aggregation aggregation = Aggregation::Macro);

/// Serializes a report as JSON with a fixed key order and 6-decimal numbers.
std::string report_to_json(const MetricsReport& report, const std::vector<std::pair<std::string, std::string>>& echo,
                           const std::vector<ImageError>& errors = {});
void emit_report(const PipelineResult& result, const std::filesystem::path& path);

/// Reads back a report produced by report_to_json.
MetricsReport parse_report(const std::string& json);

}  // namespace mfloc
