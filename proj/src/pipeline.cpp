#include "mfloc/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mfloc/mask_io.hpp"

namespace mfloc {

namespace fs = std::filesystem;

const char* to_string(FusionMode mode) {
    switch (mode) {
        case FusionMode::Mdmf: return "mdmf";
        case FusionMode::Naive: return "naive";
        case FusionMode::LfdlOnly: return "lfdl-only";
        case FusionMode::MitlOnly: return "mitl-only";
    }
    return "mdmf";
}

FusionMode parse_fusion_mode(const std::string& text) {
    if (text == "mdmf") return FusionMode::Mdmf;
    if (text == "naive") return FusionMode::Naive;
    if (text == "lfdl-only") return FusionMode::LfdlOnly;
    if (text == "mitl-only") return FusionMode::MitlOnly;
    throw ConfigError("unknown fusion mode '" + text + "' (expected mdmf|naive|lfdl-only|mitl-only)");
}

namespace {

std::string format_number(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.6f", v);
    return buffer;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
    }
}

long long parse_integer(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
    }
}

bool needs_lfdl(FusionMode mode) { return mode != FusionMode::MitlOnly; }
bool needs_mitl(FusionMode mode) { return mode != FusionMode::LfdlOnly; }

// stem -> file for each mask source. A single file keeps its own stem.
std::map<std::string, fs::path> index_by_stem(const fs::path& source) {
    std::map<std::string, fs::path> out;
    for (const auto& file : list_mask_files(source)) out.emplace(file.stem().string(), file);
    return out;
}

struct Pairing {
    std::vector<std::string> usable;
    std::vector<ImageError> missing;
};

Pairing pair_stems(const std::vector<std::pair<std::string, const std::map<std::string, fs::path>*>>& sources) {
    std::set<std::string> all;
    for (const auto& [name, index] : sources)
        for (const auto& [stem, path] : *index) all.insert(stem);
    Pairing pairing;
    for (const auto& stem : all) {
        std::string absent;
        for (const auto& [name, index] : sources) {
            if (!index->count(stem)) absent += (absent.empty() ? "" : ", ") + name;
        }
        if (absent.empty()) {
            pairing.usable.push_back(stem);
        } else {
            pairing.missing.push_back({stem, "missing counterpart in: " + absent});
        }
    }
    return pairing;
}

// Two single files pair with each other regardless of their names.
std::map<std::string, fs::path> align_single_file(const fs::path& file, const std::map<std::string, fs::path>& other,
                                                  const fs::path& other_source) {
    if (fs::is_regular_file(file) && fs::is_regular_file(other_source) && other.size() == 1) {
        return {{other.begin()->first, file}};
    }
    return index_by_stem(file);
}

}  // namespace

void PipelineConfig::validate() const {
    if (se_size < 1 || se_size % 2 == 0) throw ConfigError("se_size must be odd and >= 1");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0,1)");
    if (!(cutoff > 0.0 && cutoff < 1.0)) throw ConfigError("cutoff must lie in (0,1)");
    if (!(area_lo > 0.0 && area_lo < 1.0)) throw ConfigError("area_lo must lie in (0,1)");
    if (!(margin >= 1.0)) throw ConfigError("margin must be >= 1");
    if (needs_lfdl(mode) && lfdl.empty()) throw ConfigError("config is missing 'lfdl'");
    if (needs_mitl(mode) && mitl.empty()) throw ConfigError("config is missing 'mitl'");
    if (gt.empty()) throw ConfigError("config is missing 'gt'");
    if (scores.empty()) throw ConfigError("config is missing 'scores'");
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::echo() const {
    return {
        {"lfdl", lfdl.string()},
        {"mitl", mitl.string()},
        {"gt", gt.string()},
        {"scores", scores.string()},
        {"mode", to_string(mode)},
        {"se_size", std::to_string(se_size)},
        {"threshold", format_number(threshold)},
        {"cutoff", format_number(cutoff)},
        {"area_lo", format_number(area_lo)},
        {"margin", format_number(margin)},
        {"seed", std::to_string(seed)},
        {"aggregation", to_string(aggregation)},
    };
}

PipelineConfig parse_config(const std::string& text, const fs::path& base_dir) {
    PipelineConfig config;
    const auto resolve = [&](const std::string& value) {
        fs::path p(value);
        return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "lfdl") {
            config.lfdl = resolve(value);
        } else if (key == "mitl") {
            config.mitl = resolve(value);
        } else if (key == "gt") {
            config.gt = resolve(value);
        } else if (key == "scores") {
            config.scores = resolve(value);
        } else if (key == "out") {
            config.out = resolve(value);
        } else if (key == "report") {
            config.report = resolve(value);
        } else if (key == "mode") {
            config.mode = parse_fusion_mode(value);
        } else if (key == "se_size" || key == "se") {
            config.se_size = parse_integer(key, value);
        } else if (key == "threshold") {
            config.threshold = parse_double(key, value);
        } else if (key == "cutoff") {
            config.cutoff = parse_double(key, value);
        } else if (key == "area_lo") {
            config.area_lo = parse_double(key, value);
        } else if (key == "margin") {
            config.margin = parse_double(key, value);
        } else if (key == "seed") {
            const long long seed = parse_integer(key, value);
            if (seed < 0) throw ConfigError("seed must be non-negative");
            config.seed = static_cast<std::uint64_t>(seed);
        } else if (key == "aggregation") {
            if (value == "macro") {
                config.aggregation = Aggregation::Macro;
            } else if (value == "micro") {
                config.aggregation = Aggregation::Micro;
            } else {
                throw ConfigError("aggregation must be macro or micro");
            }
        } else {
            throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    config.validate();
    return config;
}

PipelineConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string() + ": cannot open config file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.parent_path());
}

BinaryMask fuse_masks(const BinaryMask& lfdl, const BinaryMask& mitl, FusionMode mode, const StructuringElement& se) {
    switch (mode) {
        case FusionMode::Mdmf: return mdmf_fuse(lfdl, mitl, se);
        case FusionMode::Naive: return naive_fuse(lfdl, mitl);
        case FusionMode::LfdlOnly: return lfdl;
        case FusionMode::MitlOnly: return mitl;
    }
    return mdmf_fuse(lfdl, mitl, se);
}

PipelineResult run_pipeline(const PipelineConfig& config) {
    config.validate();
    for (const auto& p : {config.gt, config.scores}) {
        if (!fs::exists(p)) throw IoError(p.string() + ": path does not exist");
    }
    const auto gt_index = index_by_stem(config.gt);
    std::map<std::string, fs::path> lfdl_index;
    std::map<std::string, fs::path> mitl_index;
    std::vector<std::pair<std::string, const std::map<std::string, fs::path>*>> sources;
    if (needs_lfdl(config.mode)) {
        lfdl_index = align_single_file(config.lfdl, gt_index, config.gt);
        sources.emplace_back("lfdl", &lfdl_index);
    }
    if (needs_mitl(config.mode)) {
        mitl_index = align_single_file(config.mitl, gt_index, config.gt);
        sources.emplace_back("mitl", &mitl_index);
    }
    sources.emplace_back("gt", &gt_index);

    Pairing pairing = pair_stems(sources);
    if (pairing.usable.empty()) throw IoError("no image stem is present in every input source");

    const StructuringElement se = StructuringElement::square(config.se_size);
    if (!config.out.empty()) fs::create_directories(config.out);

    PipelineResult result;
    result.errors = std::move(pairing.missing);
    std::vector<ImageMetrics> per_image;
    for (const auto& stem : pairing.usable) {
        try {
            const BinaryMask gt = load_mask(gt_index.at(stem), config.threshold);
            const BinaryMask lfdl = needs_lfdl(config.mode) ? load_mask(lfdl_index.at(stem), config.threshold) : gt;
            const BinaryMask mitl = needs_mitl(config.mode) ? load_mask(mitl_index.at(stem), config.threshold) : gt;
            const BinaryMask fused = fuse_masks(lfdl, mitl, config.mode, se);
            const ConfusionCounts counts = confusion_counts(fused, gt);
            if (!config.out.empty()) save_mask(fused, config.out / (stem + ".png"));
            per_image.push_back({stem, prf_iou(counts), counts});
        } catch (const std::exception& e) {
            result.errors.push_back({stem, e.what()});
        }
    }
    std::sort(result.errors.begin(), result.errors.end(),
              [](const ImageError& a, const ImageError& b) { return a.id < b.id; });

    const auto samples = load_scores(config.scores);
    const double auc = roc_auc(samples);
    result.report = build_report(std::move(per_image), auc, config.aggregation);
    result.config_echo = config.echo();
    if (!config.report.empty()) emit_report(result, config.report);
    return result;
}

FuseSummary fuse_directory(const fs::path& lfdl, const fs::path& mitl, FusionMode mode, Index se_size, double threshold,
                           const fs::path& out_dir) {
    const StructuringElement se = StructuringElement::square(se_size);
    const auto mitl_index = index_by_stem(mitl);
    const auto lfdl_index = align_single_file(lfdl, mitl_index, mitl);
    Pairing pairing = pair_stems({{"lfdl", &lfdl_index}, {"mitl", &mitl_index}});
    if (pairing.usable.empty()) throw IoError("no image stem is present in both --lfdl and --mitl");

    fs::create_directories(out_dir);
    FuseSummary summary;
    summary.errors = std::move(pairing.missing);
    for (const auto& stem : pairing.usable) {
        try {
            const BinaryMask fused = fuse_masks(load_mask(lfdl_index.at(stem), threshold),
                                                load_mask(mitl_index.at(stem), threshold), mode, se);
            const fs::path target = out_dir / (stem + ".png");
            save_mask(fused, target);
            summary.written.push_back(target.string());
        } catch (const std::exception& e) {
            summary.errors.push_back({stem, e.what()});
        }
    }
    return summary;
}

PipelineResult evaluate_directory(const fs::path& pred, const fs::path& gt, const fs::path& scores, double threshold,
                                  Aggregation aggregation) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0,1)");
    const auto gt_index = index_by_stem(gt);
    const auto pred_index = align_single_file(pred, gt_index, gt);
    Pairing pairing = pair_stems({{"pred", &pred_index}, {"gt", &gt_index}});
    if (pairing.usable.empty()) throw IoError("no image stem is present in both --pred and --gt");

    PipelineResult result;
    result.errors = std::move(pairing.missing);
    std::vector<ImageMetrics> per_image;
    for (const auto& stem : pairing.usable) {
        try {
            const ConfusionCounts counts =
                confusion_counts(load_mask(pred_index.at(stem), threshold), load_mask(gt_index.at(stem), threshold));
            per_image.push_back({stem, prf_iou(counts), counts});
        } catch (const std::exception& e) {
            result.errors.push_back({stem, e.what()});
        }
    }
    const double auc = roc_auc(load_scores(scores));
    result.report = build_report(std::move(per_image), auc, aggregation);
    result.config_echo = {{"pred", pred.string()},
                          {"gt", gt.string()},
                          {"scores", scores.string()},
                          {"threshold", format_number(threshold)},
                          {"aggregation", to_string(aggregation)}};
    return result;
}

std::string report_to_json(const MetricsReport& report, const std::vector<std::pair<std::string, std::string>>& echo,
                           const std::vector<ImageError>& errors) {
    const auto quote = [](const std::string& s) { return nlohmann::json(s).dump(); };
    std::ostringstream os;
    os << "{\n  \"per_image\": [";
    for (std::size_t i = 0; i < report.per_image.size(); ++i) {
        const auto& m = report.per_image[i];
        os << (i ? ",\n" : "\n") << "    {\"id\": " << quote(m.id)
           << ", \"precision\": " << format_number(m.scores.precision)
           << ", \"recall\": " << format_number(m.scores.recall) << ", \"f1\": " << format_number(m.scores.f1)
           << ", \"iou\": " << format_number(m.scores.iou) << "}";
    }
    os << (report.per_image.empty() ? "],\n" : "\n  ],\n");
    const auto& a = report.aggregate;
    os << "  \"aggregate\": {\"auc\": " << format_number(a.auc) << ", \"f1\": " << format_number(a.f1)
       << ", \"iou\": " << format_number(a.iou) << ", \"final_score\": " << format_number(a.final_score) << "},\n";
    os << "  \"config_echo\": {";
    for (std::size_t i = 0; i < echo.size(); ++i) {
        os << (i ? ", " : "") << quote(echo[i].first) << ": " << quote(echo[i].second);
    }
    os << "},\n  \"errors\": [";
    for (std::size_t i = 0; i < errors.size(); ++i) {
        os << (i ? ", " : "") << "{\"id\": " << quote(errors[i].id) << ", \"message\": " << quote(errors[i].message)
           << "}";
    }
    os << "]\n}\n";
    return os.str();
}

void emit_report(const PipelineResult& result, const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path.string() + ": cannot open report for writing");
    out << report_to_json(result.report, result.config_echo, result.errors);
    if (!out) throw IoError(path.string() + ": report write failed");
}

MetricsReport parse_report(const std::string& json) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed report JSON: ") + e.what());
    }
    MetricsReport report;
    try {
        for (const auto& item : doc.at("per_image")) {
            ImageMetrics m;
            m.id = item.at("id").get<std::string>();
            m.scores = {item.at("precision").get<double>(), item.at("recall").get<double>(),
                        item.at("f1").get<double>(), item.at("iou").get<double>()};
            report.per_image.push_back(std::move(m));
        }
        const auto& a = doc.at("aggregate");
        report.aggregate = {a.at("auc").get<double>(), a.at("f1").get<double>(), a.at("iou").get<double>(),
                            a.at("final_score").get<double>()};
        if (doc.contains("config_echo") && doc["config_echo"].contains("aggregation")) {
            report.mode = doc["config_echo"]["aggregation"] == "micro" ? Aggregation::Micro : Aggregation::Macro;
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("report JSON is missing fields: ") + e.what());
    }
    return report;
}

}  // namespace mfloc
