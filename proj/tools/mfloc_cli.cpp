// mfloc: mask fusion and localization metrics from the command line.
//
//   mfloc fuse --lfdl <dir|file> --mitl <dir|file> --mode mdmf|naive --se 5 --threshold 0.5 --out <dir>
//   mfloc eval --pred <dir> --gt <dir> --scores <csv> --report <json>
//   mfloc pipeline --config <file>
//   mfloc synth --gt <dir> --seed 42 --out <dir>
//
// Exit codes: 0 success, 1 usage/config error, 2 I/O error, 3 evaluation error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "mfloc/pipeline.hpp"
#include "mfloc/synth.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kEvaluation = 3 };

void print_errors(const std::vector<mfloc::ImageError>& errors) {
    for (const auto& e : errors) std::cerr << "warning: " << e.id << ": " << e.message << '\n';
}

void print_summary(const mfloc::MetricsReport& report) {
    std::printf("images=%zu auc=%.6f f1=%.6f iou=%.6f final_score=%.6f (%s)\n", report.per_image.size(),
                report.aggregate.auc, report.aggregate.f1, report.aggregate.iou, report.aggregate.final_score,
                mfloc::to_string(report.mode));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Morphology-driven fusion of forgery localization masks"};
    app.require_subcommand(1);

    std::string lfdl, mitl, out, mode = "mdmf";
    int se = static_cast<int>(mfloc::kDefaultStructuringSize);
    double threshold = mfloc::kDefaultBinarizeThreshold;
    auto* fuse = app.add_subcommand("fuse", "Fuse LFDL and MITL masks");
    fuse->add_option("--lfdl", lfdl, "LFDL mask directory or file")->required();
    fuse->add_option("--mitl", mitl, "MITL mask directory or file")->required();
    fuse->add_option("--mode", mode, "Fusion rule")
        ->check(CLI::IsMember({"mdmf", "naive", "lfdl-only", "mitl-only"}));
    fuse->add_option("--se", se, "Square structuring element size (odd)");
    fuse->add_option("--threshold", threshold, "Binarization threshold in (0,1)");
    fuse->add_option("--out", out, "Output directory")->required();

    std::string pred, gt, scores, report_path, aggregation = "macro";
    auto* eval = app.add_subcommand("eval", "Score predicted masks against ground truth");
    eval->add_option("--pred", pred, "Predicted mask directory")->required();
    eval->add_option("--gt", gt, "Ground-truth mask directory")->required();
    eval->add_option("--scores", scores, "Detection scores CSV (id,score,label)")->required();
    eval->add_option("--report", report_path, "Report JSON path")->required();
    eval->add_option("--threshold", threshold, "Binarization threshold in (0,1)");
    eval->add_option("--aggregation", aggregation, "F1/IoU aggregation")->check(CLI::IsMember({"macro", "micro"}));

    std::string config_path;
    auto* pipeline = app.add_subcommand("pipeline", "Run fusion and evaluation from a key=value config");
    pipeline->add_option("--config", config_path, "Config file")->required();

    std::string synth_gt, synth_out;
    mfloc::SynthParams params;
    long long generate = 0;
    auto* synth = app.add_subcommand("synth", "Build a synthetic ablation corpus from ground-truth masks");
    synth->add_option("--gt", synth_gt, "Ground-truth mask directory")->required();
    synth->add_option("--seed", params.seed, "Random seed");
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--generate-gt", generate, "First write this many synthetic ground-truth masks into --gt");
    synth->add_option("--lfdl-erosion", params.lfdl_erosion_radius, "LFDL erosion radius");
    synth->add_option("--drop", params.fragment_drop_probability, "Fragment drop probability");
    synth->add_option("--mitl-dilation", params.mitl_dilation_radius, "MITL dilation radius");
    synth->add_option("--blobs", params.spurious_blob_count, "Spurious blob count");
    synth->add_option("--blob-size", params.spurious_blob_size, "Spurious blob side length");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*fuse) {
            const auto summary = mfloc::fuse_directory(lfdl, mitl, mfloc::parse_fusion_mode(mode), se, threshold, out);
            print_errors(summary.errors);
            std::printf("fused %zu mask(s) into %s\n", summary.written.size(), out.c_str());
        } else if (*eval) {
            const auto result = mfloc::evaluate_directory(
                pred, gt, scores, threshold, aggregation == "micro" ? mfloc::Aggregation::Micro : mfloc::Aggregation::Macro);
            print_errors(result.errors);
            mfloc::emit_report(result, report_path);
            print_summary(result.report);
        } else if (*pipeline) {
            const auto config = mfloc::load_config(config_path);
            const auto result = mfloc::run_pipeline(config);
            print_errors(result.errors);
            print_summary(result.report);
        } else if (*synth) {
            if (generate > 0) mfloc::generate_gt_masks(synth_gt, generate, params.seed);
            const auto manifest = mfloc::synth_corpus(synth_gt, params, synth_out);
            std::printf("wrote %zu synthetic triples to %s\n", manifest.size(), synth_out.c_str());
        }
    } catch (const mfloc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const mfloc::ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << '\n';
        return kUsage;
    } catch (const mfloc::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const mfloc::EvaluationError& e) {
        std::cerr << "evaluation error: " << e.what() << '\n';
        return kEvaluation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kEvaluation;
    }
    return kOk;
}
