#include "mfloc/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>

#include "mfloc/mask_io.hpp"

namespace mfloc {

namespace fs = std::filesystem;

namespace {

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

void clear_block(BinaryMask& mask, Index cy, Index cx, Index size) {
    const Index r = size / 2;
    const Index y0 = std::max<Index>(0, cy - r);
    const Index x0 = std::max<Index>(0, cx - r);
    const Index y1 = std::min(mask.height(), cy + r + 1);
    const Index x1 = std::min(mask.width(), cx + r + 1);
    mask.bits().block(y0, x0, y1 - y0, x1 - x0).setConstant(false);
}

void set_block(BinaryMask& mask, Index y, Index x, Index size) {
    const Index y1 = std::min(mask.height(), y + size);
    const Index x1 = std::min(mask.width(), x + size);
    mask.bits().block(y, x, y1 - y, x1 - x).setConstant(true);
}

}  // namespace

void SynthParams::validate() const {
    if (lfdl_erosion_radius < 0 || mitl_dilation_radius < 0) throw ParameterError("synth radii must be >= 0");
    if (!(fragment_drop_probability >= 0.0 && fragment_drop_probability <= 1.0)) {
        throw ParameterError("fragment drop probability must lie in [0,1]");
    }
    if (spurious_blob_count < 0 || spurious_blob_size < 1 || hole_size < 1) {
        throw ParameterError("blob count must be >= 0 and blob/hole sizes >= 1");
    }
    if (!(score_noise >= 0.0 && score_noise < 0.4)) throw ParameterError("score noise must lie in [0, 0.4)");
}

SynthSample synthesize_sample(const BinaryMask& gt, const std::string& id, std::uint64_t index,
                              const SynthParams& params) {
    params.validate();
    std::mt19937_64 rng = sample_rng(params.seed, index);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Local branch: erode, then drop or perforate 8-connected fragments.
    BinaryMask lfdl = erode(gt, StructuringElement::square(2 * params.lfdl_erosion_radius + 1));
    const ComponentLabels components = label_components(lfdl);
    for (std::int32_t id_c = 1; id_c <= components.count; ++id_c) {
        const auto member = (components.labels == id_c).eval();
        if (unit(rng) < params.fragment_drop_probability) {
            lfdl.bits() = lfdl.bits() && (member == false);
            continue;
        }
        if (unit(rng) < params.fragment_drop_probability) {
            std::vector<Index> pixels;
            for (Index i = 0; i < member.size(); ++i)
                if (member.data()[i]) pixels.push_back(i);
            const Index pick = pixels[static_cast<std::size_t>(unit(rng) * static_cast<double>(pixels.size()))];
            clear_block(lfdl, pick / gt.width(), pick % gt.width(), params.hole_size);
        }
    }

    // Mesoscopic branch: dilate, then add spurious square blobs anywhere.
    BinaryMask mitl = dilate(gt, StructuringElement::square(2 * params.mitl_dilation_radius + 1));
    std::uniform_int_distribution<Index> row(0, std::max<Index>(0, gt.height() - params.spurious_blob_size));
    std::uniform_int_distribution<Index> col(0, std::max<Index>(0, gt.width() - params.spurious_blob_size));
    for (Index b = 0; b < params.spurious_blob_count; ++b) {
        const Index y = row(rng);
        const Index x = col(rng);
        set_block(mitl, y, x, params.spurious_blob_size);
    }

    const int label = gt.none() ? 0 : 1;
    const double noise = params.score_noise * (2.0 * unit(rng) - 1.0);
    const double score = std::clamp((label ? 0.9 : 0.1) + noise, 0.0, 1.0);
    return {std::move(lfdl), std::move(mitl), DetectionSample{id, score, label}};
}

std::vector<ManifestEntry> synth_corpus(const fs::path& gt_dir, const SynthParams& params, const fs::path& out_dir) {
    params.validate();
    if (!fs::is_directory(gt_dir)) throw IoError(gt_dir.string() + ": ground-truth directory does not exist");
    const auto gt_files = list_mask_files(gt_dir);
    if (gt_files.empty()) throw IoError(gt_dir.string() + ": no ground-truth masks found");

    fs::create_directories(out_dir / "lfdl");
    fs::create_directories(out_dir / "mitl");
    std::vector<ManifestEntry> manifest;
    std::vector<DetectionSample> scores;
    std::uint64_t index = 0;
    for (const auto& file : gt_files) {
        const std::string id = file.stem().string();
        const SynthSample sample = synthesize_sample(load_mask(file), id, index++, params);
        ManifestEntry entry{id, file, out_dir / "lfdl" / (id + ".png"), out_dir / "mitl" / (id + ".png"),
                            sample.detection.score, sample.detection.label};
        save_mask(sample.lfdl, entry.lfdl);
        save_mask(sample.mitl, entry.mitl);
        scores.push_back(sample.detection);
        manifest.push_back(std::move(entry));
    }
    save_scores(scores, out_dir / "scores.csv");

    std::ofstream out(out_dir / "manifest.csv");
    if (!out) throw IoError((out_dir / "manifest.csv").string() + ": cannot open for writing");
    out << "id,gt,lfdl,mitl,score,label\n";
    char buffer[64];
    for (const auto& e : manifest) {
        std::snprintf(buffer, sizeof buffer, "%.6f", e.score);
        out << e.id << ',' << e.gt.string() << ',' << e.lfdl.string() << ',' << e.mitl.string() << ',' << buffer << ','
            << e.label << '\n';
    }
    if (!out) throw IoError((out_dir / "manifest.csv").string() + ": write failed");
    return manifest;
}

std::vector<fs::path> generate_gt_masks(const fs::path& dir, Index count, std::uint64_t seed, Index height, Index width,
                                        double authentic_fraction) {
    if (count < 1) throw ParameterError("generate_gt_masks: count must be >= 1");
    fs::create_directories(dir);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<fs::path> written;
    for (Index i = 0; i < count; ++i) {
        BinaryMask mask(height, width);
        if (unit(rng) >= authentic_fraction) {
            const int ellipses = unit(rng) < 0.7 ? 1 : 2;
            for (int e = 0; e < ellipses; ++e) {
                const double ry = 6.0 + unit(rng) * static_cast<double>(height) / 6.0;
                const double rx = 6.0 + unit(rng) * static_cast<double>(width) / 6.0;
                const double cy = ry + unit(rng) * (static_cast<double>(height) - 2.0 * ry);
                const double cx = rx + unit(rng) * (static_cast<double>(width) - 2.0 * rx);
                for (Index y = 0; y < height; ++y) {
                    for (Index x = 0; x < width; ++x) {
                        const double dy = (static_cast<double>(y) - cy) / ry;
                        const double dx = (static_cast<double>(x) - cx) / rx;
                        if (dy * dy + dx * dx <= 1.0) mask(y, x) = true;
                    }
                }
            }
        }
        char name[32];
        std::snprintf(name, sizeof name, "img_%03lld.png", static_cast<long long>(i));
        save_mask(mask, dir / name);
        written.push_back(dir / name);
    }
    return written;
}

}  // namespace mfloc
