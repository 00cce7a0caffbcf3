#include "mfloc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mfloc {

const char* to_string(Aggregation mode) { return mode == Aggregation::Macro ? "macro" : "micro"; }

ConfusionCounts confusion_counts(const BinaryMask& pred, const BinaryMask& gt) {
    if (pred.height() != gt.height() || pred.width() != gt.width()) {
        throw DimensionError("confusion_counts: prediction " + std::to_string(pred.height()) + "x" +
                             std::to_string(pred.width()) + " vs ground truth " + std::to_string(gt.height()) + "x" +
                             std::to_string(gt.width()));
    }
    const auto& p = pred.bits();
    const auto& g = gt.bits();
    ConfusionCounts c;
    c.tp = (p && g).count();
    c.fp = (p && (g == false)).count();
    c.fn = ((p == false) && g).count();
    c.tn = pred.area() - c.tp - c.fp - c.fn;
    return c;
}

LocalizationScores prf_iou(const ConfusionCounts& c) {
    if (c.tp + c.fp + c.fn == 0) return {1.0, 1.0, 1.0, 1.0};
    const auto ratio = [](std::int64_t num, std::int64_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    LocalizationScores s;
    s.precision = ratio(c.tp, c.tp + c.fp);
    s.recall = ratio(c.tp, c.tp + c.fn);
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    s.iou = ratio(c.tp, c.tp + c.fp + c.fn);
    return s;
}

double roc_auc(std::span<const DetectionSample> samples) {
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (const auto& s : samples) {
        if (!std::isfinite(s.score)) throw EvaluationError("roc_auc: non-finite score for '" + s.id + "'");
        if (s.label != 0 && s.label != 1) throw EvaluationError("roc_auc: label must be 0 or 1 for '" + s.id + "'");
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return samples[a].score < samples[b].score; });

    // Sum of positive mid-ranks (1-based); a tied run spanning ranks i+1..j gets (i+1+j)/2.
    double positive_rank_sum = 0.0;
    std::int64_t positives = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && samples[order[j]].score == samples[order[i]].score) ++j;
        const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (samples[order[k]].label == 1) {
                positive_rank_sum += mid_rank;
                ++positives;
            }
        }
        i = j;
    }
    const std::int64_t negatives = static_cast<std::int64_t>(samples.size()) - positives;
    if (positives == 0 || negatives == 0) {
        throw EvaluationError("roc_auc: need at least one positive and one negative sample");
    }
    const double np = static_cast<double>(positives);
    const double u = positive_rank_sum - np * (np + 1.0) / 2.0;
    return u / (np * static_cast<double>(negatives));
}

double final_score(double auc, double f1, double iou) {
    for (double v : {auc, f1, iou}) {
        if (!(v >= 0.0 && v <= 1.0)) throw ParameterError("final_score inputs must lie in [0,1]");
    }
    return (auc + iou + f1) / 3.0;
}

MetricsReport build_report(std::vector<ImageMetrics> per_image, double auc, Aggregation mode) {
    MetricsReport report;
    report.mode = mode;
    report.per_image = std::move(per_image);
    double f1 = 0.0;
    double iou = 0.0;
    if (!report.per_image.empty()) {
        if (mode == Aggregation::Macro) {
            for (const auto& m : report.per_image) {
                f1 += m.scores.f1;
                iou += m.scores.iou;
            }
            f1 /= static_cast<double>(report.per_image.size());
            iou /= static_cast<double>(report.per_image.size());
        } else {
            ConfusionCounts pooled;
            for (const auto& m : report.per_image) pooled += m.counts;
            const auto s = prf_iou(pooled);
            f1 = s.f1;
            iou = s.iou;
        }
    }
    report.aggregate = {auc, f1, iou, final_score(auc, f1, iou)};
    return report;
}

}  // namespace mfloc
