#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mfloc/morphology.hpp"

namespace mfloc {

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;

    std::int64_t total() const { return tp + fp + fn + tn; }

    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
};

struct LocalizationScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double iou = 0.0;
};

struct DetectionSample {
    std::string id;
    double score = 0.0;
    int label = 0;
};

enum class Aggregation { Macro, Micro };

const char* to_string(Aggregation mode);

struct ImageMetrics {
    std::string id;
    LocalizationScores scores;
    ConfusionCounts counts;
};

struct AggregateMetrics {
    double auc = 0.0;
    double f1 = 0.0;
    double iou = 0.0;
    double final_score = 0.0;
};

struct MetricsReport {
    std::vector<ImageMetrics> per_image;
    AggregateMetrics aggregate;
    Aggregation mode = Aggregation::Macro;
};

ConfusionCounts confusion_counts(const BinaryMask& pred, const BinaryMask& gt);

/// Precision, recall, F1 and IoU from pixel counts.
///
/// When tp+fp+fn == 0 (both masks empty) every score is 1. Otherwise an
/// undefined ratio (empty prediction, or empty ground truth) is 0, so
/// f1 == 2*iou/(1+iou) holds for every count triple.
LocalizationScores prf_iou(const ConfusionCounts& c);

/// Detection AUC as the Mann-Whitney statistic with mid-rank tie handling.
/// Throws EvaluationError unless both classes are present.
double roc_auc(std::span<const DetectionSample> samples);

/// Mean of AUC, F1 and IoU; each must lie in [0,1].
double final_score(double auc, double f1, double iou);

/// Aggregates per-image localization and detection AUC into a report.
/// Macro mode averages per-image F1/IoU; micro mode pools the counts.
MetricsReport build_report(std::vector<ImageMetrics> per_image, double auc, Aggregation mode = Aggregation::Macro);

}  // namespace mfloc
