#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mfloc/metrics.hpp"
#include "oracles.hpp"

using namespace mfloc;

TEST(ConfusionCounts, PerfectAndWorstCases) {
    std::mt19937_64 rng(41);
    const BinaryMask gt = oracle::random_mask(8, 8, 0.4, rng);
    const ConfusionCounts same = confusion_counts(gt, gt);
    EXPECT_EQ(same.tp, gt.count());
    EXPECT_EQ(same.tn, 64 - gt.count());
    EXPECT_EQ(same.fp, 0);
    EXPECT_EQ(same.fn, 0);

    const ConfusionCounts all_fp = confusion_counts(BinaryMask::full(8, 8), BinaryMask(8, 8));
    EXPECT_EQ(all_fp.fp, 64);
    EXPECT_EQ(all_fp.tp + all_fp.fn + all_fp.tn, 0);
}

TEST(ConfusionCounts, MatchesPixelTally) {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const BinaryMask p = oracle::random_mask(8, 8, 0.5, rng);
        const BinaryMask g = oracle::random_mask(8, 8, 0.5, rng);
        ConfusionCounts expected;
        for (Index y = 0; y < 8; ++y)
            for (Index x = 0; x < 8; ++x) {
                if (p(y, x) && g(y, x)) ++expected.tp;
                else if (p(y, x)) ++expected.fp;
                else if (g(y, x)) ++expected.fn;
                else ++expected.tn;
            }
        const ConfusionCounts c = confusion_counts(p, g);
        EXPECT_EQ(c.tp, expected.tp);
        EXPECT_EQ(c.fp, expected.fp);
        EXPECT_EQ(c.fn, expected.fn);
        EXPECT_EQ(c.tn, expected.tn);
        EXPECT_EQ(c.total(), 64);
    }
    EXPECT_THROW(confusion_counts(BinaryMask(2, 2), BinaryMask(2, 3)), DimensionError);
}

TEST(PrfIou, HandEvaluated) {
    const LocalizationScores s = prf_iou({2, 1, 1, 10});
    EXPECT_NEAR(s.precision, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(s.recall, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(s.f1, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(s.iou, 0.5, 1e-15);
}

TEST(PrfIou, PerfectAndDegenerate) {
    const LocalizationScores perfect = prf_iou({5, 0, 0, 3});
    EXPECT_EQ(perfect.precision, 1.0);
    EXPECT_EQ(perfect.recall, 1.0);
    EXPECT_EQ(perfect.f1, 1.0);
    EXPECT_EQ(perfect.iou, 1.0);

    const LocalizationScores empty = prf_iou({0, 0, 0, 16});
    EXPECT_EQ(empty.precision, 1.0);
    EXPECT_EQ(empty.recall, 1.0);
    EXPECT_EQ(empty.f1, 1.0);
    EXPECT_EQ(empty.iou, 1.0);

    const LocalizationScores missed = prf_iou({0, 0, 4, 12});
    EXPECT_EQ(missed.precision, 0.0);
    EXPECT_EQ(missed.recall, 0.0);
    EXPECT_EQ(missed.f1, 0.0);
    EXPECT_EQ(missed.iou, 0.0);

    const LocalizationScores spurious = prf_iou({0, 4, 0, 12});
    EXPECT_EQ(spurious.f1, 0.0);
    EXPECT_EQ(spurious.iou, 0.0);
}

TEST(PrfIou, F1IouIdentityAndMonotonicity) {
    std::mt19937_64 rng(43);
    std::uniform_int_distribution<std::int64_t> count(0, 500);
    for (int trial = 0; trial < 500; ++trial) {
        ConfusionCounts c{count(rng), count(rng), count(rng), count(rng)};
        if (c.tp + c.fp + c.fn == 0) c.fn = 1;
        const LocalizationScores s = prf_iou(c);
        EXPECT_NEAR(s.f1, 2.0 * s.iou / (1.0 + s.iou), 1e-12);
        if (c.fn > 0) {
            ConfusionCounts better = c;
            --better.fn;
            ++better.tp;
            const LocalizationScores b = prf_iou(better);
            EXPECT_GE(b.f1, s.f1 - 1e-15);
            EXPECT_GE(b.iou, s.iou - 1e-15);
        }
    }
}

TEST(RocAuc, SpotValues) {
    std::vector<DetectionSample> separated{{"a", 0.9, 1}, {"b", 0.9, 1}, {"c", 0.1, 0}, {"d", 0.1, 0}};
    EXPECT_EQ(roc_auc(separated), 1.0);
    for (auto& s : separated) s.label = 1 - s.label;
    EXPECT_EQ(roc_auc(separated), 0.0);

    const std::vector<DetectionSample> tied{{"p1", 0.8, 1}, {"p2", 0.5, 1}, {"n1", 0.5, 0}, {"n2", 0.2, 0}};
    EXPECT_EQ(roc_auc(tied), 0.875);
}

TEST(RocAuc, SingleClassIsAnError) {
    const std::vector<DetectionSample> positives{{"a", 0.3, 1}, {"b", 0.7, 1}};
    EXPECT_THROW(roc_auc(positives), EvaluationError);
    EXPECT_THROW(roc_auc(std::vector<DetectionSample>{}), EvaluationError);
}

TEST(RocAuc, MatchesPairwiseOracleAndInvariances) {
    std::mt19937_64 rng(44);
    std::uniform_int_distribution<int> size(2, 40);
    std::uniform_int_distribution<int> bucket(0, 9);  // coarse scores force ties
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<DetectionSample> samples;
        const int n = size(rng);
        for (int i = 0; i < n; ++i) samples.push_back({std::to_string(i), bucket(rng) / 10.0, i % 2});
        const double auc = roc_auc(samples);
        EXPECT_DOUBLE_EQ(auc, oracle::pairwise_auc(samples));

        auto transformed = samples;
        for (auto& s : transformed) s.score = std::exp(3.0 * s.score) - 7.0;
        EXPECT_DOUBLE_EQ(roc_auc(transformed), auc);
    }
}

TEST(RocAuc, LabelFlipComplementsWithoutTies) {
    std::mt19937_64 rng(45);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<DetectionSample> samples;
        for (int i = 0; i < 15; ++i) samples.push_back({std::to_string(i), score(rng), i % 3 == 0 ? 1 : 0});
        auto flipped = samples;
        for (auto& s : flipped) s.label = 1 - s.label;
        EXPECT_NEAR(roc_auc(flipped), 1.0 - roc_auc(samples), 1e-12);
    }
}

TEST(FinalScore, ReferenceAblationArithmetic) {
    EXPECT_NEAR(final_score(0.9790, 0.7759, 0.6902), 0.8150, 5e-4);
    EXPECT_NEAR(final_score(0.9790, 0.7598, 0.6657), 0.8015, 5e-4);
    EXPECT_EQ(final_score(1.0, 1.0, 1.0), 1.0);
    // The single-branch row averages to 0.7537, not its printed 0.7497.
    EXPECT_NEAR(final_score(0.9790, 0.6840, 0.5981), 0.7537, 5e-5);
    EXPECT_THROW(final_score(1.2, 0.5, 0.5), ParameterError);
    EXPECT_THROW(final_score(0.5, -0.1, 0.5), ParameterError);
}

TEST(BuildReport, MacroAndMicroAggregation) {
    std::vector<ImageMetrics> images;
    const ConfusionCounts a{1, 0, 0, 3};
    const ConfusionCounts b{1, 3, 0, 0};
    images.push_back({"a", prf_iou(a), a});
    images.push_back({"b", prf_iou(b), b});

    const MetricsReport macro = build_report(images, 0.5, Aggregation::Macro);
    EXPECT_NEAR(macro.aggregate.iou, (1.0 + 0.25) / 2.0, 1e-15);
    EXPECT_NEAR(macro.aggregate.final_score, (macro.aggregate.auc + macro.aggregate.f1 + macro.aggregate.iou) / 3.0,
                1e-12);

    const MetricsReport micro = build_report(images, 0.5, Aggregation::Micro);
    EXPECT_NEAR(micro.aggregate.iou, 2.0 / 5.0, 1e-15);
    EXPECT_EQ(micro.mode, Aggregation::Micro);
}
