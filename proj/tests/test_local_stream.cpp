#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "mfloc/local_stream.hpp"
#include "oracles.hpp"

using namespace mfloc;

namespace {

TensorD gradient_image(Index h, Index w) {
    TensorD img(Shape{3, h, w});
    for (Index c = 0; c < 3; ++c)
        for (Index y = 0; y < h; ++y)
            for (Index x = 0; x < w; ++x) img(c, y, x) = static_cast<double>(c * 1000 + y * w + x);
    return img;
}

}  // namespace

TEST(AdaptiveCrop, LargeFaceIsCroppedWithMargin) {
    const TensorD img = gradient_image(100, 100);
    // 70x70 box (49% of the image) centred at (50, 50); 1.3x margin -> 91x91 about the centre.
    const FaceBox box{15, 15, 70, 70};
    const TensorD crop = adaptive_crop(img, box, 0.04, 1.3);
    const Index half = 91 / 2 + 1;  // floor(50 - 45.5) = 4, ceil(50 + 45.5) = 96
    ASSERT_EQ(crop.shape(), (Shape{3, 92, 92}));
    EXPECT_EQ(crop(0, 0, 0), img(0, 50 - half, 50 - half));
    EXPECT_EQ(crop(2, 91, 91), img(2, 95, 95));
}

TEST(AdaptiveCrop, SmallFaceKeepsFullImage) {
    const TensorD img = gradient_image(100, 100);
    const FaceBox box{40, 40, 10, 10};  // 1% of the image
    EXPECT_TRUE(adaptive_crop(img, box, 0.04, 1.3) == img);
}

TEST(AdaptiveCrop, ClipsToImageBounds) {
    const TensorD img = gradient_image(40, 60);
    const FaceBox box{0, 0, 30, 30};
    const FaceBox window = adaptive_crop_window(40, 60, box, 0.04, 2.0);
    EXPECT_EQ(window.x, 0);
    EXPECT_EQ(window.y, 0);
    EXPECT_EQ(window.w, 45);
    EXPECT_EQ(window.h, 40);
    const TensorD crop = adaptive_crop(img, box, 0.04, 2.0);
    EXPECT_EQ(crop.shape(), (Shape{3, 40, 45}));
}

TEST(AdaptiveCrop, RejectsBadParameters) {
    const TensorD img = gradient_image(20, 20);
    EXPECT_THROW(adaptive_crop(img, {0, 0, 0, 5}), ParameterError);
    EXPECT_THROW(adaptive_crop(img, {18, 0, 5, 5}), ParameterError);
    EXPECT_THROW(adaptive_crop(img, {0, 0, 5, 5}, 1.5, 1.3), ParameterError);
    EXPECT_THROW(adaptive_crop(img, {0, 0, 5, 5}, 0.04, 0.9), ParameterError);
}

TEST(Cmce, IdenticalNonNegativeStreamsQuadruple) {
    std::mt19937_64 rng(51);
    const TensorD f = oracle::random_tensor(Shape{4, 3, 3}, rng, 0.1, 1.0);
    const TensorD out = cmce_refine(f, f);
    EXPECT_LT((out.data() - 4.0 * f.data()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Cmce, OrthogonalStreamsAddRelu) {
    TensorD r(Shape{2, 2, 2});
    TensorD h(Shape{2, 2, 2});
    r.plane(0) << 1.0, -2.0, 3.0, -0.5;
    h.plane(1) << -1.0, 4.0, 0.5, 2.0;
    const TensorD out = cmce_refine(r, h);
    const TensorD expected(r.shape(), r.data().cwiseMax(0.0) + h.data().cwiseMax(0.0));
    EXPECT_TRUE(out == expected);
}

TEST(Cmce, MatchesOracleSymmetricAndNonNegative) {
    std::mt19937_64 rng(52);
    for (int trial = 0; trial < 20; ++trial) {
        const TensorD r = oracle::random_tensor(Shape{4, 3, 3}, rng);
        const TensorD h = oracle::random_tensor(Shape{4, 3, 3}, rng);
        const TensorD out = cmce_refine(r, h);
        EXPECT_LT(oracle::max_abs_diff(out, oracle::cmce(r, h)), 1e-12);
        EXPECT_TRUE(out == cmce_refine(h, r));
        EXPECT_GE(out.data().minCoeff(), 0.0);
    }
    EXPECT_THROW(cmce_refine(TensorD(Shape{2, 3, 3}), TensorD(Shape{2, 3, 4})), DimensionError);
}

TEST(LfgaAttention, ConstantFeaturesGiveUniformAttention) {
    const TensorD f = TensorD::constant(Shape{3, 2, 3}, 0.7);
    const TensorD att = lfga_attention(f, Projection::seeded(4, 3, 1));
    EXPECT_LT((att.data().array() - 1.0 / 6.0).abs().maxCoeff(), 1e-15);
}

TEST(LfgaAttention, HandSoftmaxForTwoLocations) {
    TensorD f(Shape{2, 1, 2});
    f(0, 0, 0) = 1.0;  // location 0: (1,0)
    f(1, 0, 1) = 1.0;  // location 1: (0,1)
    const TensorD att = lfga_attention(f, Projection::identity(2));
    const double e = std::exp(1.0);
    EXPECT_NEAR(att(0, 0), e / (e + 1.0), 1e-15);
    EXPECT_NEAR(att(0, 1), 1.0 / (e + 1.0), 1e-15);
    EXPECT_NEAR(att(1, 0), 1.0 / (e + 1.0), 1e-15);
    EXPECT_NEAR(att(1, 1), e / (e + 1.0), 1e-15);
}

TEST(LfgaAttention, MatchesOracleRowsSumToOne) {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        const TensorD f = oracle::random_tensor(Shape{3, 2, 2}, rng);
        const Projection g = Projection::seeded(5, 3, 100 + trial);
        const TensorD att = lfga_attention(f, g);
        const auto expected = oracle::lfga_attention(f, g);
        for (Index i = 0; i < 4; ++i) {
            EXPECT_NEAR(att.plane(0).row(i).sum(), 1.0, 1e-9);
            for (Index j = 0; j < 4; ++j) EXPECT_NEAR(att(i, j), expected[i][j], 1e-9);
        }
    }
    EXPECT_THROW(lfga_attention(TensorD(Shape{3, 2, 2}), Projection::identity(4)), DimensionError);
}

TEST(LfgaAttention, PermutationEquivariance) {
    std::mt19937_64 rng(54);
    const TensorD f = oracle::random_tensor(Shape{3, 2, 3}, rng);
    const Projection g = Projection::seeded(3, 3, 9);
    std::vector<Index> perm(6);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    TensorD permuted(f.shape());
    for (Index i = 0; i < 6; ++i) permuted.features().col(i) = f.features().col(perm[static_cast<std::size_t>(i)]);
    const TensorD att = lfga_attention(f, g);
    const TensorD patt = lfga_attention(permuted, g);
    for (Index i = 0; i < 6; ++i)
        for (Index j = 0; j < 6; ++j)
            EXPECT_NEAR(patt(i, j), att(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]), 1e-12);
}

TEST(LfgaRecalibrate, IdentityAttentionDoubles) {
    std::mt19937_64 rng(55);
    const TensorD f = oracle::random_tensor(Shape{3, 2, 2}, rng, 0.0, 1.0);
    const TensorD eye = TensorD::from_plane(Eigen::MatrixXd::Identity(4, 4));
    const TensorD out = lfga_recalibrate(f, eye, Projection::identity(3));
    EXPECT_LT((out.data() - 2.0 * f.data()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LfgaRecalibrate, UniformAttentionAddsSpatialMean) {
    const TensorD f(Shape{1, 1, 2}, {3.0, -5.0});
    const TensorD uniform = TensorD::constant(Shape{2, 2}, 0.5);
    const TensorD out = lfga_recalibrate(f, uniform, Projection::identity(1));
    // mean = -1: relu(3 - 1) = 2, relu(-5 - 1) = 0
    EXPECT_EQ(out(0, 0, 0), 2.0);
    EXPECT_EQ(out(0, 0, 1), 0.0);
}

TEST(LfgaRecalibrate, MatchesMatrixProductOracle) {
    std::mt19937_64 rng(56);
    for (int trial = 0; trial < 20; ++trial) {
        const TensorD f = oracle::random_tensor(Shape{4, 2, 3}, rng);
        const TensorD att = lfga_attention(oracle::random_tensor(Shape{2, 2, 3}, rng), Projection::seeded(2, 2, 7));
        const Projection h = Projection::seeded(4, 4, 200 + trial);
        EXPECT_LT(oracle::max_abs_diff(lfga_recalibrate(f, att, h), oracle::lfga_recalibrate(f, att, h)), 1e-9);
    }
    EXPECT_THROW(lfga_recalibrate(TensorD(Shape{2, 2, 2}), TensorD(Shape{3, 3}), Projection::identity(2)),
                 DimensionError);
}

TEST(Mpff, UnitVectorsGiveTanhOne) {
    TensorD low(Shape{2, 1, 1});
    low(0, 0, 0) = 1.0;
    TensorD high(Shape{2, 2, 2});
    high.plane(0).setOnes();
    const TensorD out =
        mpff_patch_consistency(high, low, PatchGrid::tile(2, 2, 2, 2), Projection::identity(2), 1.0);
    ASSERT_EQ(out.shape(), (Shape{1, 4}));
    for (Index j = 0; j < 4; ++j) EXPECT_NEAR(out(0, j), 0.761594, 1e-6);
}

TEST(Mpff, OrthogonalIsZero) {
    TensorD low(Shape{2, 1, 1});
    low(0, 0, 0) = 1.0;
    TensorD high(Shape{2, 3, 3});
    high.plane(1).setConstant(2.0);
    const TensorD out = mpff_patch_consistency(high, low, PatchGrid::tile(3, 3, 3, 3), Projection::identity(2), 1.0);
    EXPECT_TRUE((out.data().array() == 0.0).all());
}

TEST(Mpff, MatchesPerPatchOracleAndIsBounded) {
    std::mt19937_64 rng(57);
    for (int trial = 0; trial < 20; ++trial) {
        const TensorD low = oracle::random_tensor(Shape{3, 2, 3}, rng, -3.0, 3.0);
        const TensorD high = oracle::random_tensor(Shape{3, 4, 6}, rng, -3.0, 3.0);
        const Projection theta = Projection::seeded(4, 3, 300 + trial);
        const TensorD out = mpff_patch_consistency(high, low, PatchGrid::tile(4, 6, 2, 2), theta);
        EXPECT_LT(oracle::max_abs_diff(out, oracle::mpff(high, low, theta, 2.0)), 1e-12);
        EXPECT_LT(out.data().cwiseAbs().maxCoeff(), 1.0);
    }
}

TEST(Mpff, SaturationStaysStrictlyInside) {
    const TensorD low = TensorD::constant(Shape{1, 1, 1}, 1e3);
    const TensorD high = TensorD::constant(Shape{1, 2, 2}, 1e3);
    const TensorD out = mpff_patch_consistency(high, low, PatchGrid::tile(2, 2, 2, 2), Projection::identity(1), 1.0);
    EXPECT_LT(out.data().maxCoeff(), 1.0);
}

TEST(Mpff, DimensionErrors) {
    const TensorD low(Shape{2, 2, 2});
    const TensorD high(Shape{2, 5, 4});
    EXPECT_THROW(mpff_patch_consistency(high, low, PatchGrid::tile(4, 4, 2, 2), Projection::identity(2)),
                 DimensionError);
    EXPECT_THROW(PatchGrid::tile(5, 4, 2, 2), DimensionError);
}

TEST(Sspsl, PrototypeMatches) {
    std::mt19937_64 rng(58);
    const Eigen::VectorXd real = Eigen::VectorXd::Random(4);
    Eigen::VectorXd forged = real;
    forged[0] = -forged[0] + 0.5;
    TensorD f(Shape{4, 3, 3});
    for (Index i = 0; i < 9; ++i) f.features().col(i) = real;
    EXPECT_TRUE(sspsl_pseudo_mask(f, real, forged).none());
    for (Index i = 0; i < 9; ++i) f.features().col(i) = forged;
    EXPECT_EQ(sspsl_pseudo_mask(f, real, forged).count(), 9);
    // Identical prototypes tie everywhere; ties label as real.
    const TensorD any = oracle::random_tensor(Shape{4, 3, 3}, rng);
    EXPECT_TRUE(sspsl_pseudo_mask(any, real, real).none());
}

TEST(Sspsl, MatchesOracleAndScaleInvariant) {
    std::mt19937_64 rng(59);
    for (int trial = 0; trial < 20; ++trial) {
        const TensorD f = oracle::random_tensor(Shape{5, 4, 4}, rng);
        const Eigen::VectorXd real = oracle::random_tensor(Shape{5}, rng).data();
        const Eigen::VectorXd forged = oracle::random_tensor(Shape{5}, rng).data();
        const BinaryMask m = sspsl_pseudo_mask(f, real, forged);
        EXPECT_EQ(m, oracle::sspsl(f, {real.data(), real.data() + 5}, {forged.data(), forged.data() + 5}));
        const TensorD scaled(f.shape(), 4.0 * f.data());
        EXPECT_EQ(sspsl_pseudo_mask(scaled, 0.5 * real, 8.0 * forged), m);
    }
    EXPECT_THROW(sspsl_pseudo_mask(TensorD(Shape{2, 2, 2}), Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2)),
                 ParameterError);
}

TEST(MeanPoolRegion, AveragesInsideRectangle) {
    TensorD f(Shape{2, 4, 4});
    f.plane(0).block(1, 1, 2, 2).setConstant(3.0);
    f.plane(1).setConstant(-1.0);
    const Eigen::VectorXd mean = mean_pool_region(f, {1, 1, 2, 2});
    EXPECT_EQ(mean[0], 3.0);
    EXPECT_EQ(mean[1], -1.0);
    EXPECT_THROW(mean_pool_region(f, {3, 3, 2, 2}), ParameterError);
}

TEST(PatchLabels, AnyPixelRule) {
    EXPECT_TRUE(patch_labels(BinaryMask(8, 8), PatchGrid::tile(8, 8, 2, 2)).none());

    BinaryMask one(8, 8);
    one(5, 2) = true;
    const BinaryMask labels = patch_labels(one, PatchGrid::tile(8, 8, 2, 2));
    EXPECT_EQ(labels.count(), 1);
    EXPECT_TRUE(labels(2, 1));

    std::mt19937_64 rng(60);
    const BinaryMask m = oracle::random_mask(8, 8, 0.1, rng);
    const BinaryMask l = patch_labels(m, PatchGrid::tile(8, 8, 2, 2));
    for (Index py = 0; py < 4; ++py)
        for (Index px = 0; px < 4; ++px) {
            bool any = false;
            for (Index y = 2 * py; y < 2 * py + 2; ++y)
                for (Index x = 2 * px; x < 2 * px + 2; ++x) any = any || m(y, x);
            EXPECT_EQ(l(py, px), any);
        }
    EXPECT_THROW(patch_labels(m, PatchGrid::tile(6, 6, 2, 2)), DimensionError);
}

TEST(ReplicatePad, ExtendsToMultiple) {
    const TensorD t(Shape{1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    const TensorD p = replicate_pad_to_multiple(t, 2, 2);
    ASSERT_EQ(p.shape(), (Shape{1, 4, 4}));
    EXPECT_EQ(p(0, 3, 3), 9.0);
    EXPECT_EQ(p(0, 0, 3), 3.0);
    EXPECT_EQ(p(0, 3, 0), 7.0);
    EXPECT_NO_THROW(PatchGrid::tile(p.height(), p.width(), 2, 2));
}

TEST(TrainingLosses, SpotValues) {
    const Eigen::ArrayXd labels = (Eigen::ArrayXd(4) << 0, 1, 1, 0).finished();
    const Eigen::ArrayXd perfect = labels * (1.0 - kBceEpsilon) + (1.0 - labels) * kBceEpsilon;
    EXPECT_LT(training_losses(perfect, labels, 0.9, 1).loc, 1e-6);

    const TrainingLosses half = training_losses(Eigen::ArrayXd::Constant(4, 0.5), labels, 0.5, 1);
    EXPECT_NEAR(half.loc, std::log(2.0), 1e-9);
    EXPECT_NEAR(half.cls, std::log(2.0), 1e-9);
    EXPECT_EQ(half.total, half.loc + half.cls);

    EXPECT_NEAR(training_losses(Eigen::ArrayXd::Constant(4, 0.5), labels, 0.9, 1).cls, 0.105361, 1e-6);
}

TEST(TrainingLosses, ClampsAndValidates) {
    const Eigen::ArrayXd labels = Eigen::ArrayXd::Ones(2);
    const TrainingLosses l = training_losses(Eigen::ArrayXd::Zero(2), labels, 0.0, 1);
    EXPECT_TRUE(std::isfinite(l.loc));
    EXPECT_NEAR(l.loc, -std::log(kBceEpsilon), 1e-9);
    EXPECT_THROW(training_losses(Eigen::ArrayXd::Constant(2, 0.5), Eigen::ArrayXd::Constant(2, 0.5), 0.5, 1),
                 ParameterError);
    EXPECT_THROW(training_losses(Eigen::ArrayXd::Constant(2, 0.5), labels, 0.5, 2), ParameterError);
}

TEST(LfdlForward, DeterministicBoundedAndZeroOutsideCrop) {
    std::mt19937_64 rng(61);
    const TensorD img = oracle::random_tensor(Shape{3, 40, 48}, rng, 0.0, 1.0);
    const FaceBox face{10, 8, 20, 20};
    const TensorD a = lfdl_forward(img, face, 5);
    const TensorD b = lfdl_forward(img, face, 5);
    ASSERT_EQ(a.shape(), (Shape{40, 48}));
    EXPECT_TRUE(a == b);
    EXPECT_GE(a.data().minCoeff(), 0.0);
    EXPECT_LE(a.data().maxCoeff(), 1.0);
    const FaceBox window = adaptive_crop_window(40, 48, face);
    EXPECT_EQ(a(0, 47), 0.0);
    EXPECT_GT(a(window.y + 1, window.x + 1), 0.0);
}
