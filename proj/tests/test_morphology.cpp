#include <gtest/gtest.h>

#include <random>

#include "mfloc/morphology.hpp"
#include "oracles.hpp"

using namespace mfloc;

namespace {

BinaryMask pad_complement(const BinaryMask& m, Index ry, Index rx) {
    // Complement on a canvas grown by the element radius: outside-image cells
    // are background of M, hence foreground of its complement.
    BinaryMask padded = BinaryMask::full(m.height() + 2 * ry, m.width() + 2 * rx);
    padded.bits().block(ry, rx, m.height(), m.width()) = m.bits() == false;
    return padded;
}

}  // namespace

TEST(StructuringElement, Validation) {
    EXPECT_THROW(StructuringElement::square(4), ParameterError);
    EXPECT_THROW(StructuringElement::square(0), ParameterError);
    BitGrid no_origin = BitGrid::Constant(3, 3, true);
    no_origin(1, 1) = false;
    EXPECT_THROW(StructuringElement{no_origin}, ParameterError);
    EXPECT_THROW(StructuringElement{BitGrid::Constant(2, 3, true)}, ParameterError);
    EXPECT_EQ(StructuringElement::square(5).offsets().size(), 25u);
}

TEST(Dilate, EmptyStaysEmpty) {
    EXPECT_TRUE(dilate(BinaryMask(8, 8), StructuringElement::square(5)).none());
}

TEST(Dilate, ImpulseBecomesFiveByFiveBlock) {
    BinaryMask m(11, 11);
    m(5, 5) = true;
    const BinaryMask d = dilate(m, StructuringElement::square(5));
    EXPECT_EQ(d.count(), 25);
    EXPECT_TRUE(d.bits().block(3, 3, 5, 5).all());
}

TEST(Dilate, ClipsAtImageBorder) {
    BinaryMask m(6, 6);
    m(0, 0) = true;
    const BinaryMask d = dilate(m, StructuringElement::square(5));
    EXPECT_EQ(d.count(), 9);
    EXPECT_TRUE(d.bits().block(0, 0, 3, 3).all());
}

TEST(Dilate, AsymmetricElementReflects) {
    // Element {origin, right neighbour}: M (+) B = M union (M shifted right).
    BitGrid bits = BitGrid::Constant(1, 3, false);
    bits(0, 1) = bits(0, 2) = true;
    const StructuringElement se(bits);
    BinaryMask m(3, 5);
    m(1, 2) = true;
    const BinaryMask d = dilate(m, se);
    EXPECT_TRUE(d(1, 2));
    EXPECT_TRUE(d(1, 3));
    EXPECT_FALSE(d(1, 1));
}

TEST(Erode, FullMaskLosesOnePixelBorder) {
    const BinaryMask e = erode(BinaryMask::full(8, 8), StructuringElement::square(3));
    EXPECT_EQ(e.count(), 36);
    EXPECT_TRUE(e.bits().block(1, 1, 6, 6).all());
    EXPECT_FALSE(e(0, 3));
    EXPECT_FALSE(e(7, 7));
}

TEST(Erode, EmptyStaysEmpty) {
    EXPECT_TRUE(erode(BinaryMask(8, 8), StructuringElement::square(3)).none());
}

TEST(Morphology, MatchesSetDefinitionOracle) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const BinaryMask m = oracle::random_mask(16, 16, 0.45, rng);
        const StructuringElement se = oracle::random_element(rng);
        EXPECT_EQ(dilate(m, se), oracle::dilate(m, se));
        EXPECT_EQ(erode(m, se), oracle::erode(m, se));
    }
}

TEST(Morphology, AlgebraicProperties) {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 50; ++trial) {
        const BinaryMask small = oracle::random_mask(16, 16, 0.3, rng);
        const BinaryMask large = small | oracle::random_mask(16, 16, 0.3, rng);
        const StructuringElement se = oracle::random_element(rng);

        EXPECT_TRUE(small.subset_of(dilate(small, se)));
        EXPECT_TRUE(erode(small, se).subset_of(small));
        EXPECT_TRUE(dilate(small, se).subset_of(dilate(large, se)));
        EXPECT_TRUE(erode(small, se).subset_of(erode(large, se)));

        const Index ry = se.radius_y(), rx = se.radius_x();
        const BinaryMask dual_full = dilate(pad_complement(small, ry, rx), se.reflected()).complement();
        const BinaryMask dual(BitGrid(dual_full.bits().block(ry, rx, 16, 16)));
        EXPECT_EQ(erode(small, se), dual);
    }
}

TEST(MdmfFuse, BothEmpty) {
    EXPECT_TRUE(mdmf_fuse(BinaryMask(6, 6), BinaryMask(6, 6), StructuringElement::square(5)).none());
}

TEST(MdmfFuse, ThinStripeErodesAwayLeavingDilatedPoint) {
    BinaryMask lfdl(15, 15);
    lfdl(7, 7) = true;
    BinaryMask mitl(15, 15);
    mitl.bits().block(0, 2, 15, 3).setConstant(true);  // 3-wide vertical stripe
    const StructuringElement se = StructuringElement::square(5);
    EXPECT_TRUE(erode(mitl, se).none());
    const BinaryMask fused = mdmf_fuse(lfdl, mitl, se);
    EXPECT_EQ(fused.count(), 25);
    EXPECT_TRUE(fused.bits().block(5, 5, 5, 5).all());
}

TEST(MdmfFuse, OriginOnlyElementIsIdentity) {
    std::mt19937_64 rng(33);
    const BinaryMask gt = oracle::random_mask(12, 9, 0.4, rng);
    EXPECT_EQ(mdmf_fuse(gt, gt, StructuringElement::origin_only()), gt);
}

TEST(MdmfFuse, UnionLowerBounds) {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 20; ++trial) {
        const BinaryMask a = oracle::random_mask(16, 16, 0.2, rng);
        const BinaryMask b = oracle::random_mask(16, 16, 0.7, rng);
        const StructuringElement se = oracle::random_element(rng);
        const BinaryMask fused = mdmf_fuse(a, b, se);
        EXPECT_TRUE(dilate(a, se).subset_of(fused));
        EXPECT_TRUE(erode(b, se).subset_of(fused));
        EXPECT_EQ(fused, dilate(a, se) | erode(b, se));
    }
}

TEST(MdmfFuse, ExtentMismatch) {
    EXPECT_THROW(mdmf_fuse(BinaryMask(4, 4), BinaryMask(4, 5), StructuringElement::square(3)), DimensionError);
    EXPECT_THROW(naive_fuse(BinaryMask(4, 4), BinaryMask(5, 4)), DimensionError);
}

TEST(NaiveFuse, OrSemantics) {
    std::mt19937_64 rng(35);
    const BinaryMask a = oracle::random_mask(10, 10, 0.5, rng);
    EXPECT_EQ(naive_fuse(a, BinaryMask(10, 10)), a);
    EXPECT_EQ(naive_fuse(a, a.complement()), BinaryMask::full(10, 10));
    const BinaryMask b = oracle::random_mask(10, 10, 0.5, rng);
    const BinaryMask fused = naive_fuse(a, b);
    for (Index y = 0; y < 10; ++y)
        for (Index x = 0; x < 10; ++x) EXPECT_EQ(fused(y, x), a(y, x) || b(y, x));
}

TEST(Binarize, ThresholdRule) {
    EXPECT_EQ(binarize(TensorD::constant(Shape{3, 3}, 0.6), 0.5), BinaryMask::full(3, 3));
    EXPECT_EQ(binarize(TensorD::constant(Shape{3, 3}, 0.5), 0.5), BinaryMask::full(3, 3));
    EXPECT_TRUE(binarize(TensorD::constant(Shape{3, 3}, 0.49), 0.5).none());
    EXPECT_THROW(binarize(TensorD(Shape{2, 2}), 0.0), ParameterError);
    EXPECT_THROW(binarize(TensorD(Shape{2, 2}), 1.0), ParameterError);

    std::mt19937_64 rng(36);
    const TensorD prob = oracle::random_tensor(Shape{7, 5}, rng, 0.0, 1.0);
    const BinaryMask m = binarize(prob, 0.3);
    for (Index y = 0; y < 7; ++y)
        for (Index x = 0; x < 5; ++x) EXPECT_EQ(m(y, x), prob(y, x) >= 0.3);
}

TEST(LabelComponents, EightConnectivity) {
    BinaryMask m(5, 5);
    m(0, 0) = m(1, 1) = true;  // diagonal neighbours: one component
    m(4, 4) = true;
    m(0, 4) = m(1, 4) = true;
    const ComponentLabels labels = label_components(m);
    EXPECT_EQ(labels.count, 3);
    EXPECT_EQ(labels.labels(0, 0), labels.labels(1, 1));
    EXPECT_EQ(labels.labels(0, 4), labels.labels(1, 4));
    EXPECT_NE(labels.labels(4, 4), labels.labels(0, 0));
    EXPECT_EQ(labels.labels(2, 2), 0);
}
