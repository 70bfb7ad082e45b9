#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles/reference_ops.hpp"
#include "revive/errors.hpp"
#include "revive/ops.hpp"
#include "revive/rng.hpp"

using namespace revive;

TEST(Tensor, ShapeAndFill) {
    Tensor t(Shape{2, 3, 4, 5}, 1.5);
    EXPECT_EQ(t.numel(), 120u);
    EXPECT_EQ(t.at(1, 2, 3, 4), 1.5);
    EXPECT_THROW(Tensor(Shape{1, 1, 2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST(Tensor, CloneDoesNotShareStorage) {
    Tensor a(Shape{1, 1, 2, 2}, 1.0);
    Tensor b = a;
    Tensor c = a.clone();
    b.at(0, 0, 0, 0) = 7.0;
    EXPECT_EQ(a.at(0, 0, 0, 0), 7.0);
    EXPECT_EQ(c.at(0, 0, 0, 0), 1.0);
}

TEST(Conv2d, MatchesDirectFormulaOverRandomConfigs) {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const int groups = rng.uniform_int(1, 2);
        const int in_c = groups * rng.uniform_int(1, 3);
        const int out_c = groups * rng.uniform_int(1, 3);
        const int k = rng.uniform_int(1, 3);
        const int stride = rng.uniform_int(1, 2);
        const int dilation = rng.uniform_int(1, 3);
        const int pad = rng.uniform_int(0, 3);
        const auto h = static_cast<std::size_t>(rng.uniform_int(dilation * (k - 1) + 1, 9));
        const auto w = static_cast<std::size_t>(rng.uniform_int(dilation * (k - 1) + 1, 9));
        Tensor x = Tensor::randn(Shape{2, static_cast<std::size_t>(in_c), h, w}, rng);
        Tensor kern = Tensor::randn(Shape{static_cast<std::size_t>(out_c),
                                          static_cast<std::size_t>(in_c / groups),
                                          static_cast<std::size_t>(k), static_cast<std::size_t>(k)},
                                    rng);
        Tensor bias = Tensor::randn(Shape{1, static_cast<std::size_t>(out_c), 1, 1}, rng);
        Conv2dOptions opt{stride, dilation, groups, pad};
        const Tensor got = conv2d(x, kern, bias, opt);
        const Tensor want = oracle::conv2d_direct(x, kern, bias, stride, dilation, groups, pad);
        ASSERT_EQ(got.shape(), want.shape());
        EXPECT_LT(max_abs_diff(got, want), 1e-12) << "trial " << trial;
    }
}

TEST(Conv2d, OneHotKernelCopiesInput) {
    Rng rng(3);
    Tensor x = Tensor::randn(Shape{1, 1, 5, 5}, rng);
    Tensor k(Shape{1, 1, 3, 3}, 0.0);
    k.at(0, 0, 1, 1) = 1.0;
    EXPECT_TRUE(bitwise_equal(conv2d(x, k, {}), x));
}

TEST(Conv2d, RejectsBadGroups) {
    Tensor x(Shape{1, 3, 4, 4});
    Tensor k(Shape{2, 1, 3, 3});
    Conv2dOptions opt;
    opt.groups = 2;
    EXPECT_THROW(conv2d(x, k, {}, opt), ShapeError);
    EXPECT_THROW(conv2d(x, Tensor(Shape{2, 2, 3, 3}), {}), ShapeError);
}

TEST(Conv2d, GroupedDilatedEqualsDepthwisePathWhenGroupsEqualChannels) {
    Rng rng(5);
    for (int dilation : {1, 2, 4}) {
        Tensor x = Tensor::randn(Shape{2, 4, 9, 9}, rng);
        Tensor k = Tensor::randn(Shape{4, 1, 3, 3}, rng);
        Conv2dOptions opt;
        opt.groups = 4;
        opt.dilation = dilation;
        EXPECT_TRUE(bitwise_equal(conv2d(x, k, {}, opt), depthwise_conv2d(x, k, {}, dilation)));
    }
}

TEST(DepthwiseConv, ChannelMultiplierReadsSourceChannel) {
    Rng rng(8);
    Tensor x = Tensor::randn(Shape{1, 2, 5, 5}, rng);
    Tensor k = Tensor::randn(Shape{4, 1, 3, 3}, rng);
    const Tensor y = depthwise_conv2d(x, k);
    ASSERT_EQ(y.shape(), (Shape{1, 4, 5, 5}));
    const Tensor want = oracle::conv2d_direct(x, k, {}, 1, 1, 2, 1);
    EXPECT_LT(max_abs_diff(y, want), 1e-12);
}

TEST(LayerNorm, MatchesTwoPassOracle) {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        Tensor x = Tensor::randn(Shape{2, 3, 4, 5}, rng, rng.uniform(0.1, 10.0));
        for (double& v : x.mutable_data()) v += 100.0;
        Tensor g = Tensor::randn(Shape{1, 3, 1, 1}, rng);
        Tensor b = Tensor::randn(Shape{1, 3, 1, 1}, rng);
        EXPECT_LT(max_abs_diff(layer_norm(x, g, b, 1e-6), oracle::layer_norm_two_pass(x, g, b, 1e-6)), 1e-9);
    }
}

TEST(LayerNorm, ConstantInputGivesZero) {
    const Tensor y = layer_norm(Tensor(Shape{1, 4, 3, 3}, 0.7), {}, {}, 1e-6);
    for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(LayerNorm, UnitScaleZeroShiftHasZeroMeanUnitVariance) {
    Rng rng(4);
    Tensor x = Tensor::randn(Shape{1, 4, 6, 6}, rng, 3.0);
    const Tensor y = layer_norm(x, {}, {}, 1e-12);
    double mean = 0.0, sq = 0.0;
    for (double v : y.data()) {
        mean += v;
        sq += v * v;
    }
    EXPECT_NEAR(mean / y.numel(), 0.0, 1e-10);
    EXPECT_NEAR(sq / y.numel(), 1.0, 1e-10);
}

TEST(SimpleGate, Examples) {
    const Tensor ones = simple_gate(Tensor(Shape{1, 4, 2, 2}, 1.0));
    EXPECT_EQ(ones.shape(), (Shape{1, 2, 2, 2}));
    for (double v : ones.data()) EXPECT_EQ(v, 1.0);

    Rng rng(1);
    Tensor half = Tensor::randn(Shape{1, 2, 3, 3}, rng);
    const Tensor doubled = concat_channels(half, half);
    const Tensor sq = simple_gate(doubled);
    for (std::size_t i = 0; i < sq.numel(); ++i) EXPECT_EQ(sq.data()[i], half.data()[i] * half.data()[i]);

    EXPECT_THROW(simple_gate(Tensor(Shape{1, 3, 2, 2})), ShapeError);
}

TEST(Sca, IdentityWeightAndZeroInputGiveZero) {
    const Tensor y = sca(Tensor(Shape{1, 4, 3, 3}, 0.0), Tensor(Shape{4, 4, 1, 1}, 0.3), Tensor(Shape{1, 4, 1, 1}, 0.2));
    for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(Pool, AxesAndValues) {
    Tensor x(Shape{1, 3, 2, 2});
    for (std::size_t c = 0; c < 3; ++c) x.at(0, c, c % 2, c / 2) = 1.0;  // one-hot stack
    const Tensor mx = pool_reduce(x, PoolKind::MaxOverChannels);
    EXPECT_EQ(mx.shape(), (Shape{1, 1, 2, 2}));
    EXPECT_EQ(mx.at(0, 0, 0, 0), 1.0);
    EXPECT_EQ(mx.at(0, 0, 1, 0), 1.0);
    EXPECT_EQ(mx.at(0, 0, 0, 1), 1.0);
    EXPECT_EQ(mx.at(0, 0, 1, 1), 0.0);
    const Tensor avg = pool_reduce(x, PoolKind::AvgOverChannels);
    EXPECT_DOUBLE_EQ(avg.at(0, 0, 0, 0), 1.0 / 3.0);
    const Tensor gap = pool_reduce(x, PoolKind::AvgOverSpace);
    EXPECT_EQ(gap.shape(), (Shape{1, 3, 1, 1}));
    EXPECT_DOUBLE_EQ(gap.at(0, 1, 0, 0), 0.25);
}

TEST(Broadcast, ChannelAndSpatialOperands) {
    Tensor a(Shape{2, 3, 2, 2}, 1.0);
    Tensor ch(Shape{1, 3, 1, 1}, std::vector<double>{1, 2, 3});
    const Tensor s = add(a, ch);
    EXPECT_EQ(s.at(1, 2, 1, 1), 4.0);
    Tensor sp(Shape{2, 1, 2, 2}, 2.0);
    EXPECT_EQ(mul(a, sp).at(1, 1, 0, 1), 2.0);
    EXPECT_THROW(add(a, Tensor(Shape{1, 2, 1, 1})), ShapeError);
    EXPECT_THROW(add(a, Tensor(Shape{2, 3, 1, 2})), ShapeError);
}

TEST(Interp, UpThenDownOfConstantIsConstant) {
    const Tensor c(Shape{1, 2, 3, 3}, 0.25);
    const Tensor up = interp2x_up(c);
    EXPECT_EQ(up.shape(), (Shape{1, 2, 6, 6}));
    for (double v : up.data()) EXPECT_EQ(v, 0.25);
    const Tensor down = interp2x_down(up);
    for (double v : down.data()) EXPECT_EQ(v, 0.25);
    EXPECT_THROW(interp2x_down(c), ShapeError);
}

TEST(Pointwise, DispatchMatchesDirectCalls) {
    Rng rng(9);
    Tensor a = Tensor::randn(Shape{1, 2, 4, 4}, rng);
    Tensor b = Tensor::randn(Shape{1, 2, 4, 4}, rng);
    EXPECT_TRUE(bitwise_equal(pointwise(a, b, PointwiseOp::Add), add(a, b)));
    EXPECT_TRUE(bitwise_equal(pointwise(a, b, PointwiseOp::Mul), mul(a, b)));
    EXPECT_TRUE(bitwise_equal(pointwise(a, {}, PointwiseOp::Sigmoid), sigmoid(a)));
    EXPECT_TRUE(bitwise_equal(pointwise(a, {}, PointwiseOp::Relu), relu(a)));
    EXPECT_TRUE(bitwise_equal(pointwise(a, {}, PointwiseOp::Interp2xUp), interp2x_up(a)));
    EXPECT_TRUE(bitwise_equal(pointwise(a, {}, PointwiseOp::Interp2xDown), interp2x_down(a)));
}

TEST(Sigmoid, StableAtExtremes) {
    const Tensor y = sigmoid(Tensor(Shape{1, 1, 1, 2}, std::vector<double>{-800.0, 800.0}));
    EXPECT_EQ(y.data()[0], 0.0);
    EXPECT_EQ(y.data()[1], 1.0);
}

TEST(Numeric, NonFiniteResultThrows) {
    const Tensor big(Shape{1, 1, 1, 1}, 1e200);
    EXPECT_THROW(mul(big, big), NumericError);
    const Tensor nan(Shape{1, 1, 1, 1}, std::numeric_limits<double>::quiet_NaN());
    EXPECT_THROW(add(nan, nan), NumericError);
}

TEST(SoftHistogram, ConstantInteriorImageConcentratesMass) {
    Rng rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        const int bins = 64;
        // Interior of the range, away from the two flat end bins.
        const double v = rng.uniform(1.0 / bins, 1.0 - 1.0 / bins);
        const int bin = static_cast<int>(std::floor(v * bins));
        const double center_dist = std::abs(v * bins - (bin + 0.5));
        if (center_dist > 0.49) continue;  // exactly at a bin edge the kernel vanishes
        const Tensor h = soft_histogram(Tensor(Shape{1, 3, 4, 4}, v), bins);
        for (std::size_t c = 0; c < 3; ++c) {
            EXPECT_GE(h.at(0, c, 0, static_cast<std::size_t>(bin)), 0.99);
        }
    }
}

TEST(SoftHistogram, RowsSumToOne) {
    Rng rng(7);
    const Tensor x = Tensor::uniform(Shape{2, 3, 5, 5}, rng, 0.0, 1.0);
    const Tensor h = soft_histogram(x, 16);
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t c = 0; c < 3; ++c) {
            double total = 0.0;
            for (std::size_t k = 0; k < 16; ++k) total += h.at(n, c, 0, k);
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
}
