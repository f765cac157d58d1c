#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "jscat/lattice.hpp"

using namespace jscat;

namespace {

ComplexSequence filled(int half, complex v) { return ComplexSequence::window(half, v); }

} // namespace

TEST(Apply, FreeOperatorFixesConstants) {
    const auto out = jscat::apply(JacobiOperator::free(), filled(5, 1.0));
    EXPECT_EQ(out.first(), -4);
    EXPECT_EQ(out.last(), 4);
    for (int n = -4; n <= 4; ++n) EXPECT_NEAR(std::abs(out[n] - 1.0), 0.0, 1e-15);
}

TEST(Apply, FreeOperatorAnnihilatesPowersOfI) {
    const complex z(0.0, 1.0);
    ComplexSequence u(-6, 6);
    for (int n = -6; n <= 6; ++n) u[n] = std::pow(z, n);
    const auto out = jscat::apply(JacobiOperator::free(), u);
    for (int n = out.first(); n <= out.last(); ++n) EXPECT_LT(std::abs(out[n]), 1e-14);
}

TEST(Apply, SingleSiteOnDelta) {
    const JacobiOperator op(0, {}, {{0, 0.5}});
    ComplexSequence u = filled(3, 0.0);
    u[0] = 1.0;
    const auto out = jscat::apply(op, u);
    EXPECT_DOUBLE_EQ(out[-1].real(), 0.5);
    EXPECT_DOUBLE_EQ(out[0].real(), 0.5);
    EXPECT_DOUBLE_EQ(out[1].real(), 0.5);
    EXPECT_DOUBLE_EQ(out[2].real(), 0.0);
}

TEST(Apply, MatchesDenseSection) {
    const JacobiOperator op(2, {{-1, 0.3}, {1, 0.8}}, {{-2, 0.1}, {0, -0.4}, {2, 0.25}});
    const int half = 6;
    ComplexSequence u(-half, half);
    for (int n = -half; n <= half; ++n) u[n] = complex(std::sin(1.3 * n), std::cos(0.7 * n * n));
    const auto out = jscat::apply(op, u);
    const Eigen::MatrixXd h = truncate(op, half).dense();
    for (int n = out.first(); n <= out.last(); ++n) {
        complex expect = 0.0;
        for (int k = -half; k <= half; ++k) expect += h(n + half, k + half) * u[k];
        EXPECT_NEAR(std::abs(out[n] - expect), 0.0, 1e-14) << "n = " << n;
    }
}

TEST(Apply, RejectsTinyWindow) {
    ComplexSequence u(0, 1);
    EXPECT_THROW(jscat::apply(JacobiOperator::free(), u), WindowTooSmall);
}

TEST(JacobiOperator, ValidatesCoefficients) {
    EXPECT_THROW(JacobiOperator(1, {{2, 0.5}}, {}), ConfigError);
    EXPECT_THROW(JacobiOperator(1, {}, {{-2, 0.1}}), ConfigError);
    EXPECT_THROW(JacobiOperator(1, {{0, 0.0}}, {}), ConfigError);
    EXPECT_THROW(JacobiOperator(1, {{0, -0.2}}, {}), ConfigError);
    EXPECT_THROW(JacobiOperator(1, {}, {{0, std::nan("")}}), ConfigError);
    EXPECT_THROW(JacobiOperator(-1, {}, {}), ConfigError);
}

TEST(JacobiOperator, BackgroundOutsideSupport) {
    const JacobiOperator op(1, {{0, 0.9}}, {{1, 0.2}});
    EXPECT_DOUBLE_EQ(op.a(0), 0.9);
    EXPECT_DOUBLE_EQ(op.b(1), 0.2);
    EXPECT_DOUBLE_EQ(op.a(5), 0.5);
    EXPECT_DOUBLE_EQ(op.b(-7), 0.0);
    EXPECT_FALSE(op.is_free());
    EXPECT_TRUE(JacobiOperator::free().is_free());
    EXPECT_TRUE(JacobiOperator(3, {}, {}).is_free());
}

TEST(MomentNorm, Examples) {
    EXPECT_EQ(moment_norm(JacobiOperator::free(), 3.0).norm, 0.0);
    EXPECT_DOUBLE_EQ(moment_norm(JacobiOperator(0, {}, {{0, 0.5}}), 1.0).norm, 0.5);
    const auto r = moment_norm(JacobiOperator(2, {}, {{0, 0.25}, {2, 0.25}}), 2.0);
    EXPECT_DOUBLE_EQ(r.norm, 2.5);
    EXPECT_TRUE(r.satisfied);
}

TEST(MomentNorm, CountsBothCoefficientsAndIsMonotoneInSigma) {
    const JacobiOperator op(3, {{-3, 0.6}, {1, 0.3}}, {{2, -0.2}});
    // hand sum: (1+3)^s 0.1 + (1+1)^s 0.2 + (1+2)^s 0.2
    for (double s : {0.0, 1.0, 2.5}) {
        const double expect = std::pow(4.0, s) * 0.1 + std::pow(2.0, s) * 0.2 + std::pow(3.0, s) * 0.2;
        EXPECT_NEAR(moment_norm(op, s).norm, expect, 1e-14);
    }
    EXPECT_LE(moment_norm(op, 1.0).norm, moment_norm(op, 2.0).norm);
    EXPECT_THROW(moment_norm(op, -1.0), ConfigError);
}

TEST(Truncate, FreeAndSingleSite) {
    const Eigen::MatrixXd f = truncate(JacobiOperator::free(), 1).dense();
    Eigen::MatrixXd expect(3, 3);
    expect << 0, 0.5, 0, 0.5, 0, 0.5, 0, 0.5, 0;
    EXPECT_EQ(f, expect);
    const Eigen::MatrixXd s = truncate(JacobiOperator(0, {}, {{0, 0.5}}), 1).dense();
    expect(1, 1) = 0.5;
    EXPECT_EQ(s, expect);
}

TEST(Truncate, OffDiagonalIndexing) {
    const auto sec = truncate(JacobiOperator(1, {{-1, 0.2}, {0, 0.9}}, {}), 2);
    ASSERT_EQ(sec.off_diagonal.size(), 4u);
    // a(n) couples n and n + 1
    EXPECT_DOUBLE_EQ(sec.off_diagonal[1], 0.2);
    EXPECT_DOUBLE_EQ(sec.off_diagonal[2], 0.9);
    EXPECT_DOUBLE_EQ(sec.off_diagonal[0], 0.5);
}

TEST(Truncate, RefusesToClipSupport) {
    EXPECT_THROW(truncate(JacobiOperator(3, {}, {{3, 0.1}}), 2), TruncationError);
}

TEST(KernelNorm, IdentitySup) {
    WindowedKernel k(0.0, 3, Eigen::MatrixXcd::Identity(7, 7));
    EXPECT_DOUBLE_EQ(kernel_norm(k, KernelNorm::sup()), 1.0);
}

TEST(KernelNorm, OnesWeightedSupPeaksAtOrigin) {
    WindowedKernel k(0.0, 2, Eigen::MatrixXcd::Ones(5, 5));
    EXPECT_DOUBLE_EQ(kernel_norm(k, KernelNorm::weighted_sup(2.0)), 1.0);
}

TEST(KernelNorm, RankOneWeightedTwo) {
    const int half = 4;
    Eigen::VectorXcd u(2 * half + 1);
    for (int n = -half; n <= half; ++n) u(n + half) = std::pow(1.0 + std::abs(n), 2.0);
    WindowedKernel k(0.0, half, u * u.adjoint());
    // weights cancel u exactly, leaving the all-ones rank-one matrix of norm 2N+1
    EXPECT_NEAR(kernel_norm(k, KernelNorm::weighted_two(2.0)), 2.0 * half + 1.0, 1e-11);
}

TEST(KernelNorm, OrderingOfNorms) {
    Eigen::MatrixXcd m(7, 7);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) m(i, j) = complex(std::cos(i + 2.0 * j), std::sin(i * j + 0.5));
    WindowedKernel k(0.0, 3, m);
    const double sup = kernel_norm(k, KernelNorm::sup());
    EXPECT_LE(kernel_norm(k, KernelNorm::weighted_sup(1.0)), sup + 1e-15);
    EXPECT_LE(kernel_norm(k, KernelNorm::weighted_sup(2.0)), kernel_norm(k, KernelNorm::weighted_sup(1.0)) + 1e-15);
    // weighted-two with sigma = 0 is the spectral norm, at least the largest entry
    EXPECT_GE(kernel_norm(k, KernelNorm::weighted_two(0.0)), sup - 1e-12);
}

TEST(KernelNorm, ParseNames) {
    EXPECT_EQ(KernelNorm::parse("sup").kind, NormKind::sup);
    const auto ws = KernelNorm::parse("wsup2");
    EXPECT_EQ(ws.kind, NormKind::weighted_sup);
    EXPECT_DOUBLE_EQ(ws.sigma, 2.0);
    const auto w2 = KernelNorm::parse("w2:0.6");
    EXPECT_EQ(w2.kind, NormKind::weighted_two);
    EXPECT_DOUBLE_EQ(w2.sigma, 0.6);
    EXPECT_EQ(w2.name(), "w2:0.6");
    EXPECT_THROW(KernelNorm::parse("l2"), ConfigError);
    EXPECT_THROW(KernelNorm::parse("w2:abc"), ConfigError);
}

TEST(WindowedKernel, RestrictKeepsCentre) {
    Eigen::MatrixXcd m(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) m(i, j) = 10.0 * i + j;
    WindowedKernel k(1.0, 2, m);
    const auto r = k.restrict_to(1);
    EXPECT_EQ(r.side(), 3);
    EXPECT_EQ(r(0, 0), k(0, 0));
    EXPECT_EQ(r(-1, 1), k(-1, 1));
    EXPECT_THROW(k.restrict_to(3), WindowTooSmall);
}
