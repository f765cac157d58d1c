#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "jscat/operator_io.hpp"
#include "jscat/scattering.hpp"

using namespace jscat;

namespace {

constexpr complex I(0.0, 1.0);

// 2x2 transfer matrices: (u(n+1), u(n)) = A_n (u(n), u(n-1)), A_n = [[(l - b)/a(n), -a(n-1)/a(n)], [1, 0]].
// Starting from z^-n on the far left gives phi_-; T comes out of the coefficient of z^{-n}
// on the far right, phi_- = (1/T) z^{-n} + (R_+/T) z^n there.
struct TransferResult {
    complex transmission, reflection_plus;
};

TransferResult transfer(const JacobiOperator& op, complex z) {
    const int n0 = op.support_radius();
    const complex lambda = 0.5 * (z + 1.0 / z);
    complex prev = std::pow(z, n0 + 2), cur = std::pow(z, n0 + 1); // u(-n0-2), u(-n0-1)
    for (int n = -n0 - 1; n <= n0 + 1; ++n) {
        const complex next = ((lambda - op.b(n)) * cur - op.a(n - 1) * prev) / op.a(n);
        prev = cur;
        cur = next;
    }
    // now prev = u(n0 + 1), cur = u(n0 + 2) with u = A z^-n + B z^n
    const int m = n0 + 1;
    const complex zm = std::pow(z, m), zm1 = std::pow(z, m + 1);
    const complex det = (1.0 / zm) * zm1 - zm * (1.0 / zm1);
    const complex a = (prev * zm1 - cur * zm) / det;
    const complex b = ((1.0 / zm) * cur - (1.0 / zm1) * prev) / det;
    return {1.0 / a, b / a};
}

JacobiOperator single_site(double beta) { return JacobiOperator(0, {}, {{0, beta}}); }

} // namespace

TEST(Wronskian, FreeClosedForm) {
    EXPECT_NEAR(std::abs(wronskian(JacobiOperator::free(), I) - (-I)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(wronskian(JacobiOperator::free(), 1.0)), 0.0, 1e-15);
    EXPECT_THROW(wronskian(JacobiOperator::free(), 0.0), ConfigError);
}

TEST(Wronskian, SingleSiteClosedForm) {
    const double beta = 0.5;
    EXPECT_NEAR(std::abs(wronskian(single_site(beta), I) - (-I - beta)), 0.0, 1e-15);
    for (double th : {0.3, 1.9, -2.7}) {
        const complex z = std::polar(1.0, th);
        EXPECT_NEAR(std::abs(wronskian(single_site(beta), z) - ((1.0 / z - z) / 2.0 - beta)), 0.0, 1e-14);
    }
}

TEST(Wronskian, IndependentOfSite) {
    const auto op = random_compact_operator(9, 4, 0.4);
    const complex z = std::polar(1.0, 0.6);
    const auto p = jost_values(op, Side::plus, z, -9, 9);
    const auto m = jost_values(op, Side::minus, z, -9, 9);
    const complex w1 = discrete_wronskian(op, p, m, 1);
    for (int n = -8; n <= 9; ++n) EXPECT_NEAR(std::abs(discrete_wronskian(op, p, m, n) - w1), 0.0, 1e-12) << n;
    EXPECT_NEAR(std::abs(wronskian(op, z) - w1), 0.0, 1e-12);
}

TEST(Wronskian, SeriesMatchesPointValues) {
    const auto op = random_compact_operator(4, 3, 0.3);
    const auto series = wronskian_series(op);
    for (double th : {-3.0, -0.4, 0.0, 1.1, 2.5}) {
        const complex z = std::polar(1.0, th);
        const auto ws = circle_wronskians(op, z);
        EXPECT_NEAR(std::abs(series.w.evaluate(z) - ws.w), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(series.w_plus.evaluate(z) - ws.w_plus), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(series.w_minus.evaluate(z) - ws.w_minus), 0.0, 1e-12);
    }
}

TEST(ScatteringMatrix, FreeOperatorIsReflectionless) {
    const auto d = scattering_matrix(JacobiOperator::free(), 128);
    for (int m = 0; m < 128; ++m) {
        EXPECT_NEAR(std::abs(d.transmission[m] - 1.0), 0.0, 1e-14) << m;
        EXPECT_LT(std::abs(d.reflection_plus[m]), 1e-14);
        EXPECT_LT(std::abs(d.reflection_minus[m]), 1e-14);
    }
}

TEST(ScatteringMatrix, SingleSiteAtQuarterTurn) {
    const auto d = scattering_matrix(single_site(0.5), 512);
    const int m = 384; // theta = pi/2
    ASSERT_NEAR(d.theta[m], std::numbers::pi / 2, 1e-15);
    EXPECT_NEAR(std::norm(d.transmission[m]), 0.8, 1e-12);
    EXPECT_NEAR(std::norm(d.reflection_plus[m]), 0.2, 1e-12);
    const auto tr = transfer(single_site(0.5), I);
    EXPECT_NEAR(std::norm(tr.transmission), 0.8, 1e-12);
    EXPECT_NEAR(std::abs(d.transmission[m] - tr.transmission), 0.0, 1e-12);
}

TEST(ScatteringMatrix, MatchesTransferMatrices) {
    const auto op = random_compact_operator(21, 5, 0.4);
    const auto d = scattering_matrix(op, 256);
    for (int m = 1; m < 256; m += 17) {
        if (m == 128) continue;
        const auto tr = transfer(op, d.z(m));
        EXPECT_NEAR(std::abs(d.transmission[m] - tr.transmission), 0.0, 1e-10) << m;
        EXPECT_NEAR(std::abs(d.reflection_plus[m] - tr.reflection_plus), 0.0, 1e-10) << m;
    }
}

TEST(ScatteringMatrix, Unitarity) {
    EXPECT_LT(scattering_matrix(single_site(0.5), 512).unitarity_residual(), 1e-10);
    for (std::uint64_t seed : {1u, 2u, 3u}) EXPECT_LT(scattering_matrix(random_compact_operator(seed, 6, 0.4), 512).unitarity_residual(), 1e-10);
}

TEST(ScatteringMatrix, ConjugateSymmetry) {
    const auto d = scattering_matrix(random_compact_operator(5, 2, 0.3), 128);
    for (int m = 1; m < 64; ++m) EXPECT_NEAR(std::abs(d.transmission[128 - m] - std::conj(d.transmission[m])), 0.0, 1e-12);
}

TEST(ScatteringMatrix, RejectsBadGrid) {
    EXPECT_THROW(scattering_matrix(JacobiOperator::free(), 32), GridError);
    EXPECT_THROW(scattering_matrix(JacobiOperator::free(), 65), GridError);
}

TEST(ScatteringRelation, Residuals) {
    EXPECT_LT(scattering_relation_residual(JacobiOperator::free(), 256), 1e-13);
    EXPECT_LT(scattering_relation_residual(single_site(0.5), 512), 1e-10);
    EXPECT_LT(scattering_relation_residual(random_compact_operator(12, 7, 0.4), 512), 1e-10);
}

TEST(Resonances, FreeOperatorResonantAtBothEdges) {
    const auto r = detect_resonances(JacobiOperator::free());
    for (const auto& e : r) {
        EXPECT_TRUE(e.is_resonant);
        ASSERT_TRUE(e.gamma.has_value());
        EXPECT_NEAR(*e.gamma, 1.0, 1e-12);
        EXPECT_NEAR(std::abs(e.transmission - 1.0), 0.0, 1e-12);
        EXPECT_LT(e.max_identity_residual(), 1e-10);
    }
}

TEST(Resonances, SingleSiteLimits) {
    const double beta = -0.3;
    const auto op = single_site(beta);
    for (double z_hat : {1.0, -1.0}) EXPECT_NEAR(std::abs(wronskian(op, z_hat) - (-beta)), 0.0, 1e-15);
    const auto r = detect_resonances(op);
    for (const auto& e : r) {
        EXPECT_FALSE(e.is_resonant);
        EXPECT_LT(std::abs(e.transmission_limit), 1e-6);
        EXPECT_LT(std::abs(e.reflection_plus_limit + 1.0), 1e-6);
        EXPECT_LT(std::abs(e.reflection_minus_limit + 1.0), 1e-6);
        EXPECT_LT(e.continuity_gap, 1e-6);
    }
}

TEST(Resonances, BisectionTunedEdgeResonance) {
    // b(0) = -1/4 fixed, b(1) tuned so that W(1) = 0
    auto w_at_one = [](double b1) { return wronskian(JacobiOperator(1, {}, {{0, -0.25}, {1, b1}}), 1.0).real(); };
    double lo = 0.0, hi = 0.5;
    ASSERT_LT(w_at_one(lo) * w_at_one(hi), 0.0);
    for (int i = 0; i < 200 && hi - lo > 1e-17; ++i) {
        const double mid = 0.5 * (lo + hi);
        (w_at_one(lo) * w_at_one(mid) <= 0.0 ? hi : lo) = mid;
    }
    const JacobiOperator op(1, {}, {{0, -0.25}, {1, 0.5 * (lo + hi)}});
    const auto r = detect_resonances(op);
    EXPECT_TRUE(r[0].is_resonant);
    EXPECT_FALSE(r[1].is_resonant);
    ASSERT_TRUE(r[0].gamma.has_value());
    EXPECT_GT(std::abs(*r[0].gamma - 1.0), 0.1);
    EXPECT_LT(r[0].gamma_imag, 1e-10);
    EXPECT_LT(r[0].max_identity_residual(), 1e-8);
    EXPECT_LT(r[0].proportionality_residual, 1e-8);
}

TEST(EdgeLimits, ConvergeToTheEdgeValues) {
    const auto op = random_compact_operator(2, 3, 0.3);
    const auto d = scattering_matrix(op, 512);
    for (double z_hat : {1.0, -1.0}) {
        const auto lim = edge_limits(op, z_hat, 0.01);
        const auto& e = d.resonance(z_hat);
        EXPECT_LT(std::abs(lim.transmission - e.transmission), 1e-8);
        EXPECT_LT(std::abs(lim.reflection_plus - e.reflection_plus), 1e-8);
    }
}

TEST(Resolvent, FreeClosedForm) {
    const complex z = std::polar(0.6, 1.3);
    const auto r = resolvent_kernel(JacobiOperator::free(), z, 5);
    for (int n = -5; n <= 5; ++n)
        for (int k = -5; k <= 5; ++k) {
            const complex expect = -2.0 * std::pow(z, std::abs(n - k)) / (1.0 / z - z);
            EXPECT_NEAR(std::abs(r(n, k) - expect), 0.0, 1e-13);
        }
}

TEST(Resolvent, InvertsShiftedOperator) {
    const auto op = random_compact_operator(6, 3, 0.4);
    const complex z = std::polar(0.7, 2.1);
    const complex lambda = 0.5 * (z + 1.0 / z);
    const int window = 6;
    const auto r = resolvent_kernel(op, z, window);
    // (H - lambda) R = identity on rows away from the window edge
    for (int k = -window; k <= window; ++k) {
        ComplexSequence col(-window, window);
        for (int n = -window; n <= window; ++n) col[n] = r(n, k);
        const auto hc = jscat::apply(op, col);
        for (int n = hc.first(); n <= hc.last(); ++n)
            EXPECT_NEAR(std::abs(hc[n] - lambda * col[n] - (n == k ? 1.0 : 0.0)), 0.0, 1e-12) << n << "," << k;
    }
}

TEST(Resolvent, BoundStatePoleAndBadArguments) {
    // W(z) = (1/z - z)/2 - 3/4 vanishes at z = 1/2
    EXPECT_THROW(resolvent_kernel(single_site(0.75), 0.5, 3), PoleError);
    EXPECT_THROW(resolvent_kernel(JacobiOperator::free(), 1.0, 3), ConfigError);
}
