#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "jscat/operator_io.hpp"
#include "jscat/wiener.hpp"

using namespace jscat;

namespace {

const MembershipReport* find(const std::vector<MembershipReport>& reports, const std::string& name) {
    for (const auto& r : reports)
        if (r.quantity == name) return &r;
    return nullptr;
}

} // namespace

TEST(Membership, FreeOperatorHasTrivialSeries) {
    const auto reports = membership_report(JacobiOperator::free());
    const auto* t = find(reports, "T");
    ASSERT_NE(t, nullptr);
    for (const auto& g : t->orders[0].grids) {
        EXPECT_NEAR(g.wiener_norm, 1.0, 1e-13);
        EXPECT_EQ(g.tail_fraction, 0.0);
    }
    for (const auto& r : reports) {
        EXPECT_TRUE(r.all_summable()) << r.quantity;
        for (const auto& o : r.orders)
            for (const auto& g : o.grids) EXPECT_EQ(g.tail_fraction, 0.0) << r.quantity << " l=" << o.l;
    }
}

TEST(Membership, CoversEveryQuantity) {
    MembershipOptions opt;
    opt.grids = {64, 128};
    const auto reports = membership_report(JacobiOperator(0, {}, {{0, 0.5}}), opt);
    // 3 scattering + 6 sampled phi~ + 4 Psi~, each with two divided differences
    EXPECT_EQ(reports.size(), 39u);
    ASSERT_NE(find(reports, "dd[T](1)"), nullptr);
    ASSERT_NE(find(reports, "dd[Psi~-[-1]](-1)"), nullptr);
    EXPECT_EQ(find(reports, "T")->orders.size(), 3u);
    EXPECT_EQ(find(reports, "dd[T](1)")->orders.size(), 2u);
}

TEST(Membership, SingleSiteAllSummable) {
    const auto reports = membership_report(JacobiOperator(0, {}, {{0, 0.5}}));
    for (const auto& r : reports)
        for (const auto& o : r.orders) {
            EXPECT_EQ(o.verdict, Verdict::summable) << r.quantity << " l=" << o.l;
            EXPECT_LT(o.grids.back().tail_fraction, 1e-4);
        }
}

TEST(Membership, TransmissionNormStableUnderRefinement) {
    const JacobiOperator op(0, {}, {{0, 0.5}});
    auto norm_at = [&](int m) {
        return sampled_series(scattering_matrix(op, m).transmission_samples()).wiener_norm();
    };
    EXPECT_LT(std::abs(norm_at(512) - norm_at(256)), 1e-6);
}

TEST(Membership, MomentOrderCapsVerdicts) {
    MembershipOptions opt;
    opt.grids = {64, 128};
    opt.moment_order = 1.0;
    const auto reports = membership_report(JacobiOperator(0, {}, {{0, 0.5}}), opt);
    const auto* t = find(reports, "T");
    EXPECT_EQ(t->orders[0].verdict, Verdict::summable);
    EXPECT_EQ(t->orders[1].verdict, Verdict::inconclusive);
    EXPECT_FALSE(t->orders[1].note.empty());
    EXPECT_EQ(find(reports, "dd[T](1)")->orders[0].verdict, Verdict::inconclusive);
}

TEST(Membership, RejectsBadOptions) {
    MembershipOptions opt;
    opt.grids = {100};
    EXPECT_THROW(membership_report(JacobiOperator::free(), opt), GridError);
    opt.grids = {};
    EXPECT_THROW(membership_report(JacobiOperator::free(), opt), ConfigError);
    opt.grids = {64};
    opt.l_max = -1;
    EXPECT_THROW(membership_report(JacobiOperator::free(), opt), ConfigError);
}

TEST(Verdict, Rule) {
    using G = GridMeasurement;
    EXPECT_EQ(membership_verdict({G{256, 1, 1e-3}, G{512, 1, 1e-5}}, 1e-4, 1e-6), Verdict::summable);
    EXPECT_EQ(membership_verdict({G{256, 1, 1e-5}, G{512, 1, 1e-3}}, 1e-4, 1e-6), Verdict::inconclusive);
    EXPECT_EQ(membership_verdict({G{256, 1, 1e-5}, G{512, 1, 5e-5}}, 1e-4, 1e-6), Verdict::inconclusive);
    // growth below the noise floor is converged round-off
    EXPECT_EQ(membership_verdict({G{256, 1, 1e-12}, G{512, 1, 3e-12}}, 1e-4, 1e-6), Verdict::summable);
    EXPECT_EQ(membership_verdict({G{256, 1, NAN}}, 1e-4, 1e-6), Verdict::inconclusive);
    EXPECT_EQ(membership_verdict({}, 1e-4, 1e-6), Verdict::inconclusive);
}

TEST(Chop, ZeroesRoundOffOnly) {
    const auto s = chop(FourierSeries(0, {1.0, 1e-16, 1e-9}), 1.0);
    EXPECT_EQ(s[1], complex(0.0));
    EXPECT_EQ(s[2], complex(1e-9));
}

TEST(JostNormScan, StabilisesInN) {
    const auto op = random_compact_operator(17, 4, 0.35);
    const auto scan = jost_norm_scan(op, Side::plus, 0, 30);
    ASSERT_EQ(scan.norms.size(), 31u);
    EXPECT_TRUE(std::isfinite(scan.max()));
    // beyond the support phi~_+ = 1, so the scan is flat there
    double beyond = 0.0;
    for (std::size_t i = 5; i < scan.norms.size(); ++i) beyond = std::max(beyond, scan.norms[i]);
    EXPECT_LT(beyond - scan.norms.back(), 1e-8);
    EXPECT_NEAR(scan.norms.back(), 1.0, 1e-15);
    const auto ex = jost_kernel(op, Side::plus, 2).normalized_series().wiener_norm();
    EXPECT_NEAR(scan.norms[2], ex, 1e-15);
}

TEST(WienerAlgebra, Submultiplicative) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<complex> a(9), b(7);
        for (auto& v : a) v = complex(g(rng), g(rng));
        for (auto& v : b) v = complex(g(rng), g(rng));
        const FourierSeries f(-4, a), h(-2, b);
        // product through samples, as a sampled quantity would be
        const auto fh = fourier_coefficients(
            CircleFunction::sample([&](complex z) { return f.evaluate(z) * h.evaluate(z); }, 64));
        EXPECT_LE(fh.wiener_norm(), f.wiener_norm() * h.wiener_norm() + 1e-8);
    }
}

TEST(WienerAlgebra, ReciprocalBound) {
    // f = 1 + g with ||g||_A = 0.6 < 1
    const FourierSeries f(-2, {0.1, -0.2, 1.0, 0.15, 0.15});
    const double dist = 0.6;
    const auto inv = reciprocal_series(f, 1024);
    EXPECT_LE(inv.wiener_norm(), 1.0 / (1.0 - dist) + 1e-6);
    EXPECT_LT(inv.tail_fraction(), 1e-12);
    // f * (1/f) = 1
    const complex z = std::polar(1.0, 0.9);
    EXPECT_NEAR(std::abs(f.evaluate(z) * inv.evaluate(z) - 1.0), 0.0, 1e-12);
}

TEST(DecayRadius, SingleSiteRoot) {
    // W(z) = (1/z - z)/2 - beta has roots -beta +- sqrt(beta^2 + 1)
    const double beta = 0.5;
    EXPECT_NEAR(coefficient_decay_radius(JacobiOperator(0, {}, {{0, beta}})), beta + std::sqrt(beta * beta + 1.0), 1e-12);
    EXPECT_TRUE(std::isinf(coefficient_decay_radius(JacobiOperator::free())));
}

TEST(DecayRadius, GovernsTransmissionCoefficients) {
    const JacobiOperator op(0, {}, {{0, 0.5}});
    const double rho = coefficient_decay_radius(op);
    const auto t = sampled_series(scattering_matrix(op, 512).transmission_samples());
    // T is analytic in 1/rho < |z| < rho apart from the known zeros: |c(m)| ~ rho^-|m|
    const double ratio = std::abs(t[21]) / std::abs(t[20]);
    EXPECT_NEAR(ratio, 1.0 / rho, 0.02);
}

TEST(ResolvingGrids, DefaultsWhenAlreadyResolved) {
    const std::vector<int> defaults{256, 512, 1024};
    EXPECT_EQ(resolving_grids(JacobiOperator::free()), defaults);
    EXPECT_EQ(resolving_grids(JacobiOperator(0, {}, {{0, 0.5}})), defaults);
}

TEST(ResolvingGrids, ThinAnnulusGetsFineGrids) {
    const auto op = random_compact_operator(5, 6, 0.4);
    const double log_rho = std::log(coefficient_decay_radius(op));
    auto share = [&](int m) {
        const double x = m / 4.0 * log_rho;
        return x * x * std::exp(-x);
    };
    const auto grids = resolving_grids(op);
    ASSERT_EQ(grids.size(), 3u);
    EXPECT_LE(share(grids.back()), 1e-6);
    EXPECT_GT(share(grids.back() / 2), 1e-6);
    EXPECT_EQ(resolving_grids(op, 2, 4096).back(), 4096);
}
