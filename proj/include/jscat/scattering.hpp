#pragma once

// Wronskians, transmission and reflection coefficients, edge resonances and the
// resolvent kernel.
//
// Conventions (pinned by the free operator): with W(z) = W(phi_+, phi_-) and
// W_{+-}(z) = W(phi_-+(z), phi_{+-}(z^{-1})),
//   T(z) = (z^{-1} - z) / (2 W(z)),  R_+(z) = W_+(z)/W(z),  R_-(z) = -W_-(z)/W(z),
// which gives T = 1, R = 0 for the free operator and satisfies
//   T(z) phi_{+-}(z, n) = R_{-+}(z) phi_{-+}(z, n) + phi_{-+}(z^{-1}, n).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "jscat/jost.hpp"
#include "jscat/lattice.hpp"

namespace jscat {

/// W(f, g) at site n: a(n-1) (f(n-1) g(n) - g(n-1) f(n)).
inline complex discrete_wronskian(const JacobiOperator& op, const ComplexSequence& f, const ComplexSequence& g, int n) {
    return op.a(n - 1) * (f.at(n - 1) * g.at(n) - g.at(n - 1) * f.at(n));
}

struct WronskianCheck {
    complex value = 0.0;
    /// |W at site 1 - W at site 5| / max(1, |W|).
    double site_mismatch = 0.0;
};

/// W(z) = W(phi_+(z), phi_-(z)) evaluated at site 1 and re-checked at site 5.
inline WronskianCheck wronskian_checked(const JacobiOperator& op, complex z) {
    const auto plus = jost_values(op, Side::plus, z, 0, 5);
    const auto minus = jost_values(op, Side::minus, z, 0, 5);
    WronskianCheck out;
    out.value = discrete_wronskian(op, plus, minus, 1);
    const complex far = discrete_wronskian(op, plus, minus, 5);
    out.site_mismatch = std::abs(out.value - far) / std::max(1.0, std::abs(out.value));
    return out;
}

namespace detail {

// W(f, g) at site 1 from extended-precision values on [0, 1]: the Jost solutions can be
// large there while W is O(1), so the cancellation is done before rounding.
inline complex wide_wronskian(const JacobiOperator& op, const WideSequence& f, const WideSequence& g) {
    return complex(static_cast<long double>(op.a(0)) * (f[0] * g[1] - g[0] * f[1]));
}

inline WideSequence edge_pair(const JacobiOperator& op, Side side, wide_complex z) { return wide_jost(op, side, z, 0, 1, false); }

// 1/z in extended precision: near small a(n) the Jost solutions have |d phi/dz| ~ 1e6, so
// the rounding of a double reciprocal alone shows up in phi(1/z).
inline wide_complex wide_inverse(complex z) { return 1.0L / wide_complex(z); }

} // namespace detail

inline complex wronskian(const JacobiOperator& op, complex z) {
    if (z == 0.0) throw ConfigError("the Wronskian is undefined at z = 0");
    return detail::wide_wronskian(op, detail::edge_pair(op, Side::plus, z), detail::edge_pair(op, Side::minus, z));
}

struct WronskianSet {
    complex w = 0.0;
    complex w_plus = 0.0;  // W(phi_-(z), phi_+(z^{-1}))
    complex w_minus = 0.0; // W(phi_+(z), phi_-(z^{-1}))
};

/// The three Wronskians on the unit circle.
inline WronskianSet circle_wronskians(const JacobiOperator& op, complex z) {
    const auto zi = detail::wide_inverse(z);
    const auto plus = detail::edge_pair(op, Side::plus, z);
    const auto minus = detail::edge_pair(op, Side::minus, z);
    const auto plus_inv = detail::edge_pair(op, Side::plus, zi);
    const auto minus_inv = detail::edge_pair(op, Side::minus, zi);
    return {detail::wide_wronskian(op, plus, minus), detail::wide_wronskian(op, minus, plus_inv),
            detail::wide_wronskian(op, plus, minus_inv)};
}

/// Laurent series of z -> phi_{+-}(z^{+-1}, n) built from the transformation kernel
/// (inverted = true gives the series of phi(z^{-1}, n)).
inline FourierSeries jost_series(const TransformationKernel& kernel, bool inverted = false) {
    const int shift = sign(kernel.side) * kernel.n;
    const int deg = static_cast<int>(kernel.coefficients.size()) - 1;
    std::vector<complex> c(kernel.coefficients.size());
    if (!inverted) {
        for (int j = 0; j <= deg; ++j) c[static_cast<std::size_t>(j)] = kernel.coefficients[static_cast<std::size_t>(j)];
        return FourierSeries(shift, std::move(c));
    }
    for (int j = 0; j <= deg; ++j) c[static_cast<std::size_t>(deg - j)] = kernel.coefficients[static_cast<std::size_t>(j)];
    return FourierSeries(-shift - deg, std::move(c));
}

struct WronskianSeries {
    FourierSeries w, w_plus, w_minus;
};

/// W, W_+ and W_- as exact Laurent polynomials (compact support makes every Jost
/// solution a Laurent polynomial in z).
inline WronskianSeries wronskian_series(const JacobiOperator& op) {
    const auto kp = jost_kernels(op, Side::plus, 0, 1);
    const auto km = jost_kernels(op, Side::minus, 0, 1);
    const FourierSeries p0 = jost_series(kp[0]), p1 = jost_series(kp[1]);
    const FourierSeries m0 = jost_series(km[0]), m1 = jost_series(km[1]);
    const FourierSeries pi0 = jost_series(kp[0], true), pi1 = jost_series(kp[1], true);
    const FourierSeries mi0 = jost_series(km[0], true), mi1 = jost_series(km[1], true);
    const double a0 = op.a(0);
    auto wr = [a0](const FourierSeries& f0, const FourierSeries& f1, const FourierSeries& g0, const FourierSeries& g1) {
        FourierSeries out = add(multiply(f0, g1), multiply(g0, f1), -1.0);
        std::vector<complex> c = out.coefficients();
        for (auto& v : c) v *= a0;
        return FourierSeries(out.first(), std::move(c));
    };
    return {wr(p0, p1, m0, m1), wr(m0, m1, pi0, pi1), wr(p0, p1, mi0, mi1)};
}

/// Value of a smooth periodic grid function at index i reconstructed from its
/// neighbours i +- 1 .. i +- width by polynomial interpolation.
inline complex removable_value(const std::vector<complex>& values, int index, int width = 5) {
    const int m = static_cast<int>(values.size());
    std::vector<int> offsets;
    for (int j = 1; j <= width; ++j) {
        offsets.push_back(-j);
        offsets.push_back(j);
    }
    complex acc = 0.0;
    for (int xj : offsets) {
        double weight = 1.0;
        for (int xi : offsets)
            if (xi != xj) weight *= static_cast<double>(-xi) / static_cast<double>(xj - xi);
        acc += weight * values[static_cast<std::size_t>(((index + xj) % m + m) % m)];
    }
    return acc;
}

struct EdgeLimits {
    complex transmission = 0.0, reflection_plus = 0.0, reflection_minus = 0.0;
    double step = 0.0;   // final stencil spacing in theta
    double change = 0.0; // difference between the last two refinements
};

/// Limits of T, R_+ and R_- as z -> z_hat along the circle: 10-point symmetric stencils
/// theta_hat +- k delta, k = 1..5, with delta shrunk by 4 until two successive
/// extrapolations agree (the scale on which T varies near z_hat is |W(z_hat)|).
inline EdgeLimits edge_limits(const JacobiOperator& op, double z_hat, double delta0, double tol = 1e-13,
                              double delta_min = 1e-6) {
    const double center = z_hat > 0 ? 0.0 : std::numbers::pi;
    auto extrapolate = [&](double delta) {
        std::vector<complex> t(11), rp(11), rm(11);
        for (int k = -5; k <= 5; ++k) {
            if (k == 0) continue;
            const complex z = std::polar(1.0, center + k * delta);
            const auto ws = circle_wronskians(op, z);
            const auto i = static_cast<std::size_t>((k + 11) % 11);
            t[i] = (1.0 / z - z) / (2.0 * ws.w);
            rp[i] = ws.w_plus / ws.w;
            rm[i] = -ws.w_minus / ws.w;
        }
        return std::array<complex, 3>{removable_value(t, 0), removable_value(rp, 0), removable_value(rm, 0)};
    };
    EdgeLimits out;
    double delta = delta0;
    auto previous = extrapolate(delta);
    while (true) {
        const double next = delta / 4.0;
        if (next < delta_min) break;
        const auto current = extrapolate(next);
        out.change = std::max({std::abs(current[0] - previous[0]), std::abs(current[1] - previous[1]),
                               std::abs(current[2] - previous[2])});
        previous = current;
        delta = next;
        if (out.change < tol) break;
    }
    out.transmission = previous[0];
    out.reflection_plus = previous[1];
    out.reflection_minus = previous[2];
    out.step = delta;
    return out;
}

struct ResonanceReport {
    double z_hat = 1.0;
    bool is_resonant = false;
    complex wronskian_value = 0.0;
    /// max grid |W| used to normalise the resonance test.
    double wronskian_scale = 1.0;
    std::optional<double> gamma;
    double gamma_imag = 0.0;
    /// max_n |phi_+(z_hat,n) - gamma phi_-(z_hat,n)| / max_n |phi_+(z_hat,n)|.
    double proportionality_residual = 0.0;
    bool ill_conditioned = false;
    /// Values at z_hat (exact limits).
    complex transmission = 0.0;
    complex reflection_plus = 0.0;
    complex reflection_minus = 0.0;
    /// Limits approached along the circle (edge_limits), independent of the edge formulas.
    complex transmission_limit = 0.0;
    complex reflection_plus_limit = 0.0;
    complex reflection_minus_limit = 0.0;
    /// Largest difference between the exact edge values and the grid limits.
    double continuity_gap = 0.0;
    /// Resonant: |T - 2g/(1+g^2)|, |R_+- -+ (1-g^2)/(1+g^2)| at the exact edge values.
    /// Non-resonant: |T|, |R_+- + 1| for the grid limits.
    double transmission_residual = 0.0;
    double reflection_plus_residual = 0.0;
    double reflection_minus_residual = 0.0;

    double max_identity_residual() const {
        return std::max({transmission_residual, reflection_plus_residual, reflection_minus_residual});
    }
};

struct ScatteringData {
    int grid_size = 0;
    std::vector<double> theta; // theta_m = -pi + 2 pi m / M
    std::vector<complex> w, w_plus, w_minus;
    std::vector<complex> transmission, reflection_plus, reflection_minus;
    std::array<ResonanceReport, 2> resonances; // [0]: z_hat = +1, [1]: z_hat = -1

    complex z(int m) const { return std::polar(1.0, theta[static_cast<std::size_t>(m)]); }

    /// Index of the grid point e^{i theta} = z_hat.
    int edge_index(double z_hat) const { return z_hat > 0 ? grid_size / 2 : 0; }

    const ResonanceReport& resonance(double z_hat) const { return resonances[z_hat > 0 ? 0 : 1]; }

    double unitarity_residual() const {
        double worst = 0.0;
        for (int m = 0; m < grid_size; ++m) {
            const auto i = static_cast<std::size_t>(m);
            const double t2 = std::norm(transmission[i]);
            worst = std::max(worst, std::abs(t2 + std::norm(reflection_plus[i]) - 1.0));
            worst = std::max(worst, std::abs(t2 + std::norm(reflection_minus[i]) - 1.0));
        }
        return worst;
    }

    CircleFunction transmission_samples() const { return CircleFunction(-std::numbers::pi, transmission); }
    CircleFunction reflection_samples(Side side) const {
        return CircleFunction(-std::numbers::pi, side == Side::plus ? reflection_plus : reflection_minus);
    }
};

namespace detail {

inline ResonanceReport classify_edge(const JacobiOperator& op, const ScatteringData& data, double z_hat, double tol) {
    ResonanceReport report;
    report.z_hat = z_hat;
    const auto edge = static_cast<std::size_t>(data.edge_index(z_hat));
    report.wronskian_value = data.w[edge];
    double scale = 0.0;
    for (const auto& v : data.w) scale = std::max(scale, std::abs(v));
    report.wronskian_scale = scale > 0.0 ? scale : 1.0;
    report.is_resonant = std::abs(report.wronskian_value) < tol * report.wronskian_scale;
    report.transmission = data.transmission[edge];
    report.reflection_plus = data.reflection_plus[edge];
    report.reflection_minus = data.reflection_minus[edge];
    const auto limits = edge_limits(op, z_hat, 2.0 * std::numbers::pi / data.grid_size);
    report.transmission_limit = limits.transmission;
    report.reflection_plus_limit = limits.reflection_plus;
    report.reflection_minus_limit = limits.reflection_minus;
    report.continuity_gap = std::max({std::abs(report.transmission_limit - report.transmission),
                                      std::abs(report.reflection_plus_limit - report.reflection_plus),
                                      std::abs(report.reflection_minus_limit - report.reflection_minus)});

    if (!report.is_resonant) {
        report.transmission_residual = std::abs(report.transmission_limit);
        report.reflection_plus_residual = std::abs(report.reflection_plus_limit + 1.0);
        report.reflection_minus_residual = std::abs(report.reflection_minus_limit + 1.0);
        return report;
    }

    // gamma = <phi_+, phi_-> / <phi_-, phi_-> over a window around the support.
    const int half = op.support_radius() + 10;
    const auto plus = jost_values(op, Side::plus, z_hat, -half, half);
    const auto minus = jost_values(op, Side::minus, z_hat, -half, half);
    complex num = 0.0;
    double den = 0.0;
    double plus_scale = 0.0;
    for (int n = -half; n <= half; ++n) {
        num += plus[n] * std::conj(minus[n]);
        den += std::norm(minus[n]);
        plus_scale = std::max(plus_scale, std::abs(plus[n]));
    }
    if (den < 1e-300 || plus_scale == 0.0) {
        report.ill_conditioned = true;
        report.transmission_residual = report.reflection_plus_residual = report.reflection_minus_residual =
            std::numeric_limits<double>::infinity();
        return report;
    }
    const complex gamma = num / den;
    report.gamma = gamma.real();
    report.gamma_imag = std::abs(gamma.imag());
    for (int n = -half; n <= half; ++n)
        report.proportionality_residual =
            std::max(report.proportionality_residual, std::abs(plus[n] - gamma * minus[n]) / plus_scale);
    const double g = gamma.real();
    const double denom = 1.0 + g * g;
    report.transmission_residual = std::abs(report.transmission - 2.0 * g / denom);
    report.reflection_plus_residual = std::abs(report.reflection_plus - (1.0 - g * g) / denom);
    report.reflection_minus_residual = std::abs(report.reflection_minus + (1.0 - g * g) / denom);
    return report;
}

} // namespace detail

/// T and R_{+-} on the M-point grid; entries at sin(theta) = 0 are continuous extensions
/// (never evaluated as 0/0).
inline ScatteringData scattering_matrix(const JacobiOperator& op, int grid_size, double resonance_tol = 1e-8) {
    if (grid_size < 64 || grid_size % 2 != 0)
        throw GridError("scattering grid must be even and at least 64 points (got " + std::to_string(grid_size) + ")");
    ScatteringData data;
    data.grid_size = grid_size;
    const auto m_size = static_cast<std::size_t>(grid_size);
    data.theta.resize(m_size);
    data.w.resize(m_size);
    data.w_plus.resize(m_size);
    data.w_minus.resize(m_size);
    data.transmission.resize(m_size);
    data.reflection_plus.resize(m_size);
    data.reflection_minus.resize(m_size);
    for (int m = 0; m < grid_size; ++m) {
        const auto i = static_cast<std::size_t>(m);
        data.theta[i] = CircleFunction::angle(-std::numbers::pi, m, grid_size);
        const complex z = data.z(m);
        const auto ws = circle_wronskians(op, z);
        data.w[i] = ws.w;
        data.w_plus[i] = ws.w_plus;
        data.w_minus[i] = ws.w_minus;
        if (m == 0 || m == grid_size / 2) continue;
        data.transmission[i] = (1.0 / z - z) / (2.0 * ws.w);
        data.reflection_plus[i] = ws.w_plus / ws.w;
        data.reflection_minus[i] = -ws.w_minus / ws.w;
    }
    // Edge values: direct where W(z_hat) != 0, otherwise the limit through
    // W(z) = (z - z_hat) Q(z) with Q the divided difference of the Wronskian series.
    double w_scale = 0.0;
    for (const auto& v : data.w) w_scale = std::max(w_scale, std::abs(v));
    if (w_scale == 0.0) w_scale = 1.0;
    std::optional<WronskianSeries> series;
    for (int edge : {0, grid_size / 2}) {
        const auto i = static_cast<std::size_t>(edge);
        const double z_hat = edge == 0 ? -1.0 : 1.0;
        if (std::abs(data.w[i]) >= resonance_tol * w_scale) {
            data.transmission[i] = 0.0;
            data.reflection_plus[i] = data.w_plus[i] / data.w[i];
            data.reflection_minus[i] = -data.w_minus[i] / data.w[i];
            continue;
        }
        if (!series) series = wronskian_series(op);
        const complex q = divided_difference(series->w, z_hat).evaluate(z_hat);
        const complex q_plus = divided_difference(series->w_plus, z_hat).evaluate(z_hat);
        const complex q_minus = divided_difference(series->w_minus, z_hat).evaluate(z_hat);
        data.transmission[i] = -1.0 / q;
        data.reflection_plus[i] = q_plus / q;
        data.reflection_minus[i] = -q_minus / q;
    }
    data.resonances[0] = detail::classify_edge(op, data, 1.0, resonance_tol);
    data.resonances[1] = detail::classify_edge(op, data, -1.0, resonance_tol);
    return data;
}

/// Resonance reports for z_hat = +1 and z_hat = -1 (in that order).
inline std::array<ResonanceReport, 2> detect_resonances(const JacobiOperator& op, double tol = 1e-8,
                                                        int grid_size = 512) {
    if (!(tol > 0.0)) throw ConfigError("resonance tolerance must be positive");
    return scattering_matrix(op, grid_size, tol).resonances;
}

/// max over the grid, n in [-window, window] and both signs of
/// |T phi_{+-}(z,n) - R_{-+} phi_{-+}(z,n) - phi_{-+}(z^{-1},n)|.
inline double scattering_relation_residual(const JacobiOperator& op, const ScatteringData& data, int window = 10) {
    double worst = 0.0;
    for (int m = 0; m < data.grid_size; ++m) {
        const auto i = static_cast<std::size_t>(m);
        const complex z = data.z(m);
        // Where a Jost solution is large the relation cancels terms of that size, so it is
        // evaluated in extended precision; T and R enter as stored.
        const auto plus = detail::wide_jost(op, Side::plus, z, -window, window, false);
        const auto minus = detail::wide_jost(op, Side::minus, z, -window, window, false);
        const auto plus_inv = detail::wide_jost(op, Side::plus, detail::wide_inverse(z), -window, window, false);
        const auto minus_inv = detail::wide_jost(op, Side::minus, detail::wide_inverse(z), -window, window, false);
        const detail::wide_complex t(data.transmission[i]), rp(data.reflection_plus[i]), rm(data.reflection_minus[i]);
        for (int n = -window; n <= window; ++n) {
            const auto r1 = t * plus[n] - rm * minus[n] - minus_inv[n];
            const auto r2 = t * minus[n] - rp * plus[n] - plus_inv[n];
            worst = std::max({worst, static_cast<double>(std::abs(r1)), static_cast<double>(std::abs(r2))});
        }
    }
    return worst;
}

inline double scattering_relation_residual(const JacobiOperator& op, int grid_size, int window = 10) {
    return scattering_relation_residual(op, scattering_matrix(op, grid_size), window);
}

/// Kernel of (H - (z + 1/z)/2)^{-1} on [-window, window]^2 for 0 < |z| < 1:
///   R(n, k) = phi_+(z, max(n,k)) phi_-(z, min(n,k)) / W(phi_-, phi_+).
inline WindowedKernel resolvent_kernel(const JacobiOperator& op, complex z, int window, double pole_tol = 1e-12) {
    if (!(std::abs(z) > 0.0 && std::abs(z) < 1.0)) throw ConfigError("resolvent needs 0 < |z| < 1");
    const auto plus = jost_values(op, Side::plus, z, -window - 1, window + 1);
    const auto minus = jost_values(op, Side::minus, z, -window - 1, window + 1);
    const complex w = discrete_wronskian(op, plus, minus, 1);
    if (std::abs(w) < pole_tol * (std::abs(z) + 1.0 / std::abs(z)))
        throw PoleError("W(z) vanishes: z is a pole of the resolvent");
    WindowedKernel out = WindowedKernel::zero(0.0, window);
    for (int n = -window; n <= window; ++n)
        for (int k = -window; k <= window; ++k) out(n, k) = -plus[std::max(n, k)] * minus[std::min(n, k)] / w;
    return out;
}

} // namespace jscat
