#pragma once

// Time evolution e^{-itH} P_ac: spectral and oscillatory-integral propagators,
// edge resonance projectors and the leading term they generate, decay fits and
// the van der Corput bound check.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "jscat/fourier.hpp"
#include "jscat/jost.hpp"
#include "jscat/lattice.hpp"
#include "jscat/parallel.hpp"
#include "jscat/scattering.hpp"
#include "jscat/spectral.hpp"

namespace jscat {

enum class PropagatorMethod { spectral, oscillatory };

struct PropagatorRequest {
    JacobiOperator op;
    double t = 0.0;
    int window = 10;
    PropagatorMethod method = PropagatorMethod::spectral;
    int quadrature = 0; // oscillatory: fixed Q if > 0, otherwise doubling from 64
    int truncation = 0; // spectral: N_trunc if > 0, otherwise default_truncation
    int margin = 20;          // minimum Dirichlet margin
    bool adapt_margin = true; // widen the margin for weakly bound states (adaptive_margin)

    int effective_truncation() const {
        if (truncation > 0) return truncation;
        return default_truncation(op, t, window, adapt_margin ? adaptive_margin(op, margin) : margin);
    }
};

struct PropagatorResult {
    WindowedKernel kernel;
    PropagatorMethod method = PropagatorMethod::spectral;
    int truncation = 0;
    int matrix_side = 0;
    int retained_pairs = 0;
    int quadrature_points = 0;
    double last_change = 0.0; // oscillatory: max entrywise change of the final doubling
    bool converged = true;
};

inline PropagatorResult propagator_spectral(const PropagatorRequest& req) {
    const int n_trunc = req.effective_truncation();
    if (n_trunc < req.window + static_cast<int>(std::ceil(std::abs(req.t))) + req.margin)
        throw TruncationError("N_trunc = " + std::to_string(n_trunc) + " is below N_obs + ceil(t) + margin");
    const auto prop = spectral_propagator(req.op, n_trunc);
    PropagatorResult out;
    out.kernel = prop.kernel(req.t, req.window);
    out.truncation = n_trunc;
    out.matrix_side = prop.matrix_side();
    out.retained_pairs = prop.retained_count();
    return out;
}

namespace detail {

// Trapezoid rule on the half-shifted grid theta_j = -pi + 2 pi (j + 1/2) / Q, which
// never touches the band edges.
inline WindowedKernel oscillatory_kernel(const JacobiOperator& op, double t, int window, int q) {
    WindowedKernel out = WindowedKernel::zero(t, window);
    const int lo = std::min(-window, 0);
    const int hi = std::max(window, 1);
    const int side = out.side();
    Eigen::VectorXcd plus(side), minus(side);
    for (int j = 0; j < q; ++j) {
        const double theta = -std::numbers::pi + 2.0 * std::numbers::pi * (j + 0.5) / q;
        const complex z = std::polar(1.0, theta);
        const auto p = jost_values(op, Side::plus, z, lo, hi);
        const auto m = jost_values(op, Side::minus, z, lo, hi);
        const complex transmission = (1.0 / z - z) / (2.0 * discrete_wronskian(op, p, m, 1));
        const complex weight = std::polar(1.0, -t * std::cos(theta)) * transmission / static_cast<double>(q);
        for (int n = -window; n <= window; ++n) {
            plus(n + window) = p[n];
            minus(n + window) = m[n];
        }
        for (int c = 0; c < side; ++c)
            for (int r = c; r < side; ++r) out.entries(r, c) += weight * plus(r) * minus(c);
    }
    for (int c = 0; c < side; ++c)
        for (int r = 0; r < c; ++r) out.entries(r, c) = out.entries(c, r);
    return out;
}

} // namespace detail

/// (1/2pi) int e^{-it cos theta} phi_+(e^{i theta}, max(n,k)) phi_-(e^{i theta}, min(n,k)) T(e^{i theta}) d theta.
inline PropagatorResult propagator_oscillatory(const PropagatorRequest& req, double tol = 1e-9, int max_q = 1 << 16) {
    PropagatorResult out;
    out.method = PropagatorMethod::oscillatory;
    if (req.quadrature > 0) {
        out.kernel = detail::oscillatory_kernel(req.op, req.t, req.window, req.quadrature);
        out.quadrature_points = req.quadrature;
        return out;
    }
    int q = 64;
    WindowedKernel previous = detail::oscillatory_kernel(req.op, req.t, req.window, q);
    while (true) {
        const int next = 2 * q;
        WindowedKernel current = detail::oscillatory_kernel(req.op, req.t, req.window, next);
        out.last_change = (current.entries - previous.entries).cwiseAbs().maxCoeff();
        q = next;
        previous = std::move(current);
        if (out.last_change < tol || q >= max_q) break;
    }
    out.converged = out.last_change < tol;
    out.kernel = std::move(previous);
    out.quadrature_points = q;
    return out;
}

inline PropagatorResult propagate(const PropagatorRequest& req) {
    return req.method == PropagatorMethod::spectral ? propagator_spectral(req) : propagator_oscillatory(req);
}

/// Rank-one kernel [P](n,k) = phi(n) phi(k) of the bounded edge solution, normalised so
/// that |phi(n)|^2 + |phi(-n)|^2 -> 2.
struct ProjectorKernel {
    double z_hat = 1.0;
    int window = 0;
    double gamma = 1.0;
    double transmission = 1.0;
    Eigen::MatrixXd entries;
    /// max |phi_hat(n) phi_hat(k) - phi_+(n) phi_-(k) T(z_hat)| over the window.
    double construction_residual = 0.0;
    /// max |(H phi_hat)(n) - z_hat phi_hat(n)| over the window.
    double eigen_residual = 0.0;

    double operator()(int n, int k) const { return entries(n + window, k + window); }
};

inline ProjectorKernel resonance_projector(const JacobiOperator& op, const ResonanceReport& report, int window) {
    if (!report.is_resonant || !report.gamma) throw NotResonant("z_hat = " + std::to_string(report.z_hat) + " is not a resonance");
    const double z_hat = report.z_hat;
    const double g = *report.gamma;
    ProjectorKernel out;
    out.z_hat = z_hat;
    out.window = window;
    out.gamma = g;
    out.transmission = report.transmission.real();
    const auto plus = jost_values(op, Side::plus, z_hat, -window - 1, window + 1);
    const auto minus = jost_values(op, Side::minus, z_hat, -window - 1, window + 1);
    // phi_hat = c phi_+ with c^2 = 2 / (1 + gamma^2): phi_+ -> gamma z_hat^n on the left
    // and z_hat^n on the right, so the normalisation gives c^2 (1 + gamma^2) = 2.
    const double c = std::sqrt(2.0 / (1.0 + g * g));
    ComplexSequence phi(-window - 1, window + 1);
    for (int n = phi.first(); n <= phi.last(); ++n) phi[n] = c * plus[n].real();
    const int side = 2 * window + 1;
    out.entries.resize(side, side);
    for (int n = -window; n <= window; ++n)
        for (int k = -window; k <= window; ++k) {
            const double v = phi[n].real() * phi[k].real();
            out.entries(n + window, k + window) = v;
            out.construction_residual =
                std::max(out.construction_residual, std::abs(v - (plus[n] * minus[k]).real() * out.transmission));
        }
    const auto h_phi = jscat::apply(op, phi);
    for (int n = -window; n <= window; ++n)
        out.eigen_residual = std::max(out.eigen_residual, std::abs(h_phi[n] - z_hat * phi[n]));
    return out;
}

inline ProjectorKernel resonance_projector(const JacobiOperator& op, double z_hat, int window, double tol = 1e-8,
                                           int grid_size = 512) {
    const auto reports = detect_resonances(op, tol, grid_size);
    return resonance_projector(op, reports[z_hat > 0 ? 0 : 1], window);
}

/// Projectors at z_hat = +1 and -1; empty where there is no resonance.
struct ResonanceProjectors {
    std::optional<ProjectorKernel> plus_one, minus_one;
    int window = 0;

    bool any() const { return plus_one || minus_one; }
};

inline ResonanceProjectors resonance_projectors(const JacobiOperator& op, int window, double tol = 1e-8,
                                                int grid_size = 512) {
    const auto reports = detect_resonances(op, tol, grid_size);
    ResonanceProjectors out;
    out.window = window;
    if (reports[0].is_resonant) out.plus_one = resonance_projector(op, reports[0], window);
    if (reports[1].is_resonant) out.minus_one = resonance_projector(op, reports[1], window);
    return out;
}

/// e^{-it}/sqrt(-2 pi i t) P_1 + e^{it}/sqrt(2 pi i t) P_{-1} on [-window, window]^2,
/// principal branches: sqrt(-2 pi i t) = sqrt(2 pi t) e^{-i pi/4}, sqrt(2 pi i t) = sqrt(2 pi t) e^{i pi/4}.
inline WindowedKernel leading_term(const ResonanceProjectors& projectors, double t, int window) {
    if (!(t > 0.0)) throw ConfigError("the leading term needs t > 0");
    if (window > projectors.window) throw WindowTooSmall("projectors were built on a smaller window");
    WindowedKernel out = WindowedKernel::zero(t, window);
    const double root = std::sqrt(2.0 * std::numbers::pi * t);
    const int off = projectors.window - window;
    const int side = out.side();
    if (projectors.plus_one) {
        const complex coeff = std::polar(1.0 / root, -t + std::numbers::pi / 4);
        out.entries += coeff * projectors.plus_one->entries.block(off, off, side, side).cast<complex>();
    }
    if (projectors.minus_one) {
        const complex coeff = std::polar(1.0 / root, t - std::numbers::pi / 4);
        out.entries += coeff * projectors.minus_one->entries.block(off, off, side, side).cast<complex>();
    }
    return out;
}

inline WindowedKernel leading_term(const JacobiOperator& op, double t, int window) {
    return leading_term(resonance_projectors(op, window), t, window);
}

struct PowerLawFit {
    double exponent = 0.0;
    double stderr_ = 0.0;
    double intercept = 0.0; // log prefactor
};

/// Least-squares slope of log y against log t with the standard error of the slope.
inline PowerLawFit fit_power_law(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size() || t.size() < 3) throw ConfigError("power-law fit needs at least 3 matching points");
    const std::size_t n = t.size();
    std::vector<double> x(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(t[i] > 0.0) || !(y[i] > 0.0)) throw ConfigError("power-law fit needs positive data");
        x[i] = std::log(t[i]);
        v[i] = std::log(y[i]);
    }
    double mx = 0.0, mv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        mv += v[i];
    }
    mx /= static_cast<double>(n);
    mv /= static_cast<double>(n);
    double sxx = 0.0, sxv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxv += (x[i] - mx) * (v[i] - mv);
    }
    if (sxx == 0.0) throw ConfigError("power-law fit needs distinct times");
    PowerLawFit fit;
    fit.exponent = sxv / sxx;
    fit.intercept = mv - fit.exponent * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = v[i] - fit.intercept - fit.exponent * x[i];
        rss += r * r;
    }
    fit.stderr_ = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    return fit;
}

inline std::vector<double> log_time_grid(double t_min, double t_max, int points) {
    if (!(t_min > 0.0) || !(t_max > t_min) || points < 2) throw ConfigError("log time grid needs 0 < tmin < tmax, >= 2 points");
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        out[static_cast<std::size_t>(i)] = t_min * std::pow(t_max / t_min, static_cast<double>(i) / (points - 1));
    return out;
}

/// N_obs(t) = base + ceil(slope * t).
struct WindowPolicy {
    int base = 40;
    double slope = 0.0;

    // guard: 1.1 * 100 is 110.00000000000001 in double
    int window(double t) const { return base + static_cast<int>(std::ceil(slope * t - 1e-9)); }

    /// sup: the maximum sits on the Airy front |n - k| ~ t, and pairs on one side of the
    /// perturbation (not damped by |T|) need a half-width beyond t.
    /// weighted-two: sum (1+|n|)^{-2 sigma} converges slowly for sigma near 1/2 and the
    /// kernel stays O(t^{-1/2}) out to |n| ~ t; 20 + t/4 agrees with 20 + t/2 to 1e-3 in the exponent.
    /// weighted-sup: the (1+|n|)^{-sigma} weights localise it; 40 agrees with 160.
    static WindowPolicy for_norm(const KernelNorm& norm) {
        switch (norm.kind) {
        case NormKind::sup: return {10, 1.1};
        case NormKind::weighted_two: return {20, 0.25};
        case NormKind::weighted_sup: return {40, 0.0};
        }
        return {40, 0.0};
    }
};

struct DecayOptions {
    KernelNorm norm = KernelNorm::sup();
    std::vector<double> times;
    bool subtract_leading = false;
    std::optional<WindowPolicy> policy; // default: WindowPolicy::for_norm(norm)
    int margin = 20; // minimum; widened by adaptive_margin
    bool spot_check = false; // spectral vs oscillatory at the largest t
    int spot_window = 15;
    double spot_tol = 1e-6;
};

struct SpotCheck {
    double t = 0.0;
    int window = 0;
    double max_difference = 0.0;
    bool passed = true;
};

struct DecayFit {
    KernelNorm norm;
    bool subtract_leading = false;
    std::vector<double> times;
    std::vector<int> windows;
    std::vector<double> norms;       // ||K(t)||
    std::vector<double> norms_after; // ||K(t) - leading(t)||
    double exponent = 0.0;
    double stderr_ = 0.0;
    double intercept = 0.0;
    std::optional<SpotCheck> spot_check;

    const std::vector<double>& fitted() const { return subtract_leading ? norms_after : norms; }
};

/// Fit of an already measured decay curve.
inline DecayFit fit_decay_curve(const KernelNorm& norm, std::vector<double> times, std::vector<double> norms,
                                std::vector<double> norms_after, bool subtract_leading) {
    DecayFit out;
    out.norm = norm;
    out.subtract_leading = subtract_leading;
    out.times = std::move(times);
    out.norms = std::move(norms);
    out.norms_after = norms_after.empty() ? out.norms : std::move(norms_after);
    const auto fit = fit_power_law(out.times, out.fitted());
    out.exponent = fit.exponent;
    out.stderr_ = fit.stderr_;
    out.intercept = fit.intercept;
    return out;
}

/// Spectral propagator norms on a time grid, optionally with the resonant leading term removed.
inline DecayFit decay_fit(const JacobiOperator& op, const DecayOptions& options) {
    if (options.times.size() < 6) throw ConfigError("decay fit needs at least 6 times");
    const WindowPolicy policy = options.policy.value_or(WindowPolicy::for_norm(options.norm));
    double t_max = 0.0;
    int window_max = 0;
    for (double t : options.times) {
        if (!(t > 0.0)) throw ConfigError("decay fit times must be positive");
        t_max = std::max(t_max, t);
        window_max = std::max(window_max, policy.window(t));
    }
    // One eigensystem serves every t: its truncation satisfies the bound for the largest t.
    const auto prop = spectral_propagator(op, default_truncation(op, t_max, window_max, adaptive_margin(op, options.margin)));
    const auto projectors = resonance_projectors(op, window_max);

    struct Row {
        int window = 0;
        double norm = 0.0, after = 0.0;
    };
    const auto rows = parallel_map(options.times.size(), [&](std::size_t i) {
        const double t = options.times[i];
        Row row;
        row.window = policy.window(t);
        WindowedKernel kernel = prop.kernel(t, row.window);
        row.norm = kernel_norm(kernel, options.norm);
        kernel.entries -= leading_term(projectors, t, row.window).entries;
        row.after = kernel_norm(kernel, options.norm);
        return row;
    });
    std::vector<double> norms, after;
    std::vector<int> windows;
    for (const auto& r : rows) {
        windows.push_back(r.window);
        norms.push_back(r.norm);
        after.push_back(r.after);
    }
    DecayFit out = fit_decay_curve(options.norm, options.times, std::move(norms), std::move(after), options.subtract_leading);
    out.windows = std::move(windows);
    if (options.spot_check) {
        SpotCheck check;
        check.t = t_max;
        check.window = std::min(options.spot_window, window_max);
        PropagatorRequest req{op, t_max, check.window, PropagatorMethod::oscillatory};
        const auto osc = propagator_oscillatory(req);
        check.max_difference = (osc.kernel.entries - prop.kernel(t_max, check.window).entries).cwiseAbs().maxCoeff();
        check.passed = osc.converged && check.max_difference <= options.spot_tol;
        out.spot_check = check;
    }
    return out;
}

/// Real phase v on an interval with its derivatives.
struct Phase {
    std::function<double(double)> value;
    std::function<double(double, int)> derivative; // (theta, order)
    std::string name;

    static Phase minus_cosine() {
        Phase p;
        p.name = "-cos";
        p.value = [](double th) { return -std::cos(th); };
        // d^j/dth^j (-cos th) = -cos(th + j pi / 2)
        p.derivative = [](double th, int j) { return -std::cos(th + j * std::numbers::pi / 2); };
        return p;
    }
};

struct VdcReport {
    int order = 2;
    double a = 0.0, b = 0.0;
    double m_j = 0.0;            // min |v^(j)| on [a, b]
    double amplitude_norm = 0.0; // ||f^||_1
    std::vector<double> times;
    std::vector<double> magnitudes; // |I(t)|
    std::vector<double> ratios;     // |I(t)| (m_j t)^{1/j} / ||f^||_1
    double empirical_constant = 0.0;
    double tail_slope = 0.0; // log-log slope of the ratios over the upper half of the t-grid
    bool bounded = true;
};

/// int_a^b e^{it v(theta)} f(theta) d theta, composite 20-point Gauss-Legendre.
inline complex oscillatory_integral(const Phase& v, const FourierSeries& f, double a, double b, double t) {
    // panel count follows the number of phase oscillations (|v'| <= 1 for trigonometric phases)
    double slope = 0.0;
    for (int i = 0; i <= 64; ++i) slope = std::max(slope, std::abs(v.derivative(a + (b - a) * i / 64.0, 1)));
    const int panels = 8 + static_cast<int>(std::ceil(std::abs(t) * std::max(slope, 1e-3) * (b - a) / std::numbers::pi));
    const double h = (b - a) / panels;
    complex sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + h * p;
        sum += boost::math::quadrature::gauss<double, 20>::integrate(
            [&](double th) { return std::polar(1.0, t * v.value(th)) * f.evaluate(std::polar(1.0, th)); }, lo, lo + h);
    }
    return sum;
}

inline VdcReport vdc_bound_check(const Phase& v, const FourierSeries& f, int order, double a, double b,
                                 const std::vector<double>& times, double growth_tol = 0.05, double m_tol = 1e-8) {
    if (order != 2 && order != 3) throw ConfigError("van der Corput check supports j = 2 or 3");
    if (!(b > a)) throw ConfigError("van der Corput interval must have a < b");
    if (times.size() < 4) throw ConfigError("van der Corput check needs at least 4 times");
    VdcReport out;
    out.order = order;
    out.a = a;
    out.b = b;
    out.m_j = std::numeric_limits<double>::infinity();
    constexpr int fine = 4096;
    for (int i = 0; i <= fine; ++i) out.m_j = std::min(out.m_j, std::abs(v.derivative(a + (b - a) * i / fine, order)));
    if (out.m_j < m_tol) throw ConfigError("min |v^(j)| vanishes on the interval: hypothesis violated");
    out.amplitude_norm = f.wiener_norm();
    out.times = times;
    out.magnitudes = parallel_map(times.size(), [&](std::size_t i) { return std::abs(oscillatory_integral(v, f, a, b, times[i])); });
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double r = out.amplitude_norm == 0.0
                             ? 0.0
                             : out.magnitudes[i] * std::pow(out.m_j * times[i], 1.0 / order) / out.amplitude_norm;
        out.ratios.push_back(r);
        out.empirical_constant = std::max(out.empirical_constant, r);
    }
    if (out.empirical_constant == 0.0) return out;
    const std::size_t half = times.size() / 2;
    std::vector<double> tt(times.begin() + static_cast<std::ptrdiff_t>(half), times.end());
    std::vector<double> rr(out.ratios.begin() + static_cast<std::ptrdiff_t>(half), out.ratios.end());
    out.tail_slope = fit_power_law(tt, rr).exponent;
    out.bounded = std::isfinite(out.empirical_constant) && out.tail_slope <= growth_tol;
    return out;
}

} // namespace jscat
