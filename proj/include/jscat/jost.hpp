#pragma once

// Jost solutions phi_{+-}(z, n) ~ z^{+-n} (n -> +-inf) of H phi = (z + 1/z)/2 phi,
// their transformation-operator kernels and the edge auxiliary functions.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "jscat/fourier.hpp"
#include "jscat/lattice.hpp"

namespace jscat {

enum class Side { plus, minus };

inline int sign(Side side) { return side == Side::plus ? 1 : -1; }
inline const char* side_name(Side side) { return side == Side::plus ? "+" : "-"; }

struct JostSolution {
    Side side = Side::plus;
    complex z = 1.0;
    ComplexSequence values;            // phi(z, n)
    ComplexSequence normalized_values; // phi~(z, n) = phi(z, n) z^{-+n}
};

namespace detail {

inline void check_spectral_parameter(complex z) {
    if (z == 0.0) throw ConfigError("Jost solutions are undefined at z = 0");
}

/// phi~ on [first, last] through the normalised recursion
///   a(n-1) phi~(n-1) = ((1+z^2)/2 - b(n) z) phi~(n) - a(n) z^2 phi~(n+1)   (+ side)
///   a(n)   phi~(n+1) = ((1+z^2)/2 - b(n) z) phi~(n) - a(n-1) z^2 phi~(n-1) (- side)
/// started from phi~ = 1 in the free region.
/// Runs in long double: across small a(n) the solution grows by orders of magnitude and the
/// scattering relations then cancel large terms, which costs about three digits in double.
using wide_complex = std::complex<long double>;

struct WideSequence {
    int first = 0;
    std::vector<wide_complex> values;

    wide_complex operator[](int n) const { return values[static_cast<std::size_t>(n - first)]; }
};

/// phi~ (normalized = true) or phi on [first, last] in extended precision.
inline WideSequence wide_jost(const JacobiOperator& op, Side side, wide_complex zw, int first, int last, bool normalized) {
    const int n0 = op.support_radius();
    const wide_complex z2 = zw * zw;
    const wide_complex energy = 0.5L * (1.0L + z2);
    auto a = [&](int n) { return static_cast<long double>(op.a(n)); };
    auto b = [&](int n) { return static_cast<long double>(op.b(n)); };
    const bool plus = side == Side::plus;
    const int bottom = plus ? std::min(first, n0 + 1) : std::min(first, -n0 - 2);
    const int top = plus ? std::max(last, n0 + 2) : std::max(last, -n0 - 1);
    std::vector<wide_complex> phi(static_cast<std::size_t>(top - bottom + 1), wide_complex(1.0L));
    auto at = [&](int n) -> wide_complex& { return phi[static_cast<std::size_t>(n - bottom)]; };
    if (plus) {
        for (int n = n0 + 1; n > bottom; --n) at(n - 1) = ((energy - b(n) * zw) * at(n) - a(n) * z2 * at(n + 1)) / a(n - 1);
    } else {
        for (int n = -n0 - 1; n < top; ++n) at(n + 1) = ((energy - b(n) * zw) * at(n) - a(n - 1) * z2 * at(n - 1)) / a(n);
    }
    WideSequence out{first, {}};
    out.values.reserve(static_cast<std::size_t>(last - first + 1));
    // phi = phi~ z^{+-n}; powers by repeated multiplication (std::pow on long double complex is slow)
    const wide_complex step = plus ? zw : 1.0L / zw;
    wide_complex power = 1.0L;
    if (!normalized) {
        const wide_complex base = first >= 0 ? step : 1.0L / step;
        for (int k = 0; k < std::abs(first); ++k) power *= base;
    }
    for (int n = first; n <= last; ++n) {
        out.values.push_back(normalized ? at(n) : at(n) * power);
        power *= step;
    }
    return out;
}

inline ComplexSequence narrow(const WideSequence& w, int last) {
    ComplexSequence out(w.first, last);
    for (int n = w.first; n <= last; ++n) out[n] = complex(w[n]);
    return out;
}

inline ComplexSequence normalized_jost(const JacobiOperator& op, Side side, complex z, int first, int last) {
    return narrow(wide_jost(op, side, z, first, last, true), last);
}

} // namespace detail

/// Jost solution on [first, last] by backward (+) or forward (-) recursion from the free region.
inline JostSolution jost_solution(const JacobiOperator& op, Side side, complex z, int first, int last) {
    detail::check_spectral_parameter(z);
    if (std::abs(z) > 1.0 + 1e-12) throw ConfigError("Jost solutions are only provided for |z| <= 1");
    JostSolution out;
    out.side = side;
    out.z = z;
    out.normalized_values = detail::normalized_jost(op, side, z, first, last);
    out.values = ComplexSequence(first, last);
    for (int n = first; n <= last; ++n) out.values[n] = out.normalized_values[n] * std::pow(z, sign(side) * n);
    return out;
}

inline JostSolution jost_solution(const JacobiOperator& op, Side side, complex z, int window) {
    return jost_solution(op, side, z, -window, window);
}

/// Values of phi at arbitrary z (including |z| > 1, i.e. z^{-1} on the circle), no checks.
inline ComplexSequence jost_values(const JacobiOperator& op, Side side, complex z, int first, int last) {
    detail::check_spectral_parameter(z);
    return detail::narrow(detail::wide_jost(op, side, z, first, last, false), last);
}

/// Coefficients of z -> phi~_{+-}(z, n): phi~(z, n) = sum_j c_j z^j, so that
/// K_+(n, n + j) = c_j and K_-(n, n - j) = c_j.
struct TransformationKernel {
    Side side = Side::plus;
    int n = 0;
    std::vector<double> coefficients;

    /// K~(n, j) = K(n, n +- j).
    double shifted(int j) const {
        return j >= 0 && j < static_cast<int>(coefficients.size()) ? coefficients[static_cast<std::size_t>(j)] : 0.0;
    }

    /// K_{+-}(n, l); zero outside +-l >= +-n.
    double operator()(int l) const { return shifted(sign(side) * (l - n)); }

    /// Largest l (+ side) or smallest l (- side) with a stored coefficient.
    int far_index() const { return n + sign(side) * (static_cast<int>(coefficients.size()) - 1); }

    /// sum_l K(n, l) z^{+-l} = z^{+-n} phi~(z, n).
    complex evaluate(complex z) const { return std::pow(z, sign(side) * n) * evaluate_normalized(z); }

    complex evaluate_normalized(complex z) const {
        complex acc = 0.0;
        for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * z + *it;
        return acc;
    }

    FourierSeries normalized_series(int grid_size = 0) const {
        std::vector<complex> c(coefficients.begin(), coefficients.end());
        return FourierSeries(0, std::move(c), grid_size);
    }
};

namespace detail {

/// ((1 + z^2)/2 - b z) p - a z^2 q on coefficient vectors.
inline std::vector<double> recurrence_step(const std::vector<double>& p, double b, double a,
                                           const std::vector<double>& q) {
    std::vector<double> out(std::max(p.size(), q.size()) + 2, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        out[i] += 0.5 * p[i];
        out[i + 2] += 0.5 * p[i];
        out[i + 1] -= b * p[i];
    }
    for (std::size_t i = 0; i < q.size(); ++i) out[i + 2] -= a * q[i];
    return out;
}

inline void trim(std::vector<double>& p) {
    double scale = 0.0;
    for (double v : p) scale = std::max(scale, std::abs(v));
    const double eps = 64.0 * std::numeric_limits<double>::epsilon() * scale;
    while (p.size() > 1 && std::abs(p.back()) <= eps) p.pop_back();
}

} // namespace detail

/// Kernels for all n between n_first and n_last, computed by running the Jost recursion
/// on polynomial coefficients (each step convolves with the symbol of the recurrence).
inline std::vector<TransformationKernel> jost_kernels(const JacobiOperator& op, Side side, int n_first, int n_last) {
    if (n_first > n_last) std::swap(n_first, n_last);
    const int n0 = op.support_radius();
    std::vector<TransformationKernel> out;
    if (side == Side::plus) {
        const int top = std::max(n_last, n0 + 2);
        const int bottom = std::min(n_first, n0 + 1);
        std::vector<std::vector<double>> poly(static_cast<std::size_t>(top - bottom + 1), std::vector<double>{1.0});
        auto at = [&](int n) -> std::vector<double>& { return poly[static_cast<std::size_t>(n - bottom)]; };
        for (int n = n0 + 1; n > bottom; --n) {
            auto next = detail::recurrence_step(at(n), op.b(n), op.a(n), at(n + 1));
            for (double& c : next) c /= op.a(n - 1);
            detail::trim(next);
            at(n - 1) = std::move(next);
        }
        for (int n = n_first; n <= n_last; ++n) out.push_back({side, n, at(n)});
        return out;
    }
    const int bottom = std::min(n_first, -n0 - 2);
    const int top = std::max(n_last, -n0 - 1);
    std::vector<std::vector<double>> poly(static_cast<std::size_t>(top - bottom + 1), std::vector<double>{1.0});
    auto at = [&](int n) -> std::vector<double>& { return poly[static_cast<std::size_t>(n - bottom)]; };
    for (int n = -n0 - 1; n < top; ++n) {
        auto next = detail::recurrence_step(at(n), op.b(n), op.a(n - 1), at(n - 1));
        for (double& c : next) c /= op.a(n);
        detail::trim(next);
        at(n + 1) = std::move(next);
    }
    for (int n = n_first; n <= n_last; ++n) out.push_back({side, n, at(n)});
    return out;
}

inline TransformationKernel jost_kernel(const JacobiOperator& op, Side side, int n) {
    return jost_kernels(op, side, n, n).front();
}

/// Tail sums of q(k) = |a(k) - 1/2| + |b(k)|: sum_{k >= m} (+) or sum_{k <= m} (-).
inline double perturbation_tail(const JacobiOperator& op, Side side, int m) {
    const int n0 = op.support_radius();
    double s = 0.0;
    if (side == Side::plus) {
        for (int k = std::max(m, -n0); k <= n0; ++k) s += op.perturbation(k);
    } else {
        for (int k = -n0; k <= std::min(m, n0); ++k) s += op.perturbation(k);
    }
    return s;
}

inline int floor_div2(int v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); }

/// First site of the majorant sum eta~_{+-}(m): floor((m+1)/2) on the + side and its
/// mirror image ceil((m-1)/2) on the - side. (floor((m-1)/2) there would drop the
/// site -s of a perturbation supported on [-s, s], where h_-(-2s) is generically nonzero.)
inline int eta_start(Side side, int m) { return side == Side::plus ? floor_div2(m + 1) : -floor_div2(1 - m); }

struct KernelBoundReport {
    Side side = Side::plus;
    std::vector<int> sites;
    std::vector<double> constants; // empirical C(n) per site
    /// Entries where the majorant vanishes but the kernel does not.
    int violations = 0;
    /// max C(n) over sites with +-n >= -+1.
    double uniform_constant = 0.0;
    bool uniform_bound_finite = true;
};

/// Measures C_{+-}(n) = max_l |K(n,l)| / (delta(n,l) + (1 - delta(n,l)) sum_{k=floor((n+l)/2)}^{+-inf} q(k)).
inline KernelBoundReport verify_kernel_bound(const JacobiOperator& op, Side side, int n_first, int n_last) {
    KernelBoundReport report;
    report.side = side;
    const auto kernels = jost_kernels(op, side, n_first, n_last);
    for (const auto& kernel : kernels) {
        double scale = 0.0;
        for (double c : kernel.coefficients) scale = std::max(scale, std::abs(c));
        const double zero_tol = 1e-13 * std::max(1.0, scale);
        double worst = 0.0;
        for (int j = 0; j < static_cast<int>(kernel.coefficients.size()); ++j) {
            const double value = std::abs(kernel.shifted(j));
            const int l = kernel.n + sign(side) * j;
            const double majorant = j == 0 ? 1.0 : perturbation_tail(op, side, floor_div2(kernel.n + l));
            if (majorant == 0.0) {
                if (value > zero_tol) {
                    ++report.violations;
                    worst = std::numeric_limits<double>::infinity();
                }
                continue;
            }
            worst = std::max(worst, value / majorant);
        }
        report.sites.push_back(kernel.n);
        report.constants.push_back(worst);
        if (sign(side) * kernel.n >= -1) report.uniform_constant = std::max(report.uniform_constant, worst);
    }
    report.uniform_bound_finite = std::isfinite(report.uniform_constant);
    return report;
}

/// Edge auxiliary data at z_hat = +-1: h(l), Psi~(z) = sum h(l) (z_hat z)^{+-l}
/// and the majorant eta~(m).
struct ResonanceAuxiliary {
    double z_hat = 1.0;
    Side side = Side::plus;
    /// h(l) for l in [h.first(), h.last()]; zero outside.
    RealSequence h;
    FourierSeries psi_series;
    /// eta~(m) on the same index range as h.
    RealSequence eta;
    /// Smallest C with |h(m)| <= C eta~(m) for +-m >= 0, m != (1 +- 1)/2. The boundary site
    /// carries the term -delta(0,m) phi(z_hat,1)/K(0,0), which no tail majorant controls
    /// (free operator: h_+(1) = z_hat while eta~ = 0).
    double bound_constant = 0.0;
    /// Sites of that range where eta~(m) = 0 but h(m) != 0.
    int bound_violations = 0;
    double boundary_value = 0.0; // h((1 +- 1)/2)
    /// max over the check grid of |breveW(z) - zeta(z) Psi~(z)|.
    double factorization_residual = 0.0;
    complex phi_at_edge_0 = 0.0; // phi(z_hat, 0)
    complex phi_at_edge_1 = 0.0; // phi(z_hat, 1)

    complex zeta(complex z) const { return (z - z_hat) / z; }
    complex psi(complex z) const { return psi_series.evaluate(z); }
};

/// breveW(z) = phi(z,1) phi(z_hat,0) - phi(z,0) phi(z_hat,1).
inline complex breve_wronskian(const JacobiOperator& op, Side side, double z_hat, complex z) {
    const auto at_z = jost_values(op, side, z, 0, 1);
    const auto at_edge = jost_values(op, side, z_hat, 0, 1);
    return at_z[1] * at_edge[0] - at_z[0] * at_edge[1];
}

inline ResonanceAuxiliary resonance_auxiliary(const JacobiOperator& op, Side side, double z_hat, int check_grid = 512) {
    if (z_hat != 1.0 && z_hat != -1.0) throw ConfigError("edge point must be +1 or -1");
    ResonanceAuxiliary aux;
    aux.z_hat = z_hat;
    aux.side = side;
    const auto kernels = jost_kernels(op, side, 0, 1);
    const auto& k0 = kernels[0];
    const auto& k1 = kernels[1];
    const auto edge = jost_values(op, side, z_hat, 0, 1);
    aux.phi_at_edge_0 = edge[0];
    aux.phi_at_edge_1 = edge[1];
    // phi(z_hat, n) is real for real coefficients.
    const double phi0 = edge[0].real();
    const double phi1 = edge[1].real();
    auto edge_power = [&](int l) { return (l % 2 == 0) ? 1.0 : z_hat; };

    // Phi^{(k)}(m) = sum_{l=m}^{+-inf} K(k,l) z_hat^l, summed from the far end inwards.
    const int s = sign(side);
    const int far = s > 0 ? std::max(k0.far_index(), k1.far_index()) : std::min(k0.far_index(), k1.far_index());
    const int near = s > 0 ? 1 : 0; // h vanishes beyond this towards -+inf
    const int lo = std::min(near, far);
    const int hi = std::max(near, far);
    aux.h = RealSequence(lo, hi);
    aux.eta = RealSequence(lo, hi);
    double tail0 = 0.0;
    double tail1 = 0.0;
    for (int l = far; s > 0 ? l >= near : l <= near; l -= s) {
        tail0 += k0(l) * edge_power(l);
        tail1 += k1(l) * edge_power(l);
        aux.h[l] = tail1 * phi0 - tail0 * phi1;
    }

    std::vector<complex> psi(static_cast<std::size_t>(hi - lo + 1), 0.0);
    // Psi~(z) = sum_l h(l) z_hat^l z^{+-l}; coefficient index m = +-l.
    const int m_first = s > 0 ? lo : -hi;
    for (int l = lo; l <= hi; ++l) psi[static_cast<std::size_t>(s * l - m_first)] = aux.h[l] * edge_power(l);
    aux.psi_series = FourierSeries(m_first, std::move(psi));

    for (int m = lo; m <= hi; ++m) {
        aux.eta[m] = perturbation_tail(op, side, eta_start(side, m));
        if (s * m < 0) continue;
        if (m == near) {
            aux.boundary_value = aux.h[m];
            continue;
        }
        const double value = std::abs(aux.h[m]);
        if (aux.eta[m] == 0.0) {
            if (value > 1e-13 * std::max(1.0, std::abs(phi0) + std::abs(phi1))) ++aux.bound_violations;
            continue;
        }
        aux.bound_constant = std::max(aux.bound_constant, value / aux.eta[m]);
    }
    if (aux.bound_violations > 0) aux.bound_constant = std::numeric_limits<double>::infinity();

    for (int j = 0; j < check_grid; ++j) {
        const complex z = std::polar(1.0, CircleFunction::angle(-std::numbers::pi, j, check_grid));
        const complex lhs = breve_wronskian(op, side, z_hat, z);
        aux.factorization_residual = std::max(aux.factorization_residual, std::abs(lhs - aux.zeta(z) * aux.psi(z)));
    }
    return aux;
}

} // namespace jscat
