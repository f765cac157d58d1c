#pragma once

// Bessel, Neumann and Struve functions of order zero and the half-period
// oscillatory integral (1/2pi) int_{-pi/2}^{pi/2} e^{-it cos theta} d theta.

#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "jscat/error.hpp"

namespace jscat {

inline double bessel_j0(double t) { return std::cyl_bessel_j(0.0, t); }

inline double neumann_y0(double t) {
    if (!(t > 0.0)) throw ConfigError("Y0 needs t > 0");
    return std::cyl_neumann(0.0, t);
}

/// H0(t) - Y0(t) = (2/pi) int_0^inf e^{-ts} / sqrt(1+s^2) ds, t > 0.
inline double struve_minus_neumann(double t) {
    if (!(t > 0.0)) throw ConfigError("H0 - Y0 needs t > 0");
    boost::math::quadrature::exp_sinh<double> integrator;
    const double integral = integrator.integrate([t](double s) { return std::exp(-t * s) / std::hypot(1.0, s); });
    return 2.0 / std::numbers::pi * integral;
}

namespace detail {

// sum_k (-1)^k (t/2)^{2k+1} / Gamma(k+3/2)^2, in long double to tame the cancellation.
inline double struve_h0_series(double t) {
    const long double x = static_cast<long double>(t) / 2.0L;
    const long double x2 = x * x;
    // k = 0 term: x / Gamma(3/2)^2 = 4x/pi.
    long double term = x / (0.25L * std::numbers::pi_v<long double>);
    long double sum = term;
    for (int k = 1; k < 400; ++k) {
        const long double g = static_cast<long double>(k) + 0.5L; // Gamma(k+3/2) = g Gamma(k+1/2)
        term *= -x2 / (g * g);
        sum += term;
        if (std::abs(term) < 1e-21L * std::abs(sum)) break;
    }
    return static_cast<double>(sum);
}

} // namespace detail

/// Struve H0: power series up to t = 8, H0 = Y0 + (H0 - Y0) beyond.
inline double struve_h0(double t) {
    if (t < 0.0) return -struve_h0(-t);
    if (t <= 8.0) return detail::struve_h0_series(t);
    return neumann_y0(t) + struve_minus_neumann(t);
}

/// (1/2pi) int_a^b e^{-it cos theta} d theta by composite 20-point Gauss-Legendre,
/// with panels finer than the local oscillation.
inline std::complex<double> cosine_phase_integral(double t, double a, double b) {
    const int panels = 8 + static_cast<int>(std::ceil(std::abs(t) * (b - a) / std::numbers::pi));
    const double h = (b - a) / panels;
    std::complex<double> sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + h * p;
        sum += boost::math::quadrature::gauss<double, 20>::integrate(
            [t](double theta) { return std::polar(1.0, -t * std::cos(theta)); }, lo, lo + h);
    }
    return sum / (2.0 * std::numbers::pi);
}

struct BesselStruveLeading {
    double t = 0.0;
    std::complex<double> lhs;     // (J0(t) - i H0(t)) / 2
    std::complex<double> rhs;     // (1/2pi) int_{-pi/2}^{pi/2} e^{-it cos theta} d theta
    std::complex<double> bracket; // rhs - 1/(i pi t); zero at t = 0 by convention

    double residual() const { return std::abs(lhs - rhs); }
};

inline BesselStruveLeading bessel_struve_leading(double t) {
    if (t < 0.0) throw ConfigError("bessel_struve_leading needs t >= 0");
    BesselStruveLeading out;
    out.t = t;
    out.lhs = 0.5 * std::complex<double>(bessel_j0(t), -struve_h0(t));
    out.rhs = cosine_phase_integral(t, -std::numbers::pi / 2, std::numbers::pi / 2);
    if (t > 0.0) out.bracket = out.rhs - 1.0 / std::complex<double>(0.0, std::numbers::pi * t);
    return out;
}

} // namespace jscat
