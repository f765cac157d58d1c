#pragma once

// Functions on the unit circle and their Fourier series f(z) = sum_m c(m) z^m.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "jscat/error.hpp"
#include "jscat/lattice.hpp"

namespace jscat {

inline bool is_power_of_two(int m) { return m > 0 && (m & (m - 1)) == 0; }

/// Samples f(e^{i theta_j}) on the uniform grid theta_j = theta0 + 2 pi j / M.
class CircleFunction {
public:
    CircleFunction(double theta0, std::vector<complex> samples) : theta0_(theta0), samples_(std::move(samples)) {}

    /// Builds from explicit angles; rejects grids that are not uniform on a full period.
    CircleFunction(const std::vector<double>& angles, std::vector<complex> samples) : samples_(std::move(samples)) {
        if (angles.size() != samples_.size() || angles.empty()) throw GridError("angle and sample counts differ");
        const double step = 2.0 * std::numbers::pi / static_cast<double>(angles.size());
        for (std::size_t j = 0; j < angles.size(); ++j) {
            const double expected = angles.front() + step * static_cast<double>(j);
            if (std::abs(angles[j] - expected) > 1e-9 * (1.0 + std::abs(expected)))
                throw GridError("circle samples are not on a uniform full-period grid");
        }
        theta0_ = angles.front();
    }

    static CircleFunction sample(const std::function<complex(complex)>& f, int grid_size,
                                 double theta0 = -std::numbers::pi) {
        std::vector<complex> values(static_cast<std::size_t>(grid_size));
        for (int j = 0; j < grid_size; ++j) values[static_cast<std::size_t>(j)] = f(std::polar(1.0, angle(theta0, j, grid_size)));
        return CircleFunction(theta0, std::move(values));
    }

    static double angle(double theta0, int j, int grid_size) {
        return theta0 + 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(grid_size);
    }

    int grid_size() const { return static_cast<int>(samples_.size()); }
    double theta0() const { return theta0_; }
    double angle(int j) const { return angle(theta0_, j, grid_size()); }
    const std::vector<complex>& samples() const { return samples_; }

private:
    double theta0_ = 0.0;
    std::vector<complex> samples_;
};

/// Laurent coefficients c(m), m = first .. first + size - 1. grid_size records the
/// sampling grid the coefficients came from (0 for exactly known series) and
/// fixes the |m| > M/4 tail used as the aliasing alarm.
class FourierSeries {
public:
    FourierSeries() = default;
    FourierSeries(int first, std::vector<complex> coefficients, int grid_size = 0)
        : first_(first), coefficients_(std::move(coefficients)), grid_size_(grid_size) {}

    static FourierSeries monomial(int m, complex value = 1.0, int grid_size = 0) {
        return FourierSeries(m, {value}, grid_size);
    }

    int first() const { return first_; }
    int last() const { return first_ + static_cast<int>(coefficients_.size()) - 1; }
    bool empty() const { return coefficients_.empty(); }
    int grid_size() const { return grid_size_; }
    void set_grid_size(int m) { grid_size_ = m; }
    const std::vector<complex>& coefficients() const { return coefficients_; }

    complex operator[](int m) const {
        if (m < first_ || m > last()) return 0.0;
        return coefficients_[static_cast<std::size_t>(m - first_)];
    }

    complex evaluate(complex z) const {
        if (coefficients_.empty()) return 0.0;
        // Horner in z on the nonnegative-offset polynomial, then shift by z^first.
        complex acc = 0.0;
        for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) acc = acc * z + *it;
        return acc * std::pow(z, first_);
    }

    /// ||f||_A = sum |c(m)|.
    double wiener_norm() const {
        double s = 0.0;
        for (const auto& c : coefficients_) s += std::abs(c);
        return s;
    }

    double l2_norm_squared() const {
        double s = 0.0;
        for (const auto& c : coefficients_) s += std::norm(c);
        return s;
    }

    /// sum_{|m| > M/4} |c(m)| / ||f||_A; zero for the zero series or an unsampled series.
    double tail_fraction() const {
        const double total = wiener_norm();
        if (total == 0.0 || grid_size_ == 0) return 0.0;
        const int cut = grid_size_ / 4;
        double tail = 0.0;
        for (int m = first_; m <= last(); ++m)
            if (std::abs(m) > cut) tail += std::abs((*this)[m]);
        return std::clamp(tail / total, 0.0, 1.0);
    }

    /// Values on the M-point grid starting at theta0.
    std::vector<complex> resample(int grid_size, double theta0 = -std::numbers::pi) const {
        std::vector<complex> out(static_cast<std::size_t>(grid_size));
        for (int j = 0; j < grid_size; ++j)
            out[static_cast<std::size_t>(j)] = evaluate(std::polar(1.0, CircleFunction::angle(theta0, j, grid_size)));
        return out;
    }

private:
    int first_ = 0;
    std::vector<complex> coefficients_;
    int grid_size_ = 0;
};

/// Discrete Fourier transform normalised so that samples of z^m give c(m) = 1,
/// indexed on the symmetric range [-M/2, M/2).
inline FourierSeries fourier_coefficients(const CircleFunction& f) {
    const int m = f.grid_size();
    if (!is_power_of_two(m) || m < 2) throw GridError("grid size must be a power of two (got " + std::to_string(m) + ")");
    Eigen::FFT<double> fft;
    std::vector<complex> spectrum;
    fft.fwd(spectrum, f.samples());
    std::vector<complex> coefficients(static_cast<std::size_t>(m));
    const double scale = 1.0 / static_cast<double>(m);
    for (int k = -m / 2; k < m / 2; ++k) {
        const complex raw = spectrum[static_cast<std::size_t>((k + m) % m)] * scale;
        // Samples start at theta0 rather than 0: c(k) carries the phase e^{-i k theta0}.
        coefficients[static_cast<std::size_t>(k + m / 2)] = raw * std::polar(1.0, -static_cast<double>(k) * f.theta0());
    }
    return FourierSeries(-m / 2, std::move(coefficients), m);
}

/// Coefficients of d^l f / dz^l: c(m) -> m (m-1) ... (m-l+1) c(m), moved to index m - l.
inline FourierSeries derivative_series(const FourierSeries& f, int order) {
    if (order < 0) throw ConfigError("derivative order must be nonnegative");
    if (order == 0 || f.empty()) return f;
    std::vector<complex> out(f.coefficients().size());
    for (int m = f.first(); m <= f.last(); ++m) {
        double factor = 1.0;
        for (int j = 0; j < order; ++j) factor *= static_cast<double>(m - j);
        out[static_cast<std::size_t>(m - f.first())] = factor * f[m];
    }
    return FourierSeries(f.first() - order, std::move(out), f.grid_size());
}

/// Coefficients of (f(z) - f(z_hat)) / (z - z_hat) for |z_hat| = 1, from the telescoping
/// identities (z^l - w^l)/(z - w) = sum_{k<l} z^k w^{l-1-k} and its negative-power analogue.
inline FourierSeries divided_difference(const FourierSeries& f, complex z_hat) {
    if (f.empty()) return f;
    const int lo = std::min(f.first(), 0);
    const int hi = std::max(f.last(), 0);
    // Result occupies [lo, hi - 1] (empty when f is a constant).
    if (hi - 1 < lo) return FourierSeries(0, {}, f.grid_size());
    std::vector<complex> g(static_cast<std::size_t>(hi - lo), 0.0);
    auto at = [&](int j) -> complex& { return g[static_cast<std::size_t>(j - lo)]; };
    const complex w_inv = 1.0 / z_hat;

    // Positive powers: g(j) = sum_{m > j} c(m) z_hat^{m-1-j}, accumulated from the top.
    complex running = 0.0;
    for (int j = hi - 1; j >= 0; --j) {
        running = f[j + 1] + z_hat * running;
        at(j) = running;
    }
    // Negative powers: g(j) = -sum_{m <= j} c(m) z_hat^{m-j-1}, accumulated from the bottom.
    running = 0.0;
    for (int j = lo; j <= -1; ++j) {
        running = -f[j] * w_inv + w_inv * running;
        at(j) = running;
    }
    return FourierSeries(lo, std::move(g), f.grid_size());
}

/// Cauchy product of two Laurent series.
inline FourierSeries multiply(const FourierSeries& f, const FourierSeries& g) {
    if (f.empty() || g.empty()) return FourierSeries(0, {}, std::max(f.grid_size(), g.grid_size()));
    std::vector<complex> out(f.coefficients().size() + g.coefficients().size() - 1, 0.0);
    for (std::size_t i = 0; i < f.coefficients().size(); ++i)
        for (std::size_t j = 0; j < g.coefficients().size(); ++j) out[i + j] += f.coefficients()[i] * g.coefficients()[j];
    return FourierSeries(f.first() + g.first(), std::move(out), std::max(f.grid_size(), g.grid_size()));
}

inline FourierSeries add(const FourierSeries& f, const FourierSeries& g, complex g_scale = 1.0) {
    if (f.empty() && g.empty()) return f;
    const int lo = f.empty() ? g.first() : (g.empty() ? f.first() : std::min(f.first(), g.first()));
    const int hi = f.empty() ? g.last() : (g.empty() ? f.last() : std::max(f.last(), g.last()));
    std::vector<complex> out(static_cast<std::size_t>(hi - lo + 1));
    for (int m = lo; m <= hi; ++m) out[static_cast<std::size_t>(m - lo)] = f[m] + g_scale * g[m];
    return FourierSeries(lo, std::move(out), std::max(f.grid_size(), g.grid_size()));
}

} // namespace jscat
