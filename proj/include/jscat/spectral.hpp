#pragma once

// Finite-section eigendecomposition and the spectral propagator
// e^{-itH} P_ac on an observation window.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "jscat/error.hpp"
#include "jscat/lattice.hpp"

namespace jscat {

/// Eigenpairs of a symmetric tridiagonal section (LAPACK dstemr, MRRR).
struct Eigensystem {
    int half_width = 0;
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors; // column j is the eigenvector of values(j); row i is site i - half_width
};

inline Eigensystem tridiagonal_eigensystem(const TridiagonalSection& section) {
    const lapack_int n = section.side();
    Eigensystem out;
    out.half_width = section.half_width;
    std::vector<double> d = section.diagonal;
    std::vector<double> e = section.off_diagonal;
    e.push_back(0.0); // dstemr wants length n
    out.values.resize(n);
    out.vectors.resize(n, n);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    lapack_logical tryrac = 1;
    const lapack_int info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'A', n, d.data(), e.data(), 0.0, 0.0, 0, 0, &found,
                                           out.values.data(), out.vectors.data(), n, n, support.data(), &tryrac);
    if (info != 0 || found != n)
        throw Error("tridiagonal eigensolver failed (info " + std::to_string(info) + ")");
    return out;
}

/// Eigenvalue window kept as the absolutely continuous part; outliers approximate eigenvalues.
inline constexpr double band_slack = 1e-9;

struct SpectralPropagator {
    Eigensystem system;
    std::vector<int> retained; // indices of eigenpairs with |lambda| <= 1 + band_slack

    int matrix_side() const { return static_cast<int>(system.values.size()); }
    int retained_count() const { return static_cast<int>(retained.size()); }
    int truncation() const { return system.half_width; }

    /// Kernel of e^{-itH} P_ac on [-window, window]^2 (any real t).
    WindowedKernel kernel(double t, int window) const {
        if (window > system.half_width) throw WindowTooSmall("observation window exceeds the truncation");
        const int side = 2 * window + 1;
        const int r = retained_count();
        Eigen::MatrixXd a(side, r);
        Eigen::VectorXd c(r), s(r);
        const int offset = system.half_width - window;
        for (int j = 0; j < r; ++j) {
            const int col = retained[static_cast<std::size_t>(j)];
            a.col(j) = system.vectors.col(col).segment(offset, side);
            c(j) = std::cos(t * system.values(col));
            s(j) = std::sin(t * system.values(col));
        }
        const Eigen::MatrixXd re = a * c.asDiagonal() * a.transpose();
        const Eigen::MatrixXd im = -(a * s.asDiagonal() * a.transpose());
        Eigen::MatrixXcd entries(side, side);
        entries.real() = re;
        entries.imag() = im;
        return WindowedKernel(t, window, std::move(entries));
    }

    /// The filtered propagator on the whole truncation.
    Eigen::MatrixXcd full(double t) const { return kernel(t, system.half_width).entries; }
};

inline SpectralPropagator spectral_propagator(const JacobiOperator& op, int truncation) {
    SpectralPropagator out;
    out.system = tridiagonal_eigensystem(truncate(op, truncation));
    for (int j = 0; j < out.system.values.size(); ++j)
        if (std::abs(out.system.values(j)) <= 1.0 + band_slack) out.retained.push_back(j);
    return out;
}

/// Eigenvalues only (LAPACK dstev).
inline Eigen::VectorXd tridiagonal_eigenvalues(const TridiagonalSection& section) {
    const lapack_int n = section.side();
    Eigen::VectorXd values = Eigen::Map<const Eigen::VectorXd>(section.diagonal.data(), n);
    std::vector<double> e = section.off_diagonal;
    const lapack_int info = LAPACKE_dstev(LAPACK_COL_MAJOR, 'N', n, values.data(), e.data(), nullptr, 1);
    if (info != 0) throw Error("tridiagonal eigenvalue solver failed (info " + std::to_string(info) + ")");
    return values;
}

/// Decay rate acosh|lambda| of the weakest bound state resolved on a section of half-width
/// support + probe; +inf when there is none.
inline double weakest_bound_state_rate(const JacobiOperator& op, int probe = 200) {
    const auto values = tridiagonal_eigenvalues(truncate(op, op.support_radius() + probe));
    double rate = std::numeric_limits<double>::infinity();
    for (double v : values)
        if (std::abs(v) > 1.0 + band_slack) rate = std::min(rate, std::acosh(std::abs(v)));
    return rate;
}

/// Dirichlet margin: a bound state decaying like e^{-kappa |n|} couples the cut to the
/// window's band-edge states, so the margin grows like 18 / kappa (capped at 2000).
inline int adaptive_margin(const JacobiOperator& op, int base = 20) {
    const double rate = weakest_bound_state_rate(op);
    if (!std::isfinite(rate)) return base;
    return std::clamp(static_cast<int>(std::ceil(18.0 / rate)), base, 2000);
}

/// N_obs + ceil(|t|) + margin: no signal reflected at the Dirichlet cut reaches the window by time t.
inline int default_truncation(const JacobiOperator& op, double t, int window, int margin = 20) {
    return std::max(op.support_radius(), window + static_cast<int>(std::ceil(std::abs(t))) + margin);
}

} // namespace jscat
