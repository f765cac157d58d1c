#pragma once

// Jacobi operators on the integer lattice with compactly supported
// perturbations of the free background a = 1/2, b = 0.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jscat/error.hpp"

namespace jscat {

using complex = std::complex<double>;

/// A finite piece of a sequence on Z, stored on the index range [first, last].
template <typename T>
class LatticeSequence {
public:
    LatticeSequence() = default;
    LatticeSequence(int first, int last, T fill = T{})
        : first_(first), values_(static_cast<std::size_t>(std::max(0, last - first + 1)), fill) {}

    /// Sequence on the symmetric window [-half_width, half_width].
    static LatticeSequence window(int half_width, T fill = T{}) {
        return LatticeSequence(-half_width, half_width, fill);
    }

    int first() const { return first_; }
    int last() const { return first_ + static_cast<int>(values_.size()) - 1; }
    std::size_t size() const { return values_.size(); }
    bool contains(int n) const { return n >= first() && n <= last(); }

    T& operator[](int n) { return values_[static_cast<std::size_t>(n - first_)]; }
    const T& operator[](int n) const { return values_[static_cast<std::size_t>(n - first_)]; }

    T& at(int n) {
        if (!contains(n)) throw WindowTooSmall("lattice index " + std::to_string(n) + " outside stored range");
        return (*this)[n];
    }
    const T& at(int n) const {
        if (!contains(n)) throw WindowTooSmall("lattice index " + std::to_string(n) + " outside stored range");
        return (*this)[n];
    }

    const std::vector<T>& values() const { return values_; }
    std::vector<T>& values() { return values_; }

    /// Restriction to [first, last], which must lie inside the stored range.
    LatticeSequence slice(int first, int last) const {
        if (!contains(first) || !contains(last)) throw WindowTooSmall("slice outside stored range");
        LatticeSequence out(first, last);
        for (int n = first; n <= last; ++n) out[n] = (*this)[n];
        return out;
    }

private:
    int first_ = 0;
    std::vector<T> values_;
};

using ComplexSequence = LatticeSequence<complex>;
using RealSequence = LatticeSequence<double>;

/// Jacobi operator (Hu)(n) = a(n-1)u(n-1) + b(n)u(n) + a(n)u(n+1) with
/// a(n) = 1/2 and b(n) = 0 for |n| > support_radius.
class JacobiOperator {
public:
    JacobiOperator() = default;

    JacobiOperator(int support_radius, const std::map<int, double>& a_pert, const std::map<int, double>& b_pert)
        : support_(checked_radius(support_radius)),
          a_(static_cast<std::size_t>(2 * support_radius + 1), 0.5),
          b_(static_cast<std::size_t>(2 * support_radius + 1), 0.0) {
        for (const auto& [n, value] : a_pert) {
            if (std::abs(n) > support_radius)
                throw ConfigError("a(" + std::to_string(n) + ") lies outside the declared support");
            if (!(value > 0.0) || !std::isfinite(value))
                throw ConfigError("a(" + std::to_string(n) + ") must be positive and finite");
            a_[index(n)] = value;
        }
        for (const auto& [n, value] : b_pert) {
            if (std::abs(n) > support_radius)
                throw ConfigError("b(" + std::to_string(n) + ") lies outside the declared support");
            if (!std::isfinite(value)) throw ConfigError("b(" + std::to_string(n) + ") must be finite");
            b_[index(n)] = value;
        }
    }

    static JacobiOperator free() { return JacobiOperator(0, {}, {}); }

    int support_radius() const { return support_; }

    double a(int n) const { return std::abs(n) <= support_ ? a_[index(n)] : 0.5; }
    double b(int n) const { return std::abs(n) <= support_ ? b_[index(n)] : 0.0; }

    /// |a(n) - 1/2| + |b(n)|.
    double perturbation(int n) const { return std::abs(a(n) - 0.5) + std::abs(b(n)); }

    bool is_free() const {
        for (int n = -support_; n <= support_; ++n)
            if (perturbation(n) != 0.0) return false;
        return true;
    }

    std::map<int, double> a_perturbation() const {
        std::map<int, double> out;
        for (int n = -support_; n <= support_; ++n)
            if (a(n) != 0.5) out[n] = a(n);
        return out;
    }

    std::map<int, double> b_perturbation() const {
        std::map<int, double> out;
        for (int n = -support_; n <= support_; ++n)
            if (b(n) != 0.0) out[n] = b(n);
        return out;
    }

private:
    static int checked_radius(int r) {
        if (r < 0) throw ConfigError("support radius must be nonnegative");
        return r;
    }

    std::size_t index(int n) const { return static_cast<std::size_t>(n + support_); }

    int support_ = 0;
    std::vector<double> a_{0.5};
    std::vector<double> b_{0.0};
};

/// Applies H to u; the result lives on the window of u shrunk by one site on each side.
inline ComplexSequence apply(const JacobiOperator& op, const ComplexSequence& u) {
    if (u.size() < 3) throw WindowTooSmall("apply needs at least one boundary site on each side");
    ComplexSequence out(u.first() + 1, u.last() - 1);
    for (int n = out.first(); n <= out.last(); ++n)
        out[n] = op.a(n - 1) * u[n - 1] + op.b(n) * u[n] + op.a(n) * u[n + 1];
    return out;
}

struct MomentReport {
    double sigma = 0.0;
    double norm = 0.0;
    /// True when the weighted sum is finite; always the case for compact support.
    bool satisfied = true;
};

/// sum_n (1+|n|)^sigma (|a(n)-1/2| + |b(n)|).
inline MomentReport moment_norm(const JacobiOperator& op, double sigma) {
    if (sigma < 0.0) throw ConfigError("moment order must be nonnegative");
    MomentReport report;
    report.sigma = sigma;
    for (int n = -op.support_radius(); n <= op.support_radius(); ++n)
        report.norm += std::pow(1.0 + std::abs(n), sigma) * op.perturbation(n);
    report.satisfied = std::isfinite(report.norm);
    return report;
}

/// Dirichlet finite section of H on [-half_width, half_width].
struct TridiagonalSection {
    int half_width = 0;
    std::vector<double> diagonal;     // b(n), n = -N..N
    std::vector<double> off_diagonal; // a(n), n = -N..N-1

    int side() const { return 2 * half_width + 1; }

    Eigen::MatrixXd dense() const {
        const int m = side();
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) out(i, i) = diagonal[static_cast<std::size_t>(i)];
        for (int i = 0; i + 1 < m; ++i) {
            out(i, i + 1) = off_diagonal[static_cast<std::size_t>(i)];
            out(i + 1, i) = off_diagonal[static_cast<std::size_t>(i)];
        }
        return out;
    }
};

inline TridiagonalSection truncate(const JacobiOperator& op, int half_width) {
    if (half_width < op.support_radius())
        throw TruncationError("finite section of half-width " + std::to_string(half_width) +
                              " would clip the perturbation (support " + std::to_string(op.support_radius()) + ")");
    TridiagonalSection out;
    out.half_width = half_width;
    for (int n = -half_width; n <= half_width; ++n) out.diagonal.push_back(op.b(n));
    for (int n = -half_width; n < half_width; ++n) out.off_diagonal.push_back(op.a(n));
    return out;
}

/// Kernel K(n,k) of an operator restricted to the window [-N_obs, N_obs]^2.
struct WindowedKernel {
    double t = 0.0;
    int half_width = 0;
    Eigen::MatrixXcd entries;

    WindowedKernel() = default;
    WindowedKernel(double time, int half_width_, Eigen::MatrixXcd values)
        : t(time), half_width(half_width_), entries(std::move(values)) {
        if (entries.rows() != side() || entries.cols() != side())
            throw WindowTooSmall("kernel matrix must have side 2*N_obs+1");
    }

    static WindowedKernel zero(double time, int half_width_) {
        return WindowedKernel(time, half_width_, Eigen::MatrixXcd::Zero(2 * half_width_ + 1, 2 * half_width_ + 1));
    }

    int side() const { return 2 * half_width + 1; }
    complex operator()(int n, int k) const { return entries(n + half_width, k + half_width); }
    complex& operator()(int n, int k) { return entries(n + half_width, k + half_width); }

    /// Restriction to a smaller centred window.
    WindowedKernel restrict_to(int new_half_width) const {
        if (new_half_width > half_width) throw WindowTooSmall("cannot restrict a kernel to a larger window");
        const int off = half_width - new_half_width;
        const int m = 2 * new_half_width + 1;
        return WindowedKernel(t, new_half_width, entries.block(off, off, m, m));
    }
};

enum class NormKind {
    sup,           // l^1 -> l^inf
    weighted_sup,  // l^1_sigma -> l^inf_{-sigma}
    weighted_two,  // l^2_sigma -> l^2_{-sigma}
};

struct KernelNorm {
    NormKind kind = NormKind::sup;
    double sigma = 0.0;

    static KernelNorm sup() { return {NormKind::sup, 0.0}; }
    static KernelNorm weighted_sup(double sigma) { return {NormKind::weighted_sup, sigma}; }
    static KernelNorm weighted_two(double sigma) { return {NormKind::weighted_two, sigma}; }

    /// Parses "sup", "wsup2", "wsup:S" or "w2:S".
    static KernelNorm parse(const std::string& text) {
        try {
            if (text == "sup") return sup();
            if (text == "wsup2") return weighted_sup(2.0);
            if (text.rfind("wsup:", 0) == 0) return weighted_sup(std::stod(text.substr(5)));
            if (text.rfind("w2:", 0) == 0) return weighted_two(std::stod(text.substr(3)));
        } catch (const std::logic_error&) {
        }
        throw ConfigError("unknown norm kind '" + text + "'");
    }

    std::string name() const {
        switch (kind) {
        case NormKind::sup: return "sup";
        case NormKind::weighted_sup: return "wsup:" + format_sigma();
        case NormKind::weighted_two: return "w2:" + format_sigma();
        }
        return "unknown";
    }

private:
    std::string format_sigma() const {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", sigma);
        return buf;
    }
};

inline double kernel_norm(const WindowedKernel& kernel, const KernelNorm& norm) {
    const int m = kernel.side();
    auto weight = [&](int i) { return std::pow(1.0 + std::abs(i - kernel.half_width), -norm.sigma); };
    switch (norm.kind) {
    case NormKind::sup:
        return m == 0 ? 0.0 : kernel.entries.cwiseAbs().maxCoeff();
    case NormKind::weighted_sup: {
        double best = 0.0;
        for (int j = 0; j < m; ++j) {
            const double wj = weight(j);
            for (int i = 0; i < m; ++i) best = std::max(best, weight(i) * std::abs(kernel.entries(i, j)) * wj);
        }
        return best;
    }
    case NormKind::weighted_two: {
        Eigen::VectorXd w(m);
        for (int i = 0; i < m; ++i) w(i) = weight(i);
        const Eigen::MatrixXcd scaled = w.asDiagonal() * kernel.entries * w.asDiagonal();
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(scaled);
        return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    }
    }
    throw ConfigError("unknown norm kind");
}

} // namespace jscat
