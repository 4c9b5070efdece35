#pragma once

// Spectral solution of the forward problem d^alpha u = A u (+ f), and the
// uniform-grid Caputo (L1) and Riemann-Liouville (product trapezoid) operators.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fracback/error.hpp"
#include "fracback/mlf.hpp"
#include "fracback/specop.hpp"

namespace fracback::evolve {

using specop::EigenSystem;
using specop::SpectralField;

struct UniformGrid {
    double start = 0.0;
    double step = 1.0;
    std::size_t count = 0;

    /// count points spanning [t0, t1] inclusive.
    static UniformGrid over(double t0, double t1, std::size_t count) {
        if (count < 2) throw DomainError("uniform grid needs at least 2 points");
        if (!(t1 > t0)) throw DomainError("uniform grid needs t1 > t0");
        return {t0, (t1 - t0) / static_cast<double>(count - 1), count};
    }

    /// Recovers the grid from explicit points; rejects non-uniform spacing.
    static UniformGrid from_points(std::span<const double> t) {
        if (t.size() < 2) throw DomainError("uniform grid needs at least 2 points");
        const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
        if (!(h > 0.0)) throw DomainError("grid must be increasing");
        for (std::size_t i = 1; i < t.size(); ++i) {
            if (std::abs((t[i] - t[i - 1]) - h) > 1e-9 * h) throw DomainError("grid is not uniform");
        }
        return {t.front(), h, t.size()};
    }

    double at(std::size_t i) const { return start + step * static_cast<double>(i); }
    double end() const { return at(count - 1); }

    std::vector<double> points() const {
        std::vector<double> t(count);
        for (std::size_t i = 0; i < count; ++i) t[i] = at(i);
        t.back() = end();
        return t;
    }
};

/// E_{alpha,1}(-lambda_n t_j^alpha) for every mode n and time t_j.
class DecayTable {
public:
    DecayTable(const EigenSystem& eigsys, FractionalOrder alpha, std::span<const double> times)
        : modes_(eigsys.size()), times_(times.begin(), times.end()), values_(modes_ * times_.size()) {
        for (std::size_t j = 0; j < times_.size(); ++j) {
            if (!(times_[j] >= 0.0)) throw DomainError("evolution times must be >= 0");
            for (std::size_t n = 0; n < modes_; ++n) {
                values_[j * modes_ + n] = mlf::decay_profile(alpha.value(), eigsys.eigenvalue(n), times_[j]);
            }
        }
    }

    std::size_t modes() const noexcept { return modes_; }
    std::span<const double> times() const noexcept { return times_; }
    double operator()(std::size_t n, std::size_t j) const { return values_[j * modes_ + n]; }
    std::span<const double> at_time(std::size_t j) const { return {values_.data() + j * modes_, modes_}; }

    SpectralField apply(const SpectralField& u0, std::size_t j) const {
        std::vector<double> c(u0.coefficients().begin(), u0.coefficients().end());
        const auto row = at_time(j);
        for (std::size_t n = 0; n < modes_; ++n) c[n] *= row[n];
        return SpectralField(u0.eigsys(), std::move(c));
    }

    /// ||u(t_j)|| for the given initial coefficients.
    double norm(std::span<const double> c0, std::size_t j) const {
        const auto row = at_time(j);
        double s = 0.0;
        for (std::size_t n = 0; n < modes_; ++n) {
            const double v = c0[n] * row[n];
            s += v * v;
        }
        return std::sqrt(s);
    }

private:
    std::size_t modes_;
    std::vector<double> times_;
    std::vector<double> values_;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<SpectralField> fields;
    std::vector<double> norms;
};

/// c_n(t) = c_n(0) E_{alpha,1}(-lambda_n t^alpha).
inline SpectralField forward_evolve(const SpectralField& u0, FractionalOrder alpha, double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("forward_evolve requires t >= 0");
    if (t == 0.0) return u0;
    const EigenSystem& es = *u0.eigsys();
    std::vector<double> c(u0.coefficients().begin(), u0.coefficients().end());
    for (std::size_t n = 0; n < c.size(); ++n) {
        if (c[n] != 0.0) c[n] *= mlf::decay_profile(alpha.value(), es.eigenvalue(n), t);
    }
    return SpectralField(u0.eigsys(), std::move(c));
}

/// Adds the response to a time-constant source f:
/// c_n(t) = c_n(0) E_{alpha,1}(-lambda_n t^alpha) + f_n t^alpha E_{alpha,alpha+1}(-lambda_n t^alpha).
inline SpectralField forward_with_constant_source(const SpectralField& u0, const SpectralField& f,
                                                  FractionalOrder alpha, double t) {
    if (f.size() != u0.size()) throw DomainError("source and initial state live on different eigensystems");
    SpectralField homogeneous = forward_evolve(u0, alpha, t);
    if (t == 0.0) return homogeneous;
    const EigenSystem& es = *u0.eigsys();
    const double a = alpha.value();
    const double ta = std::pow(t, a);
    std::vector<double> c(homogeneous.coefficients().begin(), homogeneous.coefficients().end());
    for (std::size_t n = 0; n < c.size(); ++n) {
        if (f[n] == 0.0) continue;
        c[n] += f[n] * ta * mlf::ml_value({a, a + 1.0}, -es.eigenvalue(n) * ta);
    }
    return SpectralField(u0.eigsys(), std::move(c));
}

inline void require_increasing(std::span<const double> times) {
    if (times.empty()) throw DomainError("time grid is empty");
    if (!(times.front() >= 0.0)) throw DomainError("time grid must start at t >= 0");
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) throw DomainError("time grid must be strictly increasing");
    }
}

inline Trajectory evolve_trajectory(const SpectralField& u0, FractionalOrder alpha, std::span<const double> times) {
    require_increasing(times);
    const DecayTable table(*u0.eigsys(), alpha, times);
    Trajectory tr;
    tr.times.assign(times.begin(), times.end());
    tr.fields.reserve(times.size());
    tr.norms.reserve(times.size());
    for (std::size_t j = 0; j < times.size(); ++j) {
        tr.fields.push_back(table.apply(u0, j));
        tr.norms.push_back(tr.fields.back().norm());
    }
    return tr;
}

// ---------------------------------------------------------------------------
// Fractional calculus on uniform grids

/// L1 approximation of the Caputo derivative at every grid node (0 at the
/// first node). Exact for piecewise-linear g.
inline std::vector<double> caputo_l1(std::span<const double> g, const UniformGrid& grid, FractionalOrder alpha) {
    if (alpha.classical()) throw DomainError("caputo_l1 needs alpha < 1; use a difference quotient for alpha = 1");
    if (g.size() != grid.count) throw DomainError("sample count does not match grid");
    if (g.size() < 3) throw DomainError("caputo_l1 needs at least 3 samples");
    const double a = alpha.value();
    const std::size_t n = g.size();
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double di = static_cast<double>(i);
        b[i] = std::pow(di + 1.0, 1.0 - a) - std::pow(di, 1.0 - a);
    }
    const double scale = std::pow(grid.step, -a) / std::tgamma(2.0 - a);
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += b[k - 1 - j] * (g[j + 1] - g[j]);
        out[k] = scale * s;
    }
    return out;
}

/// Riemann-Liouville integral J^alpha g by product trapezoid: the kernel
/// (t - s)^(alpha-1)/Gamma(alpha) integrated exactly against piecewise-linear g.
inline std::vector<double> rl_integral(std::span<const double> g, const UniformGrid& grid, FractionalOrder alpha) {
    if (g.size() != grid.count) throw DomainError("sample count does not match grid");
    if (g.size() < 2) throw DomainError("rl_integral needs at least 2 samples");
    const double a = alpha.value();
    const std::size_t n = g.size();
    std::vector<double> p(n + 1);  // p[i] = i^(alpha+1)
    for (std::size_t i = 0; i <= n; ++i) p[i] = std::pow(static_cast<double>(i), a + 1.0);
    const double scale = std::pow(grid.step, a) / std::tgamma(a + 2.0);
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        const double dk = static_cast<double>(k);
        double s = (p[k - 1] - (dk - 1.0 - a) * std::pow(dk, a)) * g[0];
        for (std::size_t j = 1; j < k; ++j) {
            const std::size_t m = k - j;
            s += (p[m + 1] - 2.0 * p[m] + p[m - 1]) * g[j];
        }
        s += g[k];
        out[k] = scale * s;
    }
    return out;
}

namespace detail {

/// int_0^x (1 + v)^(a-1) v dv without cancellation for small x.
inline double ramp_moment(double a, double x) {
    if (x < 0.1) {
        double term = 1.0, sum = 0.0;  // term = binom(a-1, j) x^j
        for (int j = 0; j < 40; ++j) {
            sum += term * x * x / (j + 2);
            term *= (a - 1.0 - j) / (j + 1) * x;
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    const double l = std::log1p(x);
    return std::expm1((a + 1.0) * l) / (a + 1.0) - std::expm1(a * l) / a;
}

}  // namespace detail

/// Integral of (T - s)^(alpha-1) g(s) over [s_0, T = s_last] with the kernel
/// integrated exactly against the piecewise-linear interpolant of g. The
/// nodes may be non-uniform.
inline double weighted_end_integral(std::span<const double> g, std::span<const double> s, double alpha) {
    if (g.size() != s.size() || g.size() < 2) throw DomainError("sample count does not match grid");
    const double T = s.back();
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        // r = T - s runs over [r1, r1 + h]
        const double h = s[i + 1] - s[i];
        if (!(h > 0.0)) throw DomainError("grid must be increasing");
        const double slope = (g[i] - g[i + 1]) / h;
        double k0, k1;  // int r^(alpha-1) dr and int r^(alpha-1) (r - r1) dr
        if (i + 2 == g.size()) {
            k0 = std::pow(h, alpha) / alpha;
            k1 = std::pow(h, alpha + 1.0) / (alpha + 1.0);
        } else {
            const double r1 = T - s[i + 1];
            const double x = h / r1;
            k0 = std::pow(r1, alpha) * std::expm1(alpha * std::log1p(x)) / alpha;
            k1 = std::pow(r1, alpha + 1.0) * detail::ramp_moment(alpha, x);
        }
        total += g[i + 1] * k0 + slope * k1;
    }
    return total;
}

inline double weighted_end_integral(std::span<const double> g, const UniformGrid& grid, double alpha) {
    if (g.size() != grid.count) throw DomainError("sample count does not match grid");
    const auto s = grid.points();
    return weighted_end_integral(g, std::span<const double>(s), alpha);
}

}  // namespace fracback::evolve
