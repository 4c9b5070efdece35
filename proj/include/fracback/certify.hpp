#pragma once

// Stability constants and numerical verification of the backward-stability
// inequalities. Every verifier returns a list of Check records; a check
// passes when lhs <= rhs (1 + kSlack).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "fracback/error.hpp"
#include "fracback/evolve.hpp"
#include "fracback/mlf.hpp"
#include "fracback/specop.hpp"

namespace fracback::certify {

using specop::EigenSystem;
using specop::SpectralField;

inline constexpr double kSlack = 1e-8;

struct Check {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // (rhs - lhs) / max(|lhs|, |rhs|); 0 when both vanish
    bool pass = true;
};

inline Check make_check(std::string name, double lhs, double rhs) {
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    const double margin = scale > 0.0 ? (rhs - lhs) / scale : 0.0;
    const bool pass = lhs <= rhs + kSlack * std::abs(rhs);
    return {std::move(name), lhs, rhs, margin, pass};
}

inline bool all_pass(std::span<const Check> checks) {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

/// The check with the smallest margin; throws on an empty list.
inline const Check& worst(std::span<const Check> checks) {
    if (checks.empty()) throw DomainError("no checks to summarize");
    return *std::min_element(checks.begin(), checks.end(),
                             [](const Check& a, const Check& b) { return a.margin < b.margin; });
}

namespace detail {

inline std::string at_time(const std::string& name, double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s@t=%.6g", name.c_str(), t);
    return buf;
}

}  // namespace detail

struct StabilityCertificate {
    double K = 1.0;
    double K1 = 1.0;
    double xi = 0.0;
    double theta = 0.0;
    std::optional<double> C1;
    std::optional<double> C2;
    std::optional<double> beta_holder;
    double epsilon = 1.0;
    double R = 1.0;
    double rescale = 1.0;
    std::vector<Check> checks;

    bool pass() const { return all_pass(checks); }
};

// ---------------------------------------------------------------------------
// Logarithmic convexity

struct LogConvexityConstant {
    double K = 1.0;
    double K1 = 1.0;
};

/// K = 1 when every eigenvalue of -A is positive; otherwise K1 = E_{alpha,1}(-lambda_1 T^alpha)
/// and K = K1 + 1.
inline LogConvexityConstant log_convexity_constant(const EigenSystem& eigsys, FractionalOrder alpha, double T) {
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("log_convexity_constant requires T > 0");
    if (eigsys.m() == 0) return {1.0, 1.0};
    const double k1 = mlf::decay_profile(alpha.value(), eigsys.eigenvalue(0), T);
    return {k1 + 1.0, k1};
}

/// ||u(t)|| <= K ||u(0)||^(1-t/T) ||u(T)||^(t/T) at every trajectory time.
/// The trajectory must start at t = 0; its last time is taken as T.
inline std::vector<Check> verify_log_convexity(const evolve::Trajectory& traj, double K) {
    if (traj.times.size() < 2 || traj.norms.size() != traj.times.size()) {
        throw DomainError("trajectory needs at least two times with norms");
    }
    if (traj.times.front() != 0.0) throw DomainError("trajectory must include t = 0");
    const double T = traj.times.back();
    const double n0 = traj.norms.front();
    const double nT = traj.norms.back();
    if (n0 == 0.0) return {make_check("log_convexity:zero-state", 0.0, 0.0)};
    if (!(nT > 0.0)) throw DomainError("||u(T)|| underflowed to zero for a nonzero initial state");
    std::vector<Check> out;
    out.reserve(traj.times.size());
    for (std::size_t j = 0; j < traj.times.size(); ++j) {
        const double s = traj.times[j] / T;
        const double rhs = K * std::exp((1.0 - s) * std::log(n0) + s * std::log(nT));
        out.push_back(make_check(detail::at_time("log_convexity", traj.times[j]), traj.norms[j], rhs));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dissipation lemma: -d^alpha ||u||^2 <= 2 ||u|| ||A u0||

inline constexpr double kDissipationSafety = 10.0;
inline constexpr double kCoarseGridFraction = 0.1;

struct DissipationData {
    std::vector<double> times;       // coarse grid
    std::vector<double> lhs;         // -L1_h ||u||^2
    std::vector<double> rhs;         // 2 ||u(t)|| ||A u0||
    std::vector<double> tolerance;   // safety * |L1_h - L1_{h/2}|
};

namespace detail {

inline void require_origin_grid(const evolve::UniformGrid& grid) {
    if (grid.start != 0.0) throw DomainError("dissipation grid must start at t = 0");
    if (grid.count < 3) throw DomainError("dissipation grid needs at least 3 points");
}

/// ||u||^2 at every time of the table.
inline std::vector<double> squared_norms(const SpectralField& u0, const evolve::DecayTable& table) {
    if (table.modes() != u0.size()) throw DomainError("decay table does not match the field");
    std::vector<double> out(table.times().size());
    const auto c = u0.coefficients();
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double n = table.norm(c, j);
        out[j] = n * n;
    }
    return out;
}

inline std::vector<double> every(std::span<const double> v, std::size_t stride) {
    std::vector<double> out;
    out.reserve(v.size() / stride + 1);
    for (std::size_t i = 0; i < v.size(); i += stride) out.push_back(v[i]);
    return out;
}

inline evolve::UniformGrid halved(const evolve::UniformGrid& g, int times) {
    std::size_t count = g.count;
    for (int i = 0; i < times; ++i) count = 2 * count - 1;
    return evolve::UniformGrid::over(g.start, g.end(), count);
}

}  // namespace detail

/// Decay table on the once-halved grid, shareable across initial states.
inline evolve::DecayTable dissipation_table(const EigenSystem& eigsys, FractionalOrder alpha,
                                            const evolve::UniformGrid& grid) {
    detail::require_origin_grid(grid);
    const auto t = detail::halved(grid, 1).points();
    return evolve::DecayTable(eigsys, alpha, t);
}

/// Both sides of the discretized lemma on the grid, with the a-posteriori
/// tolerance from one halving of the step.
inline DissipationData dissipation_data(const SpectralField& u0, FractionalOrder alpha,
                                        const evolve::UniformGrid& grid,
                                        const evolve::DecayTable* table = nullptr) {
    if (alpha.classical()) throw DomainError("dissipation check needs alpha < 1");
    detail::require_origin_grid(grid);
    const auto fine_grid = detail::halved(grid, 1);
    std::optional<evolve::DecayTable> own;
    if (!table) table = &own.emplace(dissipation_table(*u0.eigsys(), alpha, grid));
    if (table->times().size() != fine_grid.count || table->times().back() != fine_grid.end()) {
        throw DomainError("decay table does not match the halved grid");
    }
    const auto sq_fine = detail::squared_norms(u0, *table);
    const auto sq = detail::every(sq_fine, 2);
    const auto d_fine = evolve::caputo_l1(sq_fine, fine_grid, alpha);
    const auto d = evolve::caputo_l1(sq, grid, alpha);
    const double a_norm = u0.operator_norm();
    DissipationData out;
    out.times = grid.points();
    out.lhs.resize(grid.count);
    out.rhs.resize(grid.count);
    out.tolerance.resize(grid.count);
    for (std::size_t k = 0; k < grid.count; ++k) {
        out.lhs[k] = -d[k];
        out.rhs[k] = 2.0 * std::sqrt(sq[k]) * a_norm;
        out.tolerance[k] = kDissipationSafety * std::abs(d[k] - d_fine[2 * k]);
    }
    return out;
}

/// -L1_h ||u||^2 <= 2 ||u|| ||A u0|| + tol at every grid node after t = 0.
inline std::vector<Check> verify_dissipation_lemma(const SpectralField& u0, FractionalOrder alpha,
                                                   const evolve::UniformGrid& grid,
                                                   const evolve::DecayTable* table = nullptr) {
    const auto data = dissipation_data(u0, alpha, grid, table);
    const double bound_scale = *std::max_element(data.rhs.begin(), data.rhs.end());
    if (bound_scale > 0.0 && data.tolerance.back() > kCoarseGridFraction * bound_scale) {
        throw DomainError("dissipation grid too coarse: tolerance at T exceeds 10% of the bound scale");
    }
    std::vector<Check> out;
    out.reserve(grid.count - 1);
    for (std::size_t k = 1; k < grid.count; ++k) {
        out.push_back(make_check(detail::at_time("dissipation", data.times[k]), data.lhs[k],
                                 data.rhs[k] + data.tolerance[k]));
    }
    return out;
}

/// Observed order of the tolerance under step halving, from the largest
/// tolerance over the common nodes in [T/2, T].
inline double dissipation_tolerance_rate(const SpectralField& u0, FractionalOrder alpha,
                                         const evolve::UniformGrid& grid) {
    const auto coarse = dissipation_data(u0, alpha, grid);
    const auto fine = dissipation_data(u0, alpha, detail::halved(grid, 1));
    double tc = 0.0, tf = 0.0;
    for (std::size_t k = (grid.count - 1) / 2; k < grid.count; ++k) {
        tc = std::max(tc, coarse.tolerance[k]);
        tf = std::max(tf, fine.tolerance[2 * k]);
    }
    if (!(tc > 0.0 && tf > 0.0)) throw DomainError("tolerance vanished; rate undefined");
    return std::log2(tc / tf);
}

// ---------------------------------------------------------------------------
// Hoelder stability through the mean-value point

inline constexpr int kMeanValuePanelsPerOctave = 2;

namespace detail {

struct WeightedNodes {
    std::vector<double> s;  // ascending, s.front() = 0 and s.back() = T (both weight 0)
    std::vector<double> w;
};

/// Composite 10-point Gauss-Legendre rule for int_0^T (T-s)^(alpha-1) f(s) ds.
/// [0, T/2]: geometric panels down to below every mode's transition time
/// lambda^(-1/alpha), kernel folded into the weights. [T/2, T]: s = T - v^(1/alpha)
/// turns the integral into (1/alpha) int_0^((T/2)^alpha) f dv, also on geometric panels.
inline WeightedNodes mean_value_rule(const EigenSystem& eigsys, double alpha, double T) {
    using rule = boost::math::quadrature::gauss<double, 10>;
    std::vector<std::pair<double, double>> nodes;
    auto add_panels = [&](double lo, double hi, auto&& map) {
        const auto x = rule::abscissa();
        const auto wt = rule::weights();
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (double sign : {-1.0, 1.0}) map(mid + sign * half * x[i], half * wt[i]);
        }
    };
    auto geometric = [&](double first, double last, auto&& map) {
        const auto panels = static_cast<std::size_t>(std::ceil(std::log2(last / first) * kMeanValuePanelsPerOctave));
        add_panels(0.0, first, map);
        double lo = first;
        for (std::size_t k = 1; k <= panels; ++k) {
            const double hi = k == panels ? last : first * std::pow(last / first, double(k) / double(panels));
            add_panels(lo, hi, map);
            lo = hi;
        }
    };

    double s_min = 1e-16 * T;
    const double lam_max = eigsys.eigenvalues().back();
    if (lam_max > 0.0) s_min = std::min(s_min, 1e-3 * std::pow(lam_max, -1.0 / alpha));
    s_min = std::max(s_min, 1e-250 * T);
    geometric(s_min, 0.5 * T, [&](double s, double w) { nodes.emplace_back(s, w * std::pow(T - s, alpha - 1.0)); });
    const double v_max = std::pow(0.5 * T, alpha);
    geometric(v_max * 1e-12, v_max,
              [&](double v, double w) { nodes.emplace_back(T - std::pow(v, 1.0 / alpha), w / alpha); });

    std::sort(nodes.begin(), nodes.end());
    WeightedNodes out;
    out.s.reserve(nodes.size() + 2);
    out.w.reserve(nodes.size() + 2);
    out.s.push_back(0.0);
    out.w.push_back(0.0);
    for (const auto& [s, w] : nodes) {
        out.s.push_back(s);
        out.w.push_back(w);
    }
    out.s.push_back(T);
    out.w.push_back(0.0);
    return out;
}

inline double norm_at(const SpectralField& u0, double alpha, double t) {
    const EigenSystem& es = *u0.eigsys();
    double sum = 0.0;
    for (std::size_t n = 0; n < u0.size(); ++n) {
        if (u0[n] == 0.0) continue;
        const double v = u0[n] * mlf::decay_profile(alpha, es.eigenvalue(n), t);
        sum += v * v;
    }
    return std::sqrt(sum);
}

}  // namespace detail

struct MeanValue {
    double xi = 0.0;
    double target = 0.0;  // (alpha / T^alpha) * integral
};

inline evolve::DecayTable mean_value_table(const EigenSystem& eigsys, FractionalOrder alpha, double T) {
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("mean_value_point requires T > 0");
    return evolve::DecayTable(eigsys, alpha, detail::mean_value_rule(eigsys, alpha.value(), T).s);
}

/// Smallest xi in (0, T) with ||u(xi)|| = (alpha/T^alpha) int_0^T (T-s)^(alpha-1) ||u(s)|| ds.
inline MeanValue mean_value_point(const SpectralField& u0, FractionalOrder alpha, double T,
                                  const evolve::DecayTable* table = nullptr) {
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("mean_value_point requires T > 0");
    if (u0.norm() == 0.0) throw DomainError("mean_value_point requires u0 != 0");
    const double a = alpha.value();
    const auto rule = detail::mean_value_rule(*u0.eigsys(), a, T);
    std::optional<evolve::DecayTable> own;
    if (!table) table = &own.emplace(*u0.eigsys(), alpha, rule.s);
    if (table->modes() != u0.size() || !std::equal(rule.s.begin(), rule.s.end(), table->times().begin(),
                                                   table->times().end())) {
        throw DomainError("decay table does not match the mean-value nodes");
    }
    const auto& s = rule.s;
    std::vector<double> norms(s.size());
    double integral = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        norms[k] = table->norm(u0.coefficients(), k);
        integral += rule.w[k] * norms[k];
    }
    const double target = a / std::pow(T, a) * integral;

    const auto [lo_it, hi_it] = std::minmax_element(norms.begin(), norms.end());
    if (*hi_it - *lo_it <= 1e-14 * *hi_it) return {T / 2.0, target};

    auto f = [&](double t) { return detail::norm_at(u0, a, t) - target; };
    std::size_t k = 1;
    const double f0 = norms[0] - target;
    while (k < s.size() && (norms[k] - target) * f0 > 0.0) ++k;
    if (k == s.size()) throw ConvergenceError("mean-value equation has no sign change on (0, T)");
    double lo = s[k - 1], hi = s[k];
    if (norms[k] - target == 0.0 && k + 1 < s.size()) return {hi, target};
    double flo = f(lo);
    for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return {mid, target};
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return {0.5 * (lo + hi), target};
}

struct HolderResult {
    double xi = 0.0;
    double theta = 0.0;
    double K = 1.0;
    double K1 = 1.0;
    Check check;
};

/// ||u0|| <= ||u(T)||^theta sqrt(||u(T)||^(2-2theta) + K R^(2-2theta) 2T^alpha/(alpha Gamma(alpha)))
/// with theta = xi / (2T).
inline HolderResult holder_certificate(const SpectralField& u0, FractionalOrder alpha, double T, double R,
                                       const evolve::DecayTable* table = nullptr) {
    if (!(R > 0.0)) throw DomainError("a-priori bound R must be positive");
    const double n0 = u0.norm();
    const double na = u0.operator_norm();
    if (n0 > R * (1.0 + kSlack) || na > R * (1.0 + kSlack)) {
        throw DomainError("initial state outside the admissible set: ||u0|| = " + std::to_string(n0) +
                          ", ||A u0|| = " + std::to_string(na) + ", R = " + std::to_string(R));
    }
    const auto [K, K1] = log_convexity_constant(*u0.eigsys(), alpha, T);
    const auto mv = mean_value_point(u0, alpha, T, table);
    const double theta = mv.xi / (2.0 * T);
    const double a = alpha.value();
    const double nT = evolve::forward_evolve(u0, alpha, T).norm();
    const double c = 2.0 * std::pow(T, a) / (a * std::tgamma(a));
    const double rhs =
        std::pow(nT, theta) * std::sqrt(std::pow(nT, 2.0 - 2.0 * theta) + K * std::pow(R, 2.0 - 2.0 * theta) * c);
    return {mv.xi, theta, K, K1, make_check("holder_stability", n0, rhs)};
}

// ---------------------------------------------------------------------------
// Hoelder stability with explicit exponent (alpha < 1)

struct InterpolationConstants {
    double C1 = 0.0;
    double C2 = 0.0;
    double beta = 0.0;
    std::vector<Check> checks;  // 1/E_n <= C2 lambda_n for n > m
};

inline double holder_exponent(double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be positive");
    return epsilon / (epsilon + 1.0);
}

inline InterpolationConstants interpolation_constants(const EigenSystem& eigsys, FractionalOrder alpha, double T,
                                                      double epsilon) {
    if (alpha.classical()) throw DomainError("interpolation constants need alpha < 1");
    const double beta = holder_exponent(epsilon);
    if (eigsys.m() >= eigsys.size()) throw DomainError("no positive eigenvalue: all modes are non-decaying");
    const double lam = eigsys.eigenvalue(eigsys.m());
    const double a = alpha.value();
    const double c1 = mlf::ml_inverse_bound_c1(a, T, lam);
    const double c2 = c1 * (1.0 / lam + std::pow(T, a));
    InterpolationConstants out{c1, c2, beta, {}};
    for (std::size_t n = eigsys.m(); n < eigsys.size(); ++n) {
        const double l = eigsys.eigenvalue(n);
        const double e = mlf::decay_profile(a, l, T);
        out.checks.push_back(make_check("inverse_bound@n=" + std::to_string(n + 1), 1.0 / e, c2 * l));
    }
    return out;
}

struct AdmissibleNorms {
    double shifted = 0.0;   // sqrt(sum (kappa + lambda_n)^(2 eps) c_n^2)
    double positive = 0.0;  // sqrt(sum_{n > m} lambda_n^(2 eps) c_n^2)
    double strict() const { return std::max(shifted, positive); }
};

inline AdmissibleNorms admissible_norms(const SpectralField& u0, double epsilon) {
    const EigenSystem& es = *u0.eigsys();
    double s = 0.0, p = 0.0;
    for (std::size_t n = 0; n < u0.size(); ++n) {
        const double l = es.eigenvalue(n);
        const double c2 = u0[n] * u0[n];
        if (c2 == 0.0) continue;
        const double shifted = es.kappa() + l;
        if (shifted > 0.0) s += std::pow(shifted, 2.0 * epsilon) * c2;
        if (l > 0.0) p += std::pow(l, 2.0 * epsilon) * c2;
    }
    return {std::sqrt(s), std::sqrt(p)};
}

struct ExplicitHolderResult {
    double rescale = 1.0;
    InterpolationConstants constants;
    Check check;
};

/// ||u(0)|| <= (1 + C2^beta R^(1-beta)) ||u(T)||^beta, after scaling u0 and R
/// by 1/||u(T)|| when ||u(T)|| > 1.
inline ExplicitHolderResult verify_explicit_holder(const SpectralField& u0, FractionalOrder alpha, double T, double epsilon,
                                         double R) {
    if (!(R > 0.0)) throw DomainError("a-priori bound R must be positive");
    auto constants = interpolation_constants(*u0.eigsys(), alpha, T, epsilon);
    const double adm = admissible_norms(u0, epsilon).strict();
    if (adm > R * (1.0 + kSlack)) {
        throw DomainError("initial state outside the admissible set: fractional-power norm " + std::to_string(adm) +
                          " > R = " + std::to_string(R));
    }
    const double n0 = u0.norm();
    if (n0 == 0.0) return {1.0, std::move(constants), make_check("explicit_holder", 0.0, 0.0)};
    const double nT = evolve::forward_evolve(u0, alpha, T).norm();
    const double sigma = nT > 1.0 ? 1.0 / nT : 1.0;
    const double b = constants.beta;
    const double rhs = (1.0 + std::pow(constants.C2, b) * std::pow(sigma * R, 1.0 - b)) * std::pow(sigma * nT, b);
    return {sigma, std::move(constants), make_check("explicit_holder", sigma * n0, rhs)};
}

// ---------------------------------------------------------------------------
// Noisy final data

/// ||u(t) - u^delta(t)|| <= 2 K R^(1-t/T) delta^(t/T) on the shared time grid.
inline std::vector<Check> verify_noisy_holder(const evolve::Trajectory& exact, const evolve::Trajectory& noisy,
                                              double K, double R, double delta) {
    if (exact.times != noisy.times) throw DomainError("trajectories must share a time grid");
    if (exact.times.empty() || exact.times.front() != 0.0) throw DomainError("trajectory must include t = 0");
    if (!(R > 0.0)) throw DomainError("a-priori bound R must be positive");
    if (!(delta >= 0.0)) throw DomainError("noise level delta must be >= 0");
    const double bound_R = R * (1.0 + kSlack);
    if (exact.fields.front().norm() > bound_R || noisy.fields.front().norm() > bound_R) {
        throw DomainError("class-M violation: ||u(0)|| or ||u^delta(0)|| exceeds R");
    }
    const double misfit = exact.fields.back().minus(noisy.fields.back()).norm();
    if (misfit > delta * (1.0 + kSlack) + 1e-300) {
        throw DomainError("class-M violation: ||u(T) - u^delta(T)|| = " + std::to_string(misfit) +
                          " exceeds delta = " + std::to_string(delta));
    }
    const double T = exact.times.back();
    std::vector<Check> out;
    out.reserve(exact.times.size());
    for (std::size_t j = 0; j < exact.times.size(); ++j) {
        const double s = exact.times[j] / T;
        const double lhs = exact.fields[j].minus(noisy.fields[j]).norm();
        const double rhs = 2.0 * K * std::pow(R, 1.0 - s) * std::pow(delta, s);
        out.push_back(make_check(detail::at_time("noisy_holder", exact.times[j]), lhs, rhs));
    }
    return out;
}

}  // namespace fracback::certify
