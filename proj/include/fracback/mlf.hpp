#pragma once

// Two-parameter Mittag-Leffler function on the real line, its time-derivative
// identity, the inverse-decay bound constant and the complete-monotonicity /
// log-convexity checkers built on top of it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/cos_pi.hpp>
#include <boost/math/special_functions/sin_pi.hpp>

#include "fracback/error.hpp"

namespace fracback {

/// Order of the Caputo derivative, validated to lie in (0, 1].
class FractionalOrder {
public:
    FractionalOrder(double alpha) : alpha_(alpha) {
        if (!(std::isfinite(alpha) && alpha > 0.0 && alpha <= 1.0)) {
            throw DomainError("fractional order must lie in (0, 1], got " + std::to_string(alpha));
        }
    }
    double value() const noexcept { return alpha_; }
    bool classical() const noexcept { return alpha_ == 1.0; }

private:
    double alpha_;
};

namespace mlf {

struct MlParams {
    double alpha;
    double beta;
};

inline void validate(const MlParams& p) {
    if (!(std::isfinite(p.alpha) && p.alpha > 0.0 && p.alpha <= 1.0)) {
        throw DomainError("Mittag-Leffler alpha must lie in (0, 1], got " + std::to_string(p.alpha));
    }
    if (!(std::isfinite(p.beta) && p.beta > 0.0)) {
        throw DomainError("Mittag-Leffler beta must be positive, got " + std::to_string(p.beta));
    }
}

enum class Regime { series, asymptotic, integral, closed_form };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::series: return "series";
        case Regime::asymptotic: return "asymptotic";
        case Regime::integral: return "integral";
        case Regime::closed_form: return "closed_form";
    }
    return "unknown";
}

struct EvalReport {
    double value = 0.0;
    double est_abs_error = 0.0;
    Regime regime = Regime::series;
};

/// Largest positive argument accepted by ml_eval_growth for alpha < 1.
inline constexpr double kGrowthCap = 50.0;

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

// Crossovers in the scaled variable z = |x|^(1/alpha); the series' largest
// term grows like exp(z) while the asymptotic remainder decays like exp(-z).
inline constexpr double kSeriesMaxScaled = 1.5;
inline constexpr double kAsymptoticMinScaled = 30.0;
inline constexpr double kAsymptoticRelTol = 1e-15;
inline constexpr double kQuadratureRelTol = 1e-13;

/// 1/Gamma(x), zero at the poles, finite for large negative x.
inline double rgamma(double x) {
    if (x <= 0.0 && x == std::floor(x)) return 0.0;
    if (x >= 0.5) {
        if (x < 170.0) return 1.0 / std::tgamma(x);
        return std::exp(-std::lgamma(x));
    }
    // reflection: 1/Gamma(x) = Gamma(1-x) sin(pi x) / pi
    const double s = boost::math::sin_pi(x);
    const double y = 1.0 - x;
    if (y < 170.0) return std::tgamma(y) * s / std::numbers::pi;
    return std::copysign(std::exp(std::lgamma(y) + std::log(std::abs(s) / std::numbers::pi)), s);
}

/// Taylor series, ascending index. Only used where exp(|x|^(1/alpha)) is
/// modest or all terms share a sign.
inline EvalReport series(double alpha, double beta, double x) {
    double sum = rgamma(beta);
    double abs_sum = std::abs(sum);
    double last = abs_sum;
    double xpow = 1.0;
    for (int k = 1; k < 100000; ++k) {
        xpow *= x;
        const double arg = alpha * k + beta;
        double term;
        if (arg < 170.0) {
            term = xpow * rgamma(arg);
        } else {
            // xpow may have under/overflowed: recompute in log space
            const double lt = k * std::log(std::abs(x)) - std::lgamma(arg);
            term = std::exp(lt);
            if (x < 0.0 && (k % 2) == 1) term = -term;
        }
        if (!std::isfinite(term) || std::abs(sum + term) > 1e300) {
            throw OverflowError("Mittag-Leffler series overflow at x = " + std::to_string(x));
        }
        sum += term;
        abs_sum += std::abs(term);
        last = std::abs(term);
        if (last <= 1e-17 * std::abs(sum) && k * alpha > std::abs(x)) break;
        if (last == 0.0 && k * alpha > 1.0) break;
    }
    return {sum, 8.0 * kEps * abs_sum + last, Regime::series};
}

/// Large-|x| expansion on the negative axis:
/// E(x) ~ -sum_{k>=1} x^{-k} / Gamma(beta - alpha k).
inline std::optional<EvalReport> asymptotic(double alpha, double beta, double x) {
    double sum = 0.0;
    double abs_sum = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    const double inv = 1.0 / x;
    double ipow = 1.0;
    for (int k = 1; k < 400; ++k) {
        ipow *= inv;
        const double r = rgamma(beta - alpha * k);
        const double term = -ipow * r;
        const double mag = std::abs(term);
        if (r == 0.0) continue;
        if (mag > prev) break;  // divergent tail begins
        if (mag <= kAsymptoticRelTol * 1e-2 * std::abs(sum)) {
            return EvalReport{sum, mag + 4.0 * kEps * abs_sum, Regime::asymptotic};
        }
        sum += term;
        abs_sum += mag;
        prev = mag;
    }
    const double err = prev + 4.0 * kEps * abs_sum;
    if (err <= kAsymptoticRelTol * std::abs(sum)) return EvalReport{sum, err, Regime::asymptotic};
    return std::nullopt;
}

/// Real-axis integral for 0 < alpha < 1, 0 < beta <= 1, x < 0, obtained by
/// collapsing the Laplace inversion contour of s^(alpha-beta)/(s^alpha - x)
/// onto the branch cut and substituting r = s^(1/alpha).
inline EvalReport cut_integral(double alpha, double beta, double x) {
    const double y = -x;
    const double sb = boost::math::sin_pi(beta);
    const double sba = boost::math::sin_pi(beta - alpha);
    const double ca = boost::math::cos_pi(alpha);
    const double inv_a = 1.0 / alpha;
    const double pw = (1.0 - beta) * inv_a;
    // exp(-s^(1/alpha)) underflows beyond s_max
    const double s_max = std::pow(745.0, alpha);
    auto f = [=](double s) {
        if (s <= 0.0) {
            // limit s -> 0; finite because (1 - beta)/alpha >= 0
            return pw == 0.0 ? sba / (std::numbers::pi * alpha * y) : 0.0;
        }
        if (s >= s_max) return 0.0;
        const double den = s * s + 2.0 * y * s * ca + y * y;
        const double num = s * sb + y * sba;
        return std::exp(-std::pow(s, inv_a)) * std::pow(s, pw) * num /
               (std::numbers::pi * alpha * den);
    };
    // integrators cache abscissas lazily; one instance per thread
    thread_local boost::math::quadrature::tanh_sinh<double> ts(15);
    // split at s = y where the denominator is smallest
    const double mid = std::min(y, s_max);
    double err_lo = 0.0, l1_lo = 0.0, err_hi = 0.0, l1_hi = 0.0;
    const double lo = ts.integrate(f, 0.0, mid, kQuadratureRelTol, &err_lo, &l1_lo);
    // shifted to start at 0: tanh_sinh mishandles left endpoints >= 0.5
    auto f_hi = [&](double u) { return f(mid + u); };
    const double hi =
        mid < s_max ? ts.integrate(f_hi, 0.0, s_max - mid, kQuadratureRelTol, &err_hi, &l1_hi) : 0.0;
    const double value = lo + hi;
    const double err = err_lo + err_hi + 16.0 * kEps * (l1_lo + l1_hi);
    return {value, err, Regime::integral};
}

/// alpha < 1, x < 0, any beta > 0.
inline EvalReport negative_axis(double alpha, double beta, double x) {
    const double z = std::pow(-x, 1.0 / alpha);
    if (z <= kSeriesMaxScaled) return series(alpha, beta, x);
    // the smallest-term remainder estimate is only reliable for beta == 1
    if (beta == 1.0 && z >= kAsymptoticMinScaled) {
        if (auto r = asymptotic(alpha, beta, x)) return *r;
    }
    if (beta <= 1.0) return cut_integral(alpha, beta, x);
    // lower beta by alpha until the integral applies, then climb back with
    // E_{a,b}(x) = (E_{a,b-a}(x) - 1/Gamma(b-a)) / x
    EvalReport low = negative_axis(alpha, beta - alpha, x);
    const double r = rgamma(beta - alpha);
    const double v = (low.value - r) / x;
    const double err = (low.est_abs_error + 2.0 * kEps * (std::abs(low.value) + std::abs(r))) / std::abs(x);
    return {v, err, low.regime};
}

/// alpha == 1 on any real x.
inline EvalReport classical(double beta, double x) {
    if (beta == 1.0) {
        const double v = std::exp(x);
        if (!std::isfinite(v)) throw OverflowError("exp overflow at x = " + std::to_string(x));
        return {v, 2.0 * kEps * v, Regime::closed_form};
    }
    if (beta == 2.0) {
        const double v = x == 0.0 ? 1.0 : std::expm1(x) / x;
        if (!std::isfinite(v)) throw OverflowError("expm1 overflow at x = " + std::to_string(x));
        return {v, 4.0 * kEps * std::abs(v), Regime::closed_form};
    }
    if (x >= -1.5) return series(1.0, beta, x);
    if (x <= -40.0) {
        // the exponential Stokes term is below exp(-40) * |x|^(1-beta)
        if (auto r = asymptotic(1.0, beta, x); r && (beta > 0.0 || r->est_abs_error < 1e-14)) {
            r->est_abs_error += std::exp(x) * std::pow(-x, std::max(0.0, 1.0 - beta));
            return *r;
        }
    }
    if (beta > 1.0) {
        // Kummer: E_{1,b}(x) = e^x/Gamma(b) sum_k (b-1)/(b-1+k) (-x)^k/k!, positive terms
        const double y = -x;
        double term = 1.0;
        double sum = 1.0;
        for (int k = 1; k < 100000; ++k) {
            term *= y / k;
            const double t = term * (beta - 1.0) / (beta - 1.0 + k);
            sum += t;
            if (t <= 1e-17 * sum) break;
        }
        const double v = std::exp(x) * sum * rgamma(beta);
        return {v, 8.0 * kEps * std::abs(v) * (1.0 + y * 1e-2), Regime::series};
    }
    // 0 < beta < 1: E_{1,b}(x) = x E_{1,b+1}(x) + 1/Gamma(b)
    const EvalReport up = classical(beta + 1.0, x);
    const double r = rgamma(beta);
    const double v = x * up.value + r;
    return {v, std::abs(x) * up.est_abs_error + 4.0 * kEps * (std::abs(r) + std::abs(x * up.value)), up.regime};
}

}  // namespace detail

/// E_{alpha,beta}(x) for alpha in (0,1], beta > 0. Arguments x > 0 are only
/// accepted for alpha == 1.
inline EvalReport ml_eval(const MlParams& params, double x) {
    validate(params);
    if (!std::isfinite(x)) throw DomainError("Mittag-Leffler argument must be finite");
    if (params.alpha == 1.0) return detail::classical(params.beta, x);
    if (x > 0.0) {
        throw DomainError("Mittag-Leffler argument must be <= 0 for alpha < 1, got " + std::to_string(x));
    }
    if (x == 0.0) {
        return {detail::rgamma(params.beta), detail::kEps * detail::rgamma(params.beta), Regime::series};
    }
    return detail::negative_axis(params.alpha, params.beta, x);
}

/// E_{alpha,beta}(x) for 0 <= x <= kGrowthCap (positive-term series). Used
/// for the non-positive eigenvalues of -A, where -lambda t^alpha >= 0.
inline EvalReport ml_eval_growth(const MlParams& params, double x) {
    validate(params);
    if (params.alpha == 1.0) return ml_eval(params, x);
    if (!(x >= 0.0 && x <= kGrowthCap)) {
        throw DomainError("growth-branch argument must lie in [0, " + std::to_string(kGrowthCap) +
                          "], got " + std::to_string(x));
    }
    return detail::series(params.alpha, params.beta, x);
}

/// Dispatches on the sign of x between ml_eval and ml_eval_growth.
inline double ml_value(const MlParams& params, double x) {
    if (x > 0.0 && params.alpha < 1.0) return ml_eval_growth(params, x).value;
    return ml_eval(params, x).value;
}

/// E_{alpha,1}(-lambda t^alpha), the per-mode decay profile.
inline double decay_profile(double alpha, double lambda, double t) {
    if (t == 0.0 || lambda == 0.0) return 1.0;
    return ml_value({alpha, 1.0}, -lambda * std::pow(t, alpha));
}

/// d/dt E_{alpha,1}(-lambda t^alpha) = -lambda t^(alpha-1) E_{alpha,alpha}(-lambda t^alpha).
inline double ml_time_deriv(double alpha, double lambda, double t) {
    validate({alpha, 1.0});
    if (!(t > 0.0)) throw DomainError("ml_time_deriv requires t > 0");
    if (alpha < 1.0 && lambda < 0.0) {
        throw DomainError("ml_time_deriv requires lambda >= 0 for alpha < 1");
    }
    if (lambda == 0.0) return 0.0;
    const double ta = std::pow(t, alpha);
    return -lambda * std::pow(t, alpha - 1.0) * ml_eval({alpha, alpha}, -lambda * ta).value;
}

/// Smallest grid-certified C1 with 1/E_{alpha,1}(-lambda T^alpha) <= C1 (1 + lambda T^alpha)
/// for every lambda >= lambda_floor. The grid covers lambda T^alpha up to 1e4;
/// beyond it the ratio tends to Gamma(1 - alpha) from below.
inline double ml_inverse_bound_c1(double alpha, double T, double lambda_floor) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("ml_inverse_bound_c1 requires 0 < alpha < 1 (the bound fails for alpha = 1)");
    }
    if (!(T > 0.0)) throw DomainError("ml_inverse_bound_c1 requires T > 0");
    if (!(lambda_floor > 0.0)) throw DomainError("ml_inverse_bound_c1 requires lambda_floor > 0");
    constexpr double kGridTop = 1e4;
    constexpr int kGridPoints = 2000;
    constexpr double kSafety = 1.01;
    const double tail = std::tgamma(1.0 - alpha);
    const double y0 = lambda_floor * std::pow(T, alpha);
    if (y0 >= kGridTop) return tail;
    double sup = 0.0;
    const double l0 = std::log(y0);
    const double l1 = std::log(kGridTop);
    for (int i = 0; i < kGridPoints; ++i) {
        const double y = std::exp(l0 + (l1 - l0) * i / (kGridPoints - 1));
        const double e = ml_eval({alpha, 1.0}, -y).value;
        sup = std::max(sup, 1.0 / (e * (1.0 + y)));
    }
    return std::max(kSafety * sup, tail);
}

// ---------------------------------------------------------------------------
// Shape checkers

struct OrderVerdict {
    int order = 0;
    bool pass = true;
    double worst_margin = std::numeric_limits<double>::infinity();  // min of (-1)^k D^k f + tol
    std::size_t worst_index = 0;
};

struct MonotoneReport {
    std::vector<OrderVerdict> orders;
    bool pass = true;
};

/// Sign pattern (-1)^k f^(k) >= 0 checked through forward divided differences
/// (scaled by k!) on every window of k+1 consecutive nodes.
inline MonotoneReport check_complete_monotone(const std::function<double(double)>& f,
                                              std::span<const double> grid, int order_max) {
    if (order_max < 0 || order_max > 4) throw DomainError("order_max must lie in [0, 4]");
    if (grid.size() < static_cast<std::size_t>(order_max) + 2) {
        throw DomainError("grid too short for requested order");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw DomainError("grid must be strictly increasing");
    }
    const std::size_t n = grid.size();
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = f(grid[i]);

    MonotoneReport report;
    std::vector<double> dd = values;  // divided differences of the current order
    double factorial = 1.0;
    for (int k = 0; k <= order_max; ++k) {
        if (k > 0) {
            factorial *= k;
            for (std::size_t i = 0; i + k < n; ++i) {
                dd[i] = (dd[i + 1] - dd[i]) / (grid[i + k] - grid[i]);
            }
        }
        OrderVerdict v;
        v.order = k;
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        for (std::size_t i = 0; i + k < n; ++i) {
            double fmax = 0.0;
            double hmin = std::numeric_limits<double>::infinity();
            for (std::size_t j = i; j <= i + k; ++j) {
                fmax = std::max(fmax, std::abs(values[j]));
                if (j > i) hmin = std::min(hmin, grid[j] - grid[j - 1]);
            }
            const double tol = 1e-8 * (1.0 + fmax) * factorial * (k == 0 ? 1.0 : std::pow(hmin, -k));
            const double margin = sign * factorial * dd[i] + tol;
            if (margin < v.worst_margin) {
                v.worst_margin = margin;
                v.worst_index = i;
            }
        }
        v.pass = v.worst_margin >= 0.0;
        report.pass = report.pass && v.pass;
        report.orders.push_back(v);
    }
    return report;
}

struct LogConvexReport {
    bool pass = true;
    double worst_margin = std::numeric_limits<double>::infinity();  // relative slack, >= 0 on pass
    std::size_t worst_index = 0;
    std::size_t triples = 0;
};

/// For each consecutive triple checks f(t_b) <= f(t_a)^(1-w) f(t_c)^w (1 + 1e-9),
/// w = (t_b - t_a)/(t_c - t_a); on uniform grids this is the midpoint form.
inline LogConvexReport check_log_convex(std::span<const std::pair<double, double>> samples) {
    if (samples.size() < 3) throw DomainError("log-convexity check needs at least 3 samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!(samples[i].second > 0.0)) {
            throw DomainError("log-convexity check needs positive samples (index " + std::to_string(i) + ")");
        }
        if (i > 0 && !(samples[i].first > samples[i - 1].first)) {
            throw DomainError("log-convexity sample times must be strictly increasing");
        }
    }
    constexpr double kSlack = 1e-9;
    LogConvexReport report;
    for (std::size_t i = 0; i + 2 < samples.size(); ++i) {
        const auto [ta, fa] = samples[i];
        const auto [tb, fb] = samples[i + 1];
        const auto [tc, fc] = samples[i + 2];
        const double w = (tb - ta) / (tc - ta);
        const double rhs = std::exp((1.0 - w) * std::log(fa) + w * std::log(fc));
        const double margin = (rhs * (1.0 + kSlack) - fb) / rhs;
        ++report.triples;
        if (margin < report.worst_margin) {
            report.worst_margin = margin;
            report.worst_index = i + 1;
        }
    }
    report.pass = report.worst_margin >= 0.0;
    return report;
}

}  // namespace mlf
}  // namespace fracback
