#pragma once

// Recovery of the initial state from final-time data: exact spectral
// inversion with an amplification cap, Tikhonov filtering, the spherical
// noise model and the amplification diagnostics.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fracback/error.hpp"
#include "fracback/evolve.hpp"
#include "fracback/mlf.hpp"
#include "fracback/specop.hpp"

namespace fracback::backcast {

using specop::EigenSystem;
using specop::EigenSystemPtr;
using specop::SpectralField;

enum class Regularizer { none, truncation, tikhonov };

inline const char* to_string(Regularizer r) {
    switch (r) {
        case Regularizer::none: return "none";
        case Regularizer::truncation: return "truncation";
        case Regularizer::tikhonov: return "tikhonov";
    }
    return "unknown";
}

struct NoiseSpec {
    double delta = 0.0;
    std::uint64_t seed = 0;
};

struct BackcastResult {
    SpectralField u0_hat;
    double amplification_max = 1.0;
    Regularizer regularizer = Regularizer::none;
    double parameter = 0.0;
    int dropped_modes = 0;
};

inline constexpr double kDefaultAmplificationCap = 1e12;

struct AmplificationEntry {
    double lambda = 0.0;
    double factor = 1.0;  // 1 / E_{alpha,1}(-lambda T^alpha); +inf when E underflows
};

namespace detail {

inline double final_decay(double alpha, double lambda, double T) {
    return mlf::decay_profile(alpha, lambda, T);
}

inline void require_positive_time(double T) {
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("final time T must be positive");
}

}  // namespace detail

inline std::vector<AmplificationEntry> amplification_profile(const EigenSystem& eigsys, FractionalOrder alpha,
                                                             double T) {
    detail::require_positive_time(T);
    std::vector<AmplificationEntry> out;
    out.reserve(eigsys.size());
    for (double lambda : eigsys.eigenvalues()) {
        const double e = detail::final_decay(alpha.value(), lambda, T);
        out.push_back({lambda, e > 0.0 ? 1.0 / e : std::numeric_limits<double>::infinity()});
    }
    return out;
}

/// c_n(0) = c_n(T) / E_n for every mode whose factor 1/E_n stays below cap;
/// the others are zeroed and counted.
inline BackcastResult exact_backcast(const SpectralField& uT, FractionalOrder alpha, double T,
                                     double amplification_cap = kDefaultAmplificationCap) {
    detail::require_positive_time(T);
    if (!(amplification_cap >= 1.0)) throw DomainError("amplification cap must be >= 1");
    const EigenSystem& es = *uT.eigsys();
    std::vector<double> c(uT.size(), 0.0);
    int dropped = 0;
    double amp_max = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n) {
        const double e = detail::final_decay(alpha.value(), es.eigenvalue(n), T);
        const double factor = e > 0.0 ? 1.0 / e : std::numeric_limits<double>::infinity();
        if (factor > amplification_cap) {
            ++dropped;
            continue;
        }
        amp_max = std::max(amp_max, factor);
        c[n] = uT[n] * factor;
    }
    if (dropped == static_cast<int>(c.size())) amp_max = 1.0;
    return {SpectralField(uT.eigsys(), std::move(c)), amp_max, dropped > 0 ? Regularizer::truncation : Regularizer::none,
            amplification_cap, dropped};
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based uniform in (0, 1): value depends only on (seed, index).
inline double counter_uniform(std::uint64_t seed, std::uint64_t index) {
    const std::uint64_t bits = splitmix64(splitmix64(seed) ^ (index * 0xd1b54a32d192ed03ULL));
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal by Box-Muller on the counter pair (2i, 2i+1).
inline double counter_normal(std::uint64_t seed, std::uint64_t index) {
    const double u1 = counter_uniform(seed, 2 * index);
    const double u2 = counter_uniform(seed, 2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace detail

/// Unit vector uniformly distributed on the sphere in R^n.
inline std::vector<double> spherical_direction(std::size_t n, std::uint64_t seed) {
    std::vector<double> v(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = detail::counter_normal(seed, i);
        s += v[i] * v[i];
    }
    const double norm = std::sqrt(s);
    for (double& x : v) x /= norm;
    return v;
}

/// uT plus a perturbation of Euclidean norm exactly delta.
inline SpectralField noisy_observation(const SpectralField& uT, const NoiseSpec& noise) {
    if (!(noise.delta >= 0.0) || !std::isfinite(noise.delta)) throw DomainError("noise level delta must be >= 0");
    if (noise.delta == 0.0) return uT;
    const auto dir = spherical_direction(uT.size(), noise.seed);
    std::vector<double> c(uT.coefficients().begin(), uT.coefficients().end());
    for (std::size_t n = 0; n < c.size(); ++n) c[n] += noise.delta * dir[n];
    return SpectralField(uT.eigsys(), std::move(c));
}

/// Initial perturbation w0 whose final state has norm exactly delta. The
/// direction has coefficients N(0,1) n^(-decay_exponent), so u0 + w0 stays
/// close to u0 in the initial norm.
inline SpectralField matched_perturbation(const EigenSystemPtr& eigsys, FractionalOrder alpha, double T, double delta,
                                          std::uint64_t seed, double decay_exponent = 2.0) {
    detail::require_positive_time(T);
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("noise level delta must be >= 0");
    std::vector<double> c(eigsys->size());
    for (std::size_t n = 0; n < c.size(); ++n) {
        c[n] = detail::counter_normal(seed, n) * std::pow(static_cast<double>(n + 1), -decay_exponent);
    }
    SpectralField dir(eigsys, std::move(c));
    const double final_norm = evolve::forward_evolve(dir, alpha, T).norm();
    if (!(final_norm > 0.0)) throw DomainError("perturbation direction vanishes at T");
    return dir.scaled(delta / final_norm);
}

/// Mode-wise minimizer of sum (E_n c_n - d_n)^2 + gamma sum c_n^2.
inline BackcastResult tikhonov_backcast(const SpectralField& uT_delta, FractionalOrder alpha, double T, double gamma) {
    detail::require_positive_time(T);
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("Tikhonov parameter gamma must be positive");
    const EigenSystem& es = *uT_delta.eigsys();
    std::vector<double> c(uT_delta.size(), 0.0);
    double amp_max = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n) {
        const double e = detail::final_decay(alpha.value(), es.eigenvalue(n), T);
        const double filter = e / (e * e + gamma);
        amp_max = std::max(amp_max, filter);
        c[n] = filter * uT_delta[n];
    }
    return {SpectralField(uT_delta.eigsys(), std::move(c)), amp_max, Regularizer::tikhonov, gamma, 0};
}

/// gamma = (delta / R)^2. Balances the data misfit delta against the
/// a-priori bound R; beta_holder is validated and documents the expected rate.
inline double choose_gamma(double delta, double R, double beta_holder) {
    if (!(beta_holder > 0.0 && beta_holder < 1.0)) throw DomainError("Hoelder exponent must lie in (0, 1)");
    if (!(delta > 0.0)) throw DomainError("choose_gamma needs delta > 0");
    if (!(delta < R)) throw DomainError("choose_gamma needs delta < R (no information otherwise)");
    const double q = delta / R;
    return q * q;
}

/// Reconstructed state at an intermediate time.
inline SpectralField backcast_interior(const SpectralField& u0_hat, FractionalOrder alpha, double t) {
    return evolve::forward_evolve(u0_hat, alpha, t);
}

struct PowerFit {
    double exponent = 0.0;
    double log_prefactor = 0.0;
};

/// Least-squares fit of log y = log C + p log x.
inline PowerFit fit_power_law(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("power-law fit needs >= 2 paired samples");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("power-law fit needs positive samples");
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double p = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {p, (sy - p * sx) / n};
}

}  // namespace fracback::backcast
