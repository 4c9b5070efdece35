#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "fracback/backcast.hpp"
#include "fracback/certify.hpp"
#include "oracles.hpp"

using namespace fracback;
using namespace fracback::backcast;

namespace {

specop::SpectralField random_field(const specop::EigenSystemPtr& es, unsigned seed, double decay = 2.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> c(es->size());
    for (std::size_t n = 0; n < c.size(); ++n) c[n] = g(rng) * std::pow(double(n + 1), -decay);
    return {es, c};
}

specop::EigenSystemPtr modes(std::vector<double> ev) {
    return std::make_shared<const specop::EigenSystem>(specop::EigenSystem::Parts{.eigenvalues = std::move(ev)});
}

}  // namespace

TEST(Amplification, Examples) {
    auto prof = amplification_profile(*modes({0.0, 10.0}), 1.0, 1.0);
    EXPECT_EQ(prof[0].factor, 1.0);
    EXPECT_NEAR(prof[1].factor, 22026.465794806718, 1e-8);
    EXPECT_THROW(amplification_profile(*modes({1.0}), 0.5, 0.0), DomainError);
}

TEST(Amplification, HalfOrderWithinInverseBound) {
    const double c1 = mlf::ml_inverse_bound_c1(0.5, 1.0, 1.0);
    std::vector<double> ev;
    for (int i = 0; i <= 400; ++i) ev.push_back(std::pow(10.0, 4.0 * i / 400.0));
    for (const auto& e : amplification_profile(*modes(ev), 0.5, 1.0))
        EXPECT_LE(e.factor / (1.0 + e.lambda), c1) << e.lambda;
}

TEST(Amplification, UnderflowGivesInfinity) {
    auto prof = amplification_profile(*modes({800.0}), 1.0, 1.0);
    EXPECT_TRUE(std::isinf(prof[0].factor));
}

TEST(AmplificationProperty, Dichotomy) {
    auto es = specop::dirichlet_laplacian_1d(1.0, 20);
    const double T = 1.0;
    const double c1 = mlf::ml_inverse_bound_c1(0.5, T, es->eigenvalue(0));
    const double bound = 1.05 * c1 * std::pow(T, 0.5) * (1.0 + 1.0 / (es->eigenvalue(0) * std::pow(T, 0.5)));
    for (const auto& e : amplification_profile(*es, 0.5, T)) EXPECT_LE(e.factor / e.lambda, bound);
    for (const auto& e : amplification_profile(*es, 1.0, T)) {
        if (e.lambda >= 2.0) {
            EXPECT_GE(e.factor, std::exp(e.lambda / 2.0));
        }
    }
}

TEST(ExactBackcast, RoundTrip) {
    std::vector<double> ev;
    for (int n = 1; n <= 40; ++n) ev.push_back(0.5 * n);
    auto es = modes(ev);
    const auto u0 = random_field(es, 1, 0.0);
    const auto r = exact_backcast(evolve::forward_evolve(u0, 0.5, 1.0), 0.5, 1.0, 1e12);
    EXPECT_EQ(r.dropped_modes, 0);
    EXPECT_EQ(r.regularizer, Regularizer::none);
    EXPECT_GE(r.amplification_max, 1.0);
    for (std::size_t n = 0; n < ev.size(); ++n) EXPECT_NEAR(r.u0_hat[n], u0[n], 1e-8 * std::abs(u0[n]));
}

TEST(ExactBackcast, ZeroData) {
    auto es = specop::dirichlet_laplacian_1d(1.0, 16);
    const auto r = exact_backcast(specop::SpectralField::zero(es), 0.7, 1.0);
    EXPECT_EQ(r.u0_hat.norm(), 0.0);
    EXPECT_EQ(r.dropped_modes, 0);
}

TEST(ExactBackcast, DropsModesAboveCap) {
    auto es = modes({1.0, 50.0, 900.0});
    const auto r = exact_backcast(specop::SpectralField(es, {1.0, 1.0, 1.0}), 1.0, 1.0, 1e10);
    EXPECT_EQ(r.dropped_modes, 2);
    EXPECT_EQ(r.u0_hat[1], 0.0);
    EXPECT_EQ(r.u0_hat[2], 0.0);
    EXPECT_NEAR(r.u0_hat[0], std::exp(1.0), 1e-14);
    EXPECT_EQ(r.regularizer, Regularizer::truncation);
    EXPECT_THROW(exact_backcast(specop::SpectralField(es, {1.0, 1.0, 1.0}), 1.0, 1.0, 0.5), DomainError);
}

TEST(BackcastProperty, InverseOfForwardOnKeptModes) {
    for (double a : {0.3, 0.6, 0.9, 1.0}) {
        auto es = specop::dirichlet_laplacian_1d(1.0, 32);
        const auto u0 = random_field(es, 7, 1.0);
        const auto r = exact_backcast(evolve::forward_evolve(u0, a, 0.5), a, 0.5);
        for (std::size_t n = 0; n < 32; ++n) {
            if (r.u0_hat[n] == 0.0 && u0[n] != 0.0) continue;  // dropped
            EXPECT_NEAR(r.u0_hat[n], u0[n], 1e-8 * std::abs(u0[n])) << a << " " << n;
        }
    }
}

TEST(Noise, ZeroDeltaIsIdentity) {
    auto es = specop::dirichlet_laplacian_1d(1.0, 8);
    const auto u = random_field(es, 2);
    const auto v = noisy_observation(u, {0.0, 5});
    for (std::size_t n = 0; n < 8; ++n) EXPECT_EQ(u[n], v[n]);
    EXPECT_THROW(noisy_observation(u, {-1.0, 5}), DomainError);
}

TEST(NoiseProperty, ExactNormAndDeterminism) {
    auto es = specop::dirichlet_laplacian_1d(1.0, 64);
    const auto u = random_field(es, 3);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        for (double delta : {1e-8, 1e-3, 0.5}) {
            const auto v = noisy_observation(u, {delta, seed});
            EXPECT_NEAR(v.minus(u).norm(), delta, 1e-12 * std::max(1.0, delta));
            const auto w = noisy_observation(u, {delta, seed});
            for (std::size_t n = 0; n < 64; ++n) EXPECT_EQ(v[n], w[n]);
        }
    }
    const auto a = noisy_observation(u, {0.1, 1});
    const auto b = noisy_observation(u, {0.1, 2});
    EXPECT_GT(a.minus(b).norm(), 0.0);
}

TEST(NoiseProperty, CounterNormalMoments) {
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = detail::counter_normal(42, i);
        s += x;
        s2 += x * x;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(MatchedPerturbation, FinalNormIsDelta) {
    auto es = specop::dirichlet_laplacian_1d(1.0, 32);
    for (double a : {0.3, 0.7}) {
        const auto w = matched_perturbation(es, a, 1.0, 1e-3, 9);
        EXPECT_NEAR(evolve::forward_evolve(w, a, 1.0).norm(), 1e-3, 1e-15);
    }
}

TEST(Tikhonov, Examples) {
    auto z = modes({0.0});
    const auto r = tikhonov_backcast(specop::SpectralField(z, {3.0}), 0.5, 1.0, 0.25);
    EXPECT_NEAR(r.u0_hat[0], 3.0 / 1.25, 1e-15);
    EXPECT_EQ(r.parameter, 0.25);
    EXPECT_EQ(r.regularizer, Regularizer::tikhonov);
    auto es = specop::dirichlet_laplacian_1d(1.0, 8);
    EXPECT_EQ(tikhonov_backcast(specop::SpectralField::zero(es), 0.5, 1.0, 1e-3).u0_hat.norm(), 0.0);
    EXPECT_THROW(tikhonov_backcast(specop::SpectralField::zero(es), 0.5, 1.0, 0.0), DomainError);
}

TEST(Tikhonov, SmallGammaMatchesExact) {
    std::vector<double> ev;
    for (int n = 1; n <= 30; ++n) ev.push_back(10.0 * n);
    auto es = modes(ev);
    const auto uT = evolve::forward_evolve(random_field(es, 4, 0.0), 0.5, 1.0);
    const auto exact = exact_backcast(uT, 0.5, 1.0);
    ASSERT_LE(exact.amplification_max, 1e4);
    const auto tik = tikhonov_backcast(uT, 0.5, 1.0, 1e-16);
    for (std::size_t n = 0; n < ev.size(); ++n)
        EXPECT_NEAR(tik.u0_hat[n], exact.u0_hat[n], 1e-6 * std::abs(exact.u0_hat[n]));
}

TEST(TikhonovProperty, FilterBoundedByAmGm) {
    auto es = specop::dirichlet_laplacian_1d(1.0, 64);
    for (double a : {0.3, 0.8, 1.0}) {
        for (double gamma : {1e-12, 1e-6, 1e-2}) {
            std::vector<double> ones(64, 1.0);
            const auto r = tikhonov_backcast(specop::SpectralField(es, ones), a, 1.0, gamma);
            for (std::size_t n = 0; n < 64; ++n) EXPECT_LE(r.u0_hat[n], 1.0 / (2.0 * std::sqrt(gamma)) * (1 + 1e-12));
        }
    }
}

TEST(ChooseGamma, FormulaAndMonotonicity) {
    EXPECT_NEAR(choose_gamma(1e-2, 1.0, 0.5), 1e-4, 1e-20);
    double prev = 0.0;
    for (double d : {1e-6, 1e-4, 1e-2, 0.5}) {
        const double g = choose_gamma(d, 1.0, 0.5);
        EXPECT_GT(g, prev);
        prev = g;
    }
    EXPECT_THROW(choose_gamma(1.0, 1.0, 0.5), DomainError);
    EXPECT_THROW(choose_gamma(0.0, 1.0, 0.5), DomainError);
    EXPECT_THROW(choose_gamma(0.1, 1.0, 1.0), DomainError);
}

TEST(Interior, Examples) {
    auto es = specop::dirichlet_laplacian_1d(1.0, 24);
    const auto u0 = random_field(es, 5);
    const auto uT = evolve::forward_evolve(u0, 0.5, 1.0);
    const auto r = exact_backcast(uT, 0.5, 1.0);
    const auto back = backcast_interior(r.u0_hat, 0.5, 1.0);
    for (std::size_t n = 0; n < 24; ++n) EXPECT_NEAR(back[n], uT[n], 1e-8 * std::abs(uT[n]) + 1e-300);
    const auto start = backcast_interior(r.u0_hat, 0.5, 0.0);
    for (std::size_t n = 0; n < 24; ++n) EXPECT_EQ(start[n], r.u0_hat[n]);
}

TEST(Interior, ErrorWithinNoisyBound) {
    auto es = specop::dirichlet_laplacian_1d(1.0, 64);
    const double a = 0.5, T = 1.0, R = 2.0, delta = 1e-3;
    const auto u0 = random_field(es, 6).scaled(0.5);
    const auto w0 = matched_perturbation(es, a, T, delta, 12);
    const auto v0 = u0.plus(w0);
    ASSERT_LE(u0.norm(), R);
    ASSERT_LE(v0.norm(), R);
    const double K = certify::log_convexity_constant(*es, a, T).K;
    for (double t : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        const double err = evolve::forward_evolve(v0, a, t).minus(evolve::forward_evolve(u0, a, t)).norm();
        EXPECT_LE(err, 2.0 * K * std::pow(R, 1.0 - t / T) * std::pow(delta, t / T)) << t;
    }
}

TEST(EndToEnd, TikhonovRateAtMidTime) {
    // epsilon = 1 problem: u0 in D(A) with ||A u0|| bounded
    auto es = specop::dirichlet_laplacian_1d(1.0, 64);
    const double T = 1.0, R = 2.0;
    const double beta = certify::holder_exponent(1.0);
    for (double a : {0.3, 0.5, 0.7}) {
        auto u0 = random_field(es, 21, 3.0);
        u0 = u0.scaled(0.9 * R / std::max(u0.norm(), u0.operator_norm()));
        const auto uT = evolve::forward_evolve(u0, a, T);
        const auto umid = evolve::forward_evolve(u0, a, T / 2);
        std::vector<double> ds, es_;
        for (double d : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
            const auto r = tikhonov_backcast(noisy_observation(uT, {d, 3}), a, T, choose_gamma(d, R, beta));
            ds.push_back(d);
            es_.push_back(backcast_interior(r.u0_hat, a, T / 2).minus(umid).norm());
        }
        const auto fit = fit_power_law(ds, es_);
        EXPECT_GE(fit.exponent, 0.8 * beta) << a;
    }
}

TEST(PowerLawFit, RecoversExponent) {
    std::vector<double> x{1e-4, 1e-3, 1e-2, 1e-1}, y;
    for (double v : x) y.push_back(3.0 * std::pow(v, 0.7));
    const auto f = fit_power_law(x, y);
    EXPECT_NEAR(f.exponent, 0.7, 1e-12);
    EXPECT_NEAR(f.log_prefactor, std::log(3.0), 1e-12);
    EXPECT_THROW(fit_power_law(std::vector<double>{1.0}, std::vector<double>{1.0}), DomainError);
}
