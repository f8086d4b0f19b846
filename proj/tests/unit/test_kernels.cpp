#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Dense>

#include "ffou/fgn.hpp"
#include "ffou/kernels.hpp"

using namespace ffou;

namespace {

ModelParams params(double h, double theta = 30.0, double sigma = 1.0) {
    ModelParams p;
    p.hurst = h;
    p.theta = theta;
    p.sigma = sigma;
    return p;
}

template <class F>
double gk(F f, double a, double b) {
    if (!(b > a)) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 8, 1e-10);
}

// Independent oracle: integrating by parts, V_t = sigma (B_t - (1/theta) int_0^t e^{-(t-u)/theta} B_u du),
// so R_H is a double integral of the (continuous) fBm covariance.
double oracle_cov(double t, double s, double h, double theta) {
    auto k = [&](double x, double y) { return fbm_cov(x, y, h); };
    auto w = [&](double x, double end) { return std::exp(-(end - x) / theta) / theta; };
    const double direct = k(t, s);
    const double left = gk([&](double v) { return w(v, s) * k(t, v); }, 0.0, std::min(s, t)) +
                        gk([&](double v) { return w(v, s) * k(t, v); }, std::min(s, t), s);
    const double right = gk([&](double u) { return w(u, t) * k(u, s); }, 0.0, std::min(s, t)) +
                         gk([&](double u) { return w(u, t) * k(u, s); }, std::min(s, t), t);
    auto inner = [&](double u) {
        auto f = [&](double v) { return w(v, s) * k(u, v); };
        const double kink = std::min(u, s);
        return w(u, t) * (gk(f, 0.0, kink) + gk(f, kink, s));
    };
    const double both = gk(inner, 0.0, std::min(s, t)) + gk(inner, std::min(s, t), t);
    return direct - left - right + both;
}

} // namespace

TEST_CASE("gamma function and C_H") {
    CHECK(gamma_function(1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gamma_function(2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gamma_function(3.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(gamma_function(1.5) == doctest::Approx(std::sqrt(std::numbers::pi) / 2.0).epsilon(1e-14));
    CHECK_THROWS_AS(gamma_function(0.0), DomainError);

    CHECK(c_h_constant(0.5) == doctest::Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-14));
    CHECK(c_h_constant(0.25) ==
          doctest::Approx(std::sqrt(std::numbers::pi) / 2.0 * std::sin(std::numbers::pi / 4) / (2 * std::numbers::pi))
              .epsilon(1e-14));
    CHECK(c_h_constant(1.0 - 1e-9) < 1e-8);
    CHECK(c_h_constant(0.999) > 0.0);
    CHECK_THROWS_AS(c_h_constant(0.0), DomainError);
    CHECK_THROWS_AS(c_h_constant(1.0), DomainError);
}

TEST_CASE("spectral cosine integral closed forms") {
    for (double h : {0.005, 0.1, 0.3, 0.5, 0.7, 0.9, 0.995}) {
        const double j0 = spectral_cosine_integral(0.0, h);
        CHECK(j0 == doctest::Approx(std::numbers::pi / (2.0 * std::sin(std::numbers::pi * h))).epsilon(1e-9));
    }
    for (double a : {0.01, 0.3, 1.0, 2.0, 7.5, 40.0})
        CHECK(spectral_cosine_integral(a, 0.5) == doctest::Approx(std::numbers::pi / 2.0 * std::exp(-a)).epsilon(1e-9));
}

TEST_CASE("rho_stationary") {
    for (double h : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        const auto p = params(h, 30.0, 1.3);
        const double closed = 1.69 * h * std::tgamma(2.0 * h) * std::pow(30.0, 2.0 * h);
        CHECK(rho_stationary(0.0, p) == doctest::Approx(closed).epsilon(1e-8));
        CHECK(rho_stationary(-7.0, p) == rho_stationary(7.0, p));
    }
    const auto half = params(0.5);
    for (double s : {1.0, 10.0, 45.0, 200.0})
        CHECK(rho_stationary(s, half) == doctest::Approx(15.0 * std::exp(-s / 30.0)).epsilon(1e-9));

    // Long-lag power law: rho(s) s^{2-2H} -> sigma^2 theta^2 H (2H-1).
    const auto p = params(0.75);
    const double limit = 900.0 * 0.75 * 0.5;
    const double s = 3000.0 * 30.0;
    CHECK(rho_stationary(s, p) * std::pow(s, 0.5) == doctest::Approx(limit).epsilon(1e-3));
    CHECK(rho_stationary(5.0, params(0.5, 30.0, 0.0)) == 0.0);
}

TEST_CASE("cov_fou edge cases and Markov baseline") {
    const auto p = params(0.7);
    CHECK(cov_fou(0.0, 5.0, p) == 0.0);
    CHECK(cov_fou(5.0, 0.0, p) == 0.0);
    CHECK(cov_fou_harmonizable(0.0, 5.0, p) == 0.0);
    CHECK_THROWS_AS(cov_fou(-1.0, 5.0, p), DomainError);
    CHECK_THROWS_AS(cov_fou(1.0, 1.0, params(1.0)), DomainError);

    const auto half = params(0.5);
    for (double t : {0.0, 10.0, 30.0, 60.0})
        for (double s : {0.0, 10.0, 30.0, 60.0}) {
            const double markov = 15.0 * (std::exp(-std::abs(t - s) / 30.0) - std::exp(-(t + s) / 30.0));
            CHECK(cov_fou(t, s, half) == doctest::Approx(markov).epsilon(1e-12));
            CHECK(std::abs(cov_fou_wiener(t, s, half) - markov) < 1e-8);
            CHECK(std::abs(cov_fou_harmonizable(t, s, half) - markov) < 1e-7);
        }
}

TEST_CASE("cov_fou against the integration-by-parts oracle") {
    for (double h : {0.2, 0.7, 0.9})
        for (auto [t, s] : {std::pair{10.0, 10.0}, {30.0, 10.0}, {60.0, 45.0}}) {
            const double oracle = oracle_cov(t, s, h, 30.0);
            CHECK(cov_fou(t, s, params(h)) == doctest::Approx(oracle).epsilon(1e-7));
        }
}

TEST_CASE("representation agreement and symmetry") {
    const std::vector<double> times{0.0, 10.0, 30.0, 60.0};
    for (double h : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const auto p = params(h);
        for (double t : times)
            for (double s : times) {
                const double w = cov_fou(t, s, p);
                const double hz = cov_fou_harmonizable(t, s, p);
                CHECK(std::abs(w - hz) <= 1e-6 * (1.0 + std::abs(w)));
                CHECK(cov_fou(s, t, p) == w);
                CHECK(cov_fou_harmonizable(s, t, p) == hz);
            }
    }
}

TEST_CASE("harmonizable variance identity") {
    const auto p = params(0.3);
    for (double t : {5.0, 30.0, 90.0}) {
        const double e = std::exp(-t / 30.0);
        const double expected = (1.0 + e * e) * rho_stationary(0.0, p) - 2.0 * e * rho_stationary(t, p);
        CHECK(cov_fou_harmonizable(t, t, p) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("positive semidefinite covariance matrices") {
    const std::vector<double> nodes{2.0, 7.0, 15.0, 22.0, 40.0, 41.0, 75.0, 120.0};
    for (double h : {0.15, 0.5, 0.85}) {
        const auto p = params(h);
        Eigen::MatrixXd m(nodes.size(), nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i)
            for (std::size_t j = 0; j < nodes.size(); ++j) m(i, j) = cov_fou(nodes[i], nodes[j], p);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
    }
}

TEST_CASE("limit kernels") {
    const auto p = params(0.5);
    CHECK(cov_limit_h1(0.0, 0.0, p) == 0.0);
    CHECK(cov_limit_h1(1e6, 1e6, p) == doctest::Approx(900.0));
    CHECK(cov_limit_h1(30.0, 30.0, p) == doctest::Approx(900.0 * std::pow(1.0 - std::exp(-1.0), 2)).epsilon(1e-14));
    CHECK(cov_limit_h0(10.0, 0.0, p) == 0.0);
    CHECK(cov_limit_h0(10.0, 20.0, p) == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(cov_limit_h0(10.0, 10.0, p) == doctest::Approx(0.5 * (1.0 + std::exp(-20.0 / 30.0))).epsilon(1e-14));

    const std::vector<double> times{10.0, 30.0, 60.0};
    for (double t : times)
        for (double s : times) {
            // The H -> 1 gap closes linearly in 1 - H.
            const double g1 = std::abs(cov_fou(t, s, params(0.999)) - cov_limit_h1(t, s, p));
            const double g2 = std::abs(cov_fou(t, s, params(0.9999)) - cov_limit_h1(t, s, p));
            CHECK(g2 / g1 == doctest::Approx(0.1).epsilon(0.05));
            CHECK(g1 < 1e-2 * cov_limit_h1(t, s, p));
            if (t != s) CHECK(std::abs(cov_fou(t, s, params(0.005)) - cov_limit_h0(t, s, p)) < 5e-2);
        }
    for (double t : times) {
        const double limit = 900.0 * std::pow(1.0 - std::exp(-t / 30.0), 2);
        CHECK(std::abs(cov_fou(t, t, params(0.999)) - limit) < 1e-2 * limit);
        CHECK(std::abs(cov_fou(t, t, params(0.005)) - 0.5 * (1.0 + std::exp(-2.0 * t / 30.0))) < 5e-2);
    }
}

TEST_CASE("variance asymptote") {
    CHECK(var_asymptote(params(0.5)) == doctest::Approx(15.0).epsilon(1e-14));
    CHECK(var_asymptote(params(0.75)) ==
          doctest::Approx(std::pow(30.0, 1.5) * 0.75 * std::sqrt(std::numbers::pi) / 2.0).epsilon(1e-13));
    for (double h : {0.25, 0.5, 0.75}) {
        const auto p = params(h);
        CHECK(cov_fou(300.0, 300.0, p) == doctest::Approx(var_asymptote(p)).epsilon(1e-3));
    }
}

TEST_CASE("large-lag expansion") {
    const auto p = params(0.75);
    CHECK(cov_expansion(0.0, 5.0, 1, p) == 0.0);
    const double t = 10.0, s = 50.0;
    const double n1 = 900.0 * 0.75 * 0.5 * (std::pow(s, -0.5) - std::exp(-t / 30.0) * std::pow(t + s, -0.5));
    CHECK(cov_expansion(t, s, 1, p) == doctest::Approx(n1).epsilon(1e-14));
    CHECK_THROWS_AS(cov_expansion(t, s, 1, params(0.5)), DomainError);
    CHECK_THROWS_AS(cov_expansion(t, s, 0, p), DomainError);
    CHECK_THROWS_AS(cov_expansion(t, 5.0, 1, p), DomainError);

    // Remainder is O(s^{2H-4}): doubling s scales it by 2^{2H-4}.
    const double e1 = std::abs(cov_fou(t, t + 1000.0, p) - cov_expansion(t, 1000.0, 1, p));
    const double e2 = std::abs(cov_fou(t, t + 2000.0, p) - cov_expansion(t, 2000.0, 1, p));
    CHECK(e2 / e1 == doctest::Approx(std::pow(2.0, 2 * 0.75 - 4)).epsilon(0.05));
    // Higher orders shrink the remainder.
    const double e3 = std::abs(cov_fou(t, t + 1000.0, p) - cov_expansion(t, 1000.0, 2, p));
    CHECK(e3 < e1);
}

TEST_CASE("tail fit") {
    for (double h : {0.25, 0.75}) {
        const auto p = params(h, 1.0);
        const TailFit fit = tail_fit(CovarianceKernel::fou(p), 10.0, 1e3, 1e4, 12);
        CHECK(std::abs(fit.exponent - (2 * h - 2)) < 0.05);
        CHECK(fit.s_min < fit.s_max);
        CHECK((fit.constant > 0.0) == (h > 0.5));
    }
    CHECK_THROWS_AS(tail_fit(CovarianceKernel::limit_h1(params(0.5)), 10.0, 1e3, 1e4, 8), TailFitError);
    CHECK_THROWS_AS(tail_fit(CovarianceKernel::limit_h1(params(0.5)), 10.0, 1e4, 1e3, 8), DomainError);
}
