#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ffou/fault.hpp"
#include "ffou/forcing.hpp"

using namespace ffou;

namespace {

double ks_distance(std::vector<double> draws, const ActivationLaw& law) {
    std::sort(draws.begin(), draws.end());
    const double n = static_cast<double>(draws.size());
    double d = 0.0;
    // Evaluate the model cdf on a thinned set of order statistics; the
    // empirical cdf is exact at each of them.
    const std::size_t stride = 50;
    for (std::size_t i = 0; i < draws.size(); i += stride) {
        const double f = activation_cdf(law, draws[i]);
        d = std::max({d, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
    }
    return d;
}

template <class F>
double gk(F f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-11);
}

} // namespace

TEST_CASE("activation cdf closed forms") {
    CHECK(activation_cdf(Exponential{0.3}, 2.0) == doctest::Approx(1.0 - std::exp(-0.6)).epsilon(1e-15));
    CHECK(activation_cdf(Degenerate{0.0}, 0.0) == 1.0);
    CHECK(activation_cdf(Degenerate{0.0}, 17.0) == 1.0);
    CHECK(activation_cdf(Degenerate{5.0}, 4.999) == 0.0);
    CHECK(activation_cdf(Degenerate{5.0}, 5.0) == 1.0);
    CHECK(activation_cdf(Exponential{1.0}, -1.0) == 0.0);
    for (double t : {0.1, 1.0, 3.0, 50.0})
        CHECK(activation_cdf(PositiveStable{0.5, 2.0}, t) == doctest::Approx(std::erfc(std::sqrt(2.0 / (2.0 * t)))));
    CHECK(activation_survival(PositiveStable{0.5, 2.0}, 1e12) > 0.0);
}

TEST_CASE("general stable cdf is a distribution function with the right Laplace transform") {
    for (double alpha : {0.3, 0.5000001, 0.7}) {
        const PositiveStable law{alpha, 1.5};
        double prev = 0.0;
        for (double x : {1e-3, 0.01, 0.1, 1.0, 10.0, 100.0, 1e4}) {
            const double f = activation_cdf(law, x);
            CHECK(f >= prev);
            CHECK(f + activation_survival(law, x) == doctest::Approx(1.0).epsilon(1e-10));
            prev = f;
        }
        // Laplace transform of the density: exp(-(2 c u)^alpha).
        for (double u : {0.05, 0.5, 2.0}) {
            auto integrand = [&](double y) {
                const double x = std::exp(y);
                return std::exp(-u * x) * activation_pdf(law, x) * x;
            };
            const double lt = gk(integrand, -12.0, 6.0);
            CHECK(lt == doctest::Approx(std::exp(-std::pow(2.0 * 1.5 * u, alpha))).epsilon(2e-6));
        }
    }
    // Near alpha = 1/2 the quadrature path matches the Levy closed form.
    for (double x : {0.2, 2.0, 20.0})
        CHECK(activation_cdf(PositiveStable{0.5000001, 1.0}, x) ==
              doctest::Approx(activation_cdf(PositiveStable{0.5, 1.0}, x)).epsilon(1e-5));
}

TEST_CASE("activation sampling") {
    RandomStream rng(7, StreamKind::forcing, 0);
    CHECK(activation_sample(Degenerate{3.5}, rng) == 3.5);

    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = activation_sample(Exponential{0.25}, rng);
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n, se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean - 4.0) < 4.0 * se);

    for (double alpha : {0.5, 0.3, 0.8}) {
        const PositiveStable law{alpha, 0.7};
        std::vector<double> draws(n);
        for (double& d : draws) d = activation_sample(law, rng);
        const double d = ks_distance(draws, law);
        CHECK(d < 0.01);
    }
}

TEST_CASE("law text round trip") {
    for (const ActivationLaw& law : {ActivationLaw{Degenerate{2.5}}, ActivationLaw{Exponential{0.05}},
                                     ActivationLaw{PositiveStable{0.5, 0.1}}}) {
        const auto text = format_law(law);
        CHECK(format_law(parse_law(text)) == text);
        CHECK(parse_law(text).index() == law.index());
    }
    CHECK(std::get<Exponential>(parse_law("exponential:0.1")).rate == 0.1);
    CHECK_THROWS_AS(parse_law("gamma:1"), DomainError);
    CHECK_THROWS_AS(parse_law("exponential:-1"), DomainError);
    CHECK_THROWS_AS(parse_law("exponential:abc"), DomainError);
    CHECK_THROWS_AS(parse_law("stable:1.5:1"), DomainError);
}

TEST_CASE("forcing term validation") {
    CHECK_THROWS_AS(ForcingTerm::exp_decay(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(ForcingTerm::periodic(1.0, -1.0), DomainError);
    CHECK_THROWS_AS(ForcingTerm::heaviside({1.0, 2.0}, {Exponential{1.0}}), DomainError);
    CHECK_THROWS_AS(ForcingTerm::heaviside({}, {}), DomainError);
    CHECK_NOTHROW(ForcingTerm::heaviside({1.0, 2.0}, {Exponential{1.0}}, Dependence::shared_single));
    CHECK(ForcingTerm::constant(2.0).is_deterministic());
    CHECK_FALSE(ForcingTerm::single(1.0, Exponential{1.0}).is_deterministic());
}

TEST_CASE("forcing means") {
    CHECK(forcing_mean(ForcingTerm::constant(6.0), 123.0) == 6.0);
    CHECK(forcing_mean(ForcingTerm::zero(), 3.0) == 0.0);
    CHECK(forcing_mean(ForcingTerm::exp_decay(2.0, 5.0), 10.0) == doctest::Approx(2.0 * std::exp(-2.0)));
    CHECK(forcing_mean(ForcingTerm::periodic(3.0, 40.0, 0.5), 10.0) ==
          doctest::Approx(3.0 * std::sin(2 * std::numbers::pi * 10.0 / 40.0 + 0.5)));
    CHECK(forcing_mean(ForcingTerm::single(6.0, Exponential{0.05}), 20.0) ==
          doctest::Approx(6.0 * (1.0 - std::exp(-1.0))));
    const double two = forcing_mean(ForcingTerm::heaviside({6.0, 3.0}, {Exponential{0.05}, Exponential{0.2}}), 7.0);
    CHECK(two == doctest::Approx(forcing_mean(ForcingTerm::single(6.0, Exponential{0.05}), 7.0) +
                                 forcing_mean(ForcingTerm::single(3.0, Exponential{0.2}), 7.0)));
}

TEST_CASE("forcing covariance closed forms and symmetry") {
    const std::vector<double> times{0.0, 1.0, 5.0, 20.0, 60.0};
    CHECK(forcing_cov(ForcingTerm::constant(6.0), 3.0, 4.0) == 0.0);
    CHECK(forcing_cov(ForcingTerm::single(6.0, Degenerate{0.0}), 3.0, 4.0) == 0.0);
    CHECK(forcing_cov(ForcingTerm::single(6.0, Degenerate{4.0}), 3.0, 5.0) == 0.0);
    const double lambda = 0.05;
    const auto single = ForcingTerm::single(6.0, Exponential{lambda});
    const auto indep = ForcingTerm::heaviside({6.0, 3.0}, {Exponential{0.05}, PositiveStable{0.5, 2.0}});
    const auto shared = ForcingTerm::heaviside({6.0, 3.0}, {PositiveStable{0.4, 2.0}}, Dependence::shared_single);
    ForcingCovKernel ks(single), ki(indep), kh(shared);
    for (double t : times)
        for (double s : times) {
            const double lo = std::min(t, s), hi = std::max(t, s);
            CHECK(ks.cov(t, s) == doctest::Approx(36.0 * (1.0 - std::exp(-lambda * lo)) * std::exp(-lambda * hi)));
            CHECK(ks.cov(t, s) == ks.cov(s, t));
            CHECK(ki.cov(t, s) == ki.cov(s, t));
            CHECK(kh.cov(t, s) == kh.cov(s, t));
            CHECK(ki.cov(t, s) >= 0.0);
            CHECK(kh.cov(t, s) >= 0.0);
        }
}

TEST_CASE("ordered covariance against Monte Carlo over activation pairs") {
    const auto forcing = ForcingTerm::heaviside({6.0, 3.0}, {Exponential{1.0 / 20}, Exponential{1.0 / 10}},
                                                Dependence::ordered);
    ForcingCovKernel kernel(forcing);
    const std::vector<std::pair<double, double>> points{{5, 5}, {10, 30}, {30, 10}, {25, 25}, {40, 60}, {80, 15}};
    const int n = 100000;
    RandomStream rng(11, StreamKind::oracle, 0);
    std::vector<std::vector<double>> draws(n);
    for (auto& d : draws) d = sample_activation_times(*forcing.heaviside_sum(), rng);
    for (auto [t, s] : points) {
        double mt = 0, ms = 0, mts = 0, m4 = 0;
        std::vector<double> it(n), is(n);
        for (int k = 0; k < n; ++k) {
            it[k] = 6.0 * (t >= draws[k][0]) + 3.0 * (t >= draws[k][1]);
            is[k] = 6.0 * (s >= draws[k][0]) + 3.0 * (s >= draws[k][1]);
            mt += it[k];
            ms += is[k];
        }
        mt /= n;
        ms /= n;
        for (int k = 0; k < n; ++k) {
            const double p = (it[k] - mt) * (is[k] - ms);
            mts += p;
            m4 += p * p;
        }
        const double cov = mts / n;
        const double se = std::sqrt((m4 / n - cov * cov) / n);
        CHECK(std::abs(kernel.cov(t, s) - cov) < 3.0 * se);
        CHECK(kernel.cov(t, s) == doctest::Approx(kernel.cov(s, t)).epsilon(1e-12));
        CHECK(kernel.mean(t) == doctest::Approx(mt).epsilon(0.02));
    }
    // Mean of the second activation: hypoexponential cdf.
    const double a = 1.0 / 20, b = 1.0 / 10, t = 30.0;
    const double f2 = 1.0 - (b * std::exp(-a * t) - a * std::exp(-b * t)) / (b - a);
    CHECK(kernel.time_cdf(1, t) == doctest::Approx(f2).epsilon(1e-6));
}

TEST_CASE("ordered grid rejects unresolvable gap laws") {
    CHECK_THROWS_AS(ForcingCovKernel(ForcingTerm::heaviside({1.0, 1.0}, {PositiveStable{0.5, 1.0}, Exponential{1.0}},
                                                            Dependence::ordered)),
                    ForcingGridError);
    CHECK_THROWS_AS(ForcingCovKernel(ForcingTerm::heaviside({1.0, 1.0}, {Degenerate{1.0}, Exponential{1.0}},
                                                            Dependence::ordered)),
                    ForcingGridError);
    // All-degenerate ordered sums are deterministic step functions.
    ForcingCovKernel det(ForcingTerm::heaviside({1.0, 2.0}, {Degenerate{1.0}, Degenerate{2.0}}, Dependence::ordered));
    CHECK(det.covariance_vanishes());
    CHECK(det.mean(2.5) == 1.0);
    CHECK(det.mean(3.0) == 3.0);
}

TEST_CASE("vanishing lag and tail behaviour") {
    for (const ActivationLaw& law : {ActivationLaw{Exponential{0.05}}, ActivationLaw{PositiveStable{0.5, 1.0}},
                                     ActivationLaw{PositiveStable{0.7, 1.0}}}) {
        ForcingCovKernel k(ForcingTerm::single(6.0, law));
        double prev = k.cov(10.0, 10.0);
        for (double s : {10.0, 1e2, 1e3, 1e4, 1e6, 1e9, 1e12, 1e16}) {
            const double c = k.cov(10.0, 10.0 + s);
            CHECK(c <= prev);
            prev = c;
        }
        CHECK(prev < 1e-6 * 36.0);
    }
    // Exponential activation: s^{2-2H} c(u, t+s) -> 0 uniformly in u.
    ForcingCovKernel ke(ForcingTerm::single(6.0, Exponential{0.05}));
    for (double h : {0.25, 0.75}) {
        double prev = 1e300;
        for (double s : {1e2, 1e3, 1e4}) {
            double worst = 0.0;
            for (double u : {0.0, 2.5, 5.0, 7.5, 10.0}) worst = std::max(worst, std::pow(s, 2 - 2 * h) * ke.cov(u, 10.0 + s));
            CHECK(worst < prev);
            prev = worst;
        }
        CHECK(prev < 1e-50);
    }
    // Stable activation: growth when alpha < 2 - 2H, decay when alpha > 2 - 2H.
    ForcingCovKernel kst(ForcingTerm::single(6.0, PositiveStable{0.5, 1.0}));
    const double theta = 30.0, t = 10.0;
    auto weighted = [&](double h, double s) {
        return std::pow(s, 2 - 2 * h) * gk([&](double u) { return std::exp(u / theta) * kst.cov(u, t + s); }, 0.0, t);
    };
    const double g1 = weighted(0.6, 1e2), g2 = weighted(0.6, 1e3), g3 = weighted(0.6, 1e4);
    CHECK(g1 < g2);
    CHECK(g2 < g3);
    const double d1 = weighted(0.9, 1e2), d2 = weighted(0.9, 1e3), d3 = weighted(0.9, 1e4);
    CHECK(d1 > d2);
    CHECK(d2 > d3);
}

TEST_CASE("forcing paths") {
    const TimeGrid grid(0.5, 20);
    RandomStream rng(3, StreamKind::forcing, 0);
    for (double v : sample_forcing_path(ForcingTerm::zero(), grid, rng)) CHECK(v == 0.0);

    const auto step = sample_forcing_path(ForcingTerm::single(4.0, Degenerate{2.2}), grid, rng);
    for (std::size_t k = 0; k < grid.nodes(); ++k) CHECK(step[k] == (grid.time(k) >= 2.2 ? 4.0 : 0.0));
    const auto at_node = sample_forcing_path(ForcingTerm::single(4.0, Degenerate{2.0}), grid, rng);
    CHECK(at_node[4] == 4.0);
    CHECK(at_node[3] == 0.0);
    const auto at_zero = sample_forcing_path(ForcingTerm::single(4.0, Degenerate{0.0}), grid, rng);
    CHECK(at_zero[0] == 4.0);

    const auto forcing = ForcingTerm::heaviside({6.0, 3.0}, {Exponential{0.2}, Exponential{0.5}}, Dependence::ordered);
    ForcingCovKernel kernel(forcing);
    const int n = 10000;
    std::vector<double> sum(grid.nodes()), sq(grid.nodes());
    for (int p = 0; p < n; ++p) {
        RandomStream r(5, StreamKind::forcing, p);
        const auto path = sample_forcing_path(forcing, grid, r);
        for (std::size_t k = 0; k < grid.nodes(); ++k) {
            sum[k] += path[k];
            sq[k] += path[k] * path[k];
        }
    }
    for (std::size_t k : {2u, 8u, 20u}) {
        const double m = sum[k] / n, se = std::sqrt((sq[k] / n - m * m) / n);
        CHECK(std::abs(m - kernel.mean(grid.time(k))) < 4.0 * se);
    }
}

TEST_CASE("sign fault flips the forcing covariance") {
    ForcingCovKernel k(ForcingTerm::single(6.0, Exponential{0.05}));
    const double clean = k.cov(10.0, 20.0);
    {
        ScopedFault fault(Fault::flip_forcing_cov_sign);
        CHECK(k.cov(10.0, 20.0) == -clean);
    }
    CHECK(k.cov(10.0, 20.0) == clean);
    CHECK(parse_fault(fault_name(Fault::flip_trapezoid_decay)) == Fault::flip_trapezoid_decay);
}
