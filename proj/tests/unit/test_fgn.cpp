#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "ffou/fgn.hpp"

using namespace ffou;

namespace {

double sample_autocov(const std::vector<double>& x, std::size_t lag) {
    double sum = 0.0;
    for (std::size_t i = 0; i + lag < x.size(); ++i) sum += x[i] * x[i + lag];
    return sum / static_cast<double>(x.size() - lag);
}

} // namespace

TEST_CASE("fgn autocovariance") {
    CHECK(fgn_autocov(0, 0.7, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(fgn_autocov(0, 0.7, 0.1) == doctest::Approx(std::pow(0.1, 1.4)).epsilon(1e-15));
    CHECK(std::abs(fgn_autocov(1, 0.5, 1.0)) < 1e-15);
    CHECK(fgn_autocov(2, 0.75, 1.0) == doctest::Approx((std::pow(3.0, 1.5) - 2.0 * std::pow(2.0, 1.5) + 1.0) / 2.0));
    CHECK(fgn_autocov(-3, 0.3, 0.5) == fgn_autocov(3, 0.3, 0.5));
    CHECK_THROWS_AS(fgn_autocov(1, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(fgn_autocov(1, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(fgn_autocov(1, 0.5, 0.0), DomainError);

    // The 2x2 fBm covariance of (B_1, B_2) reproduces gamma(0) and gamma(1).
    const double h = 0.65;
    const double var2 = fbm_cov(2.0, 2.0, h), c12 = fbm_cov(1.0, 2.0, h), var1 = fbm_cov(1.0, 1.0, h);
    CHECK(var2 - 2.0 * c12 + var1 == doctest::Approx(fgn_autocov(0, h, 1.0)));
    CHECK(c12 - var1 == doctest::Approx(fgn_autocov(1, h, 1.0)));
}

TEST_CASE("fgn autocovariance sign and telescoping") {
    for (int k = 1; k <= 100; ++k) {
        CHECK(fgn_autocov(k, 0.8, 1.0) > 0.0);
        CHECK(fgn_autocov(k, 0.2, 1.0) < 0.0);
    }
    for (double h : {0.2, 0.5, 0.9})
        for (int big_k : {0, 1, 5, 50}) {
            const double dt = 0.3;
            double sum = 0.0;
            for (int k = -big_k; k <= big_k; ++k) sum += fgn_autocov(k, h, dt);
            const double expected = std::pow(dt, 2 * h) * (std::pow(big_k + 1.0, 2 * h) - std::pow(big_k, 2 * h));
            CHECK(sum == doctest::Approx(expected).epsilon(1e-12));
        }
}

TEST_CASE("fbm from increments") {
    CHECK(fbm_from_increments(std::vector<double>{0, 0, 0}) == std::vector<double>{0, 0, 0, 0});
    CHECK(fbm_from_increments(std::vector<double>{1, -1}) == std::vector<double>{0, 1, 0});
    const auto sample = simulate_fgn_circulant(TimeGrid(1.0, 100), 0.6, 5);
    const auto path = fbm_from_increments(sample);
    double sum = 0.0;
    for (double g : sample.increments) sum += g;
    CHECK(path.back() == doctest::Approx(sum).epsilon(1e-14));
    for (std::size_t k = 0; k < sample.increments.size(); ++k) CHECK(path[k + 1] - path[k] == doctest::Approx(sample.increments[k]));
}

TEST_CASE("circulant sampler basics") {
    const auto one = simulate_fgn_circulant(TimeGrid(1.0, 1), 0.3, 11);
    CHECK(one.increments.size() == 1);
    CHECK(std::isfinite(one.increments[0]));

    // Single-step marginal is N(0, dt^{2H}).
    CirculantFgn single(TimeGrid(1.0, 1), 0.8);
    double m2 = 0.0;
    const int paths = 20000;
    for (int p = 0; p < paths; ++p) {
        const double x = single.sample(3, p).increments[0];
        m2 += x * x;
    }
    CHECK(std::abs(m2 / paths - 1.0) < 4.0 * std::sqrt(2.0 / paths));

    const TimeGrid g(0.5, 300);
    const auto a = simulate_fgn_circulant(g, 0.7, 99);
    const auto b = simulate_fgn_circulant(g, 0.7, 99);
    CHECK(std::memcmp(a.increments.data(), b.increments.data(), a.increments.size() * sizeof(double)) == 0);
    const auto c = simulate_fgn_circulant(g, 0.7, 100);
    CHECK(a.increments != c.increments);
}

TEST_CASE("circulant embedding reproduces gamma exactly") {
    for (double h : {0.1, 0.5, 0.95}) {
        const TimeGrid g(0.2, 257);
        CirculantFgn gen(g, h);
        CHECK(gen.circulant_size() == 512);
        for (double lambda : gen.eigenvalues()) CHECK(lambda >= 0.0);
        const auto row = gen.reconstructed_autocov();
        for (std::size_t k = 0; k < g.steps; ++k) CHECK(std::abs(row[k] - fgn_autocov(k, h, g.dt)) < 1e-12);
    }
}

TEST_CASE("circulant sample statistics") {
    const std::size_t n = 4096;
    const TimeGrid g(1.0, n);
    {
        const auto x = simulate_fgn_circulant(g, 0.5, 314).increments;
        CHECK(std::abs(sample_autocov(x, 1) / sample_autocov(x, 0)) < 4.0 / std::sqrt(double(n)));
    }
    // Average over independent paths so the 5-SE band is informative.
    for (double h : {0.3, 0.8}) {
        CirculantFgn gen(g, h);
        const int paths = 64;
        for (std::size_t lag = 0; lag <= 5; ++lag) {
            double sum = 0.0, sq = 0.0;
            for (int p = 0; p < paths; ++p) {
                const double c = sample_autocov(gen.sample(17, p).increments, lag);
                sum += c;
                sq += c * c;
            }
            const double mean = sum / paths;
            const double se = std::sqrt((sq / paths - mean * mean) / (paths - 1));
            CHECK(std::abs(mean - fgn_autocov(lag, h, 1.0)) < 5.0 * se);
        }
    }
}

TEST_CASE("cholesky stream") {
    CholeskyStream single(0.5, 1.0, 16, 8);
    const auto first = single.extend(1);
    CHECK(first.size() == 1);
    CHECK(first[0] == CounterRng(8, StreamKind::noise, 0).normal(0));

    CholeskyStream a(0.7, 0.5, 512, 21, 3), b(0.7, 0.5, 512, 21, 3);
    a.extend(64);
    const std::vector<double> prefix(a.values().begin(), a.values().end());
    a.extend(64);
    b.extend(128);
    CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
    CHECK(std::equal(prefix.begin(), prefix.end(), a.values().begin()));

    CHECK_THROWS_AS(CholeskyStream(0.7, 0.5, 10, 1).extend(11), CholeskyError);
}

TEST_CASE("cholesky factor reproduces the fBm covariance") {
    FbmCholeskyFactor f(0.7, 1.0, 256);
    f.ensure(256);
    double worst = 0.0;
    for (std::size_t i = 0; i < 256; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double dot = 0.0;
            const auto ri = f.row(i), rj = f.row(j);
            for (std::size_t k = 0; k <= j; ++k) dot += ri[k] * rj[k];
            worst = std::max(worst, std::abs(dot - fbm_cov(i + 1.0, j + 1.0, 0.7)));
        }
    CHECK(worst < 1e-10);
}

TEST_CASE("circulant and cholesky target the same covariance") {
    for (double h : {0.3, 0.5, 0.8}) {
        const std::size_t n = 256;
        const double dt = 0.1;
        CirculantFgn gen(TimeGrid(dt, n), h);
        const auto row = gen.reconstructed_autocov();
        FbmCholeskyFactor f(h, dt, n);
        // fBm covariance implied by the circulant's Toeplitz block: cumulative double sum.
        double worst = 0.0;
        std::vector<std::vector<double>> cov(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double g = row[i > j ? i - j : j - i];
                cov[i][j] = g + (i ? cov[i - 1][j] : 0.0) + (j ? cov[i][j - 1] : 0.0) - (i && j ? cov[i - 1][j - 1] : 0.0);
            }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(cov[i][j] - f.target(i, j)));
        CHECK(worst < 1e-10);
    }
}
