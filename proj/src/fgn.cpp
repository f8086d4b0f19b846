#include "ffou/fgn.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include "fft.hpp"

namespace ffou {

double fgn_autocov(long long lag, double hurst, double dt) {
    require_open_hurst(hurst, "fgn_autocov");
    if (!(dt > 0.0)) throw DomainError("fgn_autocov: dt must be positive");
    const double k = std::abs(static_cast<double>(lag));
    const double two_h = 2.0 * hurst;
    const double body = std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) + std::pow(std::abs(k - 1.0), two_h);
    return 0.5 * std::pow(dt, two_h) * body;
}

double fbm_cov(double t, double s, double hurst) {
    const double two_h = 2.0 * hurst;
    return 0.5 * (std::pow(std::abs(t), two_h) + std::pow(std::abs(s), two_h) - std::pow(std::abs(t - s), two_h));
}

// ---------------------------------------------------------------------------
// Circulant embedding

CirculantFgn::CirculantFgn(TimeGrid grid, double hurst) : grid_(grid), hurst_(hurst) {
    require_open_hurst(hurst, "CirculantFgn");
    if (!(grid.dt > 0.0) || grid.steps == 0) throw DomainError("CirculantFgn: invalid grid");

    const std::size_t half = detail::next_pow2(std::max<std::size_t>(1, grid.steps - 1));
    size_ = 2 * half;

    std::vector<std::complex<double>> row(size_);
    for (std::size_t j = 0; j <= half; ++j)
        row[j] = fgn_autocov(static_cast<long long>(j), hurst, grid.dt);
    for (std::size_t j = 1; j < half; ++j) row[size_ - j] = row[j];
    detail::fft_inplace(row, true);

    eigenvalues_.resize(size_);
    double largest = 0.0;
    for (std::size_t k = 0; k < size_; ++k) {
        eigenvalues_[k] = row[k].real();
        largest = std::max(largest, eigenvalues_[k]);
    }
    for (double& lambda : eigenvalues_) {
        if (lambda < -kEmbeddingTolerance * largest)
            throw EmbeddingError("circulant embedding is not non-negative definite (eigenvalue " +
                                 std::to_string(lambda) + ")");
        lambda = std::max(lambda, 0.0);
    }
    scale_.resize(size_);
    for (std::size_t k = 0; k < size_; ++k)
        scale_[k] = std::sqrt(eigenvalues_[k] / static_cast<double>(size_));
}

void CirculantFgn::sample_into(std::uint64_t seed, std::uint64_t path, std::span<double> out) const {
    if (out.size() != grid_.steps) throw ShapeError("CirculantFgn: output span length != steps");
    const CounterRng rng(seed, StreamKind::noise, path);
    const std::size_t half = size_ / 2;
    std::vector<std::complex<double>> spectrum(size_);
    spectrum[0] = scale_[0] * rng.normal(0);
    spectrum[half] = scale_[half] * rng.normal(half);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t k = 1; k < half; ++k) {
        const double a = scale_[k] * inv_sqrt2;
        const std::complex<double> w(a * rng.normal(k), a * rng.normal(size_ - k));
        spectrum[k] = w;
        spectrum[size_ - k] = std::conj(w);
    }
    detail::fft_inplace(spectrum, true);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = spectrum[j].real();
}

FgnSample CirculantFgn::sample(std::uint64_t seed, std::uint64_t path) const {
    FgnSample result{grid_, std::vector<double>(grid_.steps), hurst_, seed, path};
    sample_into(seed, path, result.increments);
    return result;
}

std::vector<double> CirculantFgn::reconstructed_autocov() const {
    std::vector<std::complex<double>> values(eigenvalues_.begin(), eigenvalues_.end());
    detail::fft_inplace(values, false);
    std::vector<double> row(size_);
    for (std::size_t j = 0; j < size_; ++j) row[j] = values[j].real() / static_cast<double>(size_);
    return row;
}

FgnSample simulate_fgn_circulant(const TimeGrid& grid, double hurst, std::uint64_t seed, std::uint64_t path) {
    return CirculantFgn(grid, hurst).sample(seed, path);
}

std::vector<double> fbm_from_increments(std::span<const double> increments) {
    std::vector<double> out(increments.size() + 1, 0.0);
    for (std::size_t k = 0; k < increments.size(); ++k) out[k + 1] = out[k] + increments[k];
    return out;
}

std::vector<double> fbm_from_increments(const FgnSample& sample) { return fbm_from_increments(sample.increments); }

// ---------------------------------------------------------------------------
// Incremental Cholesky

FbmCholeskyFactor::FbmCholeskyFactor(double hurst, double dt, std::size_t capacity)
    : hurst_(hurst), dt_(dt), capacity_(capacity), rows_(std::make_unique<std::unique_ptr<double[]>[]>(capacity)) {
    require_open_hurst(hurst, "FbmCholeskyFactor");
    if (!(dt > 0.0)) throw DomainError("FbmCholeskyFactor: dt must be positive");
    if (capacity == 0) throw DomainError("FbmCholeskyFactor: capacity must be positive");
}

FbmCholeskyFactor::~FbmCholeskyFactor() = default;

double FbmCholeskyFactor::target(std::size_t i, std::size_t j) const {
    return std::pow(dt_, 2.0 * hurst_) *
           fbm_cov(static_cast<double>(i + 1), static_cast<double>(j + 1), hurst_);
}

std::span<const double> FbmCholeskyFactor::row(std::size_t r) const {
    return {rows_[r].get(), r + 1};
}

void FbmCholeskyFactor::ensure(std::size_t wanted) {
    if (wanted <= rows()) return;
    if (wanted > capacity_)
        throw CholeskyError("Cholesky stream exceeds its node capacity (" + std::to_string(capacity_) + ")");
    std::lock_guard lock(grow_mutex_);
    std::size_t r = published_.load(std::memory_order_relaxed);
    for (; r < wanted; ++r) {
        auto fresh = std::make_unique<double[]>(r + 1);
        double* out = fresh.get();
        for (std::size_t c = 0; c < r; ++c) {
            const double* other = rows_[c].get();
            double dot = 0.0;
            for (std::size_t k = 0; k < c; ++k) dot += out[k] * other[k];
            out[c] = (target(r, c) - dot) / other[c];
        }
        double sq = 0.0;
        for (std::size_t k = 0; k < r; ++k) sq += out[k] * out[k];
        const double diag = target(r, r);
        const double pivot = diag - sq;
        if (!(pivot > 1e-14 * diag))
            throw CholeskyError("non-positive pivot at fBm node " + std::to_string(r + 1));
        out[r] = std::sqrt(pivot);
        rows_[r] = std::move(fresh);
        published_.store(r + 1, std::memory_order_release);
    }
}

CholeskyStream::CholeskyStream(std::shared_ptr<FbmCholeskyFactor> factor, std::uint64_t seed, std::uint64_t path)
    : factor_(std::move(factor)), rng_(seed, StreamKind::noise, path) {
    if (!factor_) throw DomainError("CholeskyStream: null factor");
}

CholeskyStream::CholeskyStream(double hurst, double dt, std::size_t capacity, std::uint64_t seed, std::uint64_t path)
    : CholeskyStream(std::make_shared<FbmCholeskyFactor>(hurst, dt, capacity), seed, path) {}

std::span<const double> CholeskyStream::extend(std::size_t count) {
    const std::size_t start = values_.size();
    factor_->ensure(start + count);
    for (std::size_t k = start; k < start + count; ++k) {
        normals_.push_back(rng_.normal(k));
        const auto coeffs = factor_->row(k);
        double v = 0.0;
        for (std::size_t j = 0; j <= k; ++j) v += coeffs[j] * normals_[j];
        values_.push_back(v);
    }
    return std::span<const double>(values_).subspan(start, count);
}

} // namespace ffou
