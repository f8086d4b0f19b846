#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "ffou/core.hpp"
#include "ffou/random.hpp"

namespace ffou {

class EmbeddingError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class CholeskyError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

/// Autocovariance of fractional Gaussian noise on a grid of step `dt`:
/// gamma(k) = dt^{2H}/2 (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}).
double fgn_autocov(long long lag, double hurst, double dt);

/// Covariance of fractional Brownian motion at times t and s.
double fbm_cov(double t, double s, double hurst);

struct FgnSample {
    TimeGrid grid;
    std::vector<double> increments; // G_k = B(t_{k+1}) - B(t_k), k = 0 .. steps-1
    double hurst = 0.5;
    std::uint64_t seed = 0;
    std::uint64_t path = 0;
};

// Negative circulant eigenvalues above this fraction of the largest one are
// rounding and get clipped to zero; anything more negative aborts.
inline constexpr double kEmbeddingTolerance = 1e-9;

/// Exact circulant-embedding sampler for fGn. Eigenvalues are computed once
/// for (grid, H) and reused for every path.
class CirculantFgn {
  public:
    CirculantFgn(TimeGrid grid, double hurst);

    FgnSample sample(std::uint64_t seed, std::uint64_t path = 0) const;
    // Writes `grid().steps` increments into `out`.
    void sample_into(std::uint64_t seed, std::uint64_t path, std::span<double> out) const;

    const TimeGrid& grid() const { return grid_; }
    double hurst() const { return hurst_; }
    std::size_t circulant_size() const { return size_; }
    std::span<const double> eigenvalues() const { return eigenvalues_; }

    /// First row of the circulant implied by the (clipped) eigenvalues, via an
    /// inverse transform. Its leading `steps` entries are the covariance the
    /// sampler actually reproduces.
    std::vector<double> reconstructed_autocov() const;

  private:
    TimeGrid grid_;
    double hurst_;
    std::size_t size_;
    std::vector<double> eigenvalues_;
    std::vector<double> scale_; // sqrt(lambda_k / M)
};

FgnSample simulate_fgn_circulant(const TimeGrid& grid, double hurst, std::uint64_t seed,
                                 std::uint64_t path = 0);

/// Cumulative sum; output[0] = 0 and output has one more entry than the input.
std::vector<double> fbm_from_increments(std::span<const double> increments);
std::vector<double> fbm_from_increments(const FgnSample& sample);

/// Growable lower-triangular Cholesky factor of the fBm covariance matrix on
/// nodes t_1, t_2, ... (t_0 = 0 is deterministic and excluded). Rows are added
/// on demand; rows already computed never change. Safe to share between
/// streams across threads: growth is serialized, reads of published rows are not.
class FbmCholeskyFactor {
  public:
    FbmCholeskyFactor(double hurst, double dt, std::size_t capacity);
    ~FbmCholeskyFactor();
    FbmCholeskyFactor(const FbmCholeskyFactor&) = delete;
    FbmCholeskyFactor& operator=(const FbmCholeskyFactor&) = delete;

    void ensure(std::size_t rows);
    std::size_t rows() const { return published_.load(std::memory_order_acquire); }
    std::size_t capacity() const { return capacity_; }
    double hurst() const { return hurst_; }
    double dt() const { return dt_; }

    // Row r has r + 1 entries (columns 0..r). Requires r < rows().
    std::span<const double> row(std::size_t r) const;
    // Covariance of B(t_{i+1}) and B(t_{j+1}).
    double target(std::size_t i, std::size_t j) const;

  private:
    double hurst_;
    double dt_;
    std::size_t capacity_;
    std::unique_ptr<std::unique_ptr<double[]>[]> rows_;
    std::atomic<std::size_t> published_{0};
    std::mutex grow_mutex_;
};

/// Streaming fBm generator: node k uses the k-th factor row against the
/// normals z_0..z_k drawn from a counter-based stream, so extending in any
/// block pattern reproduces the same values.
class CholeskyStream {
  public:
    CholeskyStream(std::shared_ptr<FbmCholeskyFactor> factor, std::uint64_t seed, std::uint64_t path = 0);
    // Convenience: owns a private factor.
    CholeskyStream(double hurst, double dt, std::size_t capacity, std::uint64_t seed, std::uint64_t path = 0);

    /// Appends `count` new fBm node values and returns them.
    std::span<const double> extend(std::size_t count);

    // fBm values at t_1 .. t_size (t_0 = 0 omitted).
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    const FbmCholeskyFactor& factor() const { return *factor_; }
    std::shared_ptr<FbmCholeskyFactor> shared_factor() const { return factor_; }

  private:
    std::shared_ptr<FbmCholeskyFactor> factor_;
    CounterRng rng_;
    std::vector<double> normals_;
    std::vector<double> values_;
};

} // namespace ffou
