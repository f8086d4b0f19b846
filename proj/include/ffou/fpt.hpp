#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ffou/core.hpp"
#include "ffou/forcing.hpp"
#include "ffou/simulation.hpp"

namespace ffou {

// Per-path node cap: Cholesky generation cost grows quadratically with the path length.
inline constexpr std::size_t kFptMaxNodes = std::size_t{1} << 14;

struct FptConfig {
    double threshold = -50.0;
    double dt = 0.1;
    double t_max = 300.0;
    std::size_t n_paths = 1000;
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::trapezoid;
    std::size_t block = 64; // nodes added per Cholesky extension
    unsigned threads = 0;   // 0: hardware concurrency

    void validate() const;
    std::size_t steps() const;
};

struct FptResult {
    std::vector<double> crossing_times; // censored paths hold t_max
    std::vector<bool> censored;
    std::size_t censored_count = 0;
    bool all_censored = false;
    double t_max = 0.0;
    double dt = 0.0;

    std::size_t n_paths() const { return crossing_times.size(); }
    double uncensored_fraction() const;
    // Mean and standard error over uncensored paths (NaN when none crossed).
    double mean_crossing() const;
    double se_crossing() const;
};

struct FptHistogram {
    std::vector<double> edges; // n_bins + 1
    std::vector<std::size_t> counts;
    std::vector<double> density; // count / (n_paths * width): integrates to the uncensored fraction
};

/// Monte Carlo first passage through a constant threshold. Each path extends
/// its own Cholesky fBm stream in blocks until V reaches the threshold (at a
/// node, time linearly interpolated inside the step) or t_max is reached.
FptResult estimate_fpt(const ModelParams& p, const ForcingTerm& forcing, const FptConfig& cfg);

FptHistogram fpt_histogram(const FptResult& result, std::size_t n_bins);

} // namespace ffou
