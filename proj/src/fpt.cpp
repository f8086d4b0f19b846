#include "ffou/fpt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <thread>

#include "ffou/fault.hpp"
#include "ffou/fgn.hpp"

namespace ffou {

void FptConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("fpt: dt must be finite and > 0");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw DomainError("fpt: t_max must be finite and > 0");
    if (n_paths == 0) throw DomainError("fpt: n_paths must be >= 1");
    if (block == 0) throw DomainError("fpt: block must be >= 1");
    if (!std::isfinite(threshold)) throw DomainError("fpt: threshold must be finite");
    if (steps() > kFptMaxNodes)
        throw DomainError("fpt: t_max / dt = " + std::to_string(steps()) + " nodes exceeds the per-path cap of " +
                          std::to_string(kFptMaxNodes) + "; use a coarser dt or a shorter horizon");
}

std::size_t FptConfig::steps() const {
    const double n = std::ceil(t_max / dt * (1.0 - 1e-12));
    return static_cast<std::size_t>(std::max(1.0, n));
}

double FptResult::uncensored_fraction() const {
    if (crossing_times.empty()) return 0.0;
    return static_cast<double>(n_paths() - censored_count) / static_cast<double>(n_paths());
}

double FptResult::mean_crossing() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < n_paths(); ++i)
        if (!censored[i]) {
            sum += crossing_times[i];
            ++n;
        }
    return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

double FptResult::se_crossing() const {
    const double m = mean_crossing();
    double sq = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < n_paths(); ++i)
        if (!censored[i]) {
            sq += (crossing_times[i] - m) * (crossing_times[i] - m);
            ++n;
        }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(sq / static_cast<double>(n - 1) / static_cast<double>(n));
}

namespace {

struct PathForcing {
    const ForcingTerm& forcing;
    const HeavisideSum* sum;
    std::vector<double> times;

    double at(double t) const {
        if (!sum) return forcing.value(t);
        double v = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i)
            if (t >= times[i]) v += sum->amplitudes[i];
        return v;
    }
};

} // namespace

FptResult estimate_fpt(const ModelParams& p, const ForcingTerm& forcing, const FptConfig& cfg) {
    p.validate_open_hurst();
    cfg.validate();
    const std::size_t steps = cfg.steps();
    const double dt = cfg.dt;

    FptResult out;
    out.t_max = cfg.t_max;
    out.dt = dt;
    out.crossing_times.assign(cfg.n_paths, cfg.t_max);
    out.censored.assign(cfg.n_paths, true);

    const bool noisy = p.sigma != 0.0;
    auto factor = noisy ? std::make_shared<FbmCholeskyFactor>(p.hurst, dt, steps) : nullptr;

    // Step coefficients, as in the path recursions.
    const double ratio = dt / p.theta;
    const double e = std::exp(active_fault() == Fault::flip_trapezoid_decay ? ratio : -ratio);
    const double b_next = p.sigma * (1.0 - 0.5 * ratio);
    const double b_prev = p.sigma * e * (1.0 + 0.5 * ratio);

    std::vector<double> times_out(cfg.n_paths, cfg.t_max);
    std::vector<char> censored_out(cfg.n_paths, 1);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < cfg.n_paths; i = next.fetch_add(1)) {
            PathForcing f{forcing, forcing.heaviside_sum(), {}};
            if (f.sum) {
                RandomStream rng(cfg.seed, StreamKind::forcing, i);
                f.times = sample_activation_times(*f.sum, rng);
            }
            double v = p.v_init;
            if (v >= cfg.threshold) {
                times_out[i] = 0.0;
                censored_out[i] = 0;
                continue;
            }
            std::unique_ptr<CholeskyStream> stream;
            if (noisy) stream = std::make_unique<CholeskyStream>(factor, cfg.seed, i);
            double b_prev_node = 0.0;
            double i_prev = f.at(0.0);
            std::size_t k = 0; // current node index
            bool crossed = false;
            while (k < steps && !crossed) {
                const std::size_t count = std::min(cfg.block, steps - k);
                std::span<const double> fbm;
                if (stream) fbm = stream->extend(count);
                for (std::size_t j = 0; j < count; ++j) {
                    const double t_next = static_cast<double>(k + 1) * dt;
                    const double b = stream ? fbm[j] : 0.0;
                    const double i_next = f.at(t_next);
                    double v_next;
                    if (cfg.scheme == Scheme::euler)
                        v_next = v + (-(v - p.v_rest) / p.theta + i_prev) * dt + p.sigma * (b - b_prev_node);
                    else
                        v_next = p.v_rest + e * (v - p.v_rest) + b_next * b - b_prev * b_prev_node +
                                 0.5 * dt * (i_next + e * i_prev);
                    ++k;
                    if (v_next >= cfg.threshold) {
                        const double frac = (cfg.threshold - v) / (v_next - v);
                        times_out[i] = std::min(cfg.t_max, (static_cast<double>(k - 1) + frac) * dt);
                        censored_out[i] = 0;
                        crossed = true;
                        break;
                    }
                    v = v_next;
                    b_prev_node = b;
                    i_prev = i_next;
                }
            }
        }
    };

    unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.n_paths));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (std::size_t i = 0; i < cfg.n_paths; ++i) {
        out.crossing_times[i] = times_out[i];
        out.censored[i] = censored_out[i] != 0;
        if (out.censored[i]) ++out.censored_count;
    }
    out.all_censored = out.censored_count == cfg.n_paths;
    return out;
}

FptHistogram fpt_histogram(const FptResult& result, std::size_t n_bins) {
    if (n_bins == 0) throw DomainError("fpt_histogram: need at least one bin");
    if (result.n_paths() == 0) throw DomainError("fpt_histogram: empty result");
    FptHistogram h;
    const double width = result.t_max / static_cast<double>(n_bins);
    for (std::size_t b = 0; b <= n_bins; ++b) h.edges.push_back(result.t_max * static_cast<double>(b) / static_cast<double>(n_bins));
    h.counts.assign(n_bins, 0);
    for (std::size_t i = 0; i < result.n_paths(); ++i) {
        if (result.censored[i]) continue;
        auto b = static_cast<std::size_t>(result.crossing_times[i] / width);
        ++h.counts[std::min(b, n_bins - 1)];
    }
    const double norm = 1.0 / (static_cast<double>(result.n_paths()) * width);
    for (std::size_t c : h.counts) h.density.push_back(static_cast<double>(c) * norm);
    return h;
}

} // namespace ffou
