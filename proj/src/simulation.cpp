#include "ffou/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>

#include "ffou/fault.hpp"
#include "ffou/kernels.hpp"
#include "integrate.hpp"

namespace ffou {

const char* scheme_name(Scheme s) { return s == Scheme::euler ? "euler" : "trapezoid"; }

Scheme parse_scheme(std::string_view text) {
    if (text == "euler") return Scheme::euler;
    if (text == "trapezoid") return Scheme::trapezoid;
    throw DomainError("unknown scheme '" + std::string(text) + "' (expected euler or trapezoid)");
}

const char* regime_name(ForcingRegime r) { return r == ForcingRegime::resample ? "resample" : "frozen"; }

ForcingRegime parse_regime(std::string_view text) {
    if (text == "resample") return ForcingRegime::resample;
    if (text == "frozen") return ForcingRegime::frozen;
    throw DomainError("unknown forcing regime '" + std::string(text) + "' (expected resample or frozen)");
}

// ---------------------------------------------------------------------------
// Recursions

std::vector<double> simulate_euler(const ModelParams& p, std::span<const double> forcing,
                                   std::span<const double> increments, const TimeGrid& grid) {
    p.validate();
    if (forcing.size() != grid.nodes()) throw ShapeError("simulate_euler: forcing needs one value per grid node");
    if (increments.size() != grid.steps) throw ShapeError("simulate_euler: need one increment per step");
    std::vector<double> v(grid.nodes());
    v[0] = p.v_init;
    const double dt = grid.dt;
    for (std::size_t k = 1; k < v.size(); ++k)
        v[k] = v[k - 1] + (-(v[k - 1] - p.v_rest) / p.theta + forcing[k - 1]) * dt + p.sigma * increments[k - 1];
    return v;
}

std::vector<double> simulate_trapezoid(const ModelParams& p, std::span<const double> forcing,
                                       std::span<const double> fbm, const TimeGrid& grid) {
    p.validate();
    if (forcing.size() != grid.nodes()) throw ShapeError("simulate_trapezoid: forcing needs one value per grid node");
    if (fbm.size() != grid.nodes()) throw ShapeError("simulate_trapezoid: need one fBm value per grid node");
    const double dt = grid.dt;
    const double ratio = dt / p.theta;
    const double e = std::exp(active_fault() == Fault::flip_trapezoid_decay ? ratio : -ratio);
    const double b_next = p.sigma * (1.0 - 0.5 * ratio);
    const double b_prev = p.sigma * e * (1.0 + 0.5 * ratio);
    std::vector<double> v(grid.nodes());
    v[0] = p.v_init;
    for (std::size_t n = 0; n + 1 < v.size(); ++n)
        v[n + 1] = p.v_rest + e * (v[n] - p.v_rest) + b_next * fbm[n + 1] - b_prev * fbm[n] +
                   0.5 * dt * (forcing[n + 1] + e * forcing[n]);
    return v;
}

std::vector<double> simulate_euler(const ModelParams& p, std::span<const double> forcing, const FgnSample& noise) {
    return simulate_euler(p, forcing, noise.increments, noise.grid);
}

std::vector<double> simulate_trapezoid(const ModelParams& p, std::span<const double> forcing, const FgnSample& noise) {
    const auto fbm = fbm_from_increments(noise);
    return simulate_trapezoid(p, forcing, fbm, noise.grid);
}

std::vector<double> simulate_path(Scheme scheme, const ModelParams& p, std::span<const double> forcing,
                                  const FgnSample& noise) {
    return scheme == Scheme::euler ? simulate_euler(p, forcing, noise) : simulate_trapezoid(p, forcing, noise);
}

// ---------------------------------------------------------------------------
// Mean

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kTabulatedRelTol = 1e-6;

// expm1(x) / x, continuous at 0.
double expm1_ratio(double x) { return x == 0.0 ? 1.0 : std::expm1(x) / x; }

// int_0^t e^{-(t-s)/theta} e^{-s/b} ds, b possibly infinite (rate 0).
double exp_convolution(double t, double theta, double rate) {
    const double diff = 1.0 / theta - rate;
    const double x = t * diff;
    if (std::abs(x) > 1.0) return (std::exp(-rate * t) - std::exp(-t / theta)) / diff;
    return std::exp(-t / theta) * t * expm1_ratio(x);
}

// int_0^t e^{-(t-s)/theta} 1{s >= t0} ds
double step_response(double t, double theta, double t0) {
    if (t < t0) return 0.0;
    return -theta * std::expm1(-(t - std::max(t0, 0.0)) / theta);
}

// int_0^t e^{-(t-s)/theta} P(T <= s) ds for single-law activation times, when closed.
bool cdf_response(const ActivationLaw& law, double t, double theta, double& out) {
    if (const auto* d = std::get_if<Degenerate>(&law)) {
        out = step_response(t, theta, d->t0);
        return true;
    }
    if (const auto* e = std::get_if<Exponential>(&law)) {
        out = step_response(t, theta, 0.0) - exp_convolution(t, theta, e->rate);
        return true;
    }
    return false;
}

// Closed-form forced response, when available.
bool forced_mean_closed(const ForcingCovKernel& kernel, double t, double theta, double& out) {
    return std::visit(
        overloaded{
            [&](const ZeroForcing&) {
                out = 0.0;
                return true;
            },
            [&](const ConstantForcing& c) {
                out = c.amplitude * step_response(t, theta, 0.0);
                return true;
            },
            [&](const ExpDecayForcing& e) {
                out = e.amplitude * exp_convolution(t, theta, 1.0 / e.tau);
                return true;
            },
            [&](const PeriodicForcing& f) {
                const double a = 1.0 / theta;
                const double w = 2.0 * std::numbers::pi / f.period;
                const double ph = f.phase;
                const double num = (a * std::sin(w * t + ph) - w * std::cos(w * t + ph)) -
                                   std::exp(-a * t) * (a * std::sin(ph) - w * std::cos(ph));
                out = f.amplitude * num / (a * a + w * w);
                return true;
            },
            [&](const HeavisideSum& sum) {
                const std::size_t n = sum.amplitudes.size();
                if (sum.dependence == Dependence::shared_single) {
                    const double total = std::accumulate(sum.amplitudes.begin(), sum.amplitudes.end(), 0.0);
                    double r = 0.0;
                    if (!cdf_response(sum.laws[0], t, theta, r)) return false;
                    out = total * r;
                    return true;
                }
                if (sum.dependence == Dependence::ordered) {
                    if (kernel.covariance_vanishes()) {
                        double acc = 0.0, total = 0.0;
                        for (std::size_t i = 0; i < n; ++i) {
                            acc += std::get<Degenerate>(sum.laws[i]).t0;
                            total += sum.amplitudes[i] * step_response(t, theta, acc);
                        }
                        out = total;
                        return true;
                    }
                    if (n > 1) return false;
                }
                double total = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    double r = 0.0;
                    if (!cdf_response(sum.laws[i], t, theta, r)) return false;
                    total += sum.amplitudes[i] * r;
                }
                out = total;
                return true;
            },
        },
        kernel.forcing().spec());
}

std::vector<double> clipped_breakpoints(const std::vector<double>& points, double a, double b) {
    std::vector<double> out;
    for (double x : points)
        if (x > a && x < b) out.push_back(x);
    return out;
}

double forced_mean_quadrature(const ForcingCovKernel& kernel, double t, double theta, const QuadratureConfig& q) {
    if (t <= 0.0) return 0.0;
    const auto extra = clipped_breakpoints(kernel.breakpoints(), 0.0, t);
    const auto points = detail::exp_breakpoints(0.0, t, t, theta, extra);
    auto f = [&](double s) { return std::exp(-(t - s) / theta) * kernel.mean(s); };
    const auto r = detail::adaptive_panels(f, points, q);
    detail::require_converged(r, q, "mean_v");
    return r.value;
}

} // namespace

double mean_v(const ModelParams& p, const ForcingCovKernel& forcing, double t, const QuadratureConfig& q,
              MeanMethod method) {
    p.validate();
    q.validate();
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("mean_v: t must be finite and >= 0");
    double forced = 0.0;
    if (method == MeanMethod::quadrature || !forced_mean_closed(forcing, t, p.theta, forced))
        forced = forced_mean_quadrature(forcing, t, p.theta, q);
    return p.v_rest + (p.v_init - p.v_rest) * std::exp(-t / p.theta) + forced;
}

double mean_v(const ModelParams& p, const ForcingTerm& forcing, double t, const QuadratureConfig& q,
              MeanMethod method) {
    return mean_v(p, ForcingCovKernel(forcing, {}, q), t, q, method);
}

// ---------------------------------------------------------------------------
// Covariance

double forcing_cov_contribution(const ModelParams& p, const ForcingCovKernel& forcing, double t, double s,
                                const QuadratureConfig& q) {
    p.validate();
    q.validate();
    if (!(t >= 0.0) || !(s >= 0.0) || !std::isfinite(t) || !std::isfinite(s))
        throw DomainError("cov_v: times must be finite and >= 0");
    if (forcing.covariance_vanishes() || t == 0.0 || s == 0.0) return 0.0;
    const double theta = p.theta;

    // Tabulated ordered-sum kernels are piecewise linear between grid nodes and
    // only accurate to about 1e-6; asking for more cannot converge.
    QuadratureConfig outer = q;
    if (forcing.grid_step() > 0.0) {
        outer.rel_tol = std::max(outer.rel_tol, kTabulatedRelTol);
        outer.abs_tol = std::max(outer.abs_tol, kTabulatedRelTol * 1e-2);
    }
    QuadratureConfig inner = outer;
    inner.abs_tol = outer.abs_tol / (10.0 * std::max(1.0, theta));
    inner.rel_tol = outer.rel_tol / 10.0;

    auto inner_integral = [&](double u) {
        std::vector<double> extra = clipped_breakpoints(forcing.breakpoints(), 0.0, s);
        if (u > 0.0 && u < s) extra.push_back(u);
        std::sort(extra.begin(), extra.end());
        const auto points = detail::exp_breakpoints(0.0, s, s, theta, extra);
        auto g = [&](double v) { return std::exp(-(s - v) / theta) * forcing.cov(u, v); };
        const auto r = detail::adaptive_panels(g, points, inner);
        detail::require_converged(r, inner, "cov_v (inner integral)");
        return r.value;
    };

    std::vector<double> extra = clipped_breakpoints(forcing.breakpoints(), 0.0, t);
    if (s < t) extra.push_back(s);
    std::sort(extra.begin(), extra.end());
    const auto points = detail::exp_breakpoints(0.0, t, t, theta, extra);
    auto f = [&](double u) { return std::exp(-(t - u) / theta) * inner_integral(u); };
    const auto r = detail::adaptive_panels(f, points, outer);
    detail::require_converged(r, outer, "cov_v");
    return r.value;
}

double cov_v(const ModelParams& p, const ForcingCovKernel& forcing, double t, double s, const QuadratureConfig& q) {
    const double noise = cov_fou(t, s, p, q);
    return noise + forcing_cov_contribution(p, forcing, t, s, q);
}

double cov_v(const ModelParams& p, const ForcingTerm& forcing, double t, double s, const QuadratureConfig& q) {
    return cov_v(p, ForcingCovKernel(forcing, {}, q), t, s, q);
}

double var_v(const ModelParams& p, const ForcingCovKernel& forcing, double t, const QuadratureConfig& q) {
    return cov_v(p, forcing, t, t, q);
}

double var_v(const ModelParams& p, const ForcingTerm& forcing, double t, const QuadratureConfig& q) {
    return cov_v(p, forcing, t, t, q);
}

// ---------------------------------------------------------------------------
// Ensembles

PathEnsemble simulate_ensemble(const ModelParams& p, const ForcingTerm& forcing, const EnsembleConfig& cfg) {
    p.validate_open_hurst();
    if (cfg.paths == 0) throw DomainError("simulate_ensemble: need at least one path");
    const TimeGrid grid = cfg.grid;
    const std::size_t nodes = grid.nodes();

    PathEnsemble out;
    out.grid = grid;
    out.n_paths = cfg.paths;
    out.seed = cfg.seed;
    out.scheme = cfg.scheme;
    out.regime = cfg.regime;
    out.values.resize(cfg.paths * nodes);

    std::vector<double> shared_forcing;
    const HeavisideSum* sum = forcing.heaviside_sum();
    if (!sum) {
        shared_forcing.resize(nodes);
        for (std::size_t k = 0; k < nodes; ++k) shared_forcing[k] = forcing.value(grid.time(k));
    } else if (cfg.regime == ForcingRegime::frozen) {
        RandomStream rng(cfg.seed, StreamKind::forcing, 0);
        out.frozen_times = sample_activation_times(*sum, rng);
        shared_forcing = heaviside_path(*sum, out.frozen_times, grid);
    }

    const CirculantFgn generator(grid, p.hurst);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        std::vector<double> increments(grid.steps);
        std::vector<double> fbm(nodes);
        std::vector<double> own_forcing;
        for (std::size_t i = next.fetch_add(1); i < cfg.paths; i = next.fetch_add(1)) {
            std::span<const double> path_forcing = shared_forcing;
            if (shared_forcing.empty()) {
                RandomStream rng(cfg.seed, StreamKind::forcing, i);
                own_forcing = sample_forcing_path(forcing, grid, rng);
                path_forcing = own_forcing;
            }
            generator.sample_into(cfg.seed, i, increments);
            std::vector<double> v;
            if (cfg.scheme == Scheme::euler) {
                v = simulate_euler(p, path_forcing, increments, grid);
            } else {
                fbm[0] = 0.0;
                for (std::size_t k = 0; k < grid.steps; ++k) fbm[k + 1] = fbm[k] + increments[k];
                v = simulate_trapezoid(p, path_forcing, fbm, grid);
            }
            std::copy(v.begin(), v.end(), out.values.begin() + static_cast<std::ptrdiff_t>(i * nodes));
        }
    };

    unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.paths));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return out;
}

ForcingTerm effective_forcing(const ForcingTerm& forcing, const PathEnsemble& ensemble) {
    const HeavisideSum* sum = forcing.heaviside_sum();
    if (!sum || ensemble.regime != ForcingRegime::frozen) return forcing;
    std::vector<ActivationLaw> laws;
    for (double t : ensemble.frozen_times) laws.push_back(Degenerate{t});
    return ForcingTerm::heaviside(sum->amplitudes, std::move(laws), Dependence::independent);
}

namespace {

std::vector<std::size_t> report_nodes(const TimeGrid& grid, std::size_t stride, std::size_t anchor) {
    if (stride == 0) throw DomainError("ensemble_stats: stride must be >= 1");
    std::vector<std::size_t> nodes;
    for (std::size_t k = 0; k < grid.nodes(); k += stride) nodes.push_back(k);
    nodes.push_back(grid.steps);
    nodes.push_back(anchor);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

} // namespace

MomentReport ensemble_stats(const PathEnsemble& ensemble, double anchor, std::size_t stride) {
    const TimeGrid& grid = ensemble.grid;
    if (!(anchor >= 0.0) || anchor > grid.horizon() * (1.0 + 1e-12))
        throw DomainError("ensemble_stats: anchor time outside the grid");
    const std::size_t n = ensemble.n_paths;
    if (n == 0) throw DomainError("ensemble_stats: empty ensemble");

    MomentReport r;
    r.n_paths = n;
    r.degenerate = n < 2;
    r.anchor_node = std::min(static_cast<std::size_t>(std::llround(anchor / grid.dt)), grid.steps);
    r.anchor_time = grid.time(r.anchor_node);
    r.nodes = report_nodes(grid, stride, r.anchor_node);

    const double dn = static_cast<double>(n);
    const double denom = r.degenerate ? 1.0 : dn - 1.0;

    // Values are shifted by path 0 so identical paths give exactly zero spread.
    std::vector<double> anchor_dev(n);
    {
        const double ref = ensemble.at(0, r.anchor_node);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += ensemble.at(i, r.anchor_node) - ref;
        const double mean_d = acc / dn;
        for (std::size_t i = 0; i < n; ++i) anchor_dev[i] = ensemble.at(i, r.anchor_node) - ref - mean_d;
    }

    std::vector<double> dev(n);
    for (std::size_t k : r.nodes) {
        const double ref = ensemble.at(0, k);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += ensemble.at(i, k) - ref;
        const double mean_d = acc / dn;
        double m2 = 0.0, m4 = 0.0, c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dev[i] = ensemble.at(i, k) - ref - mean_d;
            const double sq = dev[i] * dev[i];
            m2 += sq;
            m4 += sq * sq;
            c += dev[i] * anchor_dev[i];
        }
        const double var = r.degenerate ? 0.0 : m2 / denom;
        const double cov = r.degenerate ? 0.0 : c / denom;
        double se_var = 0.0, se_cov = 0.0;
        if (!r.degenerate) {
            const double mu4 = m4 / dn;
            const double mu2 = m2 / dn;
            se_var = std::sqrt(std::max(0.0, (mu4 - mu2 * mu2) / dn));
            double spread = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = dev[i] * anchor_dev[i] - c / dn;
                spread += d * d;
            }
            se_cov = std::sqrt(spread / denom / dn);
        }
        r.times.push_back(grid.time(k));
        r.emp_mean.push_back(ref + mean_d);
        r.emp_var.push_back(var);
        r.emp_cov_anchor.push_back(cov);
        r.se_mean.push_back(std::sqrt(var / dn));
        r.se_var.push_back(se_var);
        r.se_cov_anchor.push_back(se_cov);
    }
    return r;
}

MomentReport ensemble_stats(const PathEnsemble& ensemble, double anchor, const ModelParams& p,
                            const ForcingTerm& forcing, const ReportOptions& options) {
    MomentReport r = ensemble_stats(ensemble, anchor, options.stride);
    if (!options.analytic) return r;
    const ForcingCovKernel kernel(effective_forcing(forcing, ensemble), {}, options.quadrature);
    const auto& q = options.quadrature;
    for (double t : r.times) {
        r.analytic_mean.push_back(mean_v(p, kernel, t, q));
        r.analytic_var.push_back(var_v(p, kernel, t, q));
        r.analytic_cov.push_back(cov_v(p, kernel, t, r.anchor_time, q));
    }
    r.has_analytic = true;
    return r;
}

} // namespace ffou
