#include "ffou/validation.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>

#include <json.hpp>

#include "ffou/fault.hpp"
#include "ffou/fgn.hpp"
#include "ffou/forcing.hpp"
#include "ffou/fpt.hpp"
#include "ffou/kernels.hpp"
#include "ffou/simulation.hpp"

namespace ffou {

ValidationLevel parse_level(std::string_view text) {
    if (text == "quick") return ValidationLevel::quick;
    if (text == "full") return ValidationLevel::full;
    throw DomainError("unknown validation level '" + std::string(text) + "' (expected quick or full)");
}

const char* level_name(ValidationLevel level) { return level == ValidationLevel::quick ? "quick" : "full"; }

bool ValidationReport::passed() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.passed; });
}

std::string ValidationReport::to_json() const {
    nlohmann::ordered_json j;
    j["level"] = level_name(level);
    j["passed"] = passed();
    j["criteria"] = nlohmann::ordered_json::array();
    for (const auto& c : criteria)
        j["criteria"].push_back({{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"detail", c.detail},
                                 {"seconds", c.seconds}});
    return j.dump(2) + "\n";
}

namespace {

std::string fmt(const char* format, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, format, a);
    return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

ModelParams model(double h, double theta = 30.0, double sigma = 1.0, double v_rest = 0.0, double v_init = 0.0) {
    ModelParams p;
    p.hurst = h;
    p.theta = theta;
    p.sigma = sigma;
    p.v_rest = v_rest;
    p.v_init = v_init;
    return p;
}

bool full(const ValidationOptions& o) { return o.level == ValidationLevel::full; }

const std::vector<double> kGrid = {0.0, 10.0, 30.0, 60.0};

struct Outcome {
    bool passed;
    std::string detail;
};

// 1. Two representations of R_H.
Outcome representation_agreement(const ValidationOptions&) {
    double worst = 0.0;
    for (double h : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const auto p = model(h);
        for (double t : kGrid)
            for (double s : kGrid) {
                const double w = cov_fou(t, s, p);
                const double z = cov_fou_harmonizable(t, s, p);
                worst = std::max(worst, std::abs(w - z) / (1.0 + std::abs(w)));
            }
    }
    return {worst <= 1e-6, "max |wiener - harmonizable| / (1 + |value|) = " + sci(worst)};
}

// 2. Markov closed form at H = 1/2.
Outcome markov_baseline(const ValidationOptions&) {
    const auto p = model(0.5);
    double worst = 0.0;
    for (double t : kGrid)
        for (double s : kGrid) {
            const double ref = p.sigma * p.sigma * p.theta / 2.0 *
                               (std::exp(-std::abs(t - s) / p.theta) - std::exp(-(t + s) / p.theta));
            worst = std::max(worst, std::abs(cov_fou(t, s, p) - ref));
        }
    return {worst <= 1e-8, "max abs deviation = " + sci(worst)};
}

// 3. Limit kernels near H = 1 and H = 0.
Outcome limit_kernels(const ValidationOptions&) {
    const auto p1 = model(0.999);
    double worst1 = 0.0, worst1_rel = 0.0;
    for (double t : kGrid)
        for (double s : kGrid) {
            const double lim = p1.sigma * p1.sigma * p1.theta * p1.theta * (1.0 - std::exp(-t / p1.theta)) *
                               (1.0 - std::exp(-s / p1.theta));
            const double d = std::abs(cov_fou(t, s, p1) - lim);
            worst1 = std::max(worst1, d);
            if (lim > 0.0) worst1_rel = std::max(worst1_rel, d / lim);
        }
    const auto p0 = model(0.005);
    double worst0 = 0.0;
    for (double t : kGrid)
        for (double s : kGrid) {
            if (t == s || t < p0.theta / 3.0 || s < p0.theta / 3.0) continue;
            worst0 = std::max(worst0, std::abs(cov_fou(t, s, p0) - cov_limit_h0(t, s, p0)));
        }
    const bool ok1 = worst1 <= 1e-2;
    const bool ok0 = worst0 <= 5e-2;
    return {ok1 && ok0, "H=0.999: max abs gap " + sci(worst1) + " (limit 1e-2, relative " + sci(worst1_rel) +
                            "); H=0.005: max abs gap " + sci(worst0) + " (limit 5e-2)"};
}

// 4. Variance asymptote at t = 10 theta.
Outcome variance_asymptote(const ValidationOptions&) {
    double worst = 0.0;
    for (double h : {0.25, 0.5, 0.75}) {
        const auto p = model(h);
        const double asym = p.sigma * p.sigma * std::pow(p.theta, 2 * h) * h * std::tgamma(2 * h);
        const double t = 10.0 * p.theta;
        worst = std::max(worst, std::abs(cov_fou(t, t, p) - asym) / asym);
    }
    return {worst <= 1e-3, "max relative gap = " + sci(worst)};
}

// 5. Power-law tail of R_H and of the forced covariance.
Outcome tail_exponent(const ValidationOptions& o) {
    const std::size_t points = full(o) ? 16 : 8;
    const double t = 10.0;
    std::string detail;
    bool ok = true;
    for (double h : {0.25, 0.75}) {
        const auto p = model(h, 1.0);
        const CovarianceKernel fou = CovarianceKernel::fou(p);
        const auto fit = tail_fit(fou, t, 1e3, 1e4, points);
        const ForcingCovKernel forcing(ForcingTerm::single(6.0, Exponential{1.0 / 20.0}));
        const CovarianceKernel forced("cov_v", [&](double a, double b) { return cov_v(p, forcing, a, b); });
        const auto fit_v = tail_fit(forced, t, 1e3, 1e4, points);
        const double target = 2 * h - 2;
        ok = ok && std::abs(fit.exponent - target) <= 0.05 && std::abs(fit_v.exponent - target) <= 0.05;
        detail += fmt("H=%.2f: ", h) + "R_H " + fmt("%.4f", fit.exponent) + ", cov_v " + fmt("%.4f", fit_v.exponent) +
                  " (target " + fmt("%.2f", target) + "); ";
    }
    return {ok, detail};
}

// 6. fGn generators.
Outcome fgn_generators(const ValidationOptions& o) {
    const std::size_t n = 4096;
    const std::size_t reps = full(o) ? 256 : 64;
    const double dt = 0.1;
    bool ok = true;
    double worst_z = 0.0;
    for (double h : {0.3, 0.5, 0.8}) {
        const CirculantFgn gen(TimeGrid(dt, n), h);
        double sum[6] = {}, sq[6] = {};
        std::vector<double> g(n);
        for (std::size_t r = 0; r < reps; ++r) {
            gen.sample_into(0xfeed, r, g);
            for (std::size_t k = 0; k <= 5; ++k) {
                double acc = 0.0;
                for (std::size_t j = 0; j + k < n; ++j) acc += g[j] * g[j + k];
                const double est = acc / static_cast<double>(n - k);
                sum[k] += est;
                sq[k] += est * est;
            }
        }
        for (std::size_t k = 0; k <= 5; ++k) {
            const double m = sum[k] / reps;
            const double var = (sq[k] - reps * m * m) / (reps - 1.0);
            const double se = std::sqrt(var / reps);
            const double z = std::abs(m - fgn_autocov(static_cast<long long>(k), h, dt)) / se;
            worst_z = std::max(worst_z, z);
            ok = ok && z <= 5.0;
        }
    }
    const std::size_t m = 256;
    double worst_cov = 0.0;
    for (double h : {0.3, 0.5, 0.8}) {
        const CirculantFgn gen(TimeGrid(dt, m), h);
        const auto row = gen.reconstructed_autocov();
        FbmCholeskyFactor factor(h, dt, m);
        factor.ensure(m);
        std::vector<std::vector<double>> cov(m, std::vector<double>(m));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                cov[i][j] = row[i > j ? i - j : j - i] + (i ? cov[i - 1][j] : 0.0) + (j ? cov[i][j - 1] : 0.0) -
                            (i && j ? cov[i - 1][j - 1] : 0.0);
            }
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                double dot = 0.0;
                const auto ri = factor.row(i), rj = factor.row(j);
                for (std::size_t k = 0; k <= j; ++k) dot += ri[k] * rj[k];
                worst_cov = std::max({worst_cov, std::abs(cov[i][j] - factor.target(i, j)), std::abs(dot - cov[i][j])});
            }
    }
    ok = ok && worst_cov <= 1e-10;
    return {ok, "max |z| of lag 0..5 autocovariances = " + fmt("%.2f", worst_z) + " (limit 5); max covariance gap = " +
                    sci(worst_cov)};
}

// 7. Monte Carlo moments.
Outcome monte_carlo_moments(const ValidationOptions& o) {
    EnsembleConfig cfg;
    cfg.grid = TimeGrid(0.1, 3000);
    cfg.paths = full(o) ? 10000 : 2000;
    cfg.seed = 20240707;
    cfg.threads = o.threads;
    const std::vector<double> hursts = full(o) ? std::vector<double>{0.3, 0.7} : std::vector<double>{0.7};
    const std::vector<std::pair<const char*, ForcingTerm>> cases = {
        {"zero", ForcingTerm::zero()},
        {"constant", ForcingTerm::constant(6.0)},
        {"exponential", ForcingTerm::single(6.0, Exponential{1.0 / 20.0})},
    };
    bool ok = true;
    double worst_mean = 0.0, worst_var = 0.0;
    for (double h : hursts) {
        const auto p = model(h);
        for (const auto& [name, forcing] : cases) {
            const auto ens = simulate_ensemble(p, forcing, cfg);
            const ForcingCovKernel kernel(forcing);
            for (double t : {30.0, 150.0, 300.0}) {
                const auto k = static_cast<std::size_t>(std::llround(t / cfg.grid.dt));
                double sum = 0.0;
                for (std::size_t i = 0; i < ens.n_paths; ++i) sum += ens.at(i, k);
                const double n = static_cast<double>(ens.n_paths);
                const double mean = sum / n;
                double m2 = 0.0, m4 = 0.0;
                for (std::size_t i = 0; i < ens.n_paths; ++i) {
                    const double d = ens.at(i, k) - mean;
                    m2 += d * d;
                    m4 += d * d * d * d;
                }
                const double var = m2 / (n - 1.0);
                const double se_mean = std::sqrt(var / n);
                const double mu2 = m2 / n;
                const double se_var = std::sqrt(std::max(0.0, m4 / n - mu2 * mu2) / n);
                const double zm = std::abs(mean - mean_v(p, kernel, t)) / se_mean;
                const double zv = std::abs(var - var_v(p, kernel, t)) / se_var;
                worst_mean = std::max(worst_mean, zm);
                worst_var = std::max(worst_var, zv);
                ok = ok && zm <= 4.0 && zv <= 4.0;
            }
        }
    }
    return {ok, std::to_string(cfg.paths) + " paths per case; max mean z = " + fmt("%.2f", worst_mean) +
                    ", max variance z = " + fmt("%.2f", worst_var) + " (limit 4)"};
}

// 8. Forcing covariance against direct Monte Carlo over activation times.
Outcome forcing_covariance(const ValidationOptions&) {
    const std::vector<double> amps = {6.0, 3.0};
    const auto ordered =
        ForcingTerm::heaviside(amps, {Exponential{1.0 / 20.0}, Exponential{1.0 / 10.0}}, Dependence::ordered);
    const ForcingCovKernel kernel(ordered);
    const std::vector<std::pair<double, double>> points = {{5, 5}, {10, 30}, {30, 10}, {25, 25}, {40, 60}, {80, 15}};
    const std::size_t draws = 100000;
    std::vector<std::array<double, 2>> times(draws);
    RandomStream rng(0x5eed, StreamKind::oracle, 0);
    for (auto& tt : times) {
        tt[0] = -20.0 * std::log(rng.uniform());
        tt[1] = tt[0] - 10.0 * std::log(rng.uniform());
    }
    auto current = [&](const std::array<double, 2>& tt, double t) {
        return (tt[0] <= t ? amps[0] : 0.0) + (tt[1] <= t ? amps[1] : 0.0);
    };
    bool ok = true;
    double worst_z = 0.0;
    for (auto [t, s] : points) {
        double mt = 0.0, ms = 0.0;
        for (const auto& tt : times) {
            mt += current(tt, t);
            ms += current(tt, s);
        }
        mt /= draws;
        ms /= draws;
        double c = 0.0, c2 = 0.0;
        for (const auto& tt : times) {
            const double prod = (current(tt, t) - mt) * (current(tt, s) - ms);
            c += prod;
            c2 += prod * prod;
        }
        const double n = static_cast<double>(draws);
        const double est = c / (n - 1.0);
        const double se = std::sqrt(std::max(0.0, c2 / n - (c / n) * (c / n)) / n);
        const double z = std::abs(kernel.cov(t, s) - est) / se;
        worst_z = std::max(worst_z, z);
        ok = ok && z <= 3.0;
    }
    const double amp = 6.0, rate = 0.05;
    const ForcingCovKernel single(ForcingTerm::single(amp, Exponential{rate}));
    double worst_closed = 0.0;
    for (auto [t, s] : points) {
        const double ft = 1.0 - std::exp(-rate * t), fs = 1.0 - std::exp(-rate * s);
        const double ref = amp * amp * (std::min(ft, fs) - ft * fs);
        worst_closed = std::max(worst_closed, std::abs(single.cov(t, s) - ref) / (amp * amp));
    }
    ok = ok && worst_closed <= 1e-14;
    return {ok, "ordered pair: max |z| = " + fmt("%.2f", worst_z) + " (limit 3); single activation closed form gap = " +
                    sci(worst_closed)};
}

// 9. Euler-trapezoid consistency under step halving.
Outcome scheme_consistency(const ValidationOptions&) {
    const double horizon = 300.0;
    const double fine_dt = 0.025;
    const std::vector<std::size_t> factors = {8, 4, 2, 1}; // dt = 0.2, 0.1, 0.05, 0.025
    bool ok = true;
    std::string detail;
    for (double h : {0.5, 0.75}) {
        const auto p = model(h, 30.0, 1.0, -70.0, -70.0);
        const auto forcing = ForcingTerm::constant(6.0);
        const TimeGrid fine = TimeGrid::from_horizon(fine_dt, horizon);
        const auto noise = CirculantFgn(fine, h).sample(77, 0);
        const auto fbm_fine = fbm_from_increments(noise);
        std::vector<double> gaps;
        for (std::size_t f : factors) {
            const TimeGrid grid(fine_dt * static_cast<double>(f), fine.steps / f);
            std::vector<double> fbm(grid.nodes()), incr(grid.steps), drive(grid.nodes());
            for (std::size_t k = 0; k < grid.nodes(); ++k) fbm[k] = fbm_fine[k * f];
            for (std::size_t k = 0; k < grid.steps; ++k) incr[k] = fbm[k + 1] - fbm[k];
            for (std::size_t k = 0; k < grid.nodes(); ++k) drive[k] = forcing.value(grid.time(k));
            const auto e = simulate_euler(p, drive, incr, grid);
            const auto tr = simulate_trapezoid(p, drive, fbm, grid);
            double gap = 0.0;
            for (std::size_t k = 0; k < grid.nodes(); ++k) gap = std::max(gap, std::abs(e[k] - tr[k]));
            gaps.push_back(gap);
        }
        detail += fmt("H=%.2f ratios:", h);
        for (std::size_t i = 1; i < gaps.size(); ++i) {
            const double ratio = gaps[i] / gaps[i - 1];
            ok = ok && ratio >= 0.4 && ratio <= 0.6;
            detail += fmt(" %.3f", ratio);
        }
        detail += "; ";
    }
    return {ok, detail};
}

// 10. Deterministic first passage and block invariance.
Outcome fpt_determinism(const ValidationOptions& o) {
    const auto p = model(0.7, 30.0, 0.0, -70.0, -70.0);
    const double i0 = 6.0, vth = -50.0;
    const double exact = -p.theta * std::log(1.0 - (vth - p.v_rest) / (i0 * p.theta));
    FptConfig cfg;
    cfg.threshold = vth;
    cfg.t_max = 100.0;
    cfg.n_paths = 16;
    cfg.threads = o.threads;
    const auto det = estimate_fpt(p, ForcingTerm::constant(i0), cfg);
    double worst = 0.0;
    for (std::size_t i = 0; i < det.n_paths(); ++i)
        worst = std::max(worst, det.censored[i] ? INFINITY : std::abs(det.crossing_times[i] - exact));
    bool ok = worst <= cfg.dt;

    const auto noisy = model(0.75, 30.0, 1.0, -70.0, -70.0);
    FptConfig b = cfg;
    b.threshold = -60.0;
    b.t_max = 300.0;
    b.n_paths = full(o) ? 400 : 100;
    b.block = 64;
    const auto forcing = ForcingTerm::constant(0.5);
    const auto r64 = estimate_fpt(noisy, forcing, b);
    b.block = 256;
    const auto r256 = estimate_fpt(noisy, forcing, b);
    const bool same = r64.crossing_times == r256.crossing_times && r64.censored == r256.censored;
    ok = ok && same;
    return {ok, "deterministic crossing error = " + sci(worst) + " (dt " + fmt("%.2g", cfg.dt) + ", t* = " +
                    fmt("%.6f", exact) + "); block 64 vs 256 " + (same ? "identical" : "DIFFERENT")};
}

using Check = Outcome (*)(const ValidationOptions&);

struct Entry {
    const char* name;
    Check check;
};

const Entry kEntries[10] = {
    {"representation agreement", representation_agreement},
    {"Markov baseline", markov_baseline},
    {"limit kernels", limit_kernels},
    {"variance asymptote", variance_asymptote},
    {"tail exponent", tail_exponent},
    {"fGn generators", fgn_generators},
    {"Monte Carlo moments", monte_carlo_moments},
    {"forcing covariance oracle", forcing_covariance},
    {"scheme consistency", scheme_consistency},
    {"FPT determinism", fpt_determinism},
};

Outcome guarded(Check check, const ValidationOptions& o) {
    try {
        return check(o);
    } catch (const std::exception& e) {
        return {false, std::string("error: ") + e.what()};
    }
}

// 11. Each injected fault must turn at least one clean pass into a failure.
Outcome mutation_sanity(const ValidationOptions& o) {
    ValidationOptions quick = o;
    quick.level = ValidationLevel::quick;
    std::vector<bool> clean(10);
    for (int i = 0; i < 10; ++i) clean[i] = guarded(kEntries[i].check, quick).passed;
    bool ok = true;
    std::string detail;
    for (Fault fault : {Fault::flip_forcing_cov_sign, Fault::flip_trapezoid_decay}) {
        ScopedFault guard(fault);
        std::string caught;
        for (int i = 0; i < 10; ++i) {
            if (!clean[i]) continue;
            if (!guarded(kEntries[i].check, quick).passed) caught += (caught.empty() ? "" : ",") + std::to_string(i + 1);
        }
        ok = ok && !caught.empty();
        detail += std::string(fault_name(fault)) + " caught by [" + caught + "]; ";
    }
    std::string baseline;
    for (int i = 0; i < 10; ++i)
        if (clean[i]) baseline += (baseline.empty() ? "" : ",") + std::to_string(i + 1);
    return {ok, detail + "clean passes [" + baseline + "]"};
}

} // namespace

CriterionResult run_criterion(int id, const ValidationOptions& options) {
    if (id < 1 || id > kCriterionCount) throw DomainError("criterion id out of range");
    CriterionResult r;
    r.id = id;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    if (id == 11) {
        r.name = "mutation sanity";
        outcome = guarded(mutation_sanity, options);
    } else {
        r.name = kEntries[id - 1].name;
        outcome = guarded(kEntries[id - 1].check, options);
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.passed = outcome.passed;
    r.detail = outcome.detail;
    return r;
}

ValidationReport run_validation(const ValidationOptions& options, std::vector<int> ids) {
    if (ids.empty())
        for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
    ValidationReport report;
    report.level = options.level;
    for (int id : ids) report.criteria.push_back(run_criterion(id, options));
    return report;
}

} // namespace ffou
