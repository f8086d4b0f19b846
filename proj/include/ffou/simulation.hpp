#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ffou/core.hpp"
#include "ffou/fgn.hpp"
#include "ffou/forcing.hpp"
#include "ffou/quadrature.hpp"

namespace ffou {

enum class Scheme { euler, trapezoid };

const char* scheme_name(Scheme s);
Scheme parse_scheme(std::string_view text);

// ---------------------------------------------------------------------------
// Path recursions. `forcing` holds I(t_k) for all grid nodes.

/// Euler recursion driven by fGn increments G_k (steps entries).
std::vector<double> simulate_euler(const ModelParams& p, std::span<const double> forcing,
                                   std::span<const double> increments, const TimeGrid& grid);

/// Integrating-factor recursion with trapezoid quadrature, driven by fBm node
/// values B(t_0) = 0, ..., B(t_steps) (steps + 1 entries).
std::vector<double> simulate_trapezoid(const ModelParams& p, std::span<const double> forcing,
                                       std::span<const double> fbm, const TimeGrid& grid);

std::vector<double> simulate_euler(const ModelParams& p, std::span<const double> forcing, const FgnSample& noise);
std::vector<double> simulate_trapezoid(const ModelParams& p, std::span<const double> forcing, const FgnSample& noise);

std::vector<double> simulate_path(Scheme scheme, const ModelParams& p, std::span<const double> forcing,
                                  const FgnSample& noise);

// ---------------------------------------------------------------------------
// Analytic moments of V

enum class MeanMethod { automatic, quadrature };

/// E[V_t] = Vrest + (xi - Vrest) e^{-t/theta} + int_0^t e^{-(t-s)/theta} E[I_s] ds.
double mean_v(const ModelParams& p, const ForcingCovKernel& forcing, double t, const QuadratureConfig& q = {},
              MeanMethod method = MeanMethod::automatic);
double mean_v(const ModelParams& p, const ForcingTerm& forcing, double t, const QuadratureConfig& q = {},
              MeanMethod method = MeanMethod::automatic);

/// Forcing contribution to Cov(V_t, V_s):
/// int_0^t int_0^s e^{-(t-u)/theta} e^{-(s-v)/theta} c(u, v) dv du.
double forcing_cov_contribution(const ModelParams& p, const ForcingCovKernel& forcing, double t, double s,
                                const QuadratureConfig& q = {});

/// Cov(V_t, V_s) = R_H(t, s) + forcing contribution.
double cov_v(const ModelParams& p, const ForcingCovKernel& forcing, double t, double s, const QuadratureConfig& q = {});
double cov_v(const ModelParams& p, const ForcingTerm& forcing, double t, double s, const QuadratureConfig& q = {});

double var_v(const ModelParams& p, const ForcingCovKernel& forcing, double t, const QuadratureConfig& q = {});
double var_v(const ModelParams& p, const ForcingTerm& forcing, double t, const QuadratureConfig& q = {});

// ---------------------------------------------------------------------------
// Ensembles

enum class ForcingRegime {
    resample, // activation times redrawn for every path
    frozen,   // one realization of the activation times shared by the ensemble
};

const char* regime_name(ForcingRegime r);
ForcingRegime parse_regime(std::string_view text);

struct EnsembleConfig {
    TimeGrid grid{0.1, 3000};
    std::size_t paths = 1000;
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::trapezoid;
    ForcingRegime regime = ForcingRegime::resample;
    unsigned threads = 0; // 0: hardware concurrency
};

struct PathEnsemble {
    TimeGrid grid;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::trapezoid;
    ForcingRegime regime = ForcingRegime::resample;
    std::vector<double> values;       // n_paths x grid.nodes(), row-major
    std::vector<double> frozen_times; // activation times used by the frozen regime

    std::span<const double> path(std::size_t i) const {
        return std::span<const double>(values).subspan(i * grid.nodes(), grid.nodes());
    }
    double at(std::size_t i, std::size_t k) const { return values[i * grid.nodes() + k]; }
};

/// Simulates all paths. Path i uses noise stream (seed, i) and, in the
/// resample regime, forcing stream (seed, i); results do not depend on the
/// thread count.
PathEnsemble simulate_ensemble(const ModelParams& p, const ForcingTerm& forcing, const EnsembleConfig& cfg);

/// The forcing whose law the ensemble actually samples: the input itself, or
/// in the frozen regime a degenerate Heaviside sum at the realized times.
ForcingTerm effective_forcing(const ForcingTerm& forcing, const PathEnsemble& ensemble);

struct MomentReport {
    std::vector<double> times;
    std::vector<std::size_t> nodes;
    std::vector<double> emp_mean, emp_var, emp_cov_anchor;
    std::vector<double> se_mean, se_var, se_cov_anchor;
    std::vector<double> analytic_mean, analytic_var, analytic_cov;
    double anchor_time = 0.0;
    std::size_t anchor_node = 0;
    std::size_t n_paths = 0;
    bool degenerate = false; // fewer than two paths: no spread estimates
    bool has_analytic = false;
};

struct ReportOptions {
    std::size_t stride = 1; // report every stride-th node (plus the anchor and last node)
    bool analytic = true;
    QuadratureConfig quadrature{};
};

/// Empirical moments per node (and covariance against the node nearest the
/// anchor time), optionally paired with analytic values for `forcing`.
MomentReport ensemble_stats(const PathEnsemble& ensemble, double anchor, const ModelParams& p,
                            const ForcingTerm& forcing, const ReportOptions& options = {});

/// Empirical part only.
MomentReport ensemble_stats(const PathEnsemble& ensemble, double anchor, std::size_t stride = 1);

} // namespace ffou
