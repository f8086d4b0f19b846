#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ffou/core.hpp"
#include "ffou/quadrature.hpp"
#include "ffou/random.hpp"

namespace ffou {

// ---------------------------------------------------------------------------
// Activation-time laws

struct Degenerate {
    double t0 = 0.0;
};

struct Exponential {
    double rate = 1.0;
};

// One-sided stable law with Laplace transform exp(-(2 c u)^alpha); alpha = 1/2
// is the Levy distribution with scale c.
struct PositiveStable {
    double alpha = 0.5;
    double scale = 1.0;
};

using ActivationLaw = std::variant<Degenerate, Exponential, PositiveStable>;

void validate_law(const ActivationLaw& law);
bool has_density(const ActivationLaw& law);

double activation_cdf(const ActivationLaw& law, double t);
// 1 - cdf, computed without cancellation in the far tail.
double activation_survival(const ActivationLaw& law, double t);
// Density; zero for Degenerate (which has none).
double activation_pdf(const ActivationLaw& law, double t);
// Smallest t with survival(t) <= tail.
double activation_upper_quantile(const ActivationLaw& law, double tail);
double activation_sample(const ActivationLaw& law, RandomStream& rng);

// Text form used by the config format: "exponential:RATE", "degenerate:T0",
// "stable:ALPHA:SCALE".
std::string format_law(const ActivationLaw& law);
ActivationLaw parse_law(std::string_view text);

// ---------------------------------------------------------------------------
// Forcing families

struct ZeroForcing {};

struct ConstantForcing {
    double amplitude = 0.0;
};

struct ExpDecayForcing {
    double amplitude = 0.0;
    double tau = 1.0;
};

// amplitude * sin(2 pi t / period + phase)
struct PeriodicForcing {
    double amplitude = 0.0;
    double period = 1.0;
    double phase = 0.0;
};

enum class Dependence {
    independent,   // T_i independent, law i each
    ordered,       // T_i = J_1 + ... + J_i with independent gaps J_k ~ laws[k]
    shared_single, // one activation time T ~ laws[0] for every amplitude
};

const char* dependence_name(Dependence d);
Dependence parse_dependence(std::string_view text);

// I_t = sum_i amplitudes[i] h(t - T_i), h right-continuous with h(0) = 1.
struct HeavisideSum {
    std::vector<double> amplitudes;
    std::vector<ActivationLaw> laws;
    Dependence dependence = Dependence::independent;
};

using ForcingSpec = std::variant<ZeroForcing, ConstantForcing, ExpDecayForcing, PeriodicForcing, HeavisideSum>;

class ForcingTerm {
  public:
    ForcingTerm() = default;
    explicit ForcingTerm(ForcingSpec spec);

    static ForcingTerm zero() { return ForcingTerm(ZeroForcing{}); }
    static ForcingTerm constant(double amplitude) { return ForcingTerm(ConstantForcing{amplitude}); }
    static ForcingTerm exp_decay(double amplitude, double tau) { return ForcingTerm(ExpDecayForcing{amplitude, tau}); }
    static ForcingTerm periodic(double amplitude, double period, double phase = 0.0) {
        return ForcingTerm(PeriodicForcing{amplitude, period, phase});
    }
    static ForcingTerm heaviside(std::vector<double> amplitudes, std::vector<ActivationLaw> laws,
                                 Dependence dependence = Dependence::independent) {
        return ForcingTerm(HeavisideSum{std::move(amplitudes), std::move(laws), dependence});
    }
    // Single activation: I_t = amplitude h(t - T).
    static ForcingTerm single(double amplitude, ActivationLaw law) {
        return heaviside({amplitude}, {law}, Dependence::shared_single);
    }

    const ForcingSpec& spec() const { return spec_; }
    const HeavisideSum* heaviside_sum() const { return std::get_if<HeavisideSum>(&spec_); }
    bool is_deterministic() const { return heaviside_sum() == nullptr; }
    std::string kind() const;

    // Value of a deterministic forcing at t.
    double value(double t) const;

    // Number of activation times a path draws (0 when deterministic).
    std::size_t activation_count() const;

  private:
    ForcingSpec spec_ = ZeroForcing{};
};

// ---------------------------------------------------------------------------
// Mean and covariance

struct ConvolutionGrid {
    std::size_t points = std::size_t{1} << 14;
    double tail_mass = 1e-6;
    // A gap law putting more than this mass in the first grid cell is not resolved.
    double max_first_cell_mass = 0.01;
};

class ForcingGridError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

/// Evaluator for E[I_t] and c(t, s) = Cov(I_t, I_s). Ordered sums precompute
/// the laws of every partial gap sum on a shared grid at construction.
class ForcingCovKernel {
  public:
    explicit ForcingCovKernel(ForcingTerm forcing, ConvolutionGrid grid = {}, QuadratureConfig q = {});

    double mean(double t) const;
    double cov(double t, double s) const;
    double operator()(double t, double s) const { return cov(t, s); }

    // Law of the i-th activation time T_i.
    double time_cdf(std::size_t i, double t) const;
    double time_survival(std::size_t i, double t) const;

    const ForcingTerm& forcing() const { return forcing_; }
    // c vanishes identically: deterministic forcing, or only degenerate activation laws.
    bool covariance_vanishes() const { return vanishes_; }
    // Times where E[I] or c jumps or kinks (degenerate activation times).
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    // Grid spacing of the ordered-sum tables (0 otherwise).
    double grid_step() const;

  private:
    struct Ordered;
    double raw_cov(double t, double s) const;

    ForcingTerm forcing_;
    QuadratureConfig q_;
    bool vanishes_ = true;
    std::vector<double> breakpoints_;
    std::vector<double> degenerate_times_;
    std::shared_ptr<const Ordered> ordered_;
};

double forcing_mean(const ForcingTerm& forcing, double t);
double forcing_cov(const ForcingTerm& forcing, double t, double s);

// ---------------------------------------------------------------------------
// Sampling

/// Activation times T_1..T_n for one realization (ordered: cumulative gaps;
/// shared_single: n copies of one draw).
std::vector<double> sample_activation_times(const HeavisideSum& sum, RandomStream& rng);

/// Forcing evaluated on the grid nodes given realized activation times.
std::vector<double> heaviside_path(const HeavisideSum& sum, std::span<const double> times, const TimeGrid& grid);

/// I(t_k), k = 0..steps. Heaviside sums draw their activation times from `rng`.
std::vector<double> sample_forcing_path(const ForcingTerm& forcing, const TimeGrid& grid, RandomStream& rng);

} // namespace ffou
