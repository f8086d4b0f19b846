#pragma once

#include <functional>
#include <string>

#include "ffou/core.hpp"
#include "ffou/quadrature.hpp"

namespace ffou {

// Gamma function (std::tgamma, domain-checked).
double gamma_function(double x);

/// C_H = Gamma(2H+1) sin(pi H) / (2 pi), the spectral normalization of the
/// stationary process.
double c_h_constant(double hurst);

/// Stationary covariance rho(s) = Cov(U_t, U_{t+s}) from its spectral
/// (harmonizable) integral. `lag` may be negative; rho is even.
double rho_stationary(double lag, const ModelParams& p, const QuadratureConfig& q = {});

/// Dimensionless spectral integral J(a) = int_0^inf cos(a y) y^{1-2H} / (1+y^2) dy.
/// rho(s) = 2 sigma^2 theta^{2H} C_H J(s / theta).
double spectral_cosine_integral(double a, double hurst, const QuadratureConfig& q = {});

/// R_H(t, s) of the fOU process started from a deterministic value. H = 1/2
/// uses the Markov closed form; everything else the Wiener-integral form.
double cov_fou(double t, double s, const ModelParams& p, const QuadratureConfig& q = {});

/// Wiener-integral (five one-dimensional integrals) evaluation of R_H,
/// without the H = 1/2 shortcut.
double cov_fou_wiener(double t, double s, const ModelParams& p, const QuadratureConfig& q = {});

/// Harmonizable evaluation:
/// rho(|t-s|) - e^{-t/theta} rho(s) - e^{-s/theta} rho(t) + e^{-(t+s)/theta} rho(0).
double cov_fou_harmonizable(double t, double s, const ModelParams& p, const QuadratureConfig& q = {});

/// Markov OU covariance sigma^2 theta/2 (e^{-|t-s|/theta} - e^{-(t+s)/theta}).
double cov_markov(double t, double s, const ModelParams& p);

double cov_limit_h1(double t, double s, const ModelParams& p);
double cov_limit_h0(double t, double s, const ModelParams& p);

/// lim_{t -> inf} Var(V_t) = sigma^2 theta^{2H} H Gamma(2H).
double var_asymptote(const ModelParams& p);

/// N-term large-lag expansion of R_H(t, t + s). Requires s > t >= 0, H != 1/2.
double cov_expansion(double t, double s, int order, const ModelParams& p);

/// A named two-time covariance evaluator (R_H, rho, c or the combined C).
class CovarianceKernel {
  public:
    using Fn = std::function<double(double, double)>;

    CovarianceKernel(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

    double operator()(double t, double s) const { return fn_(t, s); }
    const std::string& name() const { return name_; }

    static CovarianceKernel fou(const ModelParams& p, const QuadratureConfig& q = {});
    static CovarianceKernel limit_h1(const ModelParams& p);
    static CovarianceKernel limit_h0(const ModelParams& p);

  private:
    std::string name_;
    Fn fn_;
};

struct TailFit {
    double exponent = 0.0;
    double constant = 0.0; // signed K in C(t, t+s) ~ K s^exponent
    double s_min = 0.0;
    double s_max = 0.0;
    double residual = 0.0; // RMS of the log-log fit
};

class TailFitError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

/// Least-squares power-law fit of |C(t, t+s)| over log-spaced s in [s_min, s_max].
TailFit tail_fit(const CovarianceKernel& kernel, double t, double s_min, double s_max, int n_points);

} // namespace ffou
