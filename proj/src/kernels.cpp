#include "ffou/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "integrate.hpp"

namespace ffou {

using detail::Integral;

namespace {

void require_times(double t, double s, const char* what) {
    if (!(t >= 0.0) || !(s >= 0.0) || !std::isfinite(t) || !std::isfinite(s))
        throw DomainError(std::string(what) + ": times must be finite and non-negative");
}

void require_scale(const ModelParams& p, const char* what) {
    if (!(p.theta > 0.0)) throw DomainError(std::string(what) + ": theta must be positive");
    if (!(p.sigma >= 0.0)) throw DomainError(std::string(what) + ": sigma must be non-negative");
}

// H * int_a^b exp(c (z - shift)) z^{2H-1} dz. A panel touching z = 0 is
// integrated in u = z^{2H}, which turns the weight z^{2H-1} dz into du / (2H).
Integral wiener_piece(double c, double shift, double a, double b, double hurst, double theta,
                      const QuadratureConfig& q) {
    if (!(b > a)) return {};
    const double peak = c > 0.0 ? b : a;
    std::vector<double> pts = detail::exp_breakpoints(a, b, peak, theta);
    const double two_h = 2.0 * hurst;

    Integral total;
    std::size_t first = 0;
    if (a == 0.0) {
        const double w = pts[1];
        const double inv = 1.0 / two_h;
        auto head = [=](double u) { return 0.5 * std::exp(c * (std::pow(u, inv) - shift)); };
        total += detail::adaptive(head, 0.0, std::pow(w, two_h), q);
        first = 1;
    }
    if (first + 1 < pts.size()) {
        auto body = [=](double z) { return hurst * std::exp(c * (z - shift)) * std::pow(z, two_h - 1.0); };
        total += detail::adaptive_panels(body, std::span<const double>(pts).subspan(first), q);
    }
    detail::require_converged(total, q, "cov_fou");
    return total;
}

} // namespace

double gamma_function(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("gamma_function: argument must be positive");
    return std::tgamma(x);
}

double c_h_constant(double hurst) {
    require_open_hurst(hurst, "c_h_constant");
    return std::tgamma(2.0 * hurst + 1.0) * std::sin(std::numbers::pi * hurst) / (2.0 * std::numbers::pi);
}

double spectral_cosine_integral(double a, double hurst, const QuadratureConfig& q) {
    require_open_hurst(hurst, "spectral_cosine_integral");
    q.validate();
    a = std::abs(a);
    if (!std::isfinite(a)) throw DomainError("spectral_cosine_integral: non-finite frequency");

    const double y_split = a > 0.0 ? std::min(q.oscillatory_split, std::numbers::pi / a) : q.oscillatory_split;
    const double mu = 2.0 - 2.0 * hurst;

    // [0, Y] in u = y^{2-2H}, which absorbs the y^{1-2H} weight.
    auto head = [=](double u) {
        const double y = std::pow(u, 1.0 / mu);
        return std::cos(a * y) / (1.0 + y * y) / mu;
    };
    Integral finite = detail::adaptive(head, 0.0, std::pow(y_split, mu), q);
    detail::require_converged(finite, q, "spectral_cosine_integral");

    Integral tail;
    if (a == 0.0) {
        // y = 1/x, then u = x^{2H}: int_Y^inf y^{1-2H}/(1+y^2) dy = (1/2H) int_0^{Y^{-2H}} du / (1 + u^{1/H}).
        const double inv_h = 1.0 / hurst;
        auto f = [=](double u) { return 1.0 / (1.0 + std::pow(u, inv_h)) / (2.0 * hurst); };
        tail = detail::adaptive(f, 0.0, std::pow(1.0 / y_split, 2.0 * hurst), q);
    } else {
        // Rotate [Y, inf) onto the ray Y + i r; the integrand is analytic in
        // the quarter plane right of Y (the pole sits at y = i).
        const std::complex<double> phase = std::complex<double>(0.0, 1.0) * std::polar(1.0, a * y_split);
        const double exponent = 1.0 - 2.0 * hurst;
        auto f = [=](double r) {
            const std::complex<double> z(y_split, r);
            const std::complex<double> g = std::pow(z, exponent) / (1.0 + z * z);
            return std::exp(-a * r) * (phase * g).real();
        };
        tail = detail::half_line(f, q);
    }
    detail::require_converged(tail, q, "spectral_cosine_integral");
    return finite.value + tail.value;
}

double rho_stationary(double lag, const ModelParams& p, const QuadratureConfig& q) {
    p.validate_open_hurst();
    if (!std::isfinite(lag)) throw DomainError("rho_stationary: non-finite lag");
    if (p.sigma == 0.0) return 0.0;
    const double scale = 2.0 * p.sigma * p.sigma * std::pow(p.theta, 2.0 * p.hurst) * c_h_constant(p.hurst);
    return scale * spectral_cosine_integral(std::abs(lag) / p.theta, p.hurst, q);
}

double cov_markov(double t, double s, const ModelParams& p) {
    require_times(t, s, "cov_markov");
    require_scale(p, "cov_markov");
    return 0.5 * p.sigma * p.sigma * p.theta *
           (std::exp(-std::abs(t - s) / p.theta) - std::exp(-(t + s) / p.theta));
}

double cov_fou_wiener(double t, double s, const ModelParams& p, const QuadratureConfig& q) {
    p.validate_open_hurst();
    q.validate();
    require_times(t, s, "cov_fou");
    if (t < s) std::swap(t, s);
    if (s == 0.0 || p.sigma == 0.0) return 0.0;

    const double h = p.hurst, th = p.theta, d = t - s;
    const double up = 1.0 / th, down = -1.0 / th;
    double total = 0.0;
    total -= wiener_piece(up, d, 0.0, d, h, th, q).value;
    total += wiener_piece(down, d, d, t, h, th, q).value;
    total -= std::exp(-s / th) * wiener_piece(up, t, s, t, h, th, q).value;
    total += std::exp(-d / th) * wiener_piece(down, 0.0, 0.0, s, h, th, q).value;
    total += 2.0 * std::exp(-s / th) * wiener_piece(up, t, 0.0, t, h, th, q).value;
    return 0.5 * p.sigma * p.sigma * total;
}

double cov_fou(double t, double s, const ModelParams& p, const QuadratureConfig& q) {
    p.validate_open_hurst();
    if (p.hurst == 0.5) return cov_markov(t, s, p);
    return cov_fou_wiener(t, s, p, q);
}

double cov_fou_harmonizable(double t, double s, const ModelParams& p, const QuadratureConfig& q) {
    p.validate_open_hurst();
    require_times(t, s, "cov_fou_harmonizable");
    if (t < s) std::swap(t, s);
    if (s == 0.0 || p.sigma == 0.0) return 0.0;
    const double et = std::exp(-t / p.theta), es = std::exp(-s / p.theta);
    return rho_stationary(t - s, p, q) - et * rho_stationary(s, p, q) - es * rho_stationary(t, p, q) +
           et * es * rho_stationary(0.0, p, q);
}

double cov_limit_h1(double t, double s, const ModelParams& p) {
    require_times(t, s, "cov_limit_h1");
    require_scale(p, "cov_limit_h1");
    const double th = p.theta;
    return p.sigma * p.sigma * th * th * (1.0 - std::exp(-s / th)) * (1.0 - std::exp(-t / th));
}

double cov_limit_h0(double t, double s, const ModelParams& p) {
    require_times(t, s, "cov_limit_h0");
    require_scale(p, "cov_limit_h0");
    const double half_var = 0.5 * p.sigma * p.sigma;
    if (std::min(t, s) == 0.0) return 0.0;
    if (t != s) return half_var * std::exp(-(t + s) / p.theta);
    return half_var * (1.0 + std::exp(-2.0 * t / p.theta));
}

double var_asymptote(const ModelParams& p) {
    p.validate();
    // H Gamma(2H) written as Gamma(2H+1)/2 so that H = 0 is covered.
    return p.sigma * p.sigma * std::pow(p.theta, 2.0 * p.hurst) * 0.5 * std::tgamma(2.0 * p.hurst + 1.0);
}

double cov_expansion(double t, double s, int order, const ModelParams& p) {
    p.validate_open_hurst();
    if (p.hurst == 0.5) throw DomainError("cov_expansion: H = 1/2 has no power-law expansion");
    if (order < 1) throw DomainError("cov_expansion: order must be >= 1");
    if (!(t >= 0.0) || !(s > t)) throw DomainError("cov_expansion: requires s > t >= 0");
    const double two_h = 2.0 * p.hurst, decay = std::exp(-t / p.theta);
    double sum = 0.0, coeff = 1.0, theta_pow = 1.0;
    for (int n = 1; n <= order; ++n) {
        coeff *= (two_h - (2 * n - 2)) * (two_h - (2 * n - 1));
        theta_pow *= p.theta * p.theta;
        const double e = two_h - 2.0 * n;
        sum += theta_pow * coeff * (std::pow(s, e) - decay * std::pow(t + s, e));
    }
    return 0.5 * p.sigma * p.sigma * sum;
}

CovarianceKernel CovarianceKernel::fou(const ModelParams& p, const QuadratureConfig& q) {
    p.validate_open_hurst();
    return {"cov_fou", [p, q](double t, double s) { return cov_fou(t, s, p, q); }};
}

CovarianceKernel CovarianceKernel::limit_h1(const ModelParams& p) {
    return {"cov_limit_h1", [p](double t, double s) { return cov_limit_h1(t, s, p); }};
}

CovarianceKernel CovarianceKernel::limit_h0(const ModelParams& p) {
    return {"cov_limit_h0", [p](double t, double s) { return cov_limit_h0(t, s, p); }};
}

TailFit tail_fit(const CovarianceKernel& kernel, double t, double s_min, double s_max, int n_points) {
    if (!(s_min > 0.0) || !(s_max > s_min)) throw DomainError("tail_fit: need 0 < s_min < s_max");
    if (n_points < 3) throw DomainError("tail_fit: need at least 3 points");
    if (!(t >= 0.0)) throw DomainError("tail_fit: t must be non-negative");

    std::vector<double> xs(n_points), ys(n_points);
    double sign = 0.0;
    const double step = std::log(s_max / s_min) / (n_points - 1);
    for (int i = 0; i < n_points; ++i) {
        const double s = s_min * std::exp(step * i);
        const double c = kernel(t, t + s);
        if (!std::isfinite(c) || c == 0.0)
            throw TailFitError("tail_fit: " + kernel.name() + " vanishes or is non-finite on the fit range");
        const double sg = c > 0.0 ? 1.0 : -1.0;
        if (sign != 0.0 && sg != sign)
            throw TailFitError("tail_fit: " + kernel.name() + " changes sign on the fit range");
        sign = sg;
        xs[i] = std::log(s);
        ys[i] = std::log(std::abs(c));
    }
    if (!(ys.back() < ys.front()))
        throw TailFitError("tail_fit: " + kernel.name() + " does not decay on the fit range");

    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n_points; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n_points;
    my /= n_points;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n_points; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    TailFit fit;
    fit.exponent = sxy / sxx;
    const double intercept = my - fit.exponent * mx;
    fit.constant = sign * std::exp(intercept);
    fit.s_min = s_min;
    fit.s_max = s_max;
    double rss = 0.0;
    for (int i = 0; i < n_points; ++i) {
        const double r = ys[i] - (intercept + fit.exponent * xs[i]);
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / n_points);
    return fit;
}

} // namespace ffou
