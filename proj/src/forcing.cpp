#include "ffou/forcing.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "ffou/fault.hpp"
#include "fft.hpp"
#include "integrate.hpp"

namespace ffou {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const QuadratureConfig& stable_quadrature() {
    static const QuadratureConfig q{1e-13, 1e-11, 4000, 1.0};
    return q;
}

double kappa(const PositiveStable& law) { return 2.0 * law.scale; }

// log of Zolotarev's function A(phi) = sin(a phi)^{a/(1-a)} sin((1-a) phi) / sin(phi)^{1/(1-a)}.
double zolotarev_log(double alpha, double phi) {
    return alpha / (1.0 - alpha) * std::log(std::sin(alpha * phi)) + std::log(std::sin((1.0 - alpha) * phi)) -
           std::log(std::sin(phi)) / (1.0 - alpha);
}

// Integrals over phi in (0, pi) of g(A(phi) y), y = (x / kappa)^{-alpha/(1-alpha)}.
template <class G>
double stable_phi_integral(const PositiveStable& law, double x, G g) {
    const double alpha = law.alpha;
    const double log_y = -alpha / (1.0 - alpha) * std::log(x / kappa(law));
    auto f = [=](double phi) { return g(std::exp(zolotarev_log(alpha, phi) + log_y)); };
    const auto r = detail::adaptive(f, 0.0, std::numbers::pi, stable_quadrature());
    return r.value / std::numbers::pi;
}

double stable_cdf(const PositiveStable& law, double x) {
    if (x <= 0.0) return 0.0;
    if (law.alpha == 0.5) return std::erfc(std::sqrt(law.scale / (2.0 * x)));
    return stable_phi_integral(law, x, [](double z) { return std::exp(-z); });
}

double stable_survival(const PositiveStable& law, double x) {
    if (x <= 0.0) return 1.0;
    if (law.alpha == 0.5) return std::erf(std::sqrt(law.scale / (2.0 * x)));
    return stable_phi_integral(law, x, [](double z) { return -std::expm1(-z); });
}

double stable_pdf(const PositiveStable& law, double x) {
    if (x <= 0.0) return 0.0;
    if (law.alpha == 0.5)
        return std::sqrt(law.scale / (2.0 * std::numbers::pi)) * std::pow(x, -1.5) * std::exp(-law.scale / (2.0 * x));
    const double alpha = law.alpha;
    return alpha / ((1.0 - alpha) * x) * stable_phi_integral(law, x, [](double z) { return z * std::exp(-z); });
}

double parse_double(std::string_view text, std::string_view context) {
    double value = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty())
        throw DomainError("cannot parse number '" + std::string(text) + "' in " + std::string(context));
    return value;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Cumulative trapezoid of a density sampled at x_k = k h.
std::vector<double> cumulative(const std::vector<double>& pdf, double h) {
    std::vector<double> cdf(pdf.size(), 0.0);
    for (std::size_t k = 1; k < pdf.size(); ++k) cdf[k] = cdf[k - 1] + 0.5 * h * (pdf[k - 1] + pdf[k]);
    for (double& v : cdf) v = std::min(v, 1.0);
    return cdf;
}

// Density of the sum of two independent variables: trapezoid rule for the
// convolution integral on the shared grid.
std::vector<double> convolve_densities(const std::vector<double>& a, const std::vector<double>& b, double h) {
    std::vector<double> c = detail::convolve_truncated(a, b);
    for (std::size_t m = 0; m < c.size(); ++m)
        c[m] = std::max(0.0, h * (c[m] - 0.5 * (a[0] * b[m] + a[m] * b[0])));
    return c;
}

} // namespace

// ---------------------------------------------------------------------------
// Laws

void validate_law(const ActivationLaw& law) {
    std::visit(overloaded{
                   [](const Degenerate& d) {
                       if (!(d.t0 >= 0.0) || !std::isfinite(d.t0))
                           throw DomainError("degenerate activation time must be finite and >= 0");
                   },
                   [](const Exponential& e) {
                       if (!(e.rate > 0.0) || !std::isfinite(e.rate))
                           throw DomainError("exponential rate must be positive");
                   },
                   [](const PositiveStable& s) {
                       if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw DomainError("stable index must lie in (0, 1)");
                       if (!(s.scale > 0.0) || !std::isfinite(s.scale))
                           throw DomainError("stable scale must be positive");
                   },
               },
               law);
}

bool has_density(const ActivationLaw& law) { return !std::holds_alternative<Degenerate>(law); }

double activation_cdf(const ActivationLaw& law, double t) {
    if (t < 0.0) return 0.0;
    return std::visit(overloaded{
                          [&](const Degenerate& d) { return t >= d.t0 ? 1.0 : 0.0; },
                          [&](const Exponential& e) { return -std::expm1(-e.rate * t); },
                          [&](const PositiveStable& s) { return stable_cdf(s, t); },
                      },
                      law);
}

double activation_survival(const ActivationLaw& law, double t) {
    if (t < 0.0) return 1.0;
    return std::visit(overloaded{
                          [&](const Degenerate& d) { return t >= d.t0 ? 0.0 : 1.0; },
                          [&](const Exponential& e) { return std::exp(-e.rate * t); },
                          [&](const PositiveStable& s) { return stable_survival(s, t); },
                      },
                      law);
}

double activation_pdf(const ActivationLaw& law, double t) {
    if (t < 0.0) return 0.0;
    return std::visit(overloaded{
                          [](const Degenerate&) { return 0.0; },
                          [&](const Exponential& e) { return e.rate * std::exp(-e.rate * t); },
                          [&](const PositiveStable& s) { return stable_pdf(s, t); },
                      },
                      law);
}

double activation_upper_quantile(const ActivationLaw& law, double tail) {
    if (!(tail > 0.0 && tail < 1.0)) throw DomainError("activation_upper_quantile: tail must lie in (0, 1)");
    return std::visit(overloaded{
                          [](const Degenerate& d) { return d.t0; },
                          [&](const Exponential& e) { return -std::log(tail) / e.rate; },
                          [&](const PositiveStable& s) {
                              double lo = std::log(kappa(s)), hi = lo;
                              while (stable_survival(s, std::exp(lo)) < tail) lo -= 2.0;
                              while (stable_survival(s, std::exp(hi)) > tail) hi += 2.0;
                              for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
                                  const double mid = 0.5 * (lo + hi);
                                  (stable_survival(s, std::exp(mid)) > tail ? lo : hi) = mid;
                              }
                              return std::exp(hi);
                          },
                      },
                      law);
}

double activation_sample(const ActivationLaw& law, RandomStream& rng) {
    return std::visit(overloaded{
                          [](const Degenerate& d) { return d.t0; },
                          [&](const Exponential& e) { return rng.exponential() / e.rate; },
                          [&](const PositiveStable& s) {
                              // Kanter's representation: kappa (A(U) / W)^{(1-alpha)/alpha}.
                              const double u = std::numbers::pi * rng.uniform();
                              const double w = rng.exponential();
                              const double a = s.alpha;
                              return kappa(s) * std::exp((1.0 - a) / a * (zolotarev_log(a, u) - std::log(w)));
                          },
                      },
                      law);
}

std::string format_law(const ActivationLaw& law) {
    return std::visit(overloaded{
                          [](const Degenerate& d) { return "degenerate:" + fmt(d.t0); },
                          [](const Exponential& e) { return "exponential:" + fmt(e.rate); },
                          [](const PositiveStable& s) { return "stable:" + fmt(s.alpha) + ":" + fmt(s.scale); },
                      },
                      law);
}

ActivationLaw parse_law(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t colon = text.find(':', start);
        parts.push_back(text.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    ActivationLaw law;
    const std::string context = "activation law '" + std::string(text) + "'";
    if (parts[0] == "degenerate" && parts.size() == 2) {
        law = Degenerate{parse_double(parts[1], context)};
    } else if (parts[0] == "exponential" && parts.size() == 2) {
        law = Exponential{parse_double(parts[1], context)};
    } else if (parts[0] == "stable" && parts.size() == 3) {
        law = PositiveStable{parse_double(parts[1], context), parse_double(parts[2], context)};
    } else {
        throw DomainError("unrecognized " + context + " (expected degenerate:T0, exponential:RATE or stable:ALPHA:SCALE)");
    }
    validate_law(law);
    return law;
}

// ---------------------------------------------------------------------------
// Forcing terms

const char* dependence_name(Dependence d) {
    switch (d) {
    case Dependence::independent: return "independent";
    case Dependence::ordered: return "ordered";
    case Dependence::shared_single: return "shared_single";
    }
    return "independent";
}

Dependence parse_dependence(std::string_view text) {
    if (text == "independent") return Dependence::independent;
    if (text == "ordered") return Dependence::ordered;
    if (text == "shared_single") return Dependence::shared_single;
    throw DomainError("unknown dependence '" + std::string(text) + "'");
}

ForcingTerm::ForcingTerm(ForcingSpec spec) : spec_(std::move(spec)) {
    auto finite = [](double v, const char* what) {
        if (!std::isfinite(v)) throw DomainError(std::string("forcing: ") + what + " must be finite");
    };
    std::visit(overloaded{
                   [](const ZeroForcing&) {},
                   [&](const ConstantForcing& c) { finite(c.amplitude, "amplitude"); },
                   [&](const ExpDecayForcing& e) {
                       finite(e.amplitude, "amplitude");
                       if (!(e.tau > 0.0)) throw DomainError("forcing: tau must be positive");
                   },
                   [&](const PeriodicForcing& p) {
                       finite(p.amplitude, "amplitude");
                       finite(p.phase, "phase");
                       if (!(p.period > 0.0)) throw DomainError("forcing: period must be positive");
                   },
                   [&](const HeavisideSum& h) {
                       if (h.amplitudes.empty()) throw DomainError("forcing: Heaviside sum needs amplitudes");
                       for (double a : h.amplitudes) finite(a, "amplitude");
                       const std::size_t wanted = h.dependence == Dependence::shared_single ? 1 : h.amplitudes.size();
                       if (h.laws.size() != wanted)
                           throw DomainError("forcing: Heaviside sum needs " + std::to_string(wanted) +
                                             " activation law(s), got " + std::to_string(h.laws.size()));
                       for (const auto& law : h.laws) validate_law(law);
                   },
               },
               spec_);
}

std::string ForcingTerm::kind() const {
    return std::visit(overloaded{
                          [](const ZeroForcing&) { return "zero"; },
                          [](const ConstantForcing&) { return "constant"; },
                          [](const ExpDecayForcing&) { return "exp_decay"; },
                          [](const PeriodicForcing&) { return "periodic"; },
                          [](const HeavisideSum&) { return "heaviside"; },
                      },
                      spec_);
}

double ForcingTerm::value(double t) const {
    return std::visit(overloaded{
                          [](const ZeroForcing&) { return 0.0; },
                          [](const ConstantForcing& c) { return c.amplitude; },
                          [&](const ExpDecayForcing& e) { return e.amplitude * std::exp(-t / e.tau); },
                          [&](const PeriodicForcing& p) {
                              return p.amplitude * std::sin(2.0 * std::numbers::pi * t / p.period + p.phase);
                          },
                          [](const HeavisideSum&) -> double {
                              throw DomainError("forcing: a Heaviside sum has no deterministic value");
                          },
                      },
                      spec_);
}

std::size_t ForcingTerm::activation_count() const {
    const auto* h = heaviside_sum();
    return h ? h->amplitudes.size() : 0;
}

// ---------------------------------------------------------------------------
// Mean / covariance kernel

struct ForcingCovKernel::Ordered {
    double h = 0.0;
    std::vector<ActivationLaw> gaps;
    std::vector<std::vector<double>> time_pdf; // T_i density on the grid
    std::vector<std::vector<double>> time_cdf;
    // gap_cdf[i][j - i - 2]: cdf of T_j - T_i for j >= i + 2 (one gap uses the exact law).
    std::vector<std::vector<std::vector<double>>> gap_cdf;

    double lookup(const std::vector<double>& table, double x) const {
        if (x <= 0.0) return 0.0;
        const double pos = x / h;
        const auto k = static_cast<std::size_t>(pos);
        if (k + 1 >= table.size()) return table.back();
        const double frac = pos - static_cast<double>(k);
        return table[k] + frac * (table[k + 1] - table[k]);
    }

    double cdf(std::size_t i, double t) const {
        if (i == 0) return activation_cdf(gaps[0], t);
        return lookup(time_cdf[i], t);
    }
    double survival(std::size_t i, double t) const {
        if (i == 0) return activation_survival(gaps[0], t);
        return 1.0 - lookup(time_cdf[i], t);
    }
    double gap(std::size_t i, std::size_t j, double x) const {
        if (j == i + 1) return activation_cdf(gaps[j], x);
        return lookup(gap_cdf[i][j - i - 2], x);
    }

    // P(T_i <= s, T_j <= t) for i < j: int_0^s f_{T_i}(u) P(T_j - T_i <= t - u) du.
    double joint(std::size_t i, std::size_t j, double s, double t) const {
        if (s <= 0.0) return 0.0;
        const auto& f = time_pdf[i];
        const std::size_t last = std::min(static_cast<std::size_t>(s / h), f.size() - 1);
        double sum = 0.0;
        double prev = f[0] * gap(i, j, t);
        for (std::size_t m = 1; m <= last; ++m) {
            const double cur = f[m] * gap(i, j, t - m * h);
            sum += 0.5 * h * (prev + cur);
            prev = cur;
        }
        const double u_last = static_cast<double>(last) * h;
        if (s > u_last) {
            const double f_s = i == 0 ? activation_pdf(gaps[0], s) : lookup(f, s);
            sum += 0.5 * (s - u_last) * (prev + f_s * gap(i, j, t - s));
        }
        return sum;
    }
};

ForcingCovKernel::ForcingCovKernel(ForcingTerm forcing, ConvolutionGrid grid, QuadratureConfig q)
    : forcing_(std::move(forcing)), q_(q) {
    const HeavisideSum* sum = forcing_.heaviside_sum();
    if (!sum) return;

    const bool all_degenerate = std::all_of(sum->laws.begin(), sum->laws.end(),
                                            [](const ActivationLaw& l) { return !has_density(l); });
    vanishes_ = all_degenerate;
    if (all_degenerate) {
        double acc = 0.0;
        for (const auto& law : sum->laws) {
            const double t0 = std::get<Degenerate>(law).t0;
            acc = sum->dependence == Dependence::ordered ? acc + t0 : t0;
            degenerate_times_.push_back(acc);
        }
        breakpoints_ = degenerate_times_;
        std::sort(breakpoints_.begin(), breakpoints_.end());
        breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
        return;
    }
    for (const auto& law : sum->laws)
        if (!has_density(law) && sum->dependence != Dependence::ordered)
            breakpoints_.push_back(std::get<Degenerate>(law).t0);
    std::sort(breakpoints_.begin(), breakpoints_.end());

    if (sum->dependence != Dependence::ordered || sum->laws.size() == 1) return;

    for (const auto& law : sum->laws)
        if (!has_density(law))
            throw ForcingGridError("ordered forcing: every gap law needs a density (mixed degenerate gaps)");
    if (grid.points < 16) throw DomainError("ordered forcing: convolution grid too small");

    auto ord = std::make_shared<Ordered>();
    ord->gaps = sum->laws;
    const std::size_t n = sum->laws.size();
    double span = 0.0;
    for (const auto& law : sum->laws) span += activation_upper_quantile(law, grid.tail_mass / static_cast<double>(n));
    ord->h = span / static_cast<double>(grid.points - 1);
    for (std::size_t k = 0; k < n; ++k) {
        const double cell = activation_cdf(sum->laws[k], ord->h);
        if (cell > grid.max_first_cell_mass)
            throw ForcingGridError("ordered forcing: gap law " + format_law(sum->laws[k]) + " puts " + fmt(cell) +
                                   " of its mass in the first cell of width " + fmt(ord->h) +
                                   " (grid cannot resolve the density)");
    }

    std::vector<std::vector<double>> densities(n, std::vector<double>(grid.points));
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t m = 0; m < grid.points; ++m)
            densities[k][m] = activation_pdf(sum->laws[k], static_cast<double>(m) * ord->h);

    ord->time_pdf.push_back(densities[0]);
    for (std::size_t i = 1; i < n; ++i) ord->time_pdf.push_back(convolve_densities(ord->time_pdf.back(), densities[i], ord->h));
    for (const auto& pdf : ord->time_pdf) ord->time_cdf.push_back(cumulative(pdf, ord->h));

    ord->gap_cdf.resize(n);
    for (std::size_t i = 0; i + 2 < n; ++i) {
        std::vector<double> acc = densities[i + 1];
        for (std::size_t j = i + 2; j < n; ++j) {
            acc = convolve_densities(acc, densities[j], ord->h);
            ord->gap_cdf[i].push_back(cumulative(acc, ord->h));
        }
    }
    ordered_ = std::move(ord);
}

double ForcingCovKernel::grid_step() const { return ordered_ ? ordered_->h : 0.0; }

double ForcingCovKernel::time_cdf(std::size_t i, double t) const {
    const HeavisideSum* sum = forcing_.heaviside_sum();
    if (!sum || i >= sum->amplitudes.size()) throw DomainError("time_cdf: activation index out of range");
    switch (sum->dependence) {
    case Dependence::independent: return activation_cdf(sum->laws[i], t);
    case Dependence::shared_single: return activation_cdf(sum->laws[0], t);
    case Dependence::ordered:
        if (ordered_) return ordered_->cdf(i, t);
        if (vanishes_) return t >= degenerate_times_.at(i) ? 1.0 : 0.0;
        return activation_cdf(sum->laws[0], t);
    }
    return 0.0;
}

double ForcingCovKernel::time_survival(std::size_t i, double t) const {
    const HeavisideSum* sum = forcing_.heaviside_sum();
    if (!sum || i >= sum->amplitudes.size()) throw DomainError("time_survival: activation index out of range");
    switch (sum->dependence) {
    case Dependence::independent: return activation_survival(sum->laws[i], t);
    case Dependence::shared_single: return activation_survival(sum->laws[0], t);
    case Dependence::ordered:
        if (ordered_) return ordered_->survival(i, t);
        if (vanishes_) return t >= degenerate_times_.at(i) ? 0.0 : 1.0;
        return activation_survival(sum->laws[0], t);
    }
    return 1.0;
}

double ForcingCovKernel::mean(double t) const {
    const HeavisideSum* sum = forcing_.heaviside_sum();
    if (!sum) return forcing_.value(t);
    if (sum->dependence == Dependence::shared_single) {
        const double total = std::accumulate(sum->amplitudes.begin(), sum->amplitudes.end(), 0.0);
        return total * time_cdf(0, t);
    }
    double m = 0.0;
    for (std::size_t i = 0; i < sum->amplitudes.size(); ++i) m += sum->amplitudes[i] * time_cdf(i, t);
    return m;
}

double ForcingCovKernel::raw_cov(double t, double s) const {
    const HeavisideSum* sum = forcing_.heaviside_sum();
    if (!sum || vanishes_) return 0.0;
    if (t < s) std::swap(t, s);
    if (s < 0.0) return 0.0;
    const auto& amp = sum->amplitudes;
    switch (sum->dependence) {
    case Dependence::shared_single: {
        const double total = std::accumulate(amp.begin(), amp.end(), 0.0);
        return total * total * activation_cdf(sum->laws[0], s) * activation_survival(sum->laws[0], t);
    }
    case Dependence::independent: {
        double c = 0.0;
        for (std::size_t i = 0; i < amp.size(); ++i)
            c += amp[i] * amp[i] * activation_cdf(sum->laws[i], s) * activation_survival(sum->laws[i], t);
        return c;
    }
    case Dependence::ordered: {
        const std::size_t n = amp.size();
        std::vector<double> fs(n), ft(n), st(n);
        for (std::size_t i = 0; i < n; ++i) {
            fs[i] = time_cdf(i, s);
            ft[i] = time_cdf(i, t);
            st[i] = time_survival(i, t);
        }
        double c = 0.0;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                // Cov(1{T_a <= t}, 1{T_b <= s}) with t >= s.
                double term;
                if (a <= b) {
                    term = fs[b] * st[a]; // T_b <= s forces T_a <= t
                } else {
                    term = ordered_->joint(b, a, s, t) - ft[a] * fs[b];
                }
                c += amp[a] * amp[b] * term;
            }
        return c;
    }
    }
    return 0.0;
}

double ForcingCovKernel::cov(double t, double s) const {
    const double c = raw_cov(t, s);
    return active_fault() == Fault::flip_forcing_cov_sign ? -c : c;
}

double forcing_mean(const ForcingTerm& forcing, double t) { return ForcingCovKernel(forcing).mean(t); }

double forcing_cov(const ForcingTerm& forcing, double t, double s) { return ForcingCovKernel(forcing).cov(t, s); }

// ---------------------------------------------------------------------------
// Sampling

std::vector<double> sample_activation_times(const HeavisideSum& sum, RandomStream& rng) {
    const std::size_t n = sum.amplitudes.size();
    std::vector<double> times(n);
    switch (sum.dependence) {
    case Dependence::independent:
        for (std::size_t i = 0; i < n; ++i) times[i] = activation_sample(sum.laws[i], rng);
        break;
    case Dependence::ordered: {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) times[i] = acc += activation_sample(sum.laws[i], rng);
        break;
    }
    case Dependence::shared_single:
        std::fill(times.begin(), times.end(), activation_sample(sum.laws[0], rng));
        break;
    }
    return times;
}

std::vector<double> heaviside_path(const HeavisideSum& sum, std::span<const double> times, const TimeGrid& grid) {
    if (times.size() != sum.amplitudes.size()) throw ShapeError("heaviside_path: one activation time per amplitude");
    std::vector<double> path(grid.nodes(), 0.0);
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] <= grid.horizon())) continue;
        // First node with t_k >= T_i.
        auto k = static_cast<std::size_t>(std::max(0.0, std::ceil(times[i] / grid.dt)));
        while (k > 0 && grid.time(k - 1) >= times[i]) --k;
        while (k < grid.nodes() && grid.time(k) < times[i]) ++k;
        for (; k < grid.nodes(); ++k) path[k] += sum.amplitudes[i];
    }
    return path;
}

std::vector<double> sample_forcing_path(const ForcingTerm& forcing, const TimeGrid& grid, RandomStream& rng) {
    if (const HeavisideSum* sum = forcing.heaviside_sum()) {
        const auto times = sample_activation_times(*sum, rng);
        return heaviside_path(*sum, times, grid);
    }
    std::vector<double> path(grid.nodes());
    for (std::size_t k = 0; k < path.size(); ++k) path[k] = forcing.value(grid.time(k));
    return path;
}

} // namespace ffou
