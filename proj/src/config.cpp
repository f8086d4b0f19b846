#include "ffou/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ffou/simulation.hpp"

namespace ffou {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (v.empty() || ec != std::errc() || ptr != end) throw ConfigError(key + ": not a number: '" + v + "'");
    return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (v.empty() || ec != std::errc() || ptr != end) throw ConfigError(key + ": not a non-negative integer: '" + v + "'");
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
    return out;
}

std::string join(const std::vector<double>& items) {
    std::vector<std::string> s;
    for (double v : items) s.push_back(fmt(v));
    return join(s);
}

struct Field {
    const char* key;
    const char* doc;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

Field real(const char* key, const char* doc, double ExperimentConfig::*m) {
    return {key, doc, [m](const ExperimentConfig& c) { return fmt(c.*m); },
            [m, key](ExperimentConfig& c, const std::string& v) { c.*m = to_double(key, v); }};
}

template <class T>
Field integer(const char* key, const char* doc, T ExperimentConfig::*m) {
    return {key, doc, [m](const ExperimentConfig& c) { return std::to_string(c.*m); },
            [m, key](ExperimentConfig& c, const std::string& v) { c.*m = static_cast<T>(to_uint(key, v)); }};
}

Field text(const char* key, const char* doc, std::string ExperimentConfig::*m) {
    return {key, doc, [m](const ExperimentConfig& c) { return c.*m; },
            [m](ExperimentConfig& c, const std::string& v) { c.*m = v; }};
}

Field reals(const char* key, const char* doc, std::vector<double> ExperimentConfig::*m) {
    return {key, doc, [m](const ExperimentConfig& c) { return join(c.*m); },
            [m, key](ExperimentConfig& c, const std::string& v) {
                (c.*m).clear();
                for (const auto& item : split_list(v)) (c.*m).push_back(to_double(key, item));
            }};
}

Field model(const char* key, const char* doc, double ModelParams::*m) {
    return {key, doc, [m](const ExperimentConfig& c) { return fmt(c.model.*m); },
            [m, key](ExperimentConfig& c, const std::string& v) { c.model.*m = to_double(key, v); }};
}

Field forcing_real(const char* key, const char* doc, double ForcingConfig::*m) {
    return {key, doc, [m](const ExperimentConfig& c) { return fmt(c.forcing.*m); },
            [m, key](ExperimentConfig& c, const std::string& v) { c.forcing.*m = to_double(key, v); }};
}

Field quad_real(const char* key, const char* doc, double QuadratureConfig::*m) {
    return {key, doc, [m](const ExperimentConfig& c) { return fmt(c.quadrature.*m); },
            [m, key](ExperimentConfig& c, const std::string& v) { c.quadrature.*m = to_double(key, v); }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        model("model.hurst", "Hurst index H of the driving fBm", &ModelParams::hurst),
        model("model.theta", "relaxation time theta", &ModelParams::theta),
        model("model.sigma", "noise amplitude sigma", &ModelParams::sigma),
        model("model.v_rest", "resting level Vrest", &ModelParams::v_rest),
        model("model.v_init", "initial value V_0", &ModelParams::v_init),
        {"forcing.kind", "zero | constant | exp_decay | periodic | heaviside",
         [](const ExperimentConfig& c) { return c.forcing.kind; },
         [](ExperimentConfig& c, const std::string& v) { c.forcing.kind = v; }},
        forcing_real("forcing.amplitude", "amplitude for constant, exp_decay and periodic forcing", &ForcingConfig::amplitude),
        forcing_real("forcing.tau", "decay time of exp_decay forcing", &ForcingConfig::tau),
        forcing_real("forcing.period", "period of periodic forcing", &ForcingConfig::period),
        forcing_real("forcing.phase", "phase of periodic forcing (radians)", &ForcingConfig::phase),
        {"forcing.amplitudes", "heaviside: comma-separated jump amplitudes",
         [](const ExperimentConfig& c) { return join(c.forcing.amplitudes); },
         [](ExperimentConfig& c, const std::string& v) {
             c.forcing.amplitudes.clear();
             for (const auto& item : split_list(v)) c.forcing.amplitudes.push_back(to_double("forcing.amplitudes", item));
         }},
        {"forcing.laws", "heaviside: comma-separated activation laws (exponential:RATE, degenerate:T0, stable:ALPHA:SCALE)",
         [](const ExperimentConfig& c) { return join(c.forcing.laws); },
         [](ExperimentConfig& c, const std::string& v) { c.forcing.laws = split_list(v); }},
        {"forcing.dependence", "heaviside: independent | ordered | shared_single",
         [](const ExperimentConfig& c) { return c.forcing.dependence; },
         [](ExperimentConfig& c, const std::string& v) { c.forcing.dependence = v; }},
        real("grid.dt", "time step", &ExperimentConfig::dt),
        real("grid.horizon", "simulation horizon", &ExperimentConfig::horizon),
        integer("run.seed", "master seed", &ExperimentConfig::seed),
        integer("run.threads", "worker threads (0: all cores)", &ExperimentConfig::threads),
        integer("simulate.paths", "ensemble size", &ExperimentConfig::paths),
        text("simulate.scheme", "euler | trapezoid", &ExperimentConfig::scheme),
        text("simulate.regime", "resample | frozen activation times", &ExperimentConfig::regime),
        reals("simulate.hurst_sweep", "optional list of H values, one ensemble each", &ExperimentConfig::hurst_sweep),
        integer("simulate.paths_csv", "number of paths written to the path CSV", &ExperimentConfig::paths_csv),
        integer("simulate.stride", "report every n-th node in the moment CSV", &ExperimentConfig::stride),
        real("simulate.anchor", "anchor time of the covariance column", &ExperimentConfig::anchor),
        reals("kernels.hursts", "H values tabulated by the kernels command", &ExperimentConfig::kernel_hursts),
        real("kernels.t", "base time t of R_H(t, t+s)", &ExperimentConfig::kernel_t),
        real("kernels.s_max", "largest lag s", &ExperimentConfig::kernel_s_max),
        integer("kernels.s_points", "number of lags", &ExperimentConfig::kernel_s_points),
        reals("kernels.lags", "fixed lags for the R_H-versus-H table", &ExperimentConfig::kernel_lags),
        integer("kernels.h_points", "number of H values in the R_H-versus-H table", &ExperimentConfig::kernel_h_points),
        real("kernels.var_t_max", "largest time of the variance table", &ExperimentConfig::var_t_max),
        integer("kernels.var_points", "number of times in the variance table", &ExperimentConfig::var_points),
        real("fpt.threshold", "threshold V_th", &ExperimentConfig::fpt_threshold),
        real("fpt.t_max", "censoring horizon", &ExperimentConfig::fpt_t_max),
        integer("fpt.paths", "number of paths", &ExperimentConfig::fpt_paths),
        integer("fpt.bins", "histogram bins on [0, t_max]", &ExperimentConfig::fpt_bins),
        integer("fpt.block", "nodes per Cholesky extension", &ExperimentConfig::fpt_block),
        text("fpt.scheme", "euler | trapezoid", &ExperimentConfig::fpt_scheme),
        text("validate.level", "quick | full", &ExperimentConfig::level),
        text("output.dir", "output directory", &ExperimentConfig::out_dir),
        quad_real("quadrature.abs_tol", "absolute quadrature tolerance", &QuadratureConfig::abs_tol),
        quad_real("quadrature.rel_tol", "relative quadrature tolerance", &QuadratureConfig::rel_tol),
        {"quadrature.max_subdivisions", "adaptive subdivision budget",
         [](const ExperimentConfig& c) { return std::to_string(c.quadrature.max_subdivisions); },
         [](ExperimentConfig& c, const std::string& v) {
             c.quadrature.max_subdivisions = static_cast<int>(to_uint("quadrature.max_subdivisions", v));
         }},
        quad_real("quadrature.oscillatory_split", "oscillatory contour split point", &QuadratureConfig::oscillatory_split),
    };
    return table;
}

} // namespace

ForcingTerm ForcingConfig::build() const {
    if (kind == "zero") return ForcingTerm::zero();
    if (kind == "constant") return ForcingTerm::constant(amplitude);
    if (kind == "exp_decay") return ForcingTerm::exp_decay(amplitude, tau);
    if (kind == "periodic") return ForcingTerm::periodic(amplitude, period, phase);
    if (kind == "heaviside") {
        std::vector<ActivationLaw> parsed;
        for (const auto& l : laws) parsed.push_back(parse_law(l));
        return ForcingTerm::heaviside(amplitudes, parsed, parse_dependence(dependence));
    }
    throw ConfigError("forcing.kind: unknown kind '" + kind + "'");
}

void ExperimentConfig::validate() const {
    try {
        model.validate();
        (void)forcing.build();
        (void)TimeGrid::from_horizon(dt, horizon);
        (void)parse_scheme(scheme);
        (void)parse_scheme(fpt_scheme);
        (void)parse_regime(regime);
        quadrature.validate();
        for (double h : hurst_sweep) require_open_hurst(h, "simulate.hurst_sweep");
        for (double h : kernel_hursts) require_open_hurst(h, "kernels.hursts");
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (paths == 0) throw ConfigError("simulate.paths must be >= 1");
    if (stride == 0) throw ConfigError("simulate.stride must be >= 1");
    if (!(anchor >= 0.0)) throw ConfigError("simulate.anchor must be >= 0");
    if (kernel_s_points < 2 || var_points < 2 || kernel_h_points < 2) throw ConfigError("kernels: tables need >= 2 points");
    if (!(kernel_t >= 0.0) || !(kernel_s_max > 0.0) || !(var_t_max > 0.0)) throw ConfigError("kernels: times must be positive");
    if (fpt_paths == 0 || fpt_bins == 0 || fpt_block == 0) throw ConfigError("fpt: paths, bins and block must be >= 1");
    if (!(fpt_t_max > 0.0)) throw ConfigError("fpt.t_max must be > 0");
    if (level != "quick" && level != "full") throw ConfigError("validate.level must be quick or full");
}

ExperimentConfig parse_config(const std::string& text) {
    std::map<std::string, const Field*> index;
    for (const auto& f : fields()) index[f.key] = &f;
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = trim(line);
        if (body.empty() || body[0] == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        const auto it = index.find(key);
        if (it == index.end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        it->second->set(cfg, value);
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
    return out;
}

std::string documented_defaults() {
    const ExperimentConfig cfg;
    std::string out;
    for (const auto& f : fields()) out += "# " + std::string(f.doc) + "\n" + f.key + " = " + f.get(cfg) + "\n";
    return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
    // The output location does not change results, so it is not hashed.
    ExperimentConfig content = cfg;
    content.out_dir.clear();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize_config(content)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace ffou
