#include "ffou/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ffou/fpt.hpp"
#include "ffou/kernels.hpp"
#include "ffou/simulation.hpp"

namespace ffou {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::filesystem::path prepare_dir(const ExperimentConfig& cfg) {
    std::filesystem::path dir(cfg.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
    return dir;
}

// CSV with a provenance comment line and a header row.
class CsvFile {
  public:
    CsvFile(const std::filesystem::path& path, const ExperimentConfig& cfg, const std::vector<std::string>& header)
        : path_(path.string()), out_(path, std::ios::binary) {
        if (!out_) throw ConfigError("cannot write '" + path_ + "'");
        out_ << "# seed=" << cfg.seed << " config_hash=" << config_hash(cfg) << "\n";
        row(header);
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

    void row(const std::vector<double>& values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(num(v));
        row(cells);
    }

    const std::string& path() const { return path_; }

  private:
    std::string path_;
    std::ofstream out_;
};

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

} // namespace

CommandResult cmd_simulate(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto dir = prepare_dir(cfg);
    const ForcingTerm forcing = cfg.forcing.build();
    EnsembleConfig ecfg;
    ecfg.grid = TimeGrid::from_horizon(cfg.dt, cfg.horizon);
    ecfg.paths = cfg.paths;
    ecfg.seed = cfg.seed;
    ecfg.scheme = parse_scheme(cfg.scheme);
    ecfg.regime = parse_regime(cfg.regime);
    ecfg.threads = cfg.threads;
    const double anchor = std::min(cfg.anchor, ecfg.grid.horizon());

    const bool sweep = !cfg.hurst_sweep.empty();
    const std::vector<double> hursts = sweep ? cfg.hurst_sweep : std::vector<double>{cfg.model.hurst};
    CommandResult result;
    for (double h : hursts) {
        ModelParams p = cfg.model;
        p.hurst = h;
        const std::string suffix = sweep ? "_H" + short_num(h) : "";
        const auto ens = simulate_ensemble(p, forcing, ecfg);

        const std::size_t shown = std::min(cfg.paths_csv, ens.n_paths);
        std::vector<std::string> header{"time"};
        for (std::size_t i = 0; i < shown; ++i) header.push_back("path_" + std::to_string(i));
        CsvFile paths(dir / ("paths" + suffix + ".csv"), cfg, header);
        for (std::size_t k = 0; k < ecfg.grid.nodes(); ++k) {
            std::vector<double> row{ecfg.grid.time(k)};
            for (std::size_t i = 0; i < shown; ++i) row.push_back(ens.at(i, k));
            paths.row(row);
        }

        ReportOptions ropt;
        ropt.stride = cfg.stride;
        ropt.quadrature = cfg.quadrature;
        const auto rep = ensemble_stats(ens, anchor, p, forcing, ropt);
        CsvFile moments(dir / ("moments" + suffix + ".csv"), cfg,
                        {"time", "emp_mean", "emp_var", "emp_cov_anchor", "se_mean", "se_var", "analytic_mean",
                         "analytic_var", "analytic_cov"});
        std::size_t outside = 0;
        for (std::size_t i = 0; i < rep.times.size(); ++i) {
            moments.row(std::vector<double>{rep.times[i], rep.emp_mean[i], rep.emp_var[i], rep.emp_cov_anchor[i],
                                            rep.se_mean[i], rep.se_var[i], rep.analytic_mean[i], rep.analytic_var[i],
                                            rep.analytic_cov[i]});
            if (std::abs(rep.emp_mean[i] - rep.analytic_mean[i]) > 4.0 * rep.se_mean[i] + 1e-9 * (1.0 + std::abs(rep.analytic_mean[i])))
                ++outside;
        }
        result.files.push_back(paths.path());
        result.files.push_back(moments.path());

        char line[256];
        std::snprintf(line, sizeof line,
                      "H=%g: terminal mean %.6g (analytic %.6g, SE %.3g); %zu of %zu reported nodes beyond 4 SE%s\n", h,
                      rep.emp_mean.back(), rep.analytic_mean.back(), rep.se_mean.back(), outside, rep.times.size(),
                      rep.degenerate ? " [degenerate: single path]" : "");
        result.summary += line;
    }
    return result;
}

CommandResult cmd_kernels(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto dir = prepare_dir(cfg);
    const auto& q = cfg.quadrature;
    const double t = cfg.kernel_t;
    CommandResult result;

    {
        std::vector<std::string> header{"s"};
        for (double h : cfg.kernel_hursts) header.push_back("R_H" + short_num(h));
        header.push_back("R_limit_H1");
        CsvFile csv(dir / "cov_lag.csv", cfg, header);
        for (double s : linspace(0.0, cfg.kernel_s_max, cfg.kernel_s_points)) {
            std::vector<double> row{s};
            for (double h : cfg.kernel_hursts) {
                ModelParams p = cfg.model;
                p.hurst = h;
                row.push_back(cov_fou(t, t + s, p, q));
            }
            row.push_back(cov_limit_h1(t, t + s, cfg.model));
            csv.row(row);
        }
        result.files.push_back(csv.path());
    }
    {
        std::vector<std::string> header{"H"};
        for (double s : cfg.kernel_lags) header.push_back("lag_" + short_num(s));
        CsvFile csv(dir / "cov_hurst.csv", cfg, header);
        const double n = static_cast<double>(cfg.kernel_h_points);
        for (std::size_t k = 1; k <= cfg.kernel_h_points; ++k) {
            ModelParams p = cfg.model;
            p.hurst = static_cast<double>(k) / (n + 1.0);
            std::vector<double> row{p.hurst};
            for (double s : cfg.kernel_lags) row.push_back(cov_fou(t, t + s, p, q));
            csv.row(row);
        }
        result.files.push_back(csv.path());
    }
    {
        std::vector<std::string> header{"t"};
        for (double h : cfg.kernel_hursts) header.push_back("var_H" + short_num(h));
        for (double h : cfg.kernel_hursts) header.push_back("asymptote_H" + short_num(h));
        CsvFile csv(dir / "variance.csv", cfg, header);
        for (double tt : linspace(0.0, cfg.var_t_max, cfg.var_points)) {
            std::vector<double> row{tt};
            for (double h : cfg.kernel_hursts) {
                ModelParams p = cfg.model;
                p.hurst = h;
                row.push_back(cov_fou(tt, tt, p, q));
            }
            for (double h : cfg.kernel_hursts) {
                ModelParams p = cfg.model;
                p.hurst = h;
                row.push_back(var_asymptote(p));
            }
            csv.row(row);
        }
        result.files.push_back(csv.path());
    }
    result.summary = "wrote " + std::to_string(result.files.size()) + " kernel tables\n";
    return result;
}

CommandResult cmd_fpt(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto dir = prepare_dir(cfg);
    FptConfig f;
    f.threshold = cfg.fpt_threshold;
    f.dt = cfg.dt;
    f.t_max = cfg.fpt_t_max;
    f.n_paths = cfg.fpt_paths;
    f.seed = cfg.seed;
    f.scheme = parse_scheme(cfg.fpt_scheme);
    f.block = cfg.fpt_block;
    f.threads = cfg.threads;
    const auto r = estimate_fpt(cfg.model, cfg.forcing.build(), f);
    const auto h = fpt_histogram(r, cfg.fpt_bins);

    CommandResult result;
    {
        CsvFile csv(dir / "fpt_times.csv", cfg, {"path_id", "crossing_time_or_censored"});
        for (std::size_t i = 0; i < r.n_paths(); ++i)
            csv.row(std::vector<std::string>{std::to_string(i), r.censored[i] ? "censored" : num(r.crossing_times[i])});
        result.files.push_back(csv.path());
    }
    {
        CsvFile csv(dir / "fpt_histogram.csv", cfg, {"bin_left", "bin_right", "density"});
        for (std::size_t b = 0; b < h.density.size(); ++b) csv.row(std::vector<double>{h.edges[b], h.edges[b + 1], h.density[b]});
        result.files.push_back(csv.path());
    }
    char line[256];
    std::snprintf(line, sizeof line, "paths %zu, censored fraction %.6g, mean crossing %.6g (SE %.3g)%s\n", r.n_paths(),
                  1.0 - r.uncensored_fraction(), r.mean_crossing(), r.se_crossing(),
                  r.all_censored ? " [all paths censored]" : "");
    result.summary = line;
    return result;
}

CommandResult cmd_validate(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto dir = prepare_dir(cfg);
    ValidationOptions options;
    options.level = parse_level(cfg.level);
    options.threads = cfg.threads;
    const auto report = run_validation(options);
    const auto path = dir / "validation.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << report.to_json();
    CommandResult result;
    result.files.push_back(path.string());
    result.passed = report.passed();
    for (const auto& c : report.criteria) {
        char line[2048];
        std::snprintf(line, sizeof line, "criterion %2d %-28s %s  %s\n", c.id, c.name.c_str(), c.passed ? "PASS" : "FAIL",
                      c.detail.c_str());
        result.summary += line;
    }
    result.summary += report.passed() ? "validation passed\n" : "validation FAILED\n";
    return result;
}

} // namespace ffou
