#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ffou/config.hpp"
#include "ffou/fault.hpp"
#include "ffou/fgn.hpp"
#include "ffou/forcing.hpp"
#include "ffou/fpt.hpp"
#include "ffou/kernels.hpp"
#include "ffou/simulation.hpp"
#include "ffou/validation.hpp"

namespace py = pybind11;
using namespace ffou;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const std::vector<double>& v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::span<const double> view(const Array& a) {
    if (a.ndim() != 1) throw ShapeError("expected a one-dimensional array");
    return {a.data(), static_cast<std::size_t>(a.size())};
}

ModelParams make_params(double hurst, double theta, double sigma, double v_rest, double v_init) {
    ModelParams p{hurst, theta, sigma, v_rest, v_init};
    p.validate();
    return p;
}

} // namespace

PYBIND11_MODULE(_ffou, m) {
    m.doc() = "Fractional Ornstein-Uhlenbeck process with stochastic forcing";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            py::set_error(PyExc_ValueError, e.what());
        } catch (const std::invalid_argument& e) {
            py::set_error(PyExc_ValueError, e.what());
        }
    });
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init(&make_params), py::arg("hurst") = 0.5, py::arg("theta") = 30.0, py::arg("sigma") = 1.0,
             py::arg("v_rest") = 0.0, py::arg("v_init") = 0.0)
        .def_readwrite("hurst", &ModelParams::hurst)
        .def_readwrite("theta", &ModelParams::theta)
        .def_readwrite("sigma", &ModelParams::sigma)
        .def_readwrite("v_rest", &ModelParams::v_rest)
        .def_readwrite("v_init", &ModelParams::v_init)
        .def("__repr__", [](const ModelParams& p) {
            return "ModelParams(hurst=" + std::to_string(p.hurst) + ", theta=" + std::to_string(p.theta) +
                   ", sigma=" + std::to_string(p.sigma) + ", v_rest=" + std::to_string(p.v_rest) +
                   ", v_init=" + std::to_string(p.v_init) + ")";
        });

    py::class_<TimeGrid>(m, "TimeGrid")
        .def(py::init<double, std::size_t>(), py::arg("dt"), py::arg("steps"))
        .def_static("from_horizon", &TimeGrid::from_horizon, py::arg("dt"), py::arg("horizon"))
        .def_readonly("dt", &TimeGrid::dt)
        .def_readonly("steps", &TimeGrid::steps)
        .def_property_readonly("horizon", &TimeGrid::horizon)
        .def_property_readonly("nodes", &TimeGrid::nodes)
        .def("times", [](const TimeGrid& g) {
            std::vector<double> t(g.nodes());
            for (std::size_t k = 0; k < t.size(); ++k) t[k] = g.time(k);
            return to_array(t);
        });

    // Kernels
    m.def("fgn_autocov", &fgn_autocov, py::arg("lag"), py::arg("hurst"), py::arg("dt"));
    m.def("cov_fou", [](double t, double s, const ModelParams& p) { return cov_fou(t, s, p); });
    m.def("cov_fou_wiener", [](double t, double s, const ModelParams& p) { return cov_fou_wiener(t, s, p); });
    m.def("cov_fou_harmonizable", [](double t, double s, const ModelParams& p) { return cov_fou_harmonizable(t, s, p); });
    m.def("cov_markov", &cov_markov);
    m.def("cov_limit_h1", &cov_limit_h1);
    m.def("cov_limit_h0", &cov_limit_h0);
    m.def("rho_stationary", [](double lag, const ModelParams& p) { return rho_stationary(lag, p); });
    m.def("var_asymptote", &var_asymptote);
    m.def("cov_expansion", &cov_expansion, py::arg("t"), py::arg("s"), py::arg("order"), py::arg("params"));
    py::class_<TailFit>(m, "TailFit")
        .def_readonly("exponent", &TailFit::exponent)
        .def_readonly("constant", &TailFit::constant)
        .def_readonly("residual", &TailFit::residual);
    m.def(
        "tail_fit_fou",
        [](const ModelParams& p, double t, double s_min, double s_max, std::size_t n) {
            return tail_fit(CovarianceKernel::fou(p), t, s_min, s_max, n);
        },
        py::arg("params"), py::arg("t"), py::arg("s_min"), py::arg("s_max"), py::arg("n_points") = 12);

    // Forcing
    py::class_<ForcingTerm>(m, "ForcingTerm")
        .def_static("zero", &ForcingTerm::zero)
        .def_static("constant", &ForcingTerm::constant, py::arg("amplitude"))
        .def_static("exp_decay", &ForcingTerm::exp_decay, py::arg("amplitude"), py::arg("tau"))
        .def_static("periodic", &ForcingTerm::periodic, py::arg("amplitude"), py::arg("period"), py::arg("phase") = 0.0)
        .def_static(
            "heaviside",
            [](std::vector<double> amps, const std::vector<std::string>& laws, const std::string& dependence) {
                std::vector<ActivationLaw> parsed;
                for (const auto& l : laws) parsed.push_back(parse_law(l));
                return ForcingTerm::heaviside(std::move(amps), std::move(parsed), parse_dependence(dependence));
            },
            py::arg("amplitudes"), py::arg("laws"), py::arg("dependence") = "independent")
        .def_static(
            "single", [](double amp, const std::string& law) { return ForcingTerm::single(amp, parse_law(law)); },
            py::arg("amplitude"), py::arg("law"))
        .def_property_readonly("kind", &ForcingTerm::kind)
        .def_property_readonly("is_deterministic", &ForcingTerm::is_deterministic);
    m.def("forcing_mean", &forcing_mean, py::arg("forcing"), py::arg("t"));
    m.def("forcing_cov", &forcing_cov, py::arg("forcing"), py::arg("t"), py::arg("s"));
    m.def("activation_cdf", [](const std::string& law, double t) { return activation_cdf(parse_law(law), t); });

    // Noise and paths
    m.def(
        "simulate_fgn",
        [](const TimeGrid& g, double hurst, std::uint64_t seed, std::uint64_t path) {
            return to_array(simulate_fgn_circulant(g, hurst, seed, path).increments);
        },
        py::arg("grid"), py::arg("hurst"), py::arg("seed"), py::arg("path") = 0);
    m.def(
        "cholesky_fbm",
        [](double hurst, double dt, std::size_t n, std::uint64_t seed, std::uint64_t path) {
            CholeskyStream s(hurst, dt, n, seed, path);
            s.extend(n);
            return to_array({s.values().begin(), s.values().end()});
        },
        py::arg("hurst"), py::arg("dt"), py::arg("n"), py::arg("seed"), py::arg("path") = 0);
    m.def(
        "simulate_euler",
        [](const ModelParams& p, const Array& forcing, const Array& increments, const TimeGrid& g) {
            return to_array(simulate_euler(p, view(forcing), view(increments), g));
        },
        py::arg("params"), py::arg("forcing"), py::arg("increments"), py::arg("grid"));
    m.def(
        "simulate_trapezoid",
        [](const ModelParams& p, const Array& forcing, const Array& fbm, const TimeGrid& g) {
            return to_array(simulate_trapezoid(p, view(forcing), view(fbm), g));
        },
        py::arg("params"), py::arg("forcing"), py::arg("fbm"), py::arg("grid"));

    // Analytic moments of V
    m.def(
        "mean_v", [](const ModelParams& p, const ForcingTerm& f, double t) { return mean_v(p, f, t); }, py::arg("params"),
        py::arg("forcing"), py::arg("t"));
    m.def(
        "cov_v", [](const ModelParams& p, const ForcingTerm& f, double t, double s) { return cov_v(p, f, t, s); },
        py::arg("params"), py::arg("forcing"), py::arg("t"), py::arg("s"));
    m.def(
        "var_v", [](const ModelParams& p, const ForcingTerm& f, double t) { return var_v(p, f, t); }, py::arg("params"),
        py::arg("forcing"), py::arg("t"));

    // Ensembles
    m.def(
        "simulate_ensemble",
        [](const ModelParams& p, const ForcingTerm& f, const TimeGrid& g, std::size_t paths, std::uint64_t seed,
           const std::string& scheme, const std::string& regime, unsigned threads) {
            EnsembleConfig cfg{g, paths, seed, parse_scheme(scheme), parse_regime(regime), threads};
            PathEnsemble ens;
            {
                py::gil_scoped_release release;
                ens = simulate_ensemble(p, f, cfg);
            }
            py::array_t<double> out({static_cast<py::ssize_t>(ens.n_paths), static_cast<py::ssize_t>(g.nodes())});
            std::copy(ens.values.begin(), ens.values.end(), out.mutable_data());
            return out;
        },
        py::arg("params"), py::arg("forcing"), py::arg("grid"), py::arg("paths"), py::arg("seed") = 1,
        py::arg("scheme") = "trapezoid", py::arg("regime") = "resample", py::arg("threads") = 0);

    // First passage
    m.def(
        "estimate_fpt",
        [](const ModelParams& p, const ForcingTerm& f, double threshold, double dt, double t_max, std::size_t paths,
           std::uint64_t seed, const std::string& scheme, std::size_t block) {
            FptConfig cfg;
            cfg.threshold = threshold;
            cfg.dt = dt;
            cfg.t_max = t_max;
            cfg.n_paths = paths;
            cfg.seed = seed;
            cfg.scheme = parse_scheme(scheme);
            cfg.block = block;
            FptResult r;
            {
                py::gil_scoped_release release;
                r = estimate_fpt(p, f, cfg);
            }
            py::dict d;
            d["crossing_times"] = to_array(r.crossing_times);
            d["censored"] = std::vector<bool>(r.censored.begin(), r.censored.end());
            d["censored_count"] = r.censored_count;
            d["all_censored"] = r.all_censored;
            d["t_max"] = r.t_max;
            const auto h = fpt_histogram(r, 50);
            d["histogram_edges"] = to_array(h.edges);
            d["histogram_density"] = to_array(h.density);
            return d;
        },
        py::arg("params"), py::arg("forcing"), py::arg("threshold"), py::arg("dt") = 0.1, py::arg("t_max") = 300.0,
        py::arg("paths") = 1000, py::arg("seed") = 1, py::arg("scheme") = "trapezoid", py::arg("block") = 64);

    // Config and validation
    m.def("parse_config_text", [](const std::string& text) { return serialize_config(parse_config(text)); },
          "Parse a config and return its canonical text.");
    m.def("config_hash", [](const std::string& text) { return config_hash(parse_config(text)); });
    m.def("documented_defaults", &documented_defaults);
    m.def(
        "run_criterion",
        [](int id, const std::string& level) {
            ValidationOptions o;
            o.level = parse_level(level);
            CriterionResult r;
            {
                py::gil_scoped_release release;
                r = run_criterion(id, o);
            }
            py::dict d;
            d["id"] = r.id;
            d["name"] = r.name;
            d["passed"] = r.passed;
            d["detail"] = r.detail;
            return d;
        },
        py::arg("id"), py::arg("level") = "quick");
    m.def("set_fault", [](const std::string& name) { set_fault(parse_fault(name)); });
}
