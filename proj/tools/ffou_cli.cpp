#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ffou/commands.hpp"
#include "ffou/config.hpp"
#include "ffou/fault.hpp"

namespace {

enum Exit { ok = 0, validation_failed = 1, config_error = 2, numerical_failure = 3 };

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fractional OU process with stochastic forcing: simulation, kernels, first passage, validation"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string level;
    std::string fault = "none";
    bool print_defaults = false;

    app.add_flag("--print-defaults", print_defaults, "Print every config key with its default and exit");
    app.add_option("--fault", fault, "Inject a deliberate defect (mutation testing)")->group("");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Config file (key = value lines)");
        sub->add_option("--seed", seed, "Master seed (overrides run.seed)");
        sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
        sub->add_option("--fault", fault, "Inject a deliberate defect (mutation testing)")->group("");
    };
    auto* simulate = app.add_subcommand("simulate", "Simulate an ensemble and write path and moment CSVs");
    auto* kernels = app.add_subcommand("kernels", "Tabulate covariance and variance functions");
    auto* fpt = app.add_subcommand("fpt", "Estimate first passage times through a threshold");
    auto* validate = app.add_subcommand("validate", "Run the acceptance criteria");
    for (auto* sub : {simulate, kernels, fpt, validate}) add_common(sub);
    validate->add_option("--level", level, "quick | full")->check(CLI::IsMember({"quick", "full"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Exit::ok : Exit::config_error;
    }

    if (print_defaults) {
        std::cout << ffou::documented_defaults();
        return Exit::ok;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return Exit::config_error;
    }

    try {
        ffou::set_fault(ffou::parse_fault(fault));
        ffou::ExperimentConfig cfg = config_path.empty() ? ffou::ExperimentConfig{} : ffou::load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!level.empty()) cfg.level = level;

        ffou::CommandResult result;
        if (simulate->parsed()) result = ffou::cmd_simulate(cfg);
        else if (kernels->parsed()) result = ffou::cmd_kernels(cfg);
        else if (fpt->parsed()) result = ffou::cmd_fpt(cfg);
        else result = ffou::cmd_validate(cfg);

        std::cout << result.summary;
        for (const auto& f : result.files) std::cout << "wrote " << f << "\n";
        return result.passed ? Exit::ok : Exit::validation_failed;
    } catch (const ffou::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return Exit::config_error;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid parameter: " << e.what() << "\n";
        return Exit::config_error;
    } catch (const ffou::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return Exit::numerical_failure;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return Exit::numerical_failure;
    }
}
