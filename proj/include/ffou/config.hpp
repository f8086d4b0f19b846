#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ffou/core.hpp"
#include "ffou/forcing.hpp"
#include "ffou/quadrature.hpp"

namespace ffou {

// Malformed or inconsistent configuration. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ForcingConfig {
    std::string kind = "zero"; // zero | constant | exp_decay | periodic | heaviside
    double amplitude = 0.0;
    double tau = 20.0;
    double period = 100.0;
    double phase = 0.0;
    std::vector<double> amplitudes;
    std::vector<std::string> laws; // exponential:RATE | degenerate:T0 | stable:ALPHA:SCALE
    std::string dependence = "independent";

    ForcingTerm build() const;
    bool operator==(const ForcingConfig&) const = default;
};

struct ExperimentConfig {
    ModelParams model{};
    ForcingConfig forcing{};
    double dt = 0.1;
    double horizon = 300.0;
    std::uint64_t seed = 1;
    unsigned threads = 0;

    std::size_t paths = 1000;
    std::string scheme = "trapezoid";
    std::string regime = "resample";
    std::vector<double> hurst_sweep;
    std::size_t paths_csv = 10;
    std::size_t stride = 10;
    double anchor = 150.0;

    std::vector<double> kernel_hursts{0.25, 0.5, 0.75};
    double kernel_t = 10.0;
    double kernel_s_max = 300.0;
    std::size_t kernel_s_points = 61;
    std::vector<double> kernel_lags{1.0, 10.0, 30.0, 100.0};
    std::size_t kernel_h_points = 19;
    double var_t_max = 300.0;
    std::size_t var_points = 61;

    double fpt_threshold = -50.0;
    double fpt_t_max = 300.0;
    std::size_t fpt_paths = 1000;
    std::size_t fpt_bins = 50;
    std::size_t fpt_block = 64;
    std::string fpt_scheme = "trapezoid";

    std::string level = "quick";
    std::string out_dir = "out";
    QuadratureConfig quadrature{};

    // Throws ConfigError on inconsistent fields.
    void validate() const;
    bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical text: every key, fixed order, full precision.
std::string serialize_config(const ExperimentConfig& cfg);
// Canonical text annotated with a description of each key.
std::string documented_defaults();

// FNV-1a 64 of the canonical text without output.dir, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

} // namespace ffou
