#pragma once

#include <string>
#include <vector>

#include "ffou/config.hpp"
#include "ffou/validation.hpp"

namespace ffou {

struct CommandResult {
    std::vector<std::string> files; // written artifacts
    std::string summary;            // human-readable lines for stdout
    bool passed = true;             // validation outcome (other commands: true)
};

/// Ensemble simulation: per-path CSV and moment CSV (one pair per H when a
/// sweep is configured).
CommandResult cmd_simulate(const ExperimentConfig& cfg);

/// Covariance and variance tables of R_H.
CommandResult cmd_kernels(const ExperimentConfig& cfg);

/// First-passage experiment: crossing times and histogram CSVs.
CommandResult cmd_fpt(const ExperimentConfig& cfg);

/// Acceptance criteria at cfg.level; writes validation.json.
CommandResult cmd_validate(const ExperimentConfig& cfg);

} // namespace ffou
