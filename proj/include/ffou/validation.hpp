#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ffou {

enum class ValidationLevel { quick, full };

ValidationLevel parse_level(std::string_view text);
const char* level_name(ValidationLevel level);

inline constexpr int kCriterionCount = 11;

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct ValidationReport {
    ValidationLevel level = ValidationLevel::quick;
    std::vector<CriterionResult> criteria;

    bool passed() const;
    std::string to_json() const;
};

struct ValidationOptions {
    ValidationLevel level = ValidationLevel::quick;
    unsigned threads = 0;
};

/// Runs one acceptance criterion (1-based id). Numerical failures inside a
/// check count as a failed criterion, reported in `detail`.
CriterionResult run_criterion(int id, const ValidationOptions& options);

ValidationReport run_validation(const ValidationOptions& options, std::vector<int> ids = {});

} // namespace ffou
