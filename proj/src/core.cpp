#include "ffou/core.hpp"

#include <cmath>

namespace ffou {

TimeGrid::TimeGrid(double dt_, std::size_t steps_) : dt(dt_), steps(steps_) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw DomainError("TimeGrid: dt must be positive and finite");
    if (steps == 0)
        throw DomainError("TimeGrid: at least one step is required");
}

TimeGrid TimeGrid::from_horizon(double dt, double horizon) {
    if (!(dt > 0.0) || !(horizon > 0.0))
        throw DomainError("TimeGrid: dt and horizon must be positive");
    const double ratio = horizon / dt;
    const auto steps = static_cast<std::size_t>(std::llround(ratio));
    if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio)
        throw DomainError("TimeGrid: horizon must be an integer multiple of dt");
    return TimeGrid(dt, steps);
}

void require_open_hurst(double hurst, const char* what) {
    if (!(hurst > 0.0 && hurst < 1.0))
        throw DomainError(std::string(what) + ": Hurst index must lie in (0, 1)");
}

void ModelParams::validate() const {
    if (!(hurst >= 0.0 && hurst <= 1.0))
        throw DomainError("ModelParams: Hurst index must lie in [0, 1]");
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw DomainError("ModelParams: theta must be positive");
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw DomainError("ModelParams: sigma must be non-negative");
    if (!std::isfinite(v_rest) || !std::isfinite(v_init))
        throw DomainError("ModelParams: potentials must be finite");
}

void ModelParams::validate_open_hurst() const {
    validate();
    require_open_hurst(hurst, "ModelParams");
}

} // namespace ffou
