#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ffou {

// Parameter outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Array lengths that do not conform to the grid they are used with.
class ShapeError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Base for every failure of a numerical procedure (quadrature, embedding,
// factorization, convolution grids). The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Uniform time discretization. `steps` increments, so nodes t_0 = 0 ... t_steps.
struct TimeGrid {
    double dt = 0.1;
    std::size_t steps = 1;

    TimeGrid() = default;
    TimeGrid(double dt_, std::size_t steps_);

    static TimeGrid from_horizon(double dt, double horizon);

    double time(std::size_t k) const { return static_cast<double>(k) * dt; }
    double horizon() const { return time(steps); }
    std::size_t nodes() const { return steps + 1; }
};

// Fractional OU parameter bundle.
struct ModelParams {
    double hurst = 0.5;
    double theta = 30.0;
    double sigma = 1.0;
    double v_rest = 0.0;
    double v_init = 0.0;

    // H may sit on [0, 1] (endpoints are only meaningful for the limit kernels).
    void validate() const;
    // Additionally require H in the open interval (0, 1).
    void validate_open_hurst() const;

    bool operator==(const ModelParams&) const = default;
};

void require_open_hurst(double hurst, const char* what);

} // namespace ffou
