#pragma once

#include <string>

#include "ffou/core.hpp"

namespace ffou {

struct QuadratureConfig {
    double abs_tol = 1e-9;
    double rel_tol = 1e-8;
    int max_subdivisions = 2000;
    // Abscissa (in units of 1/theta) where oscillatory transforms leave the
    // real axis and continue along a vertical ray into the upper half-plane.
    double oscillatory_split = 1.0;

    void validate() const;

    bool operator==(const QuadratureConfig&) const = default;
};

class QuadratureError : public NumericalError {
  public:
    QuadratureError(const std::string& what, double achieved, double requested);

    double achieved_error() const { return achieved_; }
    double requested_error() const { return requested_; }

  private:
    double achieved_;
    double requested_;
};

} // namespace ffou
