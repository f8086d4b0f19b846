#pragma once

// Internal quadrature building blocks shared by the kernel, forcing and
// simulation modules.

#include <functional>
#include <span>
#include <vector>

#include "ffou/quadrature.hpp"

namespace ffou::detail {

struct Integral {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;

    Integral& operator+=(const Integral& other) {
        value += other.value;
        error += other.error;
        l1 += other.l1;
        return *this;
    }
    Integral scaled(double factor) const;
};

Integral operator+(Integral a, const Integral& b);

using RealFn = std::function<double(double)>;

// Globally adaptive Gauss-Kronrod (31 point) on [a, b]. Bisects the panel with
// the largest error estimate until the total meets the configured tolerance;
// throws QuadratureError when max_subdivisions is exhausted.
Integral adaptive(const RealFn& f, double a, double b, const QuadratureConfig& q);

// Same, over consecutive panels [p_0, p_1], [p_1, p_2], ... sharing one budget.
Integral adaptive_panels(const RealFn& f, std::span<const double> points, const QuadratureConfig& q);

// Integral over [0, inf) by the exp-sinh rule, for smooth decaying integrands.
Integral half_line(const RealFn& f, const QuadratureConfig& q);

// Breakpoints for an integrand dominated by exp(-|z - peak| / scale) on [a, b]:
// panels of doubling width moving away from the peak, merged with `extra`.
std::vector<double> exp_breakpoints(double a, double b, double peak, double scale,
                                    std::span<const double> extra = {});

void require_converged(const Integral& result, const QuadratureConfig& q, const char* what);

} // namespace ffou::detail
