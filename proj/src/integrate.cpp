#include "integrate.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace ffou {

void QuadratureConfig::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw DomainError("QuadratureConfig: tolerances must be positive");
    if (max_subdivisions < 1) throw DomainError("QuadratureConfig: max_subdivisions must be >= 1");
    if (!(oscillatory_split > 0.0)) throw DomainError("QuadratureConfig: oscillatory_split must be positive");
}

QuadratureError::QuadratureError(const std::string& what, double achieved, double requested)
    : NumericalError(what), achieved_(achieved), requested_(requested) {}

namespace detail {
namespace {

using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;

struct Panel {
    double a, b;
    Integral result;
    bool operator<(const Panel& other) const { return result.error < other.result.error; }
};

Panel evaluate(const RealFn& f, double a, double b) {
    Panel p{a, b, {}};
    double err = 0.0, l1 = 0.0;
    p.result.value = Rule::integrate(f, a, b, 0, 0.0, &err, &l1);
    p.result.error = err;
    p.result.l1 = l1;
    if (!std::isfinite(p.result.value)) p.result.error = std::numeric_limits<double>::infinity();
    return p;
}

double tolerance(const Integral& total, const QuadratureConfig& q) {
    return std::max(q.abs_tol, q.rel_tol * std::abs(total.value));
}

} // namespace

Integral Integral::scaled(double factor) const {
    return {value * factor, error * std::abs(factor), l1 * std::abs(factor)};
}

Integral operator+(Integral a, const Integral& b) { return a += b; }

Integral adaptive_panels(const RealFn& f, std::span<const double> points, const QuadratureConfig& q) {
    std::priority_queue<Panel> heap;
    Integral total;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (!(points[i + 1] > points[i])) continue;
        Panel p = evaluate(f, points[i], points[i + 1]);
        total += p.result;
        heap.push(p);
    }
    int subdivisions = 0;
    while (!heap.empty() && total.error > tolerance(total, q)) {
        if (subdivisions >= q.max_subdivisions) break;
        Panel worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break; // roundoff floor
        heap.pop();
        Panel left = evaluate(f, worst.a, mid);
        Panel right = evaluate(f, mid, worst.b);
        total.value += left.result.value + right.result.value - worst.result.value;
        total.error += left.result.error + right.result.error - worst.result.error;
        total.l1 += left.result.l1 + right.result.l1 - worst.result.l1;
        heap.push(left);
        heap.push(right);
        ++subdivisions;
    }
    // Re-sum to shed the drift of the running updates.
    Integral exact;
    while (!heap.empty()) {
        exact += heap.top().result;
        heap.pop();
    }
    return exact;
}

Integral adaptive(const RealFn& f, double a, double b, const QuadratureConfig& q) {
    if (a == b) return {};
    if (b < a) return adaptive(f, b, a, q).scaled(-1.0);
    const double pts[2] = {a, b};
    return adaptive_panels(f, pts, q);
}

Integral half_line(const RealFn& f, const QuadratureConfig& q) {
    thread_local boost::math::quadrature::exp_sinh<double> rule(12);
    Integral out;
    double err = 0.0, l1 = 0.0;
    out.value = rule.integrate(f, std::min(q.rel_tol, 1e-10), &err, &l1);
    out.error = err;
    out.l1 = l1;
    return out;
}

std::vector<double> exp_breakpoints(double a, double b, double peak, double scale, std::span<const double> extra) {
    std::vector<double> pts{a, b};
    for (double width = 0.5 * scale; width <= 800.0 * scale; width *= 2.0) {
        for (double p : {peak - width, peak + width})
            if (p > a && p < b) pts.push_back(p);
    }
    if (peak > a && peak < b) pts.push_back(peak);
    for (double p : extra)
        if (p > a && p < b) pts.push_back(p);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

void require_converged(const Integral& result, const QuadratureConfig& q, const char* what) {
    const double wanted = std::max(q.abs_tol, q.rel_tol * std::abs(result.value));
    if (!std::isfinite(result.value) || result.error > wanted) {
        std::ostringstream msg;
        msg << what << ": quadrature did not converge (error estimate " << result.error << " > " << wanted << ")";
        throw QuadratureError(msg.str(), result.error, wanted);
    }
}

} // namespace detail
} // namespace ffou
