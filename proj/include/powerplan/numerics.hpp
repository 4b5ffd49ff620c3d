#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace powerplan::numerics {

// Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussLegendreRule& gauss_legendre(int points);

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int panels = 0;
    bool converged = true;
};

// Adaptive Gauss-Legendre: each panel is accepted when the 16-point rule on
// the panel agrees with the sum over its two halves to within
// max(abs_tol * width / total_width, rel_tol * |panel|). `breakpoints` seed the
// initial panels, so kinks of the integrand should be listed there.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, std::span<const double> breakpoints,
                                    double abs_tol, double rel_tol, int max_depth = 40);

struct Minimum {
    double x = 0.0;
    double value = 0.0;
    int evaluations = 0;
};

// Golden-section search on [lo, hi]; stops when the bracket is narrower than tol.
Minimum golden_section(const std::function<double(double)>& f, double lo, double hi, double tol);

// Evaluates f on `points` equally spaced nodes of [lo, hi], brackets the best
// node by its neighbours and refines the bracket by golden-section search.
Minimum scan_then_golden(const std::function<double(double)>& f, double lo, double hi, int points, double tol);

}  // namespace powerplan::numerics
