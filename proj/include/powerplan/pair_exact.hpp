#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

namespace powerplan::pair {

// Two experiments sharing the pilot size epsilon (nu = epsilon - 1).
struct PairInstance {
    double a1 = 0.0;
    double a2 = 0.0;
    int epsilon = 0;
    double budget = 0.0;
    double alpha = 0.05;

    double nu() const { return epsilon - 1.0; }
};

struct PairOptimum {
    double r_star = 1.0;
    std::optional<double> d_star;  // TOL only
    double objective = 0.0;        // delta*, gamma* or the minimized expected max-beta
};

void validate(const PairInstance& instance);

// beta*(sigma) = Phi(q - sqrt(N / (a1 + a2))).
double beta_star(const PairInstance& instance);

// d(delta) = N / (q_{1-alpha} - Phi^{-1}(beta* + delta))^2.
double critical_threshold(double delta, double beta_star, double budget, double alpha);

// P(max(U1, U2) <= d) for the inflation ratio r = k1 / k2. Zero when d <= a1 + a2.
double coverage_H(double r, double d, const PairInstance& instance);

double maximizer_r(double d, double a1, double a2);

PairOptimum tol_optimum(double gamma, const PairInstance& instance);
PairOptimum conf_optimum(double delta, const PairInstance& instance, double beta_star);
PairOptimum exp_optimum(const PairInstance& instance);

// max(a1 + a2 e^-y, a2 + a1 e^y), the larger of U1 and U2 at y = log(r X).
double max_u(double y, double a1, double a2);

// Density of W = log X with X ~ F(nu, nu), normalized by the Beta constant.
double w_density(double w, double nu);
// Half-width of the symmetric integration range for W.
double w_half_width(double nu);
// Integral of w_density over the integration range; 1 up to truncation.
double w_normalization(double nu);

// J(s) = E[Phi(q - sqrt(N / max_u(W + s)))], the expected max Type 2 error at
// r = e^s.
double exp_objective(double s, const PairInstance& instance);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

// Direct simulation of (U1, U2) from chi-squared pilot draws.
McEstimate mc_coverage(double r, double d, const PairInstance& instance, std::size_t draws, std::uint64_t seed);
McEstimate mc_expected_max_type2(double r, const PairInstance& instance, std::size_t draws, std::uint64_t seed);

}  // namespace powerplan::pair
