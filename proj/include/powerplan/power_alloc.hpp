#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace powerplan {

// Sample standard deviation from a pilot study of `epsilon` observations.
struct PilotEstimate {
    double s = 0.0;
    int epsilon = 0;
};

// One experiment. `theta` is the decision threshold; it never enters any
// computation and is carried for reporting only.
struct ExperimentSpec {
    std::optional<double> sigma;
    std::optional<PilotEstimate> pilot;
    double delta_gap = 0.0;
    double theta = 0.0;
};

struct Portfolio {
    std::vector<ExperimentSpec> experiments;
    double budget = 0.0;
    double alpha = 0.05;
};

struct AllocationResult {
    std::vector<double> n;
    std::vector<double> beta;
    double max_beta = 0.0;
};

// Rejects empty portfolios, nonpositive sigma / gap / pilot values, pilot
// sizes below 2, N <= 0 and alpha outside (0, 1).
void validate_portfolio(const Portfolio& portfolio);

// ---------------------------------------------------------------------------
// Type 2 error of the one-sided z-test at the minimum detectable gap
// ---------------------------------------------------------------------------

// Phi(q_{1-alpha} - delta_gap * sqrt(n) / sigma).
double type2_error(double sigma, double n, double delta_gap, double alpha);

// Same quantity from the noncentrality delta_gap * sqrt(n) / sigma, with the
// critical value q_{1-alpha} precomputed.
double type2_from_noncentrality(double critical_value, double noncentrality);

// (sigma / delta_gap)^2.
double difficulty_index(double sigma, double delta_gap);

// n_i = N * w_i / sum_j w_j.
std::vector<double> proportional_allocation(std::span<const double> weights, double budget);

// Common Type 2 error when the budget equalizes experiments with total
// difficulty `difficulty_sum`: Phi(q_{1-alpha} - sqrt(N / difficulty_sum)).
double equalized_type2(double difficulty_sum, double budget, double alpha);

// ---------------------------------------------------------------------------
// Known-sigma allocations
// ---------------------------------------------------------------------------

// Minimax Type 2 allocation, n_i proportional to (sigma_i / Delta_i)^2.
AllocationResult power_optimal_allocation(const Portfolio& portfolio);

// beta*(sigma) in closed form.
double optimal_max_type2(const Portfolio& portfolio);

// Minimax MSE allocation, n_i proportional to sigma_i^2. Ignores Delta.
AllocationResult mse_optimal_allocation(const Portfolio& portfolio);

// ---------------------------------------------------------------------------
// Corrected plug-in allocations
// ---------------------------------------------------------------------------

// n_i = N k_i (S_i / Delta_i)^2 / sum_j k_j (S_j / Delta_j)^2. The reported
// betas are evaluated at the inflated plug-in deviations sqrt(k_i) S_i, so they
// are equal across experiments by construction.
AllocationResult allocation_with_corrections(std::span<const double> k, std::span<const double> s,
                                             const Portfolio& portfolio);

// max_i beta(sigma_i, n_i*(k, S)) evaluated at the true deviations.
double realized_max_type2(std::span<const double> k, std::span<const double> s,
                          std::span<const double> true_sigma, const Portfolio& portfolio);

// Largest-remainder rounding of a continuous allocation to integers summing to
// floor(N). Reporting aid only.
std::vector<std::int64_t> round_largest_remainder(std::span<const double> n, double budget);

// Known sigmas of a portfolio, in order. Precondition error if any is absent.
std::vector<double> known_sigmas(const Portfolio& portfolio, const char* where);

}  // namespace powerplan
