#pragma once

#include <span>
#include <string>
#include <vector>

#include "powerplan/power_alloc.hpp"

namespace powerplan::robust {

// Numeric guards on the confidence levels.
inline constexpr double kCMin = 1e-12;
inline constexpr double kCMax = 1.0 - 1e-9;

// ---------------------------------------------------------------------------
// Chi-squared interval scaling
// ---------------------------------------------------------------------------

struct ScalingPair {
    double phi_lower = 1.0;
    double phi_upper = 1.0;
};

// (eps - 1) / chi2 quantiles at (1 + c) / 2 and (1 - c) / 2. c = 0 is exact;
// other c are clamped to [kCMin, kCMax].
ScalingPair scaling_factors(int epsilon, double c);

double kappa(int epsilon, double c);

// kappa and its first two derivatives in c.
struct KappaJet {
    double value = 1.0;
    double d1 = 0.0;
    double d2 = 0.0;
};
KappaJet kappa_jet(int epsilon, double c);

// g(x) = kappa(eps, e^x) with g'(x) and g''(x).
KappaJet kappa_log_jet(int epsilon, double x);

// c with kappa(eps, c) = target.
double kappa_inverse(int epsilon, double target);

// ---------------------------------------------------------------------------
// Surrogate programs
// ---------------------------------------------------------------------------

enum class ObjectiveKind { tol, conf, exp };

const char* to_string(ObjectiveKind kind);

struct CorrectionPlan {
    std::vector<double> c;
    std::vector<double> k;        // raw upper scaling factors
    std::vector<double> k_ratio;  // k / min k
    ObjectiveKind objective_kind = ObjectiveKind::tol;
    // delta^R (TOL), gamma^R (CONF) or g^R (EXP).
    double objective_value = 0.0;
    double certified_gamma = 0.0;  // product of c
    double beta_star = 0.0;        // beta* of the difficulties the plan was built from
    double surrogate_beta = 0.0;   // worst-case bound at c
    double lambda = 0.0;           // shared marginal at the optimum
};

// Phi(q - sqrt(N / sum kappa_i a_i)).
double surrogate_objective_beta(std::span<const double> c, std::span<const double> difficulties,
                                std::span<const int> epsilons, double budget, double alpha);

CorrectionPlan solve_r_tol(std::span<const double> difficulties, std::span<const int> epsilons, double gamma,
                           double budget, double alpha);

CorrectionPlan solve_r_conf(std::span<const double> difficulties, std::span<const int> epsilons, double delta,
                            double budget, double alpha, double beta_star);

CorrectionPlan solve_r_exp(std::span<const double> difficulties, std::span<const int> epsilons, double budget,
                           double alpha);

// The R-EXP line-search objective at a fixed certified level gamma.
double r_exp_objective(std::span<const double> difficulties, std::span<const int> epsilons, double gamma,
                       double budget, double alpha);

struct SurrogateObjective {
    ObjectiveKind kind = ObjectiveKind::tol;
    double gamma = 0.7;  // TOL
    double delta = 0.2;  // CONF
};

struct SurrogateResult {
    CorrectionPlan plan;
    AllocationResult allocation;
    // beta* evaluated at the pilot deviations. Stands in for beta*(sigma) in
    // the CONF threshold.
    double beta_star_proxy = 0.0;
};

// Pilot deviations substituted for sigma in the chosen program, then the
// corrected allocation.
SurrogateResult surrogate_s_pipeline(std::span<const double> pilot_s, std::span<const int> epsilons,
                                     std::span<const double> deltas, double budget, double alpha,
                                     const SurrogateObjective& objective);

// Same pipeline on a portfolio whose experiments all carry pilot data.
SurrogateResult surrogate_s_pipeline(const Portfolio& portfolio, const SurrogateObjective& objective);

}  // namespace powerplan::robust
