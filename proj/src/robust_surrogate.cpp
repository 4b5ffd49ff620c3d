#include "powerplan/robust_surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "powerplan/error.hpp"
#include "powerplan/numerics.hpp"
#include "powerplan/pair_exact.hpp"
#include "powerplan/special_fns.hpp"

namespace powerplan::robust {

namespace {

const double kXMin = std::log(kCMin);
const double kXMax = std::log(kCMax);

void validate_inputs(std::span<const double> a, std::span<const int> eps, double budget, double alpha,
                     const char* where) {
    if (a.empty()) throw_precondition(where, "no experiments");
    if (a.size() != eps.size()) {
        throw_precondition(where, "got " + std::to_string(a.size()) + " difficulties and " +
                                      std::to_string(eps.size()) + " pilot sizes");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a[i] > 0.0) || !std::isfinite(a[i])) {
            throw_domain(where, "experiment " + std::to_string(i) + ": difficulty must be positive");
        }
        if (eps[i] < 2) throw_domain(where, "experiment " + std::to_string(i) + ": pilot size must be >= 2");
    }
    if (!(budget > 0.0) || !std::isfinite(budget)) throw_domain(where, "budget N must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw_domain(where, "alpha must lie in (0, 1)");
}

double sum_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// One coordinate of the separable program: x with a g'(x) = lambda, clamped
// to [kXMin, kXMax].
struct Coordinate {
    double a;
    int epsilon;
    double log_marginal_min;  // log(a g'(kXMin))
    double log_marginal_max;  // log(a g'(kXMax))
    double x;                 // warm start and last solution
    KappaJet jet;             // g, g', g'' at x
    bool interior = false;

    Coordinate(double a_, int eps_) : a(a_), epsilon(eps_) {
        log_marginal_min = std::log(a * kappa_log_jet(epsilon, kXMin).d1);
        log_marginal_max = std::log(a * kappa_log_jet(epsilon, kXMax).d1);
        x = 0.5 * (kXMin + kXMax);
        jet = kappa_log_jet(epsilon, x);
    }

    void solve(double mu) {
        constexpr const char* where = "robust_surrogate::coordinate_solve";
        if (mu <= log_marginal_min) {
            set(kXMin, false);
            return;
        }
        if (mu >= log_marginal_max) {
            set(kXMax, false);
            return;
        }
        double lo = kXMin;
        double hi = kXMax;
        double cur = std::clamp(x, lo, hi);
        for (int iter = 0; iter < 200; ++iter) {
            const auto j = kappa_log_jet(epsilon, cur);
            const double h = std::log(a * j.d1) - mu;
            if (h > 0.0) hi = cur; else lo = cur;
            const double slope = j.d2 / j.d1;
            const double step = h / slope;
            if (std::abs(h) <= 1e-14 || std::abs(step) <= 1e-14 * std::max(1.0, std::abs(cur))) {
                x = cur;
                jet = j;
                interior = true;
                return;
            }
            double next = cur - step;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (hi - lo <= 1e-15 * std::max(1.0, std::abs(cur))) {
                set(next, true);
                return;
            }
            cur = next;
        }
        std::ostringstream msg;
        msg << "coordinate Newton did not converge (a = " << a << ", epsilon = " << epsilon << ", log lambda = " << mu
            << ")";
        throw_numeric(where, msg.str());
    }

    // dx / d(log lambda)
    double sensitivity() const { return interior ? jet.d1 / jet.d2 : 0.0; }

private:
    void set(double value, bool is_interior) {
        x = value;
        jet = kappa_log_jet(epsilon, value);
        interior = is_interior;
    }
};

std::vector<Coordinate> make_coordinates(std::span<const double> a, std::span<const int> eps) {
    std::vector<Coordinate> coords;
    coords.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) coords.emplace_back(a[i], eps[i]);
    return coords;
}

// Finds log lambda with residual(mu) = 0, where residual is nondecreasing in
// mu and derivative(mu) is its slope. Newton steps, bisection fallback.
template <class Residual, class Slope>
double solve_dual(std::vector<Coordinate>& coords, double mu, Residual residual, Slope slope, double tol,
                  const char* where) {
    double lo = coords.front().log_marginal_min;
    double hi = coords.front().log_marginal_max;
    for (const auto& c : coords) {
        lo = std::min(lo, c.log_marginal_min);
        hi = std::max(hi, c.log_marginal_max);
    }
    mu = std::clamp(mu, lo, hi);
    double last = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 400; ++iter) {
        for (auto& c : coords) c.solve(mu);
        const double r = residual();
        const bool stalled = std::abs(r) > 0.5 * std::abs(last);
        last = r;
        if (std::abs(r) <= tol) return mu;
        if (r > 0.0) hi = mu; else lo = mu;
        if (hi - lo <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mu))) return mu;
        const double d = slope();
        double next = d > 0.0 && !stalled ? mu - r / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        mu = next;
    }
    std::ostringstream msg;
    msg << "dual search did not converge (residual " << last << ")";
    throw_numeric(where, msg.str());
}

CorrectionPlan build_plan(const std::vector<Coordinate>& coords, std::span<const double> a, std::span<const int> eps,
                          ObjectiveKind kind, double budget, double alpha, double mu) {
    CorrectionPlan plan;
    plan.objective_kind = kind;
    plan.lambda = std::exp(mu);
    plan.certified_gamma = 1.0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const double c = std::exp(coords[i].x);
        plan.c.push_back(c);
        plan.k.push_back(scaling_factors(eps[i], c).phi_upper);
        plan.certified_gamma *= c;
    }
    const double k_min = *std::min_element(plan.k.begin(), plan.k.end());
    for (double k : plan.k) plan.k_ratio.push_back(k / k_min);
    plan.beta_star = equalized_type2(sum_of(a), budget, alpha);
    plan.surrogate_beta = surrogate_objective_beta(plan.c, a, eps, budget, alpha);
    return plan;
}

}  // namespace

const char* to_string(ObjectiveKind kind) {
    switch (kind) {
        case ObjectiveKind::tol: return "tol";
        case ObjectiveKind::conf: return "conf";
        case ObjectiveKind::exp: return "exp";
    }
    return "unknown";
}

double surrogate_objective_beta(std::span<const double> c, std::span<const double> difficulties,
                                std::span<const int> epsilons, double budget, double alpha) {
    constexpr const char* where = "robust_surrogate::surrogate_objective_beta";
    validate_inputs(difficulties, epsilons, budget, alpha, where);
    if (c.size() != difficulties.size()) throw_precondition(where, "confidence vector has the wrong length");
    double inflated = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) inflated += kappa(epsilons[i], c[i]) * difficulties[i];
    return equalized_type2(inflated, budget, alpha);
}

CorrectionPlan solve_r_tol(std::span<const double> difficulties, std::span<const int> epsilons, double gamma,
                           double budget, double alpha) {
    constexpr const char* where = "robust_surrogate::solve_r_tol";
    validate_inputs(difficulties, epsilons, budget, alpha, where);
    const double m = static_cast<double>(difficulties.size());
    if (!(gamma > 0.0 && gamma < 1.0)) throw_domain(where, "gamma must lie in (0, 1)");
    const double log_gamma = std::log(gamma);
    if (!(log_gamma < m * kXMax)) throw_domain(where, "gamma exceeds the largest certifiable level");
    if (!(log_gamma > m * kXMin)) throw_domain(where, "gamma is below the smallest certifiable level");

    auto coords = make_coordinates(difficulties, epsilons);
    for (auto& c : coords) c.x = log_gamma / m;
    double mu0 = 0.0;
    for (const auto& c : coords) mu0 += std::log(c.a * kappa_log_jet(c.epsilon, c.x).d1);
    mu0 /= m;
    const auto residual = [&] {
        double s = 0.0;
        for (const auto& c : coords) s += c.x;
        return s - log_gamma;
    };
    const auto slope = [&] {
        double s = 0.0;
        for (const auto& c : coords) s += c.sensitivity();
        return s;
    };
    const double mu = solve_dual(coords, mu0, residual, slope, 1e-12, where);
    auto plan = build_plan(coords, difficulties, epsilons, ObjectiveKind::tol, budget, alpha, mu);
    plan.objective_value = plan.surrogate_beta - plan.beta_star;
    return plan;
}

CorrectionPlan solve_r_conf(std::span<const double> difficulties, std::span<const int> epsilons, double delta,
                            double budget, double alpha, double beta_star) {
    constexpr const char* where = "robust_surrogate::solve_r_conf";
    validate_inputs(difficulties, epsilons, budget, alpha, where);
    const double d = pair::critical_threshold(delta, beta_star, budget, alpha);

    auto coords = make_coordinates(difficulties, epsilons);
    const auto inflated = [&] {
        double s = 0.0;
        for (const auto& c : coords) s += c.a * c.jet.value;
        return s;
    };
    double mu = 0.0;
    for (auto& c : coords) c.solve(c.log_marginal_min);
    if (inflated() >= d) {
        mu = coords.front().log_marginal_min;
    } else {
        for (auto& c : coords) c.solve(c.log_marginal_max);
        if (inflated() <= d) {
            mu = coords.front().log_marginal_max;
        } else {
            double mu0 = 0.0;
            for (const auto& c : coords) mu0 += 0.5 * (c.log_marginal_min + c.log_marginal_max);
            mu0 /= static_cast<double>(coords.size());
            const auto residual = [&] { return inflated() - d; };
            const auto slope = [&] {
                double s = 0.0;
                for (const auto& c : coords) s += c.a * c.jet.d1 * c.sensitivity();
                return s;
            };
            mu = solve_dual(coords, mu0, residual, slope, 1e-13 * d, where);
        }
    }
    auto plan = build_plan(coords, difficulties, epsilons, ObjectiveKind::conf, budget, alpha, mu);
    plan.beta_star = beta_star;
    plan.objective_value = plan.certified_gamma;
    return plan;
}

double r_exp_objective(std::span<const double> difficulties, std::span<const int> epsilons, double gamma,
                       double budget, double alpha) {
    const auto plan = solve_r_tol(difficulties, epsilons, gamma, budget, alpha);
    return 1.0 + (plan.surrogate_beta - 1.0) * gamma;
}

CorrectionPlan solve_r_exp(std::span<const double> difficulties, std::span<const int> epsilons, double budget,
                           double alpha) {
    constexpr const char* where = "robust_surrogate::solve_r_exp";
    validate_inputs(difficulties, epsilons, budget, alpha, where);
    const double m = static_cast<double>(difficulties.size());
    const double hi = std::min(1.0 - 1e-6, std::exp(m * kXMax) * (1.0 - 1e-9));
    const auto best = numerics::scan_then_golden(
        [&](double g) { return r_exp_objective(difficulties, epsilons, g, budget, alpha); }, 1e-6, hi, 21, 1e-6);
    auto plan = solve_r_tol(difficulties, epsilons, best.x, budget, alpha);
    plan.objective_kind = ObjectiveKind::exp;
    plan.objective_value = best.value;
    return plan;
}

SurrogateResult surrogate_s_pipeline(std::span<const double> pilot_s, std::span<const int> epsilons,
                                     std::span<const double> deltas, double budget, double alpha,
                                     const SurrogateObjective& objective) {
    constexpr const char* where = "robust_surrogate::surrogate_s_pipeline";
    if (pilot_s.size() != epsilons.size() || pilot_s.size() != deltas.size()) {
        throw_precondition(where, "pilot deviations, pilot sizes and gaps must have equal length");
    }
    Portfolio portfolio;
    portfolio.budget = budget;
    portfolio.alpha = alpha;
    for (std::size_t i = 0; i < pilot_s.size(); ++i) {
        ExperimentSpec e;
        e.pilot = PilotEstimate{pilot_s[i], epsilons[i]};
        e.delta_gap = deltas[i];
        portfolio.experiments.push_back(e);
    }
    return surrogate_s_pipeline(portfolio, objective);
}

SurrogateResult surrogate_s_pipeline(const Portfolio& portfolio, const SurrogateObjective& objective) {
    constexpr const char* where = "robust_surrogate::surrogate_s_pipeline";
    validate_portfolio(portfolio);
    std::vector<double> s;
    std::vector<int> eps;
    std::vector<double> a;
    for (std::size_t i = 0; i < portfolio.experiments.size(); ++i) {
        const auto& e = portfolio.experiments[i];
        if (!e.pilot) throw_precondition(where, "experiment " + std::to_string(i) + ": pilot data required");
        s.push_back(e.pilot->s);
        eps.push_back(e.pilot->epsilon);
        a.push_back(difficulty_index(e.pilot->s, e.delta_gap));
    }
    SurrogateResult out;
    out.beta_star_proxy = equalized_type2(sum_of(a), portfolio.budget, portfolio.alpha);
    switch (objective.kind) {
        case ObjectiveKind::tol:
            out.plan = solve_r_tol(a, eps, objective.gamma, portfolio.budget, portfolio.alpha);
            break;
        case ObjectiveKind::conf:
            out.plan = solve_r_conf(a, eps, objective.delta, portfolio.budget, portfolio.alpha, out.beta_star_proxy);
            break;
        case ObjectiveKind::exp:
            out.plan = solve_r_exp(a, eps, portfolio.budget, portfolio.alpha);
            break;
    }
    out.allocation = allocation_with_corrections(out.plan.k, s, portfolio);
    return out;
}

}  // namespace powerplan::robust
