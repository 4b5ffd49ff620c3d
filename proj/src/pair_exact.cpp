#include "powerplan/pair_exact.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "powerplan/error.hpp"
#include "powerplan/numerics.hpp"
#include "powerplan/power_alloc.hpp"
#include "powerplan/random.hpp"
#include "powerplan/special_fns.hpp"

namespace powerplan::pair {

namespace {

constexpr double kAbsTol = 1e-13;
constexpr double kRelTol = 1e-12;

double critical_value(double alpha) { return special::std_normal_quantile(1.0 - alpha); }

double m1_of(double d, double a1, double a2) { return a2 / (d - a1); }
double m2_of(double d, double a1, double a2) { return (d - a2) / a1; }

void require_open_unit(double p, const char* where, const char* name) {
    if (!(p > 0.0 && p < 1.0)) throw_domain(where, std::string(name) + " must lie in (0, 1)");
}

std::vector<double> panel_cuts(double half_width, double kink) {
    std::vector<double> cuts;
    constexpr int panels = 8;
    for (int i = 0; i <= panels; ++i) cuts.push_back(-half_width + 2.0 * half_width * i / panels);
    if (kink > -half_width && kink < half_width) cuts.push_back(kink);
    return cuts;
}

McEstimate summarize(double sum, double sum_sq, std::size_t draws) {
    const double n = static_cast<double>(draws);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    return {mean, std::sqrt(var / n)};
}

}  // namespace

void validate(const PairInstance& instance) {
    constexpr const char* where = "pair_exact::validate";
    if (!(instance.a1 > 0.0) || !std::isfinite(instance.a1)) throw_domain(where, "a1 must be positive and finite");
    if (!(instance.a2 > 0.0) || !std::isfinite(instance.a2)) throw_domain(where, "a2 must be positive and finite");
    if (instance.epsilon < 2) throw_domain(where, "pilot size must be >= 2");
    if (!(instance.budget > 0.0) || !std::isfinite(instance.budget)) throw_domain(where, "budget N must be positive");
    require_open_unit(instance.alpha, where, "alpha");
}

double beta_star(const PairInstance& instance) {
    validate(instance);
    return equalized_type2(instance.a1 + instance.a2, instance.budget, instance.alpha);
}

double critical_threshold(double delta, double beta_star, double budget, double alpha) {
    constexpr const char* where = "pair_exact::critical_threshold";
    require_open_unit(alpha, where, "alpha");
    require_open_unit(beta_star, where, "beta*");
    if (!(budget > 0.0)) throw_domain(where, "budget N must be positive");
    const double upper = 1.0 - alpha - beta_star;
    if (!(delta > 0.0 && delta < upper)) {
        std::ostringstream msg;
        msg << "delta = " << delta << " outside (0, " << upper << ")";
        throw_domain(where, msg.str());
    }
    const double gap = critical_value(alpha) - special::std_normal_quantile(beta_star + delta);
    return budget / (gap * gap);
}

double coverage_H(double r, double d, const PairInstance& instance) {
    validate(instance);
    if (!(r > 0.0)) throw_domain("pair_exact::coverage_H", "inflation ratio r must be positive");
    const double a1 = instance.a1;
    const double a2 = instance.a2;
    if (!(d > a1 + a2)) return 0.0;
    const double nu = instance.nu();
    const double upper = (d - a2) / (r * a1);
    const double lower = a2 / (r * (d - a1));
    // Difference of tails on whichever side keeps precision.
    if (lower >= 1.0) return special::f_sf(lower, nu) - special::f_sf(upper, nu);
    return special::f_cdf(upper, nu) - special::f_cdf(lower, nu);
}

double maximizer_r(double d, double a1, double a2) {
    if (!(d > a1 + a2)) throw_domain("pair_exact::maximizer_r", "d must exceed a1 + a2");
    return std::sqrt(m1_of(d, a1, a2) * m2_of(d, a1, a2));
}

PairOptimum tol_optimum(double gamma, const PairInstance& instance) {
    constexpr const char* where = "pair_exact::tol_optimum";
    validate(instance);
    require_open_unit(gamma, where, "gamma");
    const double a1 = instance.a1;
    const double a2 = instance.a2;
    const double f = special::f_quantile(0.5 * (1.0 + gamma), instance.nu());
    const double d = 0.5 * (a1 + a2 + std::sqrt((a1 - a2) * (a1 - a2) + 4.0 * a1 * a2 * f * f));
    const double q = critical_value(instance.alpha);
    PairOptimum out;
    out.r_star = maximizer_r(d, a1, a2);
    out.d_star = d;
    out.objective = special::std_normal_cdf(q - std::sqrt(instance.budget / d)) - beta_star(instance);
    return out;
}

PairOptimum conf_optimum(double delta, const PairInstance& instance, double beta_star) {
    validate(instance);
    const double d = critical_threshold(delta, beta_star, instance.budget, instance.alpha);
    if (!(d > instance.a1 + instance.a2)) {
        throw_domain("pair_exact::conf_optimum", "critical threshold d(delta) does not exceed a1 + a2");
    }
    PairOptimum out;
    out.r_star = maximizer_r(d, instance.a1, instance.a2);
    out.objective = coverage_H(out.r_star, d, instance);
    return out;
}

double max_u(double y, double a1, double a2) { return std::max(a1 + a2 * std::exp(-y), a2 + a1 * std::exp(y)); }

double w_density(double w, double nu) {
    const double a = 0.5 * nu;
    // t = e^w / (1 + e^w) and 1 - t, both without overflow.
    const double t = w >= 0.0 ? 1.0 / (1.0 + std::exp(-w)) : std::exp(w) / (1.0 + std::exp(w));
    const double y = w >= 0.0 ? std::exp(-w) / (1.0 + std::exp(-w)) : 1.0 / (1.0 + std::exp(w));
    if (t <= 0.0 || y <= 0.0) return 0.0;
    return std::exp(special::log_beta_kernel(a, a, t, y));
}

double w_half_width(double nu) { return std::max(40.0 / std::sqrt(nu), 80.0 / nu); }

double w_normalization(double nu) {
    const double half = w_half_width(nu);
    const auto cuts = panel_cuts(half, 0.0);
    const auto res =
        numerics::integrate_adaptive([nu](double w) { return w_density(w, nu); }, cuts, kAbsTol, kRelTol);
    return res.value;
}

double exp_objective(double s, const PairInstance& instance) {
    constexpr const char* where = "pair_exact::exp_objective";
    validate(instance);
    const double nu = instance.nu();
    const double q = critical_value(instance.alpha);
    const double a1 = instance.a1;
    const double a2 = instance.a2;
    const double budget = instance.budget;
    const double half = w_half_width(nu);
    const auto cuts = panel_cuts(half, std::log(a2 / a1) - s);
    const auto integrand = [&](double w) {
        const double density = w_density(w, nu);
        if (density == 0.0) return 0.0;
        return density * special::std_normal_cdf(q - std::sqrt(budget / max_u(w + s, a1, a2)));
    };
    const auto res = numerics::integrate_adaptive(integrand, cuts, kAbsTol, kRelTol);
    if (!res.converged) {
        std::ostringstream msg;
        msg << "quadrature did not converge (nu = " << nu << ", s = " << s << ", panels = " << res.panels
            << ", error estimate = " << res.error_estimate << ")";
        throw_numeric(where, msg.str());
    }
    thread_local double cached_nu = -1.0;
    thread_local double norm = 0.0;
    if (nu != cached_nu) {
        norm = w_normalization(nu);
        cached_nu = nu;
    }
    if (std::abs(norm - 1.0) > 1e-10) {
        std::ostringstream msg;
        msg << "W density integrates to " << norm << " for nu = " << nu;
        throw_numeric(where, msg.str());
    }
    return res.value;
}

PairOptimum exp_optimum(const PairInstance& instance) {
    validate(instance);
    const auto best = numerics::scan_then_golden([&](double s) { return exp_objective(s, instance); }, -10.0, 10.0,
                                                 41, 1e-6);
    PairOptimum out;
    out.r_star = std::exp(best.x);
    out.objective = best.value;
    return out;
}

McEstimate mc_coverage(double r, double d, const PairInstance& instance, std::size_t draws, std::uint64_t seed) {
    validate(instance);
    random::Stream stream(random::stream_key(seed, 0, 0, 1));
    const double nu = instance.nu();
    double hits = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const double x = stream.chi_squared(nu) / stream.chi_squared(nu);
        const double u = max_u(std::log(r * x), instance.a1, instance.a2);
        if (u <= d) hits += 1.0;
    }
    return summarize(hits, hits, draws);
}

McEstimate mc_expected_max_type2(double r, const PairInstance& instance, std::size_t draws, std::uint64_t seed) {
    validate(instance);
    random::Stream stream(random::stream_key(seed, 0, 0, 2));
    const double nu = instance.nu();
    const double q = critical_value(instance.alpha);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const double x = stream.chi_squared(nu) / stream.chi_squared(nu);
        const double u = max_u(std::log(r * x), instance.a1, instance.a2);
        const double b = special::std_normal_cdf(q - std::sqrt(instance.budget / u));
        sum += b;
        sum_sq += b * b;
    }
    return summarize(sum, sum_sq, draws);
}

}  // namespace powerplan::pair
