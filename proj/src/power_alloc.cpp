#include "powerplan/power_alloc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "powerplan/error.hpp"
#include "powerplan/special_fns.hpp"

namespace powerplan {

namespace {

std::string index_label(std::size_t i) { return "experiment " + std::to_string(i); }

void require_positive(double v, const char* where, const std::string& what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw_domain(where, what + " must be positive and finite");
}

void require_alpha(double alpha, const char* where) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw_domain(where, "alpha must lie in (0, 1)");
}

double critical_value(double alpha) { return special::std_normal_quantile(1.0 - alpha); }

AllocationResult evaluate(std::vector<double> n, std::span<const double> sigma, const Portfolio& portfolio) {
    AllocationResult out;
    out.beta.resize(n.size());
    const double q = critical_value(portfolio.alpha);
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double nc = portfolio.experiments[i].delta_gap * std::sqrt(n[i]) / sigma[i];
        out.beta[i] = type2_from_noncentrality(q, nc);
    }
    out.max_beta = *std::max_element(out.beta.begin(), out.beta.end());
    out.n = std::move(n);
    return out;
}

std::vector<double> plug_in_weights(std::span<const double> k, std::span<const double> s, const Portfolio& portfolio,
                                    const char* where) {
    const std::size_t m = portfolio.experiments.size();
    if (k.size() != m || s.size() != m) {
        throw_precondition(where, "expected " + std::to_string(m) + " correction factors and pilot deviations, got " +
                                      std::to_string(k.size()) + " and " + std::to_string(s.size()));
    }
    std::vector<double> w(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(k[i] >= 1.0) || !std::isfinite(k[i])) {
            throw_precondition(where, index_label(i) + ": correction factor must be >= 1");
        }
        require_positive(s[i], where, index_label(i) + ": pilot deviation");
        w[i] = k[i] * difficulty_index(s[i], portfolio.experiments[i].delta_gap);
    }
    return w;
}

}  // namespace

void validate_portfolio(const Portfolio& portfolio) {
    constexpr const char* where = "power_alloc::validate_portfolio";
    if (portfolio.experiments.empty()) throw_precondition(where, "portfolio has no experiments");
    require_positive(portfolio.budget, where, "budget N");
    require_alpha(portfolio.alpha, where);
    for (std::size_t i = 0; i < portfolio.experiments.size(); ++i) {
        const auto& e = portfolio.experiments[i];
        require_positive(e.delta_gap, where, index_label(i) + ": minimum detectable gap");
        if (!e.sigma && !e.pilot) throw_precondition(where, index_label(i) + ": needs sigma or pilot data");
        if (e.sigma) require_positive(*e.sigma, where, index_label(i) + ": sigma");
        if (e.pilot) {
            require_positive(e.pilot->s, where, index_label(i) + ": pilot deviation");
            if (e.pilot->epsilon < 2) throw_domain(where, index_label(i) + ": pilot size must be >= 2");
        }
    }
}

double type2_error(double sigma, double n, double delta_gap, double alpha) {
    constexpr const char* where = "power_alloc::type2_error";
    require_positive(sigma, where, "sigma");
    require_positive(delta_gap, where, "minimum detectable gap");
    if (!(n >= 0.0) || std::isnan(n)) throw_domain(where, "sample size must be nonnegative");
    require_alpha(alpha, where);
    if (std::isinf(n)) return 0.0;
    return type2_from_noncentrality(critical_value(alpha), delta_gap * std::sqrt(n) / sigma);
}

double type2_from_noncentrality(double critical_value, double noncentrality) {
    return special::std_normal_cdf(critical_value - noncentrality);
}

double difficulty_index(double sigma, double delta_gap) {
    const double ratio = sigma / delta_gap;
    return ratio * ratio;
}

std::vector<double> proportional_allocation(std::span<const double> weights, double budget) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<double> n(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) n[i] = budget * (weights[i] / total);
    return n;
}

double equalized_type2(double difficulty_sum, double budget, double alpha) {
    return special::std_normal_cdf(critical_value(alpha) - std::sqrt(budget / difficulty_sum));
}

std::vector<double> known_sigmas(const Portfolio& portfolio, const char* where) {
    std::vector<double> sigma(portfolio.experiments.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        const auto& e = portfolio.experiments[i];
        if (!e.sigma) throw_precondition(where, index_label(i) + ": known sigma required");
        sigma[i] = *e.sigma;
    }
    return sigma;
}

AllocationResult power_optimal_allocation(const Portfolio& portfolio) {
    constexpr const char* where = "power_alloc::power_optimal_allocation";
    validate_portfolio(portfolio);
    const auto sigma = known_sigmas(portfolio, where);
    std::vector<double> a(sigma.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = difficulty_index(sigma[i], portfolio.experiments[i].delta_gap);
    return evaluate(proportional_allocation(a, portfolio.budget), sigma, portfolio);
}

double optimal_max_type2(const Portfolio& portfolio) {
    constexpr const char* where = "power_alloc::optimal_max_type2";
    validate_portfolio(portfolio);
    const auto sigma = known_sigmas(portfolio, where);
    double total = 0.0;
    for (std::size_t i = 0; i < sigma.size(); ++i) total += difficulty_index(sigma[i], portfolio.experiments[i].delta_gap);
    return equalized_type2(total, portfolio.budget, portfolio.alpha);
}

AllocationResult mse_optimal_allocation(const Portfolio& portfolio) {
    constexpr const char* where = "power_alloc::mse_optimal_allocation";
    validate_portfolio(portfolio);
    const auto sigma = known_sigmas(portfolio, where);
    std::vector<double> variance(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) variance[i] = sigma[i] * sigma[i];
    return evaluate(proportional_allocation(variance, portfolio.budget), sigma, portfolio);
}

AllocationResult allocation_with_corrections(std::span<const double> k, std::span<const double> s,
                                             const Portfolio& portfolio) {
    constexpr const char* where = "power_alloc::allocation_with_corrections";
    validate_portfolio(portfolio);
    const auto w = plug_in_weights(k, s, portfolio, where);
    std::vector<double> inflated(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) inflated[i] = std::sqrt(k[i]) * s[i];
    return evaluate(proportional_allocation(w, portfolio.budget), inflated, portfolio);
}

double realized_max_type2(std::span<const double> k, std::span<const double> s, std::span<const double> true_sigma,
                          const Portfolio& portfolio) {
    constexpr const char* where = "power_alloc::realized_max_type2";
    validate_portfolio(portfolio);
    const auto w = plug_in_weights(k, s, portfolio, where);
    if (true_sigma.size() != w.size()) throw_precondition(where, "true sigma vector has the wrong length");
    for (std::size_t i = 0; i < true_sigma.size(); ++i) require_positive(true_sigma[i], where, index_label(i) + ": sigma");
    return evaluate(proportional_allocation(w, portfolio.budget), true_sigma, portfolio).max_beta;
}

std::vector<std::int64_t> round_largest_remainder(std::span<const double> n, double budget) {
    const auto target = static_cast<std::int64_t>(std::floor(budget + 1e-9));
    std::vector<std::int64_t> out(n.size());
    std::vector<std::pair<double, std::size_t>> remainders(n.size());
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double base = std::floor(n[i]);
        out[i] = static_cast<std::int64_t>(base);
        assigned += out[i];
        remainders[i] = {n[i] - base, i};
    }
    // Larger remainders first; ties go to the lower index.
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& l, const auto& r) { return l.first > r.first; });
    for (std::size_t j = 0; assigned < target && j < remainders.size(); ++j, ++assigned) {
        ++out[remainders[j].second];
    }
    return out;
}

}  // namespace powerplan
