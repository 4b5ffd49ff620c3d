#include <cmath>
#include <limits>
#include <sstream>

#include "powerplan/error.hpp"
#include "powerplan/robust_surrogate.hpp"
#include "powerplan/special_fns.hpp"

namespace powerplan::robust {

namespace {

void check(int epsilon, double c, const char* where) {
    if (epsilon < 2) throw_domain(where, "pilot size must be >= 2");
    if (!(c >= 0.0 && c < 1.0)) throw_domain(where, "confidence level c must lie in [0, 1)");
}

double clamp_c(double c) { return c == 0.0 ? 0.0 : std::min(std::max(c, kCMin), kCMax); }

struct Quantiles {
    double upper;
    double lower;
};

Quantiles interval_quantiles(double nu, double c) {
    if (c == 0.0) {
        const double median = special::chi2_quantile(0.5, nu);
        return {median, median};
    }
    return {special::chi2_quantile(0.5 + 0.5 * c, nu), special::chi2_quantile(0.5 * (1.0 - c), nu)};
}

}  // namespace

ScalingPair scaling_factors(int epsilon, double c) {
    check(epsilon, c, "robust_surrogate::scaling_factors");
    const double nu = epsilon - 1.0;
    const auto q = interval_quantiles(nu, clamp_c(c));
    return {nu / q.upper, nu / q.lower};
}

double kappa(int epsilon, double c) {
    check(epsilon, c, "robust_surrogate::kappa");
    if (c == 0.0) return 1.0;
    const auto q = interval_quantiles(epsilon - 1.0, clamp_c(c));
    return q.upper / q.lower;
}

KappaJet kappa_jet(int epsilon, double c) {
    check(epsilon, c, "robust_surrogate::kappa_jet");
    const double nu = epsilon - 1.0;
    c = clamp_c(c);
    const auto q = interval_quantiles(nu, c);
    const double pu = special::chi2_pdf(q.upper, nu);
    const double pl = special::chi2_pdf(q.lower, nu);
    // Quantile derivatives in c: dQ/dp = 1 / pdf(Q), d2Q/dp2 = -slope(Q) (dQ/dp)^2.
    const double du = 0.5 / pu;
    const double dl = -0.5 / pl;
    const double ddu = -special::chi2_log_pdf_slope(q.upper, nu) * du * du;
    const double ddl = -special::chi2_log_pdf_slope(q.lower, nu) * dl * dl;
    const double ql = q.lower;
    KappaJet jet;
    jet.value = c == 0.0 ? 1.0 : q.upper / ql;
    jet.d1 = du / ql - q.upper * dl / (ql * ql);
    jet.d2 = ddu / ql - 2.0 * du * dl / (ql * ql) - q.upper * ddl / (ql * ql) +
             2.0 * q.upper * dl * dl / (ql * ql * ql);
    return jet;
}

KappaJet kappa_log_jet(int epsilon, double x) {
    const double c = std::exp(x);
    const auto jet = kappa_jet(epsilon, std::min(c, kCMax));
    return {jet.value, c * jet.d1, c * jet.d1 + c * c * jet.d2};
}

double kappa_inverse(int epsilon, double target) {
    constexpr const char* where = "robust_surrogate::kappa_inverse";
    if (epsilon < 2) throw_domain(where, "pilot size must be >= 2");
    if (!(target > 1.0) || !std::isfinite(target)) throw_domain(where, "target must exceed 1");
    const double cap = kappa(epsilon, kCMax);
    if (target > cap) {
        std::ostringstream msg;
        msg << "target " << target << " exceeds kappa at the largest admissible c (" << cap << ")";
        throw_domain(where, msg.str());
    }
    // kappa is increasing and convex in c, so Newton from the right of the root
    // is monotone; bisection guards the first steps.
    double lo = 0.0;
    double hi = kCMax;
    double c = 0.5;
    for (int iter = 0; iter < 200; ++iter) {
        const auto jet = kappa_jet(epsilon, std::max(c, kCMin));
        const double f = jet.value - target;
        if (std::abs(f) <= 1e-13 * target) return c;
        if (f > 0.0) hi = c; else lo = c;
        // near c = 1 kappa is steep enough that the residual test cannot be met
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return c;
        double next = c - f / jet.d1;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        c = next;
    }
    throw_numeric(where, "no convergence after 200 iterations");
}

}  // namespace powerplan::robust
