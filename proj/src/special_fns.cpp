#include "powerplan/special_fns.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "powerplan/error.hpp"

namespace powerplan::special {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTiny = 1e-300;
constexpr double kCfEps = 1e-16;
constexpr int kMaxSeries = 1000000;

// Quantile arguments are clamped here before inversion.
constexpr double kProbFloor = 1e-300;
constexpr double kProbCeil = 1.0 - 1e-16;

void require_finite(double v, const char* where, const char* name) {
    if (!std::isfinite(v)) throw_domain(where, std::string(name) + " must be finite");
}

void require_dof(double nu, const char* where) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw_domain(where, "degrees of freedom must be positive");
}

void require_open_probability(double p, const char* where) {
    if (!(p > 0.0 && p < 1.0)) throw_domain(where, "probability must lie in (0, 1), got " + std::to_string(p));
}

double clamp_probability(double p) {
    if (p < kProbFloor) return kProbFloor;
    if (p > kProbCeil) return kProbCeil;
    return p;
}

// log(1 + u) - u without cancellation for small |u|.
double log1pmx(double u) {
    if (std::abs(u) < 0.25) {
        double term = u;
        double sum = 0.0;
        for (int k = 2; k < 200; ++k) {
            term *= -u;
            double add = term / k;
            sum += add;
            if (std::abs(add) <= 1e-17 * std::abs(sum)) break;
        }
        return sum;
    }
    return std::log1p(u) - u;
}

// lgamma(a) minus its Stirling approximation.
double stirling_error(double a) {
    if (a >= 15.0) {
        double inv = 1.0 / a;
        double inv2 = inv * inv;
        return inv * (1.0 / 12.0 -
                      inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    }
    return std::lgamma(a) - (a - 0.5) * std::log(a) + a - 0.5 * std::log(2.0 * std::numbers::pi);
}

double gamma_p_series(double a, double x, double log_kernel) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxSeries; ++n) {
        term *= x / (a + n);
        sum += term;
        if (term < sum * 1e-17) return std::exp(log_kernel) * sum;
    }
    throw_numeric("special_fns::gamma_p", "series failed to converge");
}

double gamma_q_fraction(double a, double x, double log_kernel) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxSeries; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kCfEps) return std::exp(log_kernel) * h;
    }
    throw_numeric("special_fns::gamma_q", "continued fraction failed to converge");
}

// Continued fraction for I_x(a, b); converges fast for x < (a + 1) / (a + b + 2).
double beta_fraction(double a, double b, double x) {
    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < kMaxSeries; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kCfEps) return h;
    }
    throw_numeric("special_fns::beta_inc", "continued fraction failed to converge");
}

// Safeguarded Newton iteration on the log of the relevant tail probability,
// falling back to bisection whenever a step leaves the current bracket.
template <class Cdf, class Sf, class Pdf>
double invert_cdf(double p, Cdf cdf, Sf sf, Pdf pdf, double x, double lo, double hi, bool positive_support,
                  const char* where) {
    const bool lower = p <= 0.5;
    const double target = lower ? p : 1.0 - p;
    const double log_target = std::log(target);

    auto bisect = [&](double cur) {
        if (std::isinf(hi)) return cur > 0.0 ? 2.0 * cur + 1.0 : 1.0;
        if (positive_support && lo > 0.0) return std::sqrt(lo * hi);
        if (positive_support) return 0.5 * hi;
        return 0.5 * (lo + hi);
    };

    if (!(x > lo && x < hi)) x = bisect(x);
    for (int iter = 0; iter < 200; ++iter) {
        double tail = lower ? cdf(x) : sf(x);
        bool too_small = lower ? (tail < target) : (tail > target);
        if (too_small) {
            lo = x;
        } else {
            hi = x;
        }
        double next;
        if (tail <= 0.0) {
            next = bisect(x);
        } else {
            double f = std::log(tail) - log_target;
            if (std::abs(f) <= 1e-14) return x;
            double density = pdf(x);
            double slope = (lower ? density : -density) / tail;
            next = x - f / slope;
            if (!std::isfinite(next) || !(next > lo && next < hi)) next = bisect(x);
        }
        if (std::abs(next - x) <= 1e-15 * std::abs(x) || (std::isfinite(hi) && hi - lo <= 1e-15 * std::abs(hi))) {
            return next;
        }
        x = next;
    }
    throw_numeric(where, "quantile inversion did not converge for p = " + std::to_string(p));
}

}  // namespace

// ---------------------------------------------------------------------------
// Standard normal
// ---------------------------------------------------------------------------

double std_normal_pdf(double z) {
    require_finite(z, "special_fns::std_normal_pdf", "z");
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double z) {
    require_finite(z, "special_fns::std_normal_cdf", "z");
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double std_normal_sf(double z) {
    require_finite(z, "special_fns::std_normal_sf", "z");
    return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

double std_normal_quantile(double p) {
    constexpr const char* where = "special_fns::std_normal_quantile";
    require_open_probability(p, where);
    if (p == 0.5) return 0.0;
    p = clamp_probability(p);

    // Abramowitz & Stegun 26.2.23 as the starting point.
    double tail = p < 0.5 ? p : 1.0 - p;
    double t = std::sqrt(-2.0 * std::log(tail));
    double guess = t - (2.515517 + 0.802853 * t + 0.010328 * t * t) /
                           (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t);
    if (p < 0.5) guess = -guess;

    return invert_cdf(
        p, [](double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); },
        [](double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); },
        [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }, guess, -40.0, 40.0,
        false, where);
}

// ---------------------------------------------------------------------------
// Incomplete gamma / beta
// ---------------------------------------------------------------------------

double log_gamma_kernel(double a, double x) {
    if (x == 0.0) return -kInf;
    // a log(x / a) - (x - a), expanded around x = a where the two cancel.
    double u = (x - a) / a;
    double centred = std::abs(u) < 0.25 ? a * log1pmx(u) : a * std::log(x / a) - (x - a);
    return centred + 0.5 * std::log(a / (2.0 * std::numbers::pi)) - stirling_error(a);
}

double log_beta_kernel(double a, double b, double x, double y) {
    if (x == 0.0 || y == 0.0) return -kInf;
    double s = a + b;
    double x0 = a / s;
    double y0 = b / s;
    double u = (x - x0) / x0;
    double v = (y - y0) / y0;
    double value = (std::abs(u) < 0.5 ? a * std::log1p(u) : a * std::log(x / x0)) +
                   (std::abs(v) < 0.5 ? b * std::log1p(v) : b * std::log(y / y0));
    return value + 0.5 * std::log(a * b / (2.0 * std::numbers::pi * s)) - stirling_error(a) - stirling_error(b) +
           stirling_error(s);
}

double gamma_p(double a, double x) {
    constexpr const char* where = "special_fns::gamma_p";
    if (!(a > 0.0) || !std::isfinite(a)) throw_domain(where, "shape must be positive");
    if (std::isnan(x) || x < 0.0) throw_domain(where, "x must be nonnegative");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    double lk = log_gamma_kernel(a, x);
    if (x < a + 1.0) return gamma_p_series(a, x, lk);
    return 1.0 - gamma_q_fraction(a, x, lk);
}

double gamma_q(double a, double x) {
    constexpr const char* where = "special_fns::gamma_q";
    if (!(a > 0.0) || !std::isfinite(a)) throw_domain(where, "shape must be positive");
    if (std::isnan(x) || x < 0.0) throw_domain(where, "x must be nonnegative");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    double lk = log_gamma_kernel(a, x);
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x, lk);
    return gamma_q_fraction(a, x, lk);
}

double beta_inc(double a, double b, double x, double y) {
    constexpr const char* where = "special_fns::beta_inc";
    if (!(a > 0.0) || !(b > 0.0)) throw_domain(where, "shape parameters must be positive");
    if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0)) throw_domain(where, "x must lie in [0, 1]");
    if (x == 0.0) return 0.0;
    if (y == 0.0) return 1.0;
    if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_beta_kernel(a, b, x, y)) * beta_fraction(a, b, x) / a;
    return 1.0 - std::exp(log_beta_kernel(b, a, y, x)) * beta_fraction(b, a, y) / b;
}

// ---------------------------------------------------------------------------
// Chi-squared
// ---------------------------------------------------------------------------

double chi2_pdf(double x, double nu) {
    constexpr const char* where = "special_fns::chi2_pdf";
    require_dof(nu, where);
    if (std::isnan(x) || x < 0.0) throw_domain(where, "x must be nonnegative");
    if (std::isinf(x)) return 0.0;
    if (x == 0.0) {
        if (nu < 2.0) return kInf;
        return nu == 2.0 ? 0.5 : 0.0;
    }
    return std::exp(log_gamma_kernel(0.5 * nu, 0.5 * x)) / x;
}

double chi2_log_pdf_slope(double x, double nu) {
    return (0.5 * nu - 1.0) / x - 0.5;
}

double chi2_cdf(double x, double nu) {
    constexpr const char* where = "special_fns::chi2_cdf";
    require_dof(nu, where);
    if (std::isnan(x) || x < 0.0) throw_domain(where, "x must be nonnegative");
    return gamma_p(0.5 * nu, 0.5 * x);
}

double chi2_sf(double x, double nu) {
    constexpr const char* where = "special_fns::chi2_sf";
    require_dof(nu, where);
    if (std::isnan(x) || x < 0.0) throw_domain(where, "x must be nonnegative");
    return gamma_q(0.5 * nu, 0.5 * x);
}

double chi2_quantile(double p, double nu) {
    constexpr const char* where = "special_fns::chi2_quantile";
    require_dof(nu, where);
    require_open_probability(p, where);
    p = clamp_probability(p);

    // Wilson-Hilferty, or the small-x expansion of P when that lands lower.
    double z = std_normal_quantile(p);
    double h = 2.0 / (9.0 * nu);
    double wh = nu * std::pow(1.0 - h + z * std::sqrt(h), 3.0);
    double a = 0.5 * nu;
    double small = 2.0 * std::exp((std::log(p) + std::lgamma(a + 1.0)) / a);
    double guess = (wh > 0.0 && (p > 0.1 || wh < small)) ? wh : small;

    const double half = 0.5 * nu;
    return invert_cdf(
        p, [half](double x) { return gamma_p(half, 0.5 * x); }, [half](double x) { return gamma_q(half, 0.5 * x); },
        [half](double x) { return x > 0.0 ? std::exp(log_gamma_kernel(half, 0.5 * x)) / x : 0.0; }, guess, 0.0,
        kInf, true, where);
}

// ---------------------------------------------------------------------------
// F(nu, nu)
// ---------------------------------------------------------------------------

double f_pdf(double x, double nu) {
    constexpr const char* where = "special_fns::f_pdf";
    require_dof(nu, where);
    if (std::isnan(x) || x < 0.0) throw_domain(where, "x must be nonnegative");
    if (std::isinf(x)) return 0.0;
    if (x == 0.0) {
        if (nu < 2.0) return kInf;
        return nu == 2.0 ? 1.0 : 0.0;
    }
    double a = 0.5 * nu;
    return std::exp(log_beta_kernel(a, a, x / (1.0 + x), 1.0 / (1.0 + x))) / x;
}

double f_cdf(double x, double nu) {
    constexpr const char* where = "special_fns::f_cdf";
    require_dof(nu, where);
    if (std::isnan(x) || x < 0.0) throw_domain(where, "x must be nonnegative");
    if (std::isinf(x)) return 1.0;
    double a = 0.5 * nu;
    return beta_inc(a, a, x / (1.0 + x), 1.0 / (1.0 + x));
}

double f_sf(double x, double nu) {
    constexpr const char* where = "special_fns::f_sf";
    require_dof(nu, where);
    if (std::isnan(x) || x < 0.0) throw_domain(where, "x must be nonnegative");
    if (std::isinf(x)) return 0.0;
    double a = 0.5 * nu;
    return beta_inc(a, a, 1.0 / (1.0 + x), x / (1.0 + x));
}

double f_quantile(double p, double nu) {
    constexpr const char* where = "special_fns::f_quantile";
    require_dof(nu, where);
    require_open_probability(p, where);
    if (p == 0.5) return 1.0;
    // F(nu, nu) is closed under inversion, so the upper half mirrors the lower.
    if (p > 0.5) return 1.0 / f_quantile(1.0 - p, nu);
    p = clamp_probability(p);

    // log F(nu, nu) is roughly normal with variance 4 / nu.
    double guess = std::exp(2.0 * std_normal_quantile(p) / std::sqrt(nu));
    return invert_cdf(
        p, [nu](double x) { return f_cdf(x, nu); }, [nu](double x) { return f_sf(x, nu); },
        [nu](double x) { return f_pdf(x, nu); }, guess, 0.0, 1.0, true, where);
}

}  // namespace powerplan::special
