#include "powerplan/numerics.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numbers>

namespace powerplan::numerics {

namespace {

GaussLegendreRule build_rule(int n) {
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            dp = n * (z * p1 - p2) / (z * z - 1.0);
            double z_prev = z;
            z = z_prev - p1 / dp;
            if (std::abs(z - z_prev) < 1e-16) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = rule.weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return rule;
}

double apply_rule(const GaussLegendreRule& rule, const std::function<double(double)>& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return sum * half;
}

struct AdaptiveState {
    const std::function<double(double)>& f;
    const GaussLegendreRule& rule;
    double abs_tol_density;
    double rel_tol;
    int max_depth;
    QuadratureResult result;
};

double refine(AdaptiveState& st, double a, double b, double whole, int depth) {
    const double mid = 0.5 * (a + b);
    const double left = apply_rule(st.rule, st.f, a, mid);
    const double right = apply_rule(st.rule, st.f, mid, b);
    const double both = left + right;
    const double diff = std::abs(both - whole);
    const double tol = std::max(st.abs_tol_density * (b - a), st.rel_tol * std::abs(both));
    if (diff <= tol || !(diff == diff)) {
        st.result.error_estimate += diff;
        st.result.panels += 2;
        return both;
    }
    if (depth >= st.max_depth) {
        st.result.converged = false;
        st.result.error_estimate += diff;
        st.result.panels += 2;
        return both;
    }
    return refine(st, a, mid, left, depth + 1) + refine(st, mid, b, right, depth + 1);
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int points) {
    static std::mutex mutex;
    static std::map<int, GaussLegendreRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(points);
    if (it == cache.end()) it = cache.emplace(points, build_rule(points)).first;
    return it->second;
}

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, std::span<const double> breakpoints,
                                    double abs_tol, double rel_tol, int max_depth) {
    std::vector<double> cuts(breakpoints.begin(), breakpoints.end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    AdaptiveState st{f, gauss_legendre(16), 0.0, rel_tol, max_depth, {}};
    if (cuts.size() < 2) return st.result;
    st.abs_tol_density = abs_tol / (cuts.back() - cuts.front());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double whole = apply_rule(st.rule, f, cuts[i], cuts[i + 1]);
        total += refine(st, cuts[i], cuts[i + 1], whole, 0);
    }
    st.result.value = total;
    return st.result;
}

Minimum golden_section(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double inv_phi = std::numbers::phi - 1.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = f(c);
    double fd = f(d);
    int evals = 2;
    while (hi - lo > tol) {
        if (fc <= fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
        ++evals;
    }
    Minimum best = fc <= fd ? Minimum{c, fc, evals} : Minimum{d, fd, evals};
    return best;
}

Minimum scan_then_golden(const std::function<double(double)>& f, double lo, double hi, int points, double tol) {
    std::vector<double> xs(points);
    std::vector<double> ys(points);
    const double step = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i) {
        xs[i] = i + 1 == points ? hi : lo + step * i;
        ys[i] = f(xs[i]);
    }
    const auto best = static_cast<int>(std::min_element(ys.begin(), ys.end()) - ys.begin());
    const double a = xs[std::max(best - 1, 0)];
    const double b = xs[std::min(best + 1, points - 1)];
    Minimum refined = golden_section(f, a, b, tol);
    refined.evaluations += points;
    if (ys[best] < refined.value) return {xs[best], ys[best], refined.evaluations};
    return refined;
}

}  // namespace powerplan::numerics
