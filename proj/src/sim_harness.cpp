#include "powerplan/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "powerplan/error.hpp"
#include "powerplan/pair_exact.hpp"
#include "powerplan/special_fns.hpp"

namespace powerplan::sim {

namespace {

constexpr std::uint64_t kSigmaStream = 0;
constexpr std::uint64_t kDeltaStream = 1;
constexpr std::uint64_t kPilotStream = 2;

const char* policy_color(Policy p) {
    switch (p) {
        case Policy::naive: return "#1f77b4";
        case Policy::oracle_surrogate: return "#ff7f0e";
        case Policy::surrogate_s: return "#2ca02c";
    }
    return "#000000";
}

std::string range_text(const Range& r) { return "[" + report::format_number(r.lo) + "," + report::format_number(r.hi) + "]"; }

void check_common(const StudyConfig& config, const char* where) {
    if (config.replicates < 1) throw_precondition(where, "replicates must be >= 1");
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw_domain(where, "alpha must lie in (0, 1)");
    if (!config.portfolio) {
        if (config.experiments < 1) throw_precondition(where, "experiments must be >= 1");
        if (!(config.sigma.lo > 0.0 && config.sigma.hi >= config.sigma.lo)) {
            throw_precondition(where, "sigma range must have a positive lower bound");
        }
        if (!(config.delta.lo > 0.0 && config.delta.hi >= config.delta.lo)) {
            throw_precondition(where, "delta range must have a positive lower bound");
        }
    }
}

// Sigma and gap for one replicate, either from the fixed portfolio or drawn.
void draw_instance(const StudyConfig& config, std::size_t replicate, std::vector<double>& sigma,
                   std::vector<double>& delta, const char* where) {
    if (config.portfolio) {
        sigma = known_sigmas(*config.portfolio, where);
        delta.clear();
        for (const auto& e : config.portfolio->experiments) delta.push_back(e.delta_gap);
        return;
    }
    const auto m = static_cast<std::size_t>(config.experiments);
    sigma.resize(m);
    delta.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        random::Stream s(random::stream_key(config.seed, replicate, i, kSigmaStream));
        sigma[i] = s.uniform(config.sigma.lo, config.sigma.hi);
        random::Stream d(random::stream_key(config.seed, replicate, i, kDeltaStream));
        delta[i] = d.uniform(config.delta.lo, config.delta.hi);
    }
}

std::vector<int> pilot_sizes(const StudyConfig& config, std::size_t m) {
    std::vector<int> eps(m, config.epsilon);
    if (config.portfolio) {
        for (std::size_t i = 0; i < m; ++i) {
            if (const auto& p = config.portfolio->experiments[i].pilot) eps[i] = p->epsilon;
        }
    }
    return eps;
}

Portfolio make_portfolio(const std::vector<double>& sigma, const std::vector<double>& delta,
                         const std::vector<double>& s, const std::vector<int>& eps, double budget, double alpha) {
    Portfolio p;
    p.budget = budget;
    p.alpha = alpha;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        ExperimentSpec e;
        e.sigma = sigma[i];
        if (!s.empty()) e.pilot = PilotEstimate{s[i], eps[i]};
        e.delta_gap = delta[i];
        p.experiments.push_back(e);
    }
    return p;
}

// CONF with delta >= 1 - alpha - beta* constrains nothing: every allocation
// stays within delta. Such replicates keep k = 1.
bool conf_vacuous(const robust::SurrogateObjective& objective, double beta_star, double alpha) {
    return objective.kind == robust::ObjectiveKind::conf && !(objective.delta < 1.0 - alpha - beta_star);
}

std::optional<robust::CorrectionPlan> oracle_plan(const std::vector<double>& a, const std::vector<int>& eps,
                                                  double budget, double alpha,
                                                  const robust::SurrogateObjective& objective) {
    const double bstar = equalized_type2(std::accumulate(a.begin(), a.end(), 0.0), budget, alpha);
    switch (objective.kind) {
        case robust::ObjectiveKind::tol: return robust::solve_r_tol(a, eps, objective.gamma, budget, alpha);
        case robust::ObjectiveKind::conf:
            if (conf_vacuous(objective, bstar, alpha)) return std::nullopt;
            return robust::solve_r_conf(a, eps, objective.delta, budget, alpha, bstar);
        case robust::ObjectiveKind::exp: return robust::solve_r_exp(a, eps, budget, alpha);
    }
    return std::nullopt;
}

void echo_config(report::Table& t, const StudyConfig& config) {
    t.set("study", config.name);
    t.set("replicates", std::to_string(config.replicates));
    t.set("seed", std::to_string(config.seed));
    t.set("alpha", config.alpha);
    if (config.portfolio) {
        t.set("portfolio", "fixed");
        t.set("experiments", std::to_string(config.portfolio->experiments.size()));
    } else {
        t.set("experiments", std::to_string(config.experiments));
        t.set("sigma_range", range_text(config.sigma));
        t.set("delta_range", range_text(config.delta));
    }
}

}  // namespace

const char* to_string(Policy policy) {
    switch (policy) {
        case Policy::naive: return "naive";
        case Policy::oracle_surrogate: return "oracle_surrogate";
        case Policy::surrogate_s: return "surrogate_s";
    }
    return "unknown";
}

std::optional<Policy> policy_from_string(const std::string& name) {
    for (Policy p : {Policy::naive, Policy::oracle_surrogate, Policy::surrogate_s}) {
        if (name == to_string(p)) return p;
    }
    return std::nullopt;
}

StudyConfig preset(const std::string& name, bool fast) {
    StudyConfig c;
    c.name = name;
    c.replicates = fast ? 200 : 1000;
    if (name == "fig1") {
        c.experiments = 50;
        c.sigma = {0.5, 2.0};
        c.delta = {0.01, 1.0};
        c.grid = {1e3, 2e3, 5e3, 1e4, 2e4, 5e4, 8e4, 1e5, 2e5, 5e5, 1e6, 2e6, 5e6, 1e7};
    } else if (name == "fig2" || name == "fig3") {
        c.epsilon = 20;
        c.budget = 200.0;
        for (int i = 0; i <= 16; ++i) c.grid.push_back(std::pow(10.0, -1.0 + i / 8.0));
        c.grid[8] = 1.0;
        c.gamma_grid = {0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
        c.delta_grid = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
        c.epsilon_set = {20, 50, 100, 500};
    } else if (name == "fig4") {
        c.objective = {robust::ObjectiveKind::tol, 0.7, 0.2};
    } else if (name == "fig5") {
        c.objective = {robust::ObjectiveKind::conf, 0.7, 0.2};
    } else if (name == "fig6") {
        c.objective = {robust::ObjectiveKind::exp, 0.7, 0.2};
    } else if (name != "custom") {
        throw_precondition("sim_harness::preset", "unknown study " + name);
    }
    return c;
}

double sample_pilot_sd(double sigma, int epsilon, random::Stream& stream) {
    const double nu = epsilon - 1.0;
    return sigma * std::sqrt(stream.chi_squared(nu) / nu);
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) return std::nan("");
    std::sort(values.begin(), values.end());
    const double pos = p * (values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - lo) * (values[hi] - values[lo]);
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

SimulationReport compare_known_sigma(const StudyConfig& config) {
    constexpr const char* where = "sim_harness::compare_known_sigma";
    check_common(config, where);
    if (config.grid.empty()) throw_precondition(where, "budget grid is empty");
    for (double n : config.grid) {
        if (!(n > 0.0)) throw_domain(where, "budget grid values must be positive");
    }
    const std::size_t reps = config.replicates;
    const std::size_t points = config.grid.size();
    std::vector<double> power(reps * points), mse(reps * points);
    parallel_for(reps, config.threads, [&](std::size_t r) {
        std::vector<double> sigma, delta;
        draw_instance(config, r, sigma, delta, where);
        for (std::size_t j = 0; j < points; ++j) {
            const auto p = make_portfolio(sigma, delta, {}, {}, config.grid[j], config.alpha);
            power[r * points + j] = optimal_max_type2(p);
            mse[r * points + j] = mse_optimal_allocation(p).max_beta;
        }
    });

    SimulationReport out;
    out.per_replicate.columns = {"replicate", "N", "power_max_beta", "mse_max_beta", "gap"};
    out.summary.columns = {"N", "power_max_beta", "mse_max_beta", "gap", "dominance_violations"};
    for (std::size_t r = 0; r < reps; ++r) {
        for (std::size_t j = 0; j < points; ++j) {
            const double pw = power[r * points + j];
            const double ms = mse[r * points + j];
            out.per_replicate.add_row({static_cast<std::int64_t>(r), config.grid[j], pw, ms, ms - pw});
        }
    }
    plot::Series s_power{"power-optimal", {}, {}, "#2ca02c", false};
    plot::Series s_mse{"MSE-optimal", {}, {}, "#d62728", false};
    plot::Series s_gap{"gap", {}, {}, "#1f77b4", true};
    for (std::size_t j = 0; j < points; ++j) {
        double sp = 0.0, sm = 0.0, sg = 0.0;
        std::int64_t violations = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            const double pw = power[r * points + j];
            const double ms = mse[r * points + j];
            sp += pw;
            sm += ms;
            sg += ms - pw;
            if (pw > ms + 1e-12) ++violations;
        }
        const double n = static_cast<double>(reps);
        out.summary.add_row({config.grid[j], sp / n, sm / n, sg / n, violations});
        s_power.x.push_back(config.grid[j]);
        s_power.y.push_back(sp / n);
        s_mse.x.push_back(config.grid[j]);
        s_mse.y.push_back(sm / n);
        s_gap.x.push_back(config.grid[j]);
        s_gap.y.push_back(sg / n);
    }
    echo_config(out.summary, config);
    echo_config(out.per_replicate, config);
    out.chart.title = "Worst-case Type 2 error: power-optimal vs MSE-optimal";
    out.chart.x_label = "total budget N";
    out.chart.y_label = "mean max Type 2 error";
    out.chart.log_x = true;
    out.chart.series = {s_mse, s_power, s_gap};
    return out;
}

SimulationReport compare_unknown_sigma(const StudyConfig& config, const robust::SurrogateObjective& objective) {
    constexpr const char* where = "sim_harness::compare_unknown_sigma";
    check_common(config, where);
    if (config.policies.empty()) throw_precondition(where, "no policies selected");
    if (config.epsilon < 2) throw_domain(where, "pilot size must be >= 2");
    if (!(config.budget > 0.0)) throw_domain(where, "budget N must be positive");
    const std::size_t reps = config.replicates;
    const std::size_t np = config.policies.size();

    // A fixed portfolio has one oracle plan for every replicate.
    std::optional<robust::CorrectionPlan> fixed_oracle;
    bool have_fixed_oracle = false;
    const double budget = config.portfolio ? config.portfolio->budget : config.budget;
    const double alpha = config.portfolio ? config.portfolio->alpha : config.alpha;
    if (config.portfolio) {
        std::vector<double> sigma, delta;
        draw_instance(config, 0, sigma, delta, where);
        std::vector<double> a;
        for (std::size_t i = 0; i < sigma.size(); ++i) a.push_back(difficulty_index(sigma[i], delta[i]));
        fixed_oracle = oracle_plan(a, pilot_sizes(config, sigma.size()), budget, alpha, objective);
        have_fixed_oracle = true;
    }

    std::vector<double> beta_star(reps);
    std::vector<double> excess(reps * np);
    std::vector<double> certified(reps * np, std::nan(""));
    std::vector<char> vacuous(reps * np, 0);
    parallel_for(reps, config.threads, [&](std::size_t r) {
        std::vector<double> sigma, delta;
        draw_instance(config, r, sigma, delta, where);
        const std::size_t m = sigma.size();
        const auto eps = pilot_sizes(config, m);
        std::vector<double> s(m), a(m);
        for (std::size_t i = 0; i < m; ++i) {
            random::Stream stream(random::stream_key(config.seed, r, i, kPilotStream));
            s[i] = sample_pilot_sd(sigma[i], eps[i], stream);
            a[i] = difficulty_index(sigma[i], delta[i]);
        }
        const auto portfolio = make_portfolio(sigma, delta, s, eps, budget, alpha);
        const double bstar = optimal_max_type2(portfolio);
        beta_star[r] = bstar;
        for (std::size_t j = 0; j < np; ++j) {
            std::vector<double> k(m, 1.0);
            switch (config.policies[j]) {
                case Policy::naive: break;
                case Policy::oracle_surrogate: {
                    const auto plan = have_fixed_oracle ? fixed_oracle : oracle_plan(a, eps, budget, alpha, objective);
                    if (plan) {
                        k = plan->k;
                        certified[r * np + j] = plan->objective_value;
                    } else {
                        vacuous[r * np + j] = 1;
                    }
                    break;
                }
                case Policy::surrogate_s: {
                    double proxy = 0.0;
                    for (std::size_t i = 0; i < m; ++i) proxy += difficulty_index(s[i], delta[i]);
                    if (conf_vacuous(objective, equalized_type2(proxy, budget, alpha), alpha)) {
                        vacuous[r * np + j] = 1;
                        break;
                    }
                    const auto res = robust::surrogate_s_pipeline(portfolio, objective);
                    k = res.plan.k;
                    certified[r * np + j] = res.plan.objective_value;
                    break;
                }
            }
            excess[r * np + j] = realized_max_type2(k, s, sigma, portfolio) - bstar;
        }
    });

    SimulationReport out;
    out.per_replicate.columns = {"replicate", "beta_star"};
    for (Policy p : config.policies) out.per_replicate.columns.push_back(std::string(to_string(p)) + "_excess");
    for (std::size_t r = 0; r < reps; ++r) {
        std::vector<report::Cell> row{static_cast<std::int64_t>(r), beta_star[r]};
        for (std::size_t j = 0; j < np; ++j) row.emplace_back(excess[r * np + j]);
        out.per_replicate.add_row(std::move(row));
    }

    out.summary.columns = {"policy", "mean_excess", "median_excess", "percentile_excess", "within_delta_rate",
                           "max_excess", "mean_certified"};
    double lo = 0.0, hi = 0.0;
    for (double v : excess) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double pct = objective.gamma;
    for (std::size_t j = 0; j < np; ++j) {
        std::vector<double> col(reps);
        double within = 0.0;
        double cert_sum = 0.0;
        std::size_t cert_n = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            col[r] = excess[r * np + j];
            if (col[r] <= objective.delta) within += 1.0;
            if (!std::isnan(certified[r * np + j])) {
                cert_sum += certified[r * np + j];
                ++cert_n;
            }
        }
        const double mean = std::accumulate(col.begin(), col.end(), 0.0) / reps;
        const std::string name = to_string(config.policies[j]);
        std::int64_t vacuous_count = 0;
        for (std::size_t r = 0; r < reps; ++r) vacuous_count += vacuous[r * np + j];
        if (vacuous_count > 0) out.per_replicate.set(name + ".unconstrained_replicates", std::to_string(vacuous_count));
        const double p_cut = percentile(col, pct);
        const double rate = within / reps;
        out.summary.add_row({name, mean, percentile(col, 0.5), p_cut, rate,
                             *std::max_element(col.begin(), col.end()),
                             cert_n ? cert_sum / cert_n : std::nan("")});
        out.per_replicate.set(name + ".mean_excess", mean);
        out.per_replicate.set(name + ".percentile_excess", p_cut);
        out.per_replicate.set(name + ".within_delta_rate", rate);

        auto series = plot::density_series(col, lo, hi, 40, name, policy_color(config.policies[j]));
        out.chart.series.push_back(series);
        switch (objective.kind) {
            case robust::ObjectiveKind::tol: out.chart.markers.push_back({p_cut, series.color, true}); break;
            case robust::ObjectiveKind::exp: out.chart.markers.push_back({mean, series.color, false}); break;
            case robust::ObjectiveKind::conf: break;
        }
    }
    if (objective.kind == robust::ObjectiveKind::conf) out.chart.markers.push_back({objective.delta, "#000000", false});

    for (auto* t : {&out.summary, &out.per_replicate}) {
        echo_config(*t, config);
        t->set("budget", budget);
        t->set("epsilon", std::to_string(config.epsilon));
        t->set("objective", robust::to_string(objective.kind));
        t->set("gamma", objective.gamma);
        t->set("delta", objective.delta);
        t->set("percentile_level", pct);
        if (objective.kind == robust::ObjectiveKind::conf) {
            t->set("beta_star_proxy", "surrogate_s uses beta*(S), the plug-in optimum at the pilot deviations");
        }
    }
    out.chart.title = std::string("Max Type 2 error in excess of beta* (") + robust::to_string(objective.kind) + ")";
    out.chart.x_label = "realized max Type 2 error - beta*";
    out.chart.y_label = "density";
    return out;
}

SimulationReport exp_rstar_sweep(const StudyConfig& config) {
    constexpr const char* where = "sim_harness::exp_rstar_sweep";
    if (config.grid.empty() || config.epsilon_set.empty()) throw_precondition(where, "ratio grid or pilot sizes empty");
    SimulationReport out;
    out.summary.columns = {"epsilon", "ratio", "a1", "a2", "r_star", "expected_max_beta"};
    struct Cell {
        int eps;
        double ratio, a1, a2;
        pair::PairOptimum opt;
    };
    std::vector<Cell> cells;
    for (int eps : config.epsilon_set) {
        for (double ratio : config.grid) {
            const double a2 = config.pair_difficulty_sum / (1.0 + ratio);
            cells.push_back({eps, ratio, config.pair_difficulty_sum - a2, a2, {}});
        }
    }
    parallel_for(cells.size(), config.threads, [&](std::size_t i) {
        auto& c = cells[i];
        c.opt = pair::exp_optimum({c.a1, c.a2, c.eps, config.budget, config.alpha});
    });
    const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
    std::size_t idx = 0;
    for (int eps : config.epsilon_set) {
        plot::Series s{"eps=" + std::to_string(eps), {}, {}, colors[idx++ % 6], false};
        for (const auto& c : cells) {
            if (c.eps != eps) continue;
            out.summary.add_row({static_cast<std::int64_t>(c.eps), c.ratio, c.a1, c.a2, c.opt.r_star, c.opt.objective});
            s.x.push_back(c.ratio);
            s.y.push_back(c.opt.r_star);
        }
        out.chart.series.push_back(s);
    }
    out.summary.set("study", config.name);
    out.summary.set("objective", "exp");
    out.summary.set("budget", config.budget);
    out.summary.set("alpha", config.alpha);
    out.summary.set("difficulty_sum", config.pair_difficulty_sum);
    out.chart.title = "Optimal inflation ratio under EXP";
    out.chart.x_label = "difficulty ratio a1/a2";
    out.chart.y_label = "r*";
    out.chart.log_x = true;
    return out;
}

SimulationReport tol_conf_rstar_sweep(const StudyConfig& config) {
    constexpr const char* where = "sim_harness::tol_conf_rstar_sweep";
    if (config.grid.empty()) throw_precondition(where, "ratio grid is empty");
    SimulationReport out;
    out.summary.columns = {"objective", "ratio", "a1", "a2", "level", "r_star", "value"};
    const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
    std::size_t idx = 0;
    for (double gamma : config.gamma_grid) {
        plot::Series s{"TOL gamma=" + report::format_number(gamma), {}, {}, colors[idx++ % 6], false};
        for (double ratio : config.grid) {
            const double a2 = config.pair_difficulty_sum / (1.0 + ratio);
            const pair::PairInstance in{config.pair_difficulty_sum - a2, a2, config.epsilon, config.budget, config.alpha};
            const auto opt = pair::tol_optimum(gamma, in);
            out.summary.add_row({std::string("tol"), ratio, in.a1, in.a2, gamma, opt.r_star, opt.objective});
            s.x.push_back(ratio);
            s.y.push_back(opt.r_star);
        }
        out.chart.series.push_back(s);
    }
    idx = 0;
    for (double delta : config.delta_grid) {
        plot::Series s{"CONF delta=" + report::format_number(delta), {}, {}, colors[idx++ % 6], true};
        for (double ratio : config.grid) {
            const double a2 = config.pair_difficulty_sum / (1.0 + ratio);
            const pair::PairInstance in{config.pair_difficulty_sum - a2, a2, config.epsilon, config.budget, config.alpha};
            const auto opt = pair::conf_optimum(delta, in, pair::beta_star(in));
            out.summary.add_row({std::string("conf"), ratio, in.a1, in.a2, delta, opt.r_star, opt.objective});
            s.x.push_back(ratio);
            s.y.push_back(opt.r_star);
        }
        out.chart.series.push_back(s);
    }
    out.summary.set("study", config.name);
    out.summary.set("epsilon", std::to_string(config.epsilon));
    out.summary.set("budget", config.budget);
    out.summary.set("alpha", config.alpha);
    out.summary.set("difficulty_sum", config.pair_difficulty_sum);
    out.chart.title = "Optimal inflation ratio under TOL and CONF";
    out.chart.x_label = "difficulty ratio a1/a2";
    out.chart.y_label = "r*";
    out.chart.log_x = true;
    return out;
}

SimulationReport run_study(const StudyConfig& config) {
    if (config.name == "fig1") return compare_known_sigma(config);
    if (config.name == "fig2") return tol_conf_rstar_sweep(config);
    if (config.name == "fig3") return exp_rstar_sweep(config);
    return compare_unknown_sigma(config, config.objective);
}

}  // namespace powerplan::sim
