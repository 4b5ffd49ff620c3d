#include "powerplan/dispatch.hpp"

#include <cmath>

#include "powerplan/error.hpp"
#include "powerplan/pair_exact.hpp"
#include "powerplan/plot.hpp"
#include "powerplan/power_alloc.hpp"
#include "powerplan/robust_surrogate.hpp"
#include "powerplan/sim_harness.hpp"

namespace powerplan::cli {

namespace {

constexpr double kDefaultGamma = 0.7;
constexpr double kDefaultDelta = 0.2;

const RunConfig& need_portfolio(const RunConfig* config, const char* command) {
    if (!config) throw_precondition("cli::dispatch", std::string(command) + " needs --config");
    if (config->kind != DocumentKind::portfolio) {
        throw_precondition("cli::dispatch", std::string(command) + " needs a portfolio document");
    }
    return *config;
}

robust::ObjectiveKind variant_objective(const std::string& variant, const char* command) {
    const auto kind = objective_from_string(variant);
    if (!kind) {
        throw_precondition("cli::dispatch",
                           std::string(command) + " needs a variant: tol, conf or exp (got \"" + variant + "\")");
    }
    return *kind;
}

double resolve(std::optional<double> flag, std::optional<double> doc, double fallback) {
    if (flag) return *flag;
    if (doc) return *doc;
    return fallback;
}

report::Table allocation_table(const Portfolio& p, const AllocationResult& res, bool round) {
    report::Table t;
    t.columns = {"index", "sigma", "delta", "n", "beta"};
    if (round) t.columns.push_back("n_rounded");
    std::vector<std::int64_t> rounded;
    if (round) rounded = round_largest_remainder(res.n, p.budget);
    for (std::size_t i = 0; i < res.n.size(); ++i) {
        std::vector<report::Cell> row{static_cast<std::int64_t>(i), *p.experiments[i].sigma,
                                      p.experiments[i].delta_gap, res.n[i], res.beta[i]};
        if (round) row.emplace_back(rounded[i]);
        t.add_row(std::move(row));
    }
    t.set("max_beta", res.max_beta);
    t.set("budget", p.budget);
    t.set("alpha", p.alpha);
    return t;
}

RunOutput run_allocate(const RunConfig& cfg, const RunOptions& opt) {
    RunOutput out;
    const auto res = power_optimal_allocation(cfg.portfolio);
    out.table = allocation_table(cfg.portfolio, res, opt.round);
    out.table.set("allocation", "power_optimal");
    return out;
}

RunOutput run_mse(const RunConfig& cfg, const RunOptions& opt) {
    RunOutput out;
    const auto res = mse_optimal_allocation(cfg.portfolio);
    out.table = allocation_table(cfg.portfolio, res, opt.round);
    out.table.set("allocation", "mse_optimal");
    out.table.set("power_optimal_max_beta", optimal_max_type2(cfg.portfolio));
    return out;
}

RunOutput run_two_exp(const RunConfig& cfg, const RunOptions& opt) {
    constexpr const char* where = "cli::two_exp";
    const auto kind = variant_objective(opt.variant, "two-exp");
    const auto& p = cfg.portfolio;
    if (p.experiments.size() != 2) throw_precondition(where, "two-exp needs exactly two experiments");
    double a[2];
    int eps[2];
    std::string source = "sigma";
    for (int i = 0; i < 2; ++i) {
        const auto& e = p.experiments[i];
        if (!e.pilot) throw_precondition(where, "experiment " + std::to_string(i) + ": pilot size required");
        eps[i] = e.pilot->epsilon;
        if (e.sigma) {
            a[i] = difficulty_index(*e.sigma, e.delta_gap);
        } else {
            a[i] = difficulty_index(e.pilot->s, e.delta_gap);
            source = "pilot_s";
        }
    }
    if (eps[0] != eps[1]) throw_precondition(where, "both experiments must share the pilot size");
    const pair::PairInstance in{a[0], a[1], eps[0], p.budget, p.alpha};

    RunOutput out;
    out.table.columns = {"objective", "a1", "a2", "epsilon", "r_star", "d_star", "objective_value"};
    pair::PairOptimum opt_res;
    switch (kind) {
        case robust::ObjectiveKind::tol: {
            const double gamma = resolve(opt.gamma, cfg.gamma, kDefaultGamma);
            opt_res = pair::tol_optimum(gamma, in);
            out.table.set("gamma", gamma);
            out.table.set("objective_value_meaning", "delta*");
            break;
        }
        case robust::ObjectiveKind::conf: {
            const double delta = resolve(opt.delta, cfg.delta, kDefaultDelta);
            opt_res = pair::conf_optimum(delta, in, pair::beta_star(in));
            out.table.set("delta", delta);
            out.table.set("objective_value_meaning", "gamma*");
            break;
        }
        case robust::ObjectiveKind::exp:
            opt_res = pair::exp_optimum(in);
            out.table.set("objective_value_meaning", "minimized expected max beta");
            break;
    }
    out.table.add_row({std::string(robust::to_string(kind)), a[0], a[1], static_cast<std::int64_t>(eps[0]),
                       opt_res.r_star, opt_res.d_star.value_or(std::nan("")), opt_res.objective});
    out.table.set("difficulty_source", source);
    out.table.set("beta_star", pair::beta_star(in));
    out.table.set("budget", p.budget);
    out.table.set("alpha", p.alpha);
    return out;
}

RunOutput run_surrogate(const RunConfig& cfg, const RunOptions& opt) {
    constexpr const char* where = "cli::surrogate";
    const auto& p = cfg.portfolio;
    for (std::size_t i = 0; i < p.experiments.size(); ++i) {
        if (!p.experiments[i].pilot) {
            throw_precondition(where, "experiment " + std::to_string(i) + ": pilot data required");
        }
    }
    robust::SurrogateObjective objective;
    objective.kind = variant_objective(opt.variant, "surrogate");
    objective.gamma = resolve(opt.gamma, cfg.gamma, kDefaultGamma);
    objective.delta = resolve(opt.delta, cfg.delta, kDefaultDelta);
    const auto res = robust::surrogate_s_pipeline(p, objective);

    RunOutput out;
    auto& t = out.table;
    t.columns = {"index", "s", "epsilon", "c", "k", "n", "k_ratio"};
    if (opt.round) t.columns.push_back("n_rounded");
    std::vector<std::int64_t> rounded;
    if (opt.round) rounded = round_largest_remainder(res.allocation.n, p.budget);
    for (std::size_t i = 0; i < p.experiments.size(); ++i) {
        std::vector<report::Cell> row{static_cast<std::int64_t>(i), p.experiments[i].pilot->s,
                                      static_cast<std::int64_t>(p.experiments[i].pilot->epsilon), res.plan.c[i],
                                      res.plan.k[i], res.allocation.n[i], res.plan.k_ratio[i]};
        if (opt.round) row.emplace_back(rounded[i]);
        t.add_row(std::move(row));
    }
    t.set("objective", robust::to_string(objective.kind));
    switch (objective.kind) {
        case robust::ObjectiveKind::tol:
            t.set("gamma", objective.gamma);
            t.set("delta_R", res.plan.objective_value);
            break;
        case robust::ObjectiveKind::conf:
            t.set("delta", objective.delta);
            t.set("gamma_R", res.plan.objective_value);
            break;
        case robust::ObjectiveKind::exp:
            t.set("g_R", res.plan.objective_value);
            break;
    }
    t.set("certified_gamma", res.plan.certified_gamma);
    t.set("surrogate_beta", res.plan.surrogate_beta);
    t.set("beta_star_proxy", res.beta_star_proxy);
    t.set("beta_star_proxy_rule", "beta*(S): plug-in optimum at the pilot deviations");
    t.set("plug_in_max_beta", res.allocation.max_beta);
    t.set("budget", p.budget);
    t.set("alpha", p.alpha);
    return out;
}

RunOutput run_simulate(const RunConfig* cfg, const RunOptions& opt) {
    constexpr const char* where = "cli::simulate";
    std::string name = opt.variant.empty() ? "custom" : opt.variant;
    sim::StudyConfig study;
    if (cfg) {
        if (cfg->kind != DocumentKind::study) throw_precondition(where, "simulate needs a study document");
        study = cfg->study;
        if (!opt.variant.empty() && opt.variant != study.name) {
            throw_precondition(where, "study document describes " + study.name + ", not " + opt.variant);
        }
        name = study.name;
        if (opt.fast && !cfg->replicates_given) study.replicates = sim::preset(name, true).replicates;
    } else {
        if (name == "custom") throw_precondition(where, "simulate custom needs --config");
        study = sim::preset(name, opt.fast);
    }
    if (opt.seed) study.seed = *opt.seed;
    if (opt.gamma) study.objective.gamma = *opt.gamma;
    if (opt.delta) study.objective.delta = *opt.delta;

    const auto rep = sim::run_study(study);
    RunOutput out;
    const bool per_replicate = name != "fig1" && name != "fig2" && name != "fig3";
    out.table = per_replicate ? rep.per_replicate : rep.summary;
    out.table.set("fast", opt.fast ? "true" : "false");
    if (opt.want_svg) out.svg = plot::render_svg(rep.chart);
    return out;
}

RunOutput run_validate(const RunConfig& cfg) {
    RunOutput out;
    out.table.columns = {"field", "value"};
    if (cfg.kind == DocumentKind::portfolio) {
        out.table.add_row({std::string("kind"), std::string("portfolio")});
        out.table.add_row({std::string("experiments"), static_cast<std::int64_t>(cfg.portfolio.experiments.size())});
        out.table.add_row({std::string("budget"), cfg.portfolio.budget});
        out.table.add_row({std::string("alpha"), cfg.portfolio.alpha});
    } else {
        out.table.add_row({std::string("kind"), std::string("study")});
        out.table.add_row({std::string("study"), cfg.study.name});
        out.table.add_row({std::string("replicates"), static_cast<std::int64_t>(cfg.study.replicates)});
        out.table.add_row({std::string("seed"), std::to_string(cfg.study.seed)});
    }
    out.table.set("status", "ok");
    return out;
}

}  // namespace

std::optional<Command> command_from_string(const std::string& name) {
    if (name == "allocate") return Command::allocate;
    if (name == "mse") return Command::mse;
    if (name == "two-exp") return Command::two_exp;
    if (name == "surrogate") return Command::surrogate;
    if (name == "simulate") return Command::simulate;
    if (name == "validate") return Command::validate;
    return std::nullopt;
}

void preflight(const RunConfig* config, const RunOptions& options) {
    if (options.gamma && !(*options.gamma > 0.0 && *options.gamma < 1.0)) {
        throw_domain("cli::preflight", "--gamma must lie in (0, 1)");
    }
    if (options.delta && !(*options.delta > 0.0 && *options.delta < 1.0)) {
        throw_domain("cli::preflight", "--delta must lie in (0, 1)");
    }
    if (config && config->kind == DocumentKind::portfolio) validate_portfolio(config->portfolio);
}

RunOutput dispatch(const RunConfig* config, const RunOptions& options) {
    preflight(config, options);
    switch (options.command) {
        case Command::allocate: return run_allocate(need_portfolio(config, "allocate"), options);
        case Command::mse: return run_mse(need_portfolio(config, "mse"), options);
        case Command::two_exp: return run_two_exp(need_portfolio(config, "two-exp"), options);
        case Command::surrogate: return run_surrogate(need_portfolio(config, "surrogate"), options);
        case Command::simulate: return run_simulate(config, options);
        case Command::validate:
            if (!config) throw_precondition("cli::dispatch", "validate needs --config");
            return run_validate(*config);
    }
    throw_precondition("cli::dispatch", "unknown command");
}

}  // namespace powerplan::cli
