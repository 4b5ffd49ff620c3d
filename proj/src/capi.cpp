#include "powerplan/powerplan.h"

#include <memory>
#include <new>
#include <string>
#include <vector>

#include "powerplan/config.hpp"
#include "powerplan/dispatch.hpp"
#include "powerplan/error.hpp"
#include "powerplan/power_alloc.hpp"
#include "powerplan/robust_surrogate.hpp"

struct pp_config {
    powerplan::cli::RunConfig config;
};

struct pp_report {
    std::string csv;
    std::string svg;
    powerplan::report::Metadata metadata;
};

namespace {

thread_local std::string last_error;
thread_local std::vector<std::string> last_problems;

pp_status status_of(powerplan::ErrorKind kind) {
    switch (kind) {
        case powerplan::ErrorKind::domain: return PP_ERR_DOMAIN;
        case powerplan::ErrorKind::precondition: return PP_ERR_PRECONDITION;
        case powerplan::ErrorKind::numeric: return PP_ERR_NUMERIC;
        case powerplan::ErrorKind::config: return PP_ERR_CONFIG;
    }
    return PP_ERR_INTERNAL;
}

template <class F>
pp_status guarded(F&& body) {
    try {
        body();
        last_error.clear();
        return PP_OK;
    } catch (const powerplan::ConfigError& e) {
        last_error = e.what();
        last_problems = e.problems();
        return PP_ERR_CONFIG;
    } catch (const powerplan::Error& e) {
        last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return PP_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return PP_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown failure";
        return PP_ERR_INTERNAL;
    }
}

pp_status invalid(const char* msg) {
    last_error = msg;
    return PP_ERR_INVALID_ARGUMENT;
}

powerplan::cli::RunOptions convert(const pp_run_options& o) {
    powerplan::cli::RunOptions r;
    switch (o.command) {
        case PP_CMD_ALLOCATE: r.command = powerplan::cli::Command::allocate; break;
        case PP_CMD_MSE: r.command = powerplan::cli::Command::mse; break;
        case PP_CMD_TWO_EXP: r.command = powerplan::cli::Command::two_exp; break;
        case PP_CMD_SURROGATE: r.command = powerplan::cli::Command::surrogate; break;
        case PP_CMD_SIMULATE: r.command = powerplan::cli::Command::simulate; break;
        case PP_CMD_VALIDATE: r.command = powerplan::cli::Command::validate; break;
        default: throw powerplan::Error(powerplan::ErrorKind::precondition, "capi::pp_run", "unknown command");
    }
    if (o.variant) r.variant = o.variant;
    if (o.has_gamma) r.gamma = o.gamma;
    if (o.has_delta) r.delta = o.delta;
    if (o.has_seed) r.seed = o.seed;
    r.fast = o.fast != 0;
    r.want_svg = o.want_svg != 0;
    r.round = o.round != 0;
    return r;
}

}  // namespace

extern "C" {

const char* pp_version(void) { return "0.1.0"; }

const char* pp_last_error(void) { return last_error.c_str(); }

void pp_run_options_init(pp_run_options* options) {
    if (!options) return;
    *options = pp_run_options{};
    options->command = PP_CMD_VALIDATE;
}

pp_status pp_config_parse(const char* text, size_t length, pp_config** out) {
    if (!text || !out) return invalid("pp_config_parse: null argument");
    *out = nullptr;
    last_problems.clear();
    return guarded([&] {
        auto cfg = std::make_unique<pp_config>();
        cfg->config = powerplan::cli::parse_config(std::string_view(text, length));
        *out = cfg.release();
    });
}

void pp_config_free(pp_config* config) { delete config; }

size_t pp_config_problem_count(void) { return last_problems.size(); }

const char* pp_config_problem(size_t index) {
    return index < last_problems.size() ? last_problems[index].c_str() : nullptr;
}

pp_status pp_config_validate(const pp_config* config, const pp_run_options* options) {
    if (!config || !options) return invalid("pp_config_validate: null argument");
    return guarded([&] { powerplan::cli::preflight(&config->config, convert(*options)); });
}

pp_status pp_run(const pp_config* config, const pp_run_options* options, pp_report** out) {
    if (!options || !out) return invalid("pp_run: null argument");
    *out = nullptr;
    return guarded([&] {
        const auto result = powerplan::cli::dispatch(config ? &config->config : nullptr, convert(*options));
        auto rep = std::make_unique<pp_report>();
        rep->csv = powerplan::report::to_csv(result.table);
        rep->svg = result.svg;
        rep->metadata = result.table.metadata;
        *out = rep.release();
    });
}

const char* pp_report_csv(const pp_report* report) { return report ? report->csv.c_str() : nullptr; }

const char* pp_report_svg(const pp_report* report) { return report ? report->svg.c_str() : nullptr; }

size_t pp_report_metadata_count(const pp_report* report) { return report ? report->metadata.size() : 0; }

const char* pp_report_metadata_key(const pp_report* report, size_t index) {
    if (!report || index >= report->metadata.size()) return nullptr;
    return report->metadata[index].first.c_str();
}

const char* pp_report_metadata_value(const pp_report* report, size_t index) {
    if (!report || index >= report->metadata.size()) return nullptr;
    return report->metadata[index].second.c_str();
}

void pp_report_free(pp_report* report) { delete report; }

pp_status pp_type2_error(double sigma, double n, double delta_gap, double alpha, double* out) {
    if (!out) return invalid("pp_type2_error: null output");
    return guarded([&] { *out = powerplan::type2_error(sigma, n, delta_gap, alpha); });
}

pp_status pp_power_optimal_allocation(const double* sigma, const double* delta_gap, size_t count, double budget,
                                      double alpha, double* n_out, double* beta_out, double* max_beta_out) {
    if (!sigma || !delta_gap || !n_out || !beta_out) return invalid("pp_power_optimal_allocation: null argument");
    return guarded([&] {
        powerplan::Portfolio p;
        p.budget = budget;
        p.alpha = alpha;
        for (size_t i = 0; i < count; ++i) {
            powerplan::ExperimentSpec e;
            e.sigma = sigma[i];
            e.delta_gap = delta_gap[i];
            p.experiments.push_back(e);
        }
        const auto res = powerplan::power_optimal_allocation(p);
        for (size_t i = 0; i < count; ++i) {
            n_out[i] = res.n[i];
            beta_out[i] = res.beta[i];
        }
        if (max_beta_out) *max_beta_out = res.max_beta;
    });
}

pp_status pp_kappa(int epsilon, double c, double* out) {
    if (!out) return invalid("pp_kappa: null output");
    return guarded([&] { *out = powerplan::robust::kappa(epsilon, c); });
}

pp_status pp_solve_surrogate(const double* pilot_s, const int* epsilon, const double* delta_gap, size_t count,
                             double budget, double alpha, pp_objective objective, double level, double* c_out,
                             double* k_out, double* n_out, double* objective_out) {
    if (!pilot_s || !epsilon || !delta_gap || !c_out || !k_out || !n_out || !objective_out) {
        return invalid("pp_solve_surrogate: null argument");
    }
    return guarded([&] {
        powerplan::robust::SurrogateObjective obj;
        switch (objective) {
            case PP_OBJ_TOL: obj.kind = powerplan::robust::ObjectiveKind::tol; obj.gamma = level; break;
            case PP_OBJ_CONF: obj.kind = powerplan::robust::ObjectiveKind::conf; obj.delta = level; break;
            case PP_OBJ_EXP: obj.kind = powerplan::robust::ObjectiveKind::exp; break;
            default:
                throw powerplan::Error(powerplan::ErrorKind::precondition, "capi::pp_solve_surrogate",
                                       "unknown objective");
        }
        const auto res = powerplan::robust::surrogate_s_pipeline({pilot_s, count}, {epsilon, count},
                                                                 {delta_gap, count}, budget, alpha, obj);
        for (size_t i = 0; i < count; ++i) {
            c_out[i] = res.plan.c[i];
            k_out[i] = res.plan.k[i];
            n_out[i] = res.allocation.n[i];
        }
        *objective_out = res.plan.objective_value;
    });
}

}  // extern "C"
