#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "powerplan/powerplan.h"

namespace {

struct Flags {
    std::string config_path;
    std::string out_path;
    std::string svg_path;
    std::string variant;
    double gamma = 0.0;
    double delta = 0.0;
    std::uint64_t seed = 0;
    bool fast = false;
    bool round = false;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config_path, "configuration document (JSON)");
    cmd->add_option("--out", f.out_path, "CSV output path; stdout when omitted");
    cmd->add_option("--svg", f.svg_path, "SVG plot output path");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("--gamma", f.gamma, "confidence level gamma");
    cmd->add_option("--delta", f.delta, "tolerance delta");
    cmd->add_flag("--fast", f.fast, "reduced replicate count");
    cmd->add_flag("--round", f.round, "append integer sample sizes");
}

bool read_file(const std::string& path, std::string& text) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    return true;
}

bool write_file(const std::string& path, const char* text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) return false;
    out << text;
    return static_cast<bool>(out);
}

int fail(const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sample-size planning for experiment portfolios"};
    app.set_version_flag("--version", std::string(pp_version()));
    app.require_subcommand(1);

    Flags f;
    std::string objective;
    std::string study;

    auto* allocate = app.add_subcommand("allocate", "power-optimal allocation for known sigmas");
    auto* mse = app.add_subcommand("mse", "MSE-optimal allocation for known sigmas");
    auto* two_exp = app.add_subcommand("two-exp", "exact two-experiment optimum (tol, conf or exp)");
    auto* surrogate = app.add_subcommand("surrogate", "corrected allocation from pilot data (tol, conf or exp)");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo studies (fig1..fig6 or custom)");
    auto* validate = app.add_subcommand("validate", "check a configuration document");

    for (auto* cmd : {allocate, mse, two_exp, surrogate, simulate, validate}) add_common(cmd, f);
    two_exp->add_option("variant", f.variant, "tol, conf or exp")->check(CLI::IsMember({"tol", "conf", "exp"}));
    surrogate->add_option("objective_name", f.variant, "tol, conf or exp")->check(CLI::IsMember({"tol", "conf", "exp"}));
    surrogate->add_option("--objective", objective, "same as the positional variant")
        ->check(CLI::IsMember({"tol", "conf", "exp"}));
    simulate->add_option("name", f.variant, "fig1..fig6 or custom")
        ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "custom"}));
    simulate->add_option("--study", study, "same as the positional study")
        ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "custom"}));

    CLI11_PARSE(app, argc, argv);

    pp_run_options opts;
    pp_run_options_init(&opts);
    CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    if (name == "allocate") opts.command = PP_CMD_ALLOCATE;
    else if (name == "mse") opts.command = PP_CMD_MSE;
    else if (name == "two-exp") opts.command = PP_CMD_TWO_EXP;
    else if (name == "surrogate") opts.command = PP_CMD_SURROGATE;
    else if (name == "simulate") opts.command = PP_CMD_SIMULATE;
    else opts.command = PP_CMD_VALIDATE;

    if (!objective.empty()) {
        if (!f.variant.empty() && f.variant != objective) return fail("conflicting objective and variant");
        f.variant = objective;
    }
    if (!study.empty()) {
        if (!f.variant.empty() && f.variant != study) return fail("conflicting --study and positional study");
        f.variant = study;
    }
    if ((name == "two-exp" || name == "surrogate") && f.variant.empty()) {
        return fail(name + " needs an objective: tol, conf or exp");
    }
    if (name == "simulate" && f.variant.empty() && f.config_path.empty()) {
        return fail("simulate needs a study name or --config");
    }

    opts.variant = f.variant.empty() ? nullptr : f.variant.c_str();
    if (chosen->get_option("--gamma")->count()) {
        opts.gamma = f.gamma;
        opts.has_gamma = 1;
    }
    if (chosen->get_option("--delta")->count()) {
        opts.delta = f.delta;
        opts.has_delta = 1;
    }
    if (chosen->get_option("--seed")->count()) {
        opts.seed = f.seed;
        opts.has_seed = 1;
    }
    opts.fast = f.fast;
    opts.round = f.round;
    opts.want_svg = !f.svg_path.empty();

    pp_config* cfg = nullptr;
    if (!f.config_path.empty()) {
        std::string text;
        if (!read_file(f.config_path, text)) return fail("cannot read " + f.config_path);
        if (pp_config_parse(text.data(), text.size(), &cfg) != PP_OK) {
            const size_t n = pp_config_problem_count();
            if (n == 0) return fail(pp_last_error());
            std::cerr << "error: " << f.config_path << " failed validation\n";
            for (size_t i = 0; i < n; ++i) std::cerr << "  " << pp_config_problem(i) << "\n";
            return 1;
        }
    }

    pp_report* rep = nullptr;
    const pp_status status = pp_run(cfg, &opts, &rep);
    pp_config_free(cfg);
    if (status != PP_OK) return fail(pp_last_error());

    int rc = 0;
    if (f.out_path.empty()) {
        std::fputs(pp_report_csv(rep), stdout);
    } else if (!write_file(f.out_path, pp_report_csv(rep))) {
        rc = fail("cannot write " + f.out_path);
    }
    if (rc == 0 && !f.svg_path.empty()) {
        const char* svg = pp_report_svg(rep);
        if (!svg || !*svg) {
            std::cerr << "warning: " << name << " produces no plot; --svg ignored\n";
        } else if (!write_file(f.svg_path, svg)) {
            rc = fail("cannot write " + f.svg_path);
        }
    }
    pp_report_free(rep);
    return rc;
}
