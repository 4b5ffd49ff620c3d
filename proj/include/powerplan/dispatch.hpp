#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "powerplan/config.hpp"
#include "powerplan/report.hpp"

namespace powerplan::cli {

enum class Command { allocate, mse, two_exp, surrogate, simulate, validate };

std::optional<Command> command_from_string(const std::string& name);

struct RunOptions {
    Command command = Command::validate;
    // tol/conf/exp for two-exp and surrogate, fig1..fig6/custom for simulate.
    std::string variant;
    std::optional<double> gamma;
    std::optional<double> delta;
    std::optional<std::uint64_t> seed;
    bool fast = false;
    bool want_svg = false;
    bool round = false;
};

struct RunOutput {
    report::Table table;
    std::string svg;
};

// Preflight shared by `validate` and every other command.
void preflight(const RunConfig* config, const RunOptions& options);

// `config` may be null only for the preset simulations.
RunOutput dispatch(const RunConfig* config, const RunOptions& options);

}  // namespace powerplan::cli
