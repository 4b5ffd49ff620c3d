#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "powerplan/power_alloc.hpp"
#include "powerplan/robust_surrogate.hpp"
#include "powerplan/sim_harness.hpp"

namespace powerplan::cli {

enum class DocumentKind { portfolio, study };

// A validated configuration document. Portfolio documents drive allocate, mse,
// two-exp and surrogate; study documents drive simulate.
struct RunConfig {
    DocumentKind kind = DocumentKind::portfolio;

    Portfolio portfolio;
    std::optional<double> gamma;
    std::optional<double> delta;
    std::optional<robust::ObjectiveKind> objective;

    sim::StudyConfig study;
    bool replicates_given = false;
};

// JSON document with a "kind" discriminator. Throws ConfigError listing every
// problem with its path, e.g. "experiments[1].pilot.epsilon: pilot size must be >= 2".
RunConfig parse_config(std::string_view document);

std::optional<robust::ObjectiveKind> objective_from_string(const std::string& name);

}  // namespace powerplan::cli
