#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "powerplan/plot.hpp"
#include "powerplan/power_alloc.hpp"
#include "powerplan/random.hpp"
#include "powerplan/report.hpp"
#include "powerplan/robust_surrogate.hpp"

namespace powerplan::sim {

inline constexpr std::uint64_t kDefaultSeed = 20240601;

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

enum class Policy { naive, oracle_surrogate, surrogate_s };

const char* to_string(Policy policy);
std::optional<Policy> policy_from_string(const std::string& name);

struct StudyConfig {
    std::string name = "custom";
    // Fixed portfolio; when absent sigma and delta are drawn per replicate.
    std::optional<Portfolio> portfolio;
    int experiments = 20;
    Range sigma{0.5, 2.0};
    Range delta{0.1, 1.0};
    int epsilon = 20;
    double budget = 2000.0;
    double alpha = 0.05;
    std::size_t replicates = 1000;
    std::uint64_t seed = kDefaultSeed;
    // Budget grid (known-sigma comparison) or difficulty-ratio grid (r* sweeps).
    std::vector<double> grid;
    std::vector<double> gamma_grid;
    std::vector<double> delta_grid;
    std::vector<int> epsilon_set;
    // a1 + a2 in the two-experiment sweeps.
    double pair_difficulty_sum = 20.0;
    std::vector<Policy> policies{Policy::naive, Policy::oracle_surrogate, Policy::surrogate_s};
    robust::SurrogateObjective objective;
    unsigned threads = 0;  // 0 picks the hardware concurrency
};

// Preset for one of "fig1" ... "fig6"; `fast` lowers the replicate count.
StudyConfig preset(const std::string& name, bool fast);

struct SimulationReport {
    report::Table per_replicate;
    report::Table summary;
    plot::Chart chart;
};

// sigma * sqrt(chi2_{eps-1} / (eps - 1)).
double sample_pilot_sd(double sigma, int epsilon, random::Stream& stream);

SimulationReport compare_known_sigma(const StudyConfig& config);
SimulationReport compare_unknown_sigma(const StudyConfig& config, const robust::SurrogateObjective& objective);
SimulationReport exp_rstar_sweep(const StudyConfig& config);
SimulationReport tol_conf_rstar_sweep(const StudyConfig& config);

// Runs the study a preset or custom config describes.
SimulationReport run_study(const StudyConfig& config);

// Linear-interpolation quantile of an unsorted sample.
double percentile(std::vector<double> values, double p);

// Calls body(i) for i in [0, count) on up to `threads` workers. The first
// exception by index is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace powerplan::sim
