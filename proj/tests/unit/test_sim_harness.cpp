#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "powerplan/error.hpp"
#include "powerplan/pair_exact.hpp"
#include "powerplan/report.hpp"
#include "powerplan/sim_harness.hpp"

using namespace powerplan;
using namespace powerplan::sim;

namespace {

StudyConfig small_unknown() {
    StudyConfig c;
    c.experiments = 5;
    c.budget = 1000.0;
    c.replicates = 40;
    c.threads = 2;
    return c;
}

}  // namespace

TEST_CASE("pilot deviations") {
    random::Stream stream(random::stream_key(kDefaultSeed, 0, 0, 2));
    double s2 = 0.0;
    std::size_t below = 0;
    const std::size_t draws = 1000000;
    for (std::size_t i = 0; i < draws; ++i) {
        const double s = sample_pilot_sd(2.0, 20, stream);
        s2 += s * s;
        if (s < 2.0) ++below;
    }
    CHECK(std::fabs(s2 / draws - 4.0) < 0.02);
    CHECK(static_cast<double>(below) / draws > 0.5);

    random::Stream a(random::stream_key(5, 1, 2, 3)), b(random::stream_key(5, 1, 2, 3));
    for (int i = 0; i < 100; ++i) CHECK(sample_pilot_sd(1.0, 7, a) == sample_pilot_sd(1.0, 7, b));
    CHECK(random::stream_key(5, 1, 2, 3) != random::stream_key(5, 1, 3, 2));
}

TEST_CASE("percentile") {
    CHECK(percentile({3.0, 1.0, 2.0}, 0.5) == 2.0);
    CHECK(percentile({4.0, 1.0, 3.0, 2.0}, 0.5) == doctest::Approx(2.5));
    CHECK(percentile({4.0, 1.0, 3.0, 2.0}, 0.0) == 1.0);
    CHECK(percentile({4.0, 1.0, 3.0, 2.0}, 1.0) == 4.0);
    CHECK(percentile({10.0, 20.0}, 0.7) == doctest::Approx(17.0));
}

TEST_CASE("parallel_for rethrows the first failure by index") {
    std::vector<int> seen(100, 0);
    parallel_for(100, 4, [&](std::size_t i) { seen[i] = 1; });
    CHECK(std::count(seen.begin(), seen.end(), 1) == 100);
    try {
        parallel_for(50, 4, [](std::size_t i) {
            if (i == 7 || i == 31) throw_numeric("test", "index " + std::to_string(i));
        });
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.detail() == "index 7");
    }
}

TEST_CASE("known-sigma comparison") {
    auto c = preset("fig1", true);
    c.replicates = 30;
    c.grid = {1e-3, 1e3, 8e4, 1e9};
    const auto rep = compare_known_sigma(c);
    const auto& pr = rep.per_replicate;
    for (std::size_t r = 0; r < pr.rows.size(); ++r) {
        const double pw = pr.number(r, "power_max_beta"), ms = pr.number(r, "mse_max_beta");
        CHECK(pw <= ms + 1e-12);
        CHECK(ms <= 0.95 + 1e-12);
        CHECK(pw >= 0.0);
    }
    CHECK(rep.summary.number(0, "power_max_beta") > 0.94);
    CHECK(rep.summary.number(0, "mse_max_beta") > 0.94);
    CHECK(rep.summary.number(3, "power_max_beta") < 1e-6);
    CHECK(rep.summary.number(3, "mse_max_beta") < 1e-2);
    for (std::size_t j = 0; j < 4; ++j) CHECK(rep.summary.number(j, "dominance_violations") == 0.0);

    // summary agrees with the per-replicate rows
    double sum_gap = 0.0;
    for (std::size_t r = 0; r < pr.rows.size(); ++r) {
        if (pr.number(r, "N") == 8e4) sum_gap += pr.number(r, "gap");
    }
    CHECK(std::fabs(sum_gap / 30.0 - rep.summary.number(2, "gap")) < 1e-12);

    auto empty = c;
    empty.grid.clear();
    CHECK_THROWS_AS(compare_known_sigma(empty), Error);
}

TEST_CASE("results do not depend on the thread count") {
    auto c = small_unknown();
    c.replicates = 24;
    robust::SurrogateObjective obj;
    c.threads = 1;
    const auto one = compare_unknown_sigma(c, obj);
    c.threads = 5;
    const auto five = compare_unknown_sigma(c, obj);
    CHECK(report::to_csv(one.per_replicate) == report::to_csv(five.per_replicate));
    CHECK(report::to_csv(one.summary) == report::to_csv(five.summary));

    auto k = preset("fig1", true);
    k.replicates = 20;
    k.threads = 1;
    const auto a = compare_known_sigma(k);
    k.threads = 3;
    CHECK(report::to_csv(a.per_replicate) == report::to_csv(compare_known_sigma(k).per_replicate));

    c.seed = 99;
    CHECK(report::to_csv(compare_unknown_sigma(c, obj).per_replicate) != report::to_csv(five.per_replicate));
}

TEST_CASE("unknown-sigma comparison invariants") {
    for (auto kind : {robust::ObjectiveKind::tol, robust::ObjectiveKind::conf, robust::ObjectiveKind::exp}) {
        auto c = small_unknown();
        c.replicates = 20;
        robust::SurrogateObjective obj;
        obj.kind = kind;
        const auto rep = compare_unknown_sigma(c, obj);
        const auto& t = rep.per_replicate;
        REQUIRE(t.columns.size() == 5);
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const double bs = t.number(r, "beta_star");
            for (const char* col : {"naive_excess", "oracle_surrogate_excess", "surrogate_s_excess"}) {
                const double e = t.number(r, col);
                CHECK(e >= -1e-12);
                CHECK(bs + e <= 0.95 + 1e-12);
                CHECK(bs + e > 0.0);
            }
        }
        std::vector<double> naive;
        for (std::size_t r = 0; r < t.rows.size(); ++r) naive.push_back(t.number(r, "naive_excess"));
        double mean = 0.0;
        for (double v : naive) mean += v;
        mean /= naive.size();
        CHECK(std::fabs(rep.summary.number(0, "mean_excess") - mean) < 1e-12);
        CHECK(std::fabs(rep.summary.number(0, "percentile_excess") - percentile(naive, obj.gamma)) < 1e-12);
    }
}

TEST_CASE("oracle surrogate with a huge pilot concentrates near zero excess") {
    auto c = small_unknown();
    c.epsilon = 1000000;
    c.replicates = 30;
    c.policies = {Policy::oracle_surrogate};
    const auto rep = compare_unknown_sigma(c, robust::SurrogateObjective{});
    CHECK(rep.summary.number(0, "max_excess") < 0.01);
}

TEST_CASE("fixed portfolio studies") {
    auto c = small_unknown();
    Portfolio p;
    p.budget = 500.0;
    for (double s : {1.0, 2.0, 0.7}) {
        ExperimentSpec e;
        e.sigma = s;
        e.delta_gap = 0.4;
        e.pilot = PilotEstimate{s, 15};
        p.experiments.push_back(e);
    }
    c.portfolio = p;
    const auto rep = compare_unknown_sigma(c, robust::SurrogateObjective{});
    const double bs = optimal_max_type2(p);
    for (std::size_t r = 0; r < rep.per_replicate.rows.size(); ++r) {
        CHECK(rep.per_replicate.number(r, "beta_star") == doctest::Approx(bs).epsilon(1e-14));
    }
}

TEST_CASE("EXP r* sweep") {
    auto c = preset("fig3", true);
    c.grid = {0.25, 0.5, 1.0, 2.0, 4.0};
    c.epsilon_set = {20, 500};
    const auto rep = exp_rstar_sweep(c);
    const auto& t = rep.summary;
    REQUIRE(t.rows.size() == 10);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double ratio = t.number(r, "ratio"), rs = t.number(r, "r_star");
        CHECK(t.number(r, "a1") + t.number(r, "a2") == doctest::Approx(20.0));
        if (ratio == 1.0) CHECK(std::fabs(rs - 1.0) < 1e-3);
        if (ratio < 1.0) CHECK(rs > 1.0);
        if (ratio > 1.0) CHECK(rs < 1.0);
    }
    for (std::size_t j = 0; j < 5; ++j) {
        if (j == 2) continue;
        CHECK(std::fabs(std::log(t.number(5 + j, "r_star"))) < std::fabs(std::log(t.number(j, "r_star"))));
    }
}

TEST_CASE("TOL and CONF r* sweep") {
    auto c = preset("fig2", true);
    c.grid = {0.25, 1.0, 4.0};
    const auto rep = tol_conf_rstar_sweep(c);
    const auto& t = rep.summary;
    // rows grouped by objective, level, then ratio
    std::vector<double> tol_low, conf_high;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto obj = std::get<std::string>(t.rows[r][0]);
        const double ratio = t.number(r, "ratio"), rs = t.number(r, "r_star");
        if (ratio == 1.0) CHECK(rs == doctest::Approx(1.0).epsilon(1e-12));
        if (obj == "tol" && ratio == 0.25) tol_low.push_back(rs);
        if (obj == "conf" && ratio == 4.0) conf_high.push_back(rs);
    }
    REQUIRE(tol_low.size() == c.gamma_grid.size());
    REQUIRE(conf_high.size() == c.delta_grid.size());
    for (std::size_t i = 1; i < tol_low.size(); ++i) CHECK(tol_low[i] > tol_low[i - 1]);
    for (std::size_t i = 1; i < conf_high.size(); ++i) CHECK(conf_high[i] < conf_high[i - 1]);
}

TEST_CASE("presets") {
    for (const char* name : {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6"}) {
        CHECK(preset(name, true).replicates == 200);
        CHECK(preset(name, false).seed == kDefaultSeed);
    }
    CHECK(preset("fig4", false).objective.kind == robust::ObjectiveKind::tol);
    CHECK(preset("fig5", false).objective.delta == 0.2);
    CHECK(preset("fig6", false).objective.kind == robust::ObjectiveKind::exp);
    CHECK_THROWS_AS(preset("fig9", false), Error);
    CHECK(policy_from_string("surrogate_s") == Policy::surrogate_s);
    CHECK_FALSE(policy_from_string("bogus").has_value());
}
