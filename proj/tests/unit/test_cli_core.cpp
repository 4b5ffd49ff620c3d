#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <string>
#include <variant>

#include "powerplan/config.hpp"
#include "powerplan/dispatch.hpp"
#include "powerplan/error.hpp"
#include "powerplan/report.hpp"

using namespace powerplan;
using namespace powerplan::cli;

namespace {

const char* kKnown = R"({
  "kind": "portfolio", "budget": 300, "alpha": 0.05,
  "experiments": [{"sigma": 1.0, "delta": 0.5}, {"sigma": 2.0, "delta": 0.6}]
})";

const char* kPilot = R"({
  "kind": "portfolio", "budget": 2000,
  "experiments": [
    {"pilot": {"s": 0.9, "epsilon": 20}, "delta": 0.1},
    {"pilot": {"s": 2.3, "epsilon": 20}, "delta": 0.3},
    {"pilot": {"s": 1.4, "epsilon": 25}, "delta": 0.5}
  ]
})";

std::vector<std::string> problems_of(const std::string& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.problems();
    }
    return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
    for (const auto& p : problems) {
        if (p.find(needle) != std::string::npos) return true;
    }
    return false;
}

void check_round_trip(const report::Table& t) {
    const auto text = report::to_csv(t);
    const auto back = report::parse_csv(text);
    CHECK(report::to_csv(back) == text);
    REQUIRE(back.columns == t.columns);
    REQUIRE(back.rows.size() == t.rows.size());
    CHECK(back.metadata == t.metadata);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            const auto& orig = t.rows[r][c];
            if (const auto* s = std::get_if<std::string>(&orig)) {
                CHECK(std::get<std::string>(back.rows[r][c]) == *s);
                continue;
            }
            const double want = std::strtod(report::format_cell(orig).c_str(), nullptr);
            const double got = back.number(r, t.columns[c]);
            if (std::isnan(want)) CHECK(std::isnan(got));
            else CHECK(got == want);
        }
    }
}

}  // namespace

TEST_CASE("minimal known-sigma portfolio parses") {
    const auto cfg = parse_config(kKnown);
    CHECK(cfg.kind == DocumentKind::portfolio);
    REQUIRE(cfg.portfolio.experiments.size() == 2);
    CHECK(*cfg.portfolio.experiments[1].sigma == 2.0);
    CHECK(cfg.portfolio.budget == 300.0);
}

TEST_CASE("schema errors carry paths") {
    auto p = problems_of(R"({"kind":"portfolio","budget":10,
        "experiments":[{"sigma":1,"delta":1},{"pilot":{"s":1.0,"epsilon":1},"delta":1}]})");
    CHECK(mentions(p, "experiments[1].pilot.epsilon: pilot size must be >= 2"));

    p = problems_of(R"({"kind":"portfolio","budget":10,"experiments":[{"sigma":1,"delta":1},{"sigma":1,"delta":-2}]})");
    CHECK(mentions(p, "experiments[1].delta"));

    p = problems_of(R"({"kind":"portfolio","budget":10,"bogus":3,"experiments":[{"sigma":1,"delta":1,"extra":0}]})");
    CHECK(mentions(p, "bogus: unknown key"));
    CHECK(mentions(p, "experiments[0].extra: unknown key"));

    p = problems_of(R"({"kind":"portfolio","experiments":[{"delta":1}]})");
    CHECK(mentions(p, "budget: missing required field"));
    CHECK(mentions(p, "experiments[0]: needs sigma or pilot data"));

    CHECK(mentions(problems_of(R"({"budget":10})"), "kind"));
    CHECK(!problems_of("{not json").empty());
    CHECK(mentions(problems_of(R"({"kind":"study","study":"fig9"})"), "study"));
    CHECK(mentions(problems_of(R"({"kind":"study","replicates":0})"), "replicates: must be >= 1"));
}

TEST_CASE("allocate emits the fixed columns") {
    const auto cfg = parse_config(kKnown);
    RunOptions opt;
    opt.command = Command::allocate;
    const auto out = dispatch(&cfg, opt);
    CHECK(out.table.columns == std::vector<std::string>{"index", "sigma", "delta", "n", "beta"});
    CHECK(!out.table.get("max_beta").empty());
    check_round_trip(out.table);

    opt.round = true;
    const auto rounded = dispatch(&cfg, opt);
    CHECK(rounded.table.columns.back() == "n_rounded");
    check_round_trip(rounded.table);
}

TEST_CASE("surrogate emits plan columns and metadata") {
    const auto cfg = parse_config(kPilot);
    RunOptions opt;
    opt.command = Command::surrogate;
    opt.variant = "tol";
    opt.gamma = 0.7;
    const auto out = dispatch(&cfg, opt);
    const std::vector<std::string> head{"index", "s", "epsilon", "c", "k", "n"};
    CHECK(std::vector<std::string>(out.table.columns.begin(), out.table.columns.begin() + 6) == head);
    CHECK(!out.table.get("delta_R").empty());
    CHECK(out.table.get("gamma") == "0.7");
    check_round_trip(out.table);

    opt.variant = "conf";
    const auto conf = dispatch(&cfg, opt);
    CHECK(!conf.table.get("gamma_R").empty());
    CHECK(!conf.table.get("beta_star_proxy").empty());
    CHECK(conf.table.get("delta") == "0.2");

    opt.variant = "exp";
    CHECK(!dispatch(&cfg, opt).table.get("g_R").empty());

    opt.variant = "maybe";
    CHECK_THROWS_AS(dispatch(&cfg, opt), Error);
}

TEST_CASE("validate and dispatch share the preflight") {
    auto cfg = parse_config(kKnown);
    RunOptions opt;
    opt.command = Command::validate;
    CHECK(dispatch(&cfg, opt).table.get("status") == "ok");
    opt.command = Command::allocate;
    CHECK_NOTHROW(dispatch(&cfg, opt));

    opt.gamma = 1.5;
    CHECK_THROWS_AS(preflight(&cfg, opt), Error);
    CHECK_THROWS_AS(dispatch(&cfg, opt), Error);
    opt.gamma.reset();

    // a programmatic portfolio that skipped the parser still fails in both paths
    cfg.portfolio.experiments[0].delta_gap = -1.0;
    CHECK_THROWS_AS(preflight(&cfg, opt), Error);
    CHECK_THROWS_AS(dispatch(&cfg, opt), Error);
}

TEST_CASE("downstream errors name the module and operation") {
    const auto cfg = parse_config(R"({"kind":"portfolio","budget":200,"experiments":[
        {"sigma":1,"pilot":{"s":1,"epsilon":20},"delta":1},{"sigma":2,"pilot":{"s":2,"epsilon":20},"delta":1}]})");
    RunOptions opt;
    opt.command = Command::two_exp;
    opt.variant = "conf";
    opt.delta = 0.99;
    try {
        dispatch(&cfg, opt);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.where().rfind("pair_exact::", 0) == 0);
        CHECK(std::string(e.what()).find("pair_exact::") != std::string::npos);
    }

    const auto three = parse_config(kPilot);
    opt.delta.reset();
    try {
        dispatch(&three, opt);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.where() == "cli::two_exp");
    }
}

TEST_CASE("two-exp rows") {
    const auto cfg = parse_config(R"({"kind":"portfolio","budget":200,"experiments":[
        {"sigma":1,"pilot":{"s":1,"epsilon":20},"delta":1},{"sigma":2,"pilot":{"s":2,"epsilon":20},"delta":1}]})");
    RunOptions opt;
    opt.command = Command::two_exp;
    opt.variant = "tol";
    opt.gamma = 0.9;
    const auto out = dispatch(&cfg, opt);
    CHECK(out.table.number(0, "a1") == 1.0);
    CHECK(out.table.number(0, "a2") == 4.0);
    CHECK(out.table.number(0, "r_star") == doctest::Approx(1.42447).epsilon(1e-5));
    check_round_trip(out.table);
}

TEST_CASE("simulate tables round-trip") {
    RunOptions opt;
    opt.command = Command::simulate;
    opt.variant = "fig1";
    opt.fast = true;
    opt.want_svg = true;
    const auto out = dispatch(nullptr, opt);
    CHECK(out.table.columns.front() == "N");
    CHECK(out.svg.find("<svg") != std::string::npos);
    check_round_trip(out.table);

    const auto study = parse_config(R"({"kind":"study","study":"custom","replicates":6,"experiments_count":3,
        "budget":500,"objective":"conf","delta":0.2,"threads":1})");
    opt.variant.clear();
    opt.want_svg = false;
    const auto custom = dispatch(&study, opt);
    CHECK(custom.table.rows.size() == 6);
    CHECK(custom.table.get("objective") == "conf");
    check_round_trip(custom.table);

    opt.variant = "custom";
    CHECK_THROWS_AS(dispatch(nullptr, opt), Error);
}

TEST_CASE("seed default is fixed") {
    RunOptions opt;
    opt.command = Command::simulate;
    opt.variant = "fig4";
    const auto study = parse_config(R"({"kind":"study","study":"fig4","replicates":5,"experiments_count":4})");
    const auto a = report::to_csv(dispatch(&study, opt).table);
    const auto b = report::to_csv(dispatch(&study, opt).table);
    CHECK(a == b);
    opt.seed = 1234;
    CHECK(report::to_csv(dispatch(&study, opt).table) != a);
}

TEST_CASE("number formatting") {
    CHECK(report::format_number(0.1) == "0.1");
    CHECK(report::format_number(1.0 / 3.0) == "0.3333333333");
    CHECK(report::format_number(2000.0) == "2000");
    CHECK(report::format_number(1e-20) == "1e-20");
    CHECK(report::format_number(std::nan("")) == "nan");
    report::Table t;
    t.columns = {"a", "b"};
    t.add_row({std::int64_t{3}, std::string("x")});
    CHECK_THROWS_AS(t.add_row({std::int64_t{1}}), Error);
    t.set("k", 0.25);
    CHECK(report::to_csv(t) == "a,b\n3,x\n# k=0.25\n");
}
