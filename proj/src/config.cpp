#include "powerplan/config.hpp"

#include <json.hpp>
#include <set>

#include "powerplan/error.hpp"

namespace powerplan::cli {

namespace {

using nlohmann::json;

class Reader {
public:
    std::vector<std::string> problems;

    void fail(const std::string& path, const std::string& msg) { problems.push_back(path + ": " + msg); }

    void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
        for (const auto& [key, value] : obj.items()) {
            if (!allowed.contains(key)) fail(join(path, key), "unknown key");
        }
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }

    std::optional<double> number(const json& obj, const std::string& path, const std::string& key, bool required) {
        const auto p = join(path, key);
        if (!obj.contains(key)) {
            if (required) fail(p, "missing required field");
            return std::nullopt;
        }
        const auto& v = obj.at(key);
        if (!v.is_number()) {
            fail(p, "must be a number");
            return std::nullopt;
        }
        return v.get<double>();
    }

    std::optional<double> positive(const json& obj, const std::string& path, const std::string& key, bool required) {
        auto v = number(obj, path, key, required);
        if (v && !(*v > 0.0)) {
            fail(join(path, key), "must be positive");
            return std::nullopt;
        }
        return v;
    }

    std::optional<double> probability(const json& obj, const std::string& path, const std::string& key) {
        auto v = number(obj, path, key, false);
        if (v && !(*v > 0.0 && *v < 1.0)) {
            fail(join(path, key), "must lie in (0, 1)");
            return std::nullopt;
        }
        return v;
    }

    std::optional<long long> integer(const json& obj, const std::string& path, const std::string& key) {
        if (!obj.contains(key)) return std::nullopt;
        const auto& v = obj.at(key);
        if (!v.is_number_integer()) {
            fail(join(path, key), "must be an integer");
            return std::nullopt;
        }
        return v.get<long long>();
    }

    std::optional<std::string> text(const json& obj, const std::string& path, const std::string& key) {
        if (!obj.contains(key)) return std::nullopt;
        const auto& v = obj.at(key);
        if (!v.is_string()) {
            fail(join(path, key), "must be a string");
            return std::nullopt;
        }
        return v.get<std::string>();
    }

    std::optional<std::vector<double>> numbers(const json& obj, const std::string& path, const std::string& key) {
        if (!obj.contains(key)) return std::nullopt;
        const auto& v = obj.at(key);
        if (!v.is_array()) {
            fail(join(path, key), "must be an array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                fail(join(path, key) + "[" + std::to_string(i) + "]", "must be a number");
                return std::nullopt;
            }
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::optional<sim::Range> range(const json& obj, const std::string& path, const std::string& key) {
        auto v = numbers(obj, path, key);
        if (!v) return std::nullopt;
        if (v->size() != 2 || !((*v)[0] > 0.0) || (*v)[1] < (*v)[0]) {
            fail(join(path, key), "must be [lo, hi] with 0 < lo <= hi");
            return std::nullopt;
        }
        return sim::Range{(*v)[0], (*v)[1]};
    }
};

std::vector<ExperimentSpec> read_experiments(Reader& rd, const json& arr, const std::string& path) {
    std::vector<ExperimentSpec> out;
    if (!arr.is_array() || arr.empty()) {
        rd.fail(path, "must be a non-empty array");
        return out;
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        const auto& e = arr[i];
        if (!e.is_object()) {
            rd.fail(p, "must be an object");
            continue;
        }
        rd.check_keys(e, p, {"name", "sigma", "pilot", "delta", "theta"});
        ExperimentSpec spec;
        if (auto v = rd.positive(e, p, "sigma", false)) spec.sigma = *v;
        if (auto v = rd.positive(e, p, "delta", true)) spec.delta_gap = *v;
        if (auto v = rd.number(e, p, "theta", false)) spec.theta = *v;
        rd.text(e, p, "name");
        if (e.contains("pilot")) {
            const auto& pl = e.at("pilot");
            const std::string pp = p + ".pilot";
            if (!pl.is_object()) {
                rd.fail(pp, "must be an object");
            } else {
                rd.check_keys(pl, pp, {"s", "epsilon"});
                auto s = rd.positive(pl, pp, "s", true);
                auto eps = rd.integer(pl, pp, "epsilon");
                if (!pl.contains("epsilon")) rd.fail(pp + ".epsilon", "missing required field");
                if (eps && *eps < 2) {
                    rd.fail(pp + ".epsilon", "pilot size must be >= 2");
                    eps.reset();
                }
                if (s && eps) spec.pilot = PilotEstimate{*s, static_cast<int>(*eps)};
            }
        }
        if (!e.contains("sigma") && !e.contains("pilot")) rd.fail(p, "needs sigma or pilot data");
        out.push_back(spec);
    }
    return out;
}

void read_portfolio(Reader& rd, const json& doc, RunConfig& cfg) {
    rd.check_keys(doc, "", {"kind", "budget", "alpha", "gamma", "delta", "objective", "experiments"});
    if (auto v = rd.positive(doc, "", "budget", true)) cfg.portfolio.budget = *v;
    if (auto v = rd.probability(doc, "", "alpha")) cfg.portfolio.alpha = *v;
    cfg.gamma = rd.probability(doc, "", "gamma");
    if (auto v = rd.positive(doc, "", "delta", false)) cfg.delta = *v;
    if (auto v = rd.text(doc, "", "objective")) {
        cfg.objective = objective_from_string(*v);
        if (!cfg.objective) rd.fail("objective", "must be one of tol, conf, exp");
    }
    if (!doc.contains("experiments")) {
        rd.fail("experiments", "missing required field");
    } else {
        cfg.portfolio.experiments = read_experiments(rd, doc.at("experiments"), "experiments");
    }
}

void read_study(Reader& rd, const json& doc, RunConfig& cfg) {
    rd.check_keys(doc, "", {"kind", "study", "replicates", "seed", "alpha", "budget", "experiments_count",
                            "epsilon", "sigma_range", "delta_range", "grid", "gamma_grid", "delta_grid",
                            "epsilon_set", "difficulty_sum", "policies", "objective", "gamma", "delta", "threads",
                            "portfolio"});
    std::string name = "custom";
    if (auto v = rd.text(doc, "", "study")) name = *v;
    static const std::set<std::string> studies{"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "custom"};
    if (!studies.contains(name)) {
        rd.fail("study", "must be one of fig1..fig6 or custom");
        name = "custom";
    }
    auto& st = cfg.study;
    st = sim::preset(name, false);
    if (auto v = rd.integer(doc, "", "replicates")) {
        if (*v < 1) rd.fail("replicates", "must be >= 1");
        else {
            st.replicates = static_cast<std::size_t>(*v);
            cfg.replicates_given = true;
        }
    }
    if (doc.contains("seed")) {
        const auto& s = doc.at("seed");
        if (s.is_number_unsigned()) st.seed = s.get<std::uint64_t>();
        else if (s.is_number_integer() && s.get<long long>() >= 0) st.seed = s.get<std::uint64_t>();
        else rd.fail("seed", "must be a nonnegative integer");
    }
    if (auto v = rd.probability(doc, "", "alpha")) st.alpha = *v;
    if (auto v = rd.positive(doc, "", "budget", false)) st.budget = *v;
    if (auto v = rd.integer(doc, "", "experiments_count")) {
        if (*v < 1) rd.fail("experiments_count", "must be >= 1");
        else st.experiments = static_cast<int>(*v);
    }
    if (auto v = rd.integer(doc, "", "epsilon")) {
        if (*v < 2) rd.fail("epsilon", "pilot size must be >= 2");
        else st.epsilon = static_cast<int>(*v);
    }
    if (auto v = rd.range(doc, "", "sigma_range")) st.sigma = *v;
    if (auto v = rd.range(doc, "", "delta_range")) st.delta = *v;
    if (auto v = rd.numbers(doc, "", "grid")) {
        if (v->empty()) rd.fail("grid", "must not be empty");
        for (double x : *v) {
            if (!(x > 0.0)) {
                rd.fail("grid", "values must be positive");
                break;
            }
        }
        st.grid = *v;
    }
    if (auto v = rd.numbers(doc, "", "gamma_grid")) {
        for (double x : *v) {
            if (!(x > 0.0 && x < 1.0)) {
                rd.fail("gamma_grid", "values must lie in (0, 1)");
                break;
            }
        }
        st.gamma_grid = *v;
    }
    if (auto v = rd.numbers(doc, "", "delta_grid")) {
        for (double x : *v) {
            if (!(x > 0.0 && x < 1.0)) {
                rd.fail("delta_grid", "values must lie in (0, 1)");
                break;
            }
        }
        st.delta_grid = *v;
    }
    if (auto v = rd.numbers(doc, "", "epsilon_set")) {
        st.epsilon_set.clear();
        for (double x : *v) {
            if (!(x >= 2.0) || x != std::floor(x)) {
                rd.fail("epsilon_set", "pilot sizes must be integers >= 2");
                break;
            }
            st.epsilon_set.push_back(static_cast<int>(x));
        }
    }
    if (auto v = rd.positive(doc, "", "difficulty_sum", false)) st.pair_difficulty_sum = *v;
    if (doc.contains("policies")) {
        const auto& arr = doc.at("policies");
        if (!arr.is_array() || arr.empty()) {
            rd.fail("policies", "must be a non-empty array");
        } else {
            st.policies.clear();
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const std::string p = "policies[" + std::to_string(i) + "]";
                const auto pol = arr[i].is_string() ? sim::policy_from_string(arr[i].get<std::string>()) : std::nullopt;
                if (!pol) rd.fail(p, "must be one of naive, oracle_surrogate, surrogate_s");
                else st.policies.push_back(*pol);
            }
        }
    }
    if (auto v = rd.text(doc, "", "objective")) {
        if (auto k = objective_from_string(*v)) st.objective.kind = *k;
        else rd.fail("objective", "must be one of tol, conf, exp");
    }
    if (auto v = rd.probability(doc, "", "gamma")) st.objective.gamma = *v;
    if (auto v = rd.probability(doc, "", "delta")) st.objective.delta = *v;
    if (auto v = rd.integer(doc, "", "threads")) {
        if (*v < 0) rd.fail("threads", "must be >= 0");
        else st.threads = static_cast<unsigned>(*v);
    }
    if (doc.contains("portfolio")) {
        const auto& p = doc.at("portfolio");
        if (!p.is_object()) {
            rd.fail("portfolio", "must be an object");
        } else {
            rd.check_keys(p, "portfolio", {"budget", "alpha", "experiments"});
            Portfolio fixed;
            fixed.budget = st.budget;
            fixed.alpha = st.alpha;
            if (auto v = rd.positive(p, "portfolio", "budget", false)) fixed.budget = *v;
            if (auto v = rd.probability(p, "portfolio", "alpha")) fixed.alpha = *v;
            if (!p.contains("experiments")) rd.fail("portfolio.experiments", "missing required field");
            else fixed.experiments = read_experiments(rd, p.at("experiments"), "portfolio.experiments");
            for (std::size_t i = 0; i < fixed.experiments.size(); ++i) {
                if (!fixed.experiments[i].sigma) {
                    rd.fail("portfolio.experiments[" + std::to_string(i) + "].sigma",
                            "simulation needs the true sigma");
                }
            }
            st.portfolio = fixed;
        }
    }
}

}  // namespace

std::optional<robust::ObjectiveKind> objective_from_string(const std::string& name) {
    if (name == "tol") return robust::ObjectiveKind::tol;
    if (name == "conf") return robust::ObjectiveKind::conf;
    if (name == "exp") return robust::ObjectiveKind::exp;
    return std::nullopt;
}

RunConfig parse_config(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("document: not valid JSON (") + e.what() + ")"});
    }
    if (!doc.is_object()) throw ConfigError({"document: must be a JSON object"});
    Reader rd;
    RunConfig cfg;
    const auto kind = rd.text(doc, "", "kind");
    if (!doc.contains("kind")) {
        rd.fail("kind", "missing required field");
    } else if (kind == "portfolio") {
        cfg.kind = DocumentKind::portfolio;
        read_portfolio(rd, doc, cfg);
    } else if (kind == "study") {
        cfg.kind = DocumentKind::study;
        read_study(rd, doc, cfg);
    } else if (kind) {
        rd.fail("kind", "must be \"portfolio\" or \"study\"");
    }
    if (!rd.problems.empty()) throw ConfigError(rd.problems);
    return cfg;
}

}  // namespace powerplan::cli
