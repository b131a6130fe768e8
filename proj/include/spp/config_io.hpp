#pragma once

// JSON configuration loading. Key sets are strict: unknown keys are errors,
// and the world document must supply every field.

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "spp/experiment.hpp"

namespace spp {

namespace cfgio {

using nlohmann::json;

inline void require_keys(const json& j, const std::set<std::string>& required,
                         const std::set<std::string>& optional, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
    for (const auto& [key, _] : j.items())
        if (!required.count(key) && !optional.count(key))
            throw std::invalid_argument(where + ": unknown key '" + key + "'");
    for (const auto& key : required)
        if (!j.contains(key))
            throw std::invalid_argument(where + ": missing key '" + key + "'");
}

inline CostLaw parse_cost_law(const json& j, double c_max) {
    require_keys(j, {"family"}, {"gamma"}, "cost_law");
    const std::string family = j.at("family").get<std::string>();
    if (family == "uniform") {
        if (j.contains("gamma")) throw std::invalid_argument("cost_law: uniform takes no gamma");
        return CostLaw::uniform(c_max);
    }
    if (family == "power") {
        if (!j.contains("gamma")) throw std::invalid_argument("cost_law: power requires gamma");
        return CostLaw::power(j.at("gamma").get<double>(), c_max);
    }
    throw std::invalid_argument("cost_law: unsupported family '" + family + "'");
}

inline WorldConfig parse_world(const json& j) {
    require_keys(j,
                 {"p_H", "p_L", "cost_law", "c_max", "prior_plus", "eta", "b", "B_max", "N", "M",
                  "K", "d", "D"},
                 {}, "world");
    WorldConfig cfg;
    cfg.p_H = j.at("p_H").get<double>();
    cfg.p_L = j.at("p_L").get<double>();
    cfg.c_max = j.at("c_max").get<double>();
    cfg.cost_law = parse_cost_law(j.at("cost_law"), cfg.c_max);
    cfg.prior_plus = j.at("prior_plus").get<double>();
    cfg.eta = j.at("eta").get<double>();
    cfg.b = j.at("b").get<double>();
    cfg.B_max = j.at("B_max").get<double>();
    cfg.N = j.at("N").get<int>();
    cfg.M = j.at("M").get<int>();
    cfg.K = j.at("K").get<int>();
    cfg.d = j.at("d").get<int>();
    cfg.D = j.at("D").get<int>();
    return build_world(cfg);
}

inline BanditConfig parse_bandit(const json& j, const WorldConfig& world) {
    require_keys(j, {"T", "z", "theta"},
                 {"B_max", "p_floor", "mode", "payment_estimator", "mf_batch"}, "bandit");
    BanditConfig b;
    b.T = j.at("T").get<long>();
    b.z = j.at("z").get<double>();
    b.theta = j.at("theta").get<double>();
    b.B_max = j.value("B_max", world.B_max);
    b.p_floor = j.value("p_floor", world.p_L);
    b.mf_batch = j.value("mf_batch", 8);
    const std::string mode = j.value("mode", std::string("equilibrium"));
    if (mode == "equilibrium") b.mode = BanditMode::Equilibrium;
    else if (mode == "mean_field") b.mode = BanditMode::MeanField;
    else throw std::invalid_argument("bandit: unknown mode '" + mode + "'");
    const std::string pay = j.value("payment_estimator", std::string("plugin"));
    if (pay == "plugin") b.payment_estimator = PaymentEstimator::PlugIn;
    else if (pay == "empirical") b.payment_estimator = PaymentEstimator::Empirical;
    else throw std::invalid_argument("bandit: unknown payment_estimator '" + pay + "'");
    return b;
}

inline StrategyProfile parse_profile(const json& j, int worker, int N) {
    require_keys(j, {"kind"}, {"label", "delta_B", "lo", "hi"}, "agents");
    const std::string kind = j.at("kind").get<std::string>();
    auto scalar_or_indexed = [&](const json& v) {
        if (v.is_array()) {
            if (static_cast<int>(v.size()) != N)
                throw std::invalid_argument("agents: per-worker array must have N entries");
            return v.at(static_cast<std::size_t>(worker)).get<double>();
        }
        return v.get<double>();
    };
    if (kind == "ThresholdTruthful") return StrategyProfile{ThresholdTruthful{}};
    if (kind == "Permutation") return StrategyProfile{Permutation{}};
    if (kind == "UninformativeCollude") {
        const int label = j.value("label", 1);
        if (label != 1 && label != -1)
            throw std::invalid_argument("agents: UninformativeCollude label must be +1 or -1");
        return StrategyProfile{UninformativeCollude{static_cast<Label>(label)}};
    }
    if (kind == "ColludeLearn") {
        if (!j.contains("delta_B")) throw std::invalid_argument("agents: ColludeLearn needs delta_B");
        const double dB = j.at("delta_B").get<double>();
        if (!(dB > 0.0)) throw std::invalid_argument("agents: delta_B must be positive");
        return StrategyProfile{ColludeLearn{dB}};
    }
    if (kind == "MeanFieldBehavioral") {
        if (!j.contains("lo") || !j.contains("hi"))
            throw std::invalid_argument("agents: MeanFieldBehavioral needs lo and hi");
        return make_mean_field(scalar_or_indexed(j.at("lo")), scalar_or_indexed(j.at("hi")));
    }
    throw std::invalid_argument("agents: unknown kind '" + kind + "'");
}

// A single profile object applies to every worker; an array gives one
// profile per worker.
inline std::vector<StrategyProfile> parse_roster(const json& j, int N) {
    std::vector<StrategyProfile> roster;
    roster.reserve(static_cast<std::size_t>(N));
    if (j.is_array()) {
        if (static_cast<int>(j.size()) != N)
            throw std::invalid_argument("agents: roster array must have N entries");
        for (int w = 0; w < N; ++w) roster.push_back(parse_profile(j.at(static_cast<std::size_t>(w)), w, N));
    } else {
        for (int w = 0; w < N; ++w) roster.push_back(parse_profile(j, w, N));
    }
    return roster;
}

inline AnalysisOptions parse_analysis(const json& j) {
    require_keys(j, {}, {"fit_window", "oracle_grid", "curve_grid", "write_ledgers"}, "analysis");
    AnalysisOptions a;
    a.fit_window = j.value("fit_window", 0.1);
    a.oracle_grid = j.value("oracle_grid", 3001);
    a.curve_grid = j.value("curve_grid", 101);
    a.write_ledgers = j.value("write_ledgers", true);
    if (!(a.fit_window > 0.0 && a.fit_window <= 1.0))
        throw std::invalid_argument("analysis: fit_window must lie in (0, 1]");
    return a;
}

inline ExperimentConfig parse_experiment(const json& j) {
    require_keys(j, {"world", "bandit", "agents", "seeds", "output_dir"}, {"analysis"},
                 "experiment");
    ExperimentConfig ec;
    ec.world = parse_world(j.at("world"));
    ec.bandit = parse_bandit(j.at("bandit"), ec.world);
    ec.roster = parse_roster(j.at("agents"), ec.world.N);
    for (const auto& s : j.at("seeds")) ec.seeds.push_back(s.get<std::uint64_t>());
    if (ec.seeds.empty()) throw std::invalid_argument("experiment: need at least one seed");
    ec.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("analysis")) ec.analysis = parse_analysis(j.at("analysis"));
    return ec;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json j;
    in >> j;
    return j;
}

// Accepts either a bare world document or a full experiment document.
inline WorldConfig world_from_any(const json& j) {
    if (j.contains("world")) return parse_world(j.at("world"));
    return parse_world(j);
}

} // namespace cfgio

} // namespace spp
