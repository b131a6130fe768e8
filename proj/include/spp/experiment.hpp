#pragma once

// Experiment harness: seeded replications of the mechanism, CSV persistence,
// regret aggregation, and the incentive test battery.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spp/analysis.hpp"
#include "spp/bandit.hpp"
#include "spp/best_response.hpp"

namespace spp {

struct AnalysisOptions {
    double fit_window = 0.1;   // final fraction of the horizon used by the slope fit
    int oracle_grid = 3001;    // bonus grid backing U(B*) in regret accounting
    int curve_grid = 101;      // default equilibrium-curve resolution
    bool write_ledgers = true;
};

struct ExperimentConfig {
    WorldConfig world;
    BanditConfig bandit;
    std::vector<StrategyProfile> roster;
    std::vector<std::uint64_t> seeds;
    std::string output_dir;
    AnalysisOptions analysis;
};

namespace csvio {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline constexpr const char* trace_schema = "# schema: spp.trace.v1";
inline constexpr const char* trace_header =
    "t,phase,group,arm_index,offered_B,n_counts,p_match_est,p_bar_est,"
    "instant_utility,instant_regret,cumulative_regret";

// One row per round; two-group fields are joined minus;plus, and n_counts is
// the per-arm exploration count vector joined by semicolons.
inline std::string trace_row(const RoundLog& log, const BanditState& state) {
    std::ostringstream os;
    os << log.t << ',' << (log.explore ? "explore" : "exploit") << ',' << "-1;1" << ','
       << log.arm_of_group[0] << ';' << log.arm_of_group[1] << ',' << num(log.offered[0]) << ';'
       << num(log.offered[1]) << ',';
    for (std::size_t k = 0; k < state.est.size(); ++k) {
        if (k) os << ';';
        os << state.est[k].n;
    }
    os << ',' << num(log.p_match_est[0]) << ';' << num(log.p_match_est[1]) << ','
       << num(log.p_bar_est[0]) << ';' << num(log.p_bar_est[1]) << ','
       << num(log.oracle_util[0]) << ';' << num(log.oracle_util[1]) << ','
       << num(log.instant_regret) << ',' << num(log.cumulative_regret);
    return os.str();
}

inline constexpr const char* ledger_schema = "# schema: spp.ledger.v1";

inline void write_ledger_rows(std::ostream& os, const BonusLedger& ledger) {
    for (const auto& e : ledger.entries) {
        os << e.round << ',' << e.worker << ',' << e.task << ',' << e.reference << ','
           << num(e.raw_score) << ',' << num(e.paid_bonus) << ',' << num(e.cost) << ','
           << num(ledger.utility[static_cast<std::size_t>(e.worker)]) << '\n';
    }
}

inline constexpr const char* curve_schema = "# schema: spp.curve.v1";
inline constexpr const char* curve_header =
    "B,c_star,p_bar,p_match,expected_score,accuracy,utility";

inline void write_curve(std::ostream& os, const EquilibriumCurve& curve) {
    os << curve_schema << '\n';
    os << "# V1=" << num(curve.v1) << " V2=" << num(curve.v2) << '\n';
    os << curve_header << '\n';
    for (std::size_t i = 0; i < curve.size(); ++i) {
        os << num(curve.bonus[i]) << ',' << num(curve.c_star[i]) << ',' << num(curve.p_bar[i])
           << ',' << num(curve.p_match[i]) << ',' << num(curve.exp_score[i]) << ','
           << num(curve.accuracy[i]) << ',' << num(curve.util[i]) << '\n';
    }
}

} // namespace csvio

struct SeedResult {
    std::uint64_t seed = 0;
    double final_regret = 0.0;
    double fitted_slope = 0.0;
    RegretTrace trace;
};

struct ExperimentSummary {
    std::vector<SeedResult> per_seed;
    std::vector<double> mean_regret;   // pointwise mean of cumulative regret
    std::vector<double> band_low, band_high;  // mean +- 1.96 * se across seeds
};

// Runs one mechanism replication per seed, writing trace_<seed>.csv (and
// ledger_<seed>.csv when enabled) under output_dir, then summary.csv and
// mean_trace.csv. Deterministic per seed.
inline ExperimentSummary run_experiment(const ExperimentConfig& ec) {
    namespace fs = std::filesystem;
    if (ec.seeds.empty()) throw std::invalid_argument("run_experiment: need at least one seed");
    if (static_cast<int>(ec.roster.size()) != ec.world.N)
        throw std::invalid_argument("run_experiment: roster size must equal N");
    fs::create_directories(ec.output_dir);

    const auto T = static_cast<std::size_t>(ec.bandit.T);
    std::vector<double> sum(T, 0.0), sumsq(T, 0.0);
    ExperimentSummary summary;

    for (std::uint64_t seed : ec.seeds) {
        Mechanism mech(ec.bandit, ec.world, ec.roster, seed, ec.analysis.oracle_grid);

        std::ofstream ledger_out;
        if (ec.analysis.write_ledgers) {
            ledger_out.open(fs::path(ec.output_dir) / ("ledger_" + std::to_string(seed) + ".csv"));
            ledger_out << csvio::ledger_schema << '\n' << BonusLedger::csv_header() << '\n';
            mech.set_ledger_sink([&ledger_out](long, const BonusLedger& ledger) {
                csvio::write_ledger_rows(ledger_out, ledger);
            });
        }

        std::ofstream trace_out(fs::path(ec.output_dir) / ("trace_" + std::to_string(seed) + ".csv"));
        trace_out << csvio::trace_schema << '\n' << csvio::trace_header << '\n';

        SeedResult result;
        result.seed = seed;
        result.trace.cumulative.reserve(T);
        while (!mech.done()) {
            const RoundLog& log = mech.step();
            trace_out << csvio::trace_row(log, mech.state()) << '\n';
            result.trace.cumulative.push_back(log.cumulative_regret);
        }
        result.final_regret = result.trace.final_regret();
        result.fitted_slope = ec.bandit.T >= 100
                                  ? fit_regret_exponent(result.trace, ec.analysis.fit_window).slope
                                  : 0.0;
        for (std::size_t i = 0; i < T; ++i) {
            sum[i] += result.trace.cumulative[i];
            sumsq[i] += result.trace.cumulative[i] * result.trace.cumulative[i];
        }
        summary.per_seed.push_back(std::move(result));
    }

    const auto S = static_cast<double>(ec.seeds.size());
    summary.mean_regret.resize(T);
    summary.band_low.resize(T);
    summary.band_high.resize(T);
    for (std::size_t i = 0; i < T; ++i) {
        const double mean = sum[i] / S;
        const double var = std::max(0.0, sumsq[i] / S - mean * mean);
        const double half = S > 1 ? 1.96 * std::sqrt(var / S) : 0.0;
        summary.mean_regret[i] = mean;
        summary.band_low[i] = mean - half;
        summary.band_high[i] = mean + half;
    }

    std::ofstream sout(fs::path(ec.output_dir) / "summary.csv");
    sout << "# schema: spp.summary.v1\nseed,T,final_regret,fitted_slope,fit_window\n";
    for (const auto& r : summary.per_seed) {
        sout << r.seed << ',' << ec.bandit.T << ',' << csvio::num(r.final_regret) << ','
             << csvio::num(r.fitted_slope) << ',' << csvio::num(ec.analysis.fit_window) << '\n';
    }

    std::ofstream mout(fs::path(ec.output_dir) / "mean_trace.csv");
    mout << "# schema: spp.mean_trace.v1\nt,mean_regret,band_low,band_high\n";
    for (std::size_t i = 0; i < T; ++i) {
        mout << (i + 1) << ',' << csvio::num(summary.mean_regret[i]) << ','
             << csvio::num(summary.band_low[i]) << ',' << csvio::num(summary.band_high[i]) << '\n';
    }

    return summary;
}

struct BatteryOptions {
    double offered_B = 0.0;    // 0: use the grid optimum
    double delta_B = 0.0;      // 0: half of B_max
    int threshold_grid = 11;
    std::uint64_t seed = 20170201;
};

struct BatteryCase {
    std::string name;
    double best_gain = 0.0;
    double radius = 0.0;
    std::string best_deviation;
    bool pass = false;
};

struct BatteryReport {
    BatteryCase truthful;      // expect gain <= 0 within the confidence radius
    BatteryCase collude_learn; // expect significantly positive gain
    bool uninformative_scores_zero = false;
    double offered_B = 0.0;

    bool pass() const {
        return truthful.pass && collude_learn.pass && uninformative_scores_zero;
    }

    std::string to_string() const {
        std::ostringstream os;
        os << "offered B = " << offered_B << '\n';
        auto line = [&os](const BatteryCase& c) {
            os << c.name << ": max gain " << c.best_gain << " +- " << c.radius << " ("
               << c.best_deviation << ") -> " << (c.pass ? "PASS" : "FAIL") << '\n';
        };
        line(truthful);
        line(collude_learn);
        os << "uninformative collusion scores all zero -> "
           << (uninformative_scores_zero ? "PASS" : "FAIL") << '\n';
        return os.str();
    }
};

// Incentive battery: (a) no profitable deviation from the threshold-truthful
// profile, (b) a strictly profitable deviation from coordinated
// under-exertion, (c) the uninformative-collusion null where every raw score
// is exactly zero.
inline BatteryReport incentive_battery(const WorldConfig& cfg, long mc_budget,
                                       BatteryOptions opt = {}) {
    BatteryReport report;
    const double B = opt.offered_B > 0.0 ? opt.offered_B : optimal_bonus(cfg, 101).first;
    const double dB = opt.delta_B > 0.0 ? opt.delta_B : 0.5 * cfg.B_max;
    report.offered_B = B;

    auto run_case = [&](const std::vector<StrategyProfile>& roster, const std::string& name,
                        bool expect_positive) {
        BestResponseReport r = best_response_gain(0, roster, B, cfg, mc_budget, opt.seed,
                                                  opt.threshold_grid);
        const DeviationGain& best = r.best();
        BatteryCase c;
        c.name = name;
        c.best_gain = best.gain;
        c.radius = best.radius;
        c.best_deviation = best.deviation.name();
        c.pass = expect_positive ? best.gain - best.radius > 0.0 : best.gain <= best.radius;
        return c;
    };

    std::vector<StrategyProfile> truthful(static_cast<std::size_t>(cfg.N),
                                          StrategyProfile{ThresholdTruthful{}});
    report.truthful = run_case(truthful, "all threshold-truthful", false);

    std::vector<StrategyProfile> colluding(static_cast<std::size_t>(cfg.N),
                                           StrategyProfile{ColludeLearn{dB}});
    report.collude_learn = run_case(colluding, "all collude-learn", true);

    // Constant-report collusion: settle one full round, expect exact zeros.
    std::vector<TaskId> pool(static_cast<std::size_t>(cfg.N));
    for (int i = 0; i < cfg.N; ++i) pool[static_cast<std::size_t>(i)] = i;
    Assignment a = generate_pair_assignment(cfg.N, pool);
    Streams streams{opt.seed};
    RngStream truth_rng = streams.truths(0);
    std::vector<Label> truths = draw_ground_truth(truth_rng, cfg.N, cfg.prior_plus);
    ReportMatrix m;
    m.records.resize(static_cast<std::size_t>(cfg.N));
    m.offered_minus = m.offered_plus = B;
    StrategyProfile constant{UninformativeCollude{+1}};
    for (WorkerId w = 0; w < cfg.N; ++w) {
        std::vector<TaskTruth> ts;
        for (TaskId k : a.tasks_of[static_cast<std::size_t>(w)])
            ts.push_back({k, truths[static_cast<std::size_t>(k)]});
        m.records[static_cast<std::size_t>(w)] = act(constant, B, ts, cfg, nullptr, streams, w, 0);
    }
    RngStream ref_rng = streams.references(0);
    BonusLedger ledger = settle_round(m, a, B, B, ref_rng, 0, cfg.b);
    report.uninformative_scores_zero = true;
    for (const auto& e : ledger.entries)
        if (e.raw_score != 0.0) report.uninformative_scores_zero = false;

    return report;
}

} // namespace spp
