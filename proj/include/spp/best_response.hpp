#pragma once

// Monte-Carlo best-response search: how much can one worker gain by deviating
// from a prescribed profile when everyone else sticks to theirs? Deviations
// range over effort rules (always high, always low, every threshold on a
// grid) crossed with truthful or reverted reporting. All randomness is
// coupled across deviations: the peers, the deviator's costs, and the signal
// uniforms are drawn once per sample, so gain estimates difference away most
// of the noise.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "spp/agents.hpp"
#include "spp/bandit.hpp"
#include "spp/equilibrium.hpp"
#include "spp/scoring.hpp"
#include "spp/world.hpp"

namespace spp {

struct Deviation {
    enum class EffortRule { AlwaysHigh, AlwaysLow, Threshold };
    EffortRule rule = EffortRule::Threshold;
    double threshold = 0.0;
    bool truthful = true;

    std::string name() const {
        std::string base = rule == EffortRule::AlwaysHigh   ? "always-H"
                           : rule == EffortRule::AlwaysLow ? "always-L"
                                                           : "threshold@" + std::to_string(threshold);
        return base + (truthful ? "/truthful" : "/reverted");
    }
};

struct DeviationGain {
    Deviation deviation;
    double gain = 0.0;    // mean utility difference per round
    double radius = 0.0;  // 1.96 * standard error
};

struct BestResponseReport {
    std::vector<DeviationGain> gains;  // one per deviation, same order as the grid

    const DeviationGain& best() const {
        return *std::max_element(gains.begin(), gains.end(),
                                 [](const DeviationGain& a, const DeviationGain& b) {
                                     return a.gain < b.gain;
                                 });
    }
};

inline std::vector<Deviation> default_deviation_set(double c_max, int grid_points) {
    std::vector<Deviation> out;
    for (bool truthful : {true, false}) {
        out.push_back({Deviation::EffortRule::AlwaysHigh, 0.0, truthful});
        out.push_back({Deviation::EffortRule::AlwaysLow, 0.0, truthful});
        for (int i = 0; i < grid_points; ++i)
            out.push_back({Deviation::EffortRule::Threshold,
                           c_max * static_cast<double>(i) / (grid_points - 1), truthful});
    }
    return out;
}

namespace detail {

struct DeviatorDraws {
    std::vector<double> costs;     // per task
    std::vector<double> uniforms;  // per task; signal correct iff u < p_effort
};

inline ActRecord apply_deviation(const Deviation& dev, double cost, double u, Label truth,
                                 const WorldConfig& cfg) {
    ActRecord rec;
    rec.cost = cost;
    switch (dev.rule) {
        case Deviation::EffortRule::AlwaysHigh: rec.effort = Effort::High; break;
        case Deviation::EffortRule::AlwaysLow: rec.effort = Effort::Low; break;
        case Deviation::EffortRule::Threshold:
            rec.effort = cost <= dev.threshold ? Effort::High : Effort::Low;
            break;
    }
    const double p = rec.effort == Effort::High ? cfg.p_H : cfg.p_L;
    rec.signal = u < p ? truth : static_cast<Label>(-truth);
    rec.report = dev.truthful ? rec.signal : static_cast<Label>(-rec.signal);
    return rec;
}

} // namespace detail

// Estimates E[u_i | deviation] - E[u_i | prescribed] for every deviation in
// the set, over mc_samples simulated one-shot rounds on the N-worker pairing
// scheme at bonus scale B. The same peer realization and the same deviator
// cost/signal draws back every deviation within a sample.
inline BestResponseReport best_response_gain(WorkerId deviator,
                                             const std::vector<StrategyProfile>& roster,
                                             double offered_B, const WorldConfig& cfg,
                                             long mc_samples, std::uint64_t seed,
                                             const std::vector<Deviation>& deviations) {
    if (mc_samples < 1) throw std::invalid_argument("best_response_gain: need samples");
    if (static_cast<int>(roster.size()) != cfg.N)
        throw std::invalid_argument("best_response_gain: roster size must equal N");

    ThresholdOracle oracle(cfg);
    Streams streams{seed};

    std::vector<TaskId> pool(static_cast<std::size_t>(cfg.N));
    for (int i = 0; i < cfg.N; ++i) pool[static_cast<std::size_t>(i)] = i;
    const Assignment a = generate_pair_assignment(cfg.N, pool);
    const auto& my_tasks = a.tasks_of[static_cast<std::size_t>(deviator)];

    // References for the deviator's tasks are the unique sharing partners.
    std::vector<WorkerId> refs;
    for (TaskId k : my_tasks)
        for (WorkerId v : a.workers_of.at(k))
            if (v != deviator) refs.push_back(v);

    const std::size_t n_dev = deviations.size();
    std::vector<double> sum(n_dev, 0.0), sumsq(n_dev, 0.0);

    for (long s = 0; s < mc_samples; ++s) {
        const int round = static_cast<int>(s);
        RngStream truth_rng = streams.truths(round);
        std::vector<Label> truths = draw_ground_truth(truth_rng, cfg.N, cfg.prior_plus);

        ReportMatrix m;
        m.records.resize(static_cast<std::size_t>(cfg.N));
        m.offered_minus = m.offered_plus = offered_B;
        for (WorkerId w = 0; w < cfg.N; ++w) {
            std::vector<TaskTruth> ts;
            for (TaskId k : a.tasks_of[static_cast<std::size_t>(w)])
                ts.push_back({k, truths[static_cast<std::size_t>(k)]});
            m.records[static_cast<std::size_t>(w)] =
                act(roster[static_cast<std::size_t>(w)], offered_B, ts, cfg, &oracle, streams, w, round);
        }

        // The deviator's own draws, shared by the baseline and every deviation.
        detail::DeviatorDraws draws;
        for (TaskId k : my_tasks) {
            RngStream cost_rng = streams.costs(round, deviator, k);
            draws.costs.push_back(cfg.cost_law.sample(cost_rng));
            RngStream sig_rng = streams.signals(round, deviator, k);
            draws.uniforms.push_back(sig_rng.uniform01());
        }

        auto utility_of = [&](const std::vector<ActRecord>& mine) {
            m.records[static_cast<std::size_t>(deviator)] = mine;
            double u = static_cast<double>(my_tasks.size()) * cfg.b;
            for (std::size_t i = 0; i < my_tasks.size(); ++i) {
                const double raw = dg13_score(deviator, my_tasks[i], refs[i], m, a);
                u += offered_B * raw - mine[i].incurred();
            }
            return u;
        };

        const std::vector<ActRecord> baseline = m.records[static_cast<std::size_t>(deviator)];
        const double base_u = utility_of(baseline);

        for (std::size_t di = 0; di < n_dev; ++di) {
            std::vector<ActRecord> mine;
            mine.reserve(my_tasks.size());
            for (std::size_t i = 0; i < my_tasks.size(); ++i)
                mine.push_back(detail::apply_deviation(
                    deviations[di], draws.costs[i], draws.uniforms[i],
                    truths[static_cast<std::size_t>(my_tasks[i])], cfg));
            const double diff = utility_of(mine) - base_u;
            sum[di] += diff;
            sumsq[di] += diff * diff;
        }
        m.records[static_cast<std::size_t>(deviator)] = baseline;
    }

    BestResponseReport report;
    for (std::size_t di = 0; di < n_dev; ++di) {
        const double mean = sum[di] / static_cast<double>(mc_samples);
        const double var =
            std::max(0.0, sumsq[di] / static_cast<double>(mc_samples) - mean * mean);
        DeviationGain g;
        g.deviation = deviations[di];
        g.gain = mean;
        g.radius = 1.96 * std::sqrt(var / static_cast<double>(mc_samples));
        report.gains.push_back(g);
    }
    return report;
}

inline BestResponseReport best_response_gain(WorkerId deviator,
                                             const std::vector<StrategyProfile>& roster,
                                             double offered_B, const WorldConfig& cfg,
                                             long mc_samples, std::uint64_t seed,
                                             int threshold_grid = 11) {
    return best_response_gain(deviator, roster, offered_B, cfg, mc_samples, seed,
                              default_deviation_set(cfg.c_max, threshold_grid));
}

} // namespace spp
