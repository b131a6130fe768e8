#pragma once

// Worker behavior: cost realization, effort choice, signal emission, and
// report policy for each strategy class. Every random draw comes from a
// stream keyed by (seed, purpose, round, worker, task), so perturbing one
// worker's strategy leaves all other randomness in the world untouched.

#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "spp/equilibrium.hpp"
#include "spp/scoring.hpp"

namespace spp {

// Named sub-streams derived from one master seed.
struct Streams {
    std::uint64_t seed = 0;

    RngStream truths(int round) const { return RngStream::keyed(seed, "truths", u(round)); }
    RngStream costs(int round, WorkerId w, TaskId t) const {
        return RngStream::keyed(seed, "costs", u(round), u(w), u(t));
    }
    RngStream signals(int round, WorkerId w, TaskId t) const {
        return RngStream::keyed(seed, "signals", u(round), u(w), u(t));
    }
    RngStream references(int round) const { return RngStream::keyed(seed, "references", u(round)); }
    RngStream pairs(int round, int group) const {
        return RngStream::keyed(seed, "pairs", u(round), u(group + 2));
    }
    RngStream arms(int round) const { return RngStream::keyed(seed, "arms", u(round)); }
    RngStream shuffles(int round, int group) const {
        return RngStream::keyed(seed, "shuffles", u(round), u(group + 2));
    }
    RngStream groups() const { return RngStream::keyed(seed, "groups"); }

private:
    static std::uint64_t u(long long v) { return static_cast<std::uint64_t>(v); }
};

// I.i.d. cost draws from the given law.
inline std::vector<double> realize_costs(RngStream& rng, const CostLaw& law, int count) {
    if (count < 1) throw std::invalid_argument("realize_costs: count must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (auto& c : out) c = law.sample(rng);
    return out;
}

// Signal equals the truth with probability p_H (high effort) or p_L (low).
// A single uniform per (worker, task) couples the two effort levels: the set
// of draws where low effort is correct is a subset of the high-effort set.
inline Label emit_signal(RngStream& rng, Label truth, Effort effort, const WorldConfig& cfg) {
    const double p = effort == Effort::High ? cfg.p_H : cfg.p_L;
    return rng.uniform01() < p ? truth : static_cast<Label>(-truth);
}

// Strategy classes ----------------------------------------------------------

struct ThresholdTruthful {};                       // exert iff cost <= c*(B); report truthfully
struct UninformativeCollude { Label label = +1; }; // constant report, no effort
struct Permutation {};                             // threshold effort, reports reverted
struct ColludeLearn { double delta_B = 0.0; };     // exert iff B >= B(cost) + delta_B
struct MeanFieldBehavioral {                       // accuracy ramp p(B) = lo + (hi-lo) * B / B_max
    double lo = 0.5;
    double hi = 0.5;

    double accuracy(double B, double B_max) const {
        double frac = B_max > 0.0 ? std::clamp(B / B_max, 0.0, 1.0) : 0.0;
        return lo + (hi - lo) * frac;
    }
};

struct StrategyProfile {
    std::variant<ThresholdTruthful, UninformativeCollude, Permutation, ColludeLearn,
                 MeanFieldBehavioral>
        kind = ThresholdTruthful{};

    bool needs_threshold_oracle() const {
        return std::holds_alternative<ThresholdTruthful>(kind) ||
               std::holds_alternative<Permutation>(kind) ||
               std::holds_alternative<ColludeLearn>(kind);
    }
    bool is_mean_field() const { return std::holds_alternative<MeanFieldBehavioral>(kind); }
};

inline StrategyProfile make_mean_field(double lo, double hi) {
    if (lo < 0.5 || hi > 1.0 || hi < lo)
        throw std::invalid_argument("mean-field accuracy curve must be nondecreasing within [0.5, 1]");
    StrategyProfile p;
    p.kind = MeanFieldBehavioral{lo, hi};
    return p;
}

struct TaskTruth {
    TaskId task = -1;
    Label truth = +1;
};

// Applies the strategy's effort rule and then its report rule to each task.
inline std::vector<ActRecord> act(const StrategyProfile& profile, double offered_B,
                                  std::span<const TaskTruth> tasks, const WorldConfig& cfg,
                                  const ThresholdOracle* oracle, const Streams& streams,
                                  WorkerId worker, int round) {
    if (profile.needs_threshold_oracle() && oracle == nullptr)
        throw std::invalid_argument("act: strategy requires an equilibrium threshold oracle");
    if (offered_B < 0.0 || offered_B > cfg.B_max + 1e-12)
        throw std::invalid_argument("act: offered bonus outside [0, B_max]");

    std::vector<ActRecord> out;
    out.reserve(tasks.size());
    for (const TaskTruth& tt : tasks) {
        ActRecord rec;
        if (const auto* uc = std::get_if<UninformativeCollude>(&profile.kind)) {
            rec.cost = 0.0;
            rec.effort = Effort::Low;
            rec.signal = uc->label;
            rec.report = uc->label;
        } else if (const auto* mf = std::get_if<MeanFieldBehavioral>(&profile.kind)) {
            rec.cost = 0.0;
            rec.effort = Effort::Low;
            RngStream sig = streams.signals(round, worker, tt.task);
            double p = mf->accuracy(offered_B, cfg.B_max);
            rec.signal = sig.uniform01() < p ? tt.truth : static_cast<Label>(-tt.truth);
            rec.report = rec.signal;
        } else {
            RngStream cost_rng = streams.costs(round, worker, tt.task);
            rec.cost = cfg.cost_law.sample(cost_rng);
            if (std::holds_alternative<ColludeLearn>(profile.kind)) {
                const double dB = std::get<ColludeLearn>(profile.kind).delta_B;
                const double required = oracle->bonus_for_threshold(rec.cost) + dB;
                rec.effort = offered_B >= required ? Effort::High : Effort::Low;
            } else {
                rec.effort = rec.cost <= oracle->c_star(offered_B) ? Effort::High : Effort::Low;
            }
            RngStream sig = streams.signals(round, worker, tt.task);
            rec.signal = emit_signal(sig, tt.truth, rec.effort, cfg);
            rec.report = std::holds_alternative<Permutation>(profile.kind)
                             ? static_cast<Label>(-rec.signal)
                             : rec.signal;
        }
        out.push_back(rec);
    }
    return out;
}

} // namespace spp
