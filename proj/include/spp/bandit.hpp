#pragma once

// Posted-price bandit over bonus levels. The crowd is split into two groups;
// each group's price is learned exclusively from the other group's samples,
// which removes any incentive for a worker to distort the learning that
// prices their own group. Exploration follows the deterministic schedule
// D(t) = t^theta * ln t per arm; exploitation offers each group the argmax of
// the plug-in utility at its estimated accuracy.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spp/agents.hpp"
#include "spp/equilibrium.hpp"
#include "spp/scoring.hpp"
#include "spp/world.hpp"

namespace spp {

enum class BanditMode { Equilibrium, MeanField };
enum class PaymentEstimator { PlugIn, Empirical };

struct BanditConfig {
    long T = 0;                 // horizon
    double z = 0.25;            // arm-grid exponent: ceil(T^z) arms
    double theta = 0.5;         // exploration exponent: D(t) = t^theta * ln t
    double B_max = 0.0;         // copied from the world when 0
    double p_floor = 0.0;       // estimate clamp floor; world p_L when 0
    BanditMode mode = BanditMode::Equilibrium;
    PaymentEstimator payment_estimator = PaymentEstimator::PlugIn;
    int mf_batch = 8;           // common tasks per pair in mean-field explorations

    int arm_count() const {
        return static_cast<int>(std::ceil(std::pow(static_cast<double>(T), z)));
    }
    double schedule(long t) const {
        return std::pow(static_cast<double>(t), theta) * std::log(static_cast<double>(t));
    }
};

inline int group_index(int g) { return g < 0 ? 0 : 1; }
inline int group_of_index(int idx) { return idx == 0 ? -1 : +1; }

struct ArmEstimates {
    long n = 0;                              // exploration count (shared by both groups)
    std::array<double, 2> match_sum{0, 0};   // raw running sums per priced group
    std::array<long, 2> match_count{0, 0};
    std::array<double, 2> score_sum{0, 0};   // observed raw scores, for the empirical payment option
    std::array<long, 2> score_count{0, 0};
    std::array<double, 2> p_match{0.5, 0.5}; // clamped estimates
    std::array<double, 2> p_bar{0.5, 0.5};
};

struct RoundLog {
    long t = 0;
    bool explore = false;
    int arm = -1;                            // explored arm (exploration rounds)
    std::array<int, 2> arm_of_group{-1, -1};
    std::array<double, 2> offered{0, 0};     // bonus per group (-1, +1)
    std::array<double, 2> p_match_est{0.5, 0.5};
    std::array<double, 2> p_bar_est{0.5, 0.5};
    std::array<double, 2> oracle_util{0, 0};
    double instant_regret = 0.0;
    double cumulative_regret = 0.0;
};

struct BanditState {
    std::vector<double> arms;                 // B_k = k * B_max / N_a, k = 1..N_a
    std::vector<ArmEstimates> est;            // per arm
    std::vector<int> group_of;                // worker -> {-1, +1}
    // Mean-field extras: per worker per arm.
    std::vector<std::vector<double>> mf_match_sum;
    std::vector<std::vector<long>> mf_match_count;
    std::vector<std::vector<double>> mf_recovered;  // p_i(B_k), clamped to [0.5, 1]
    double cumulative_regret = 0.0;
    std::vector<RoundLog> trace;

    long count(int arm) const { return est[static_cast<std::size_t>(arm)].n; }

    // Arms still below the schedule at time t.
    std::vector<int> exploration_set(const BanditConfig& bcfg, long t) const {
        std::vector<int> out;
        const double need = bcfg.schedule(t);
        for (std::size_t k = 0; k < arms.size(); ++k)
            if (static_cast<double>(est[k].n) < need) out.push_back(static_cast<int>(k));
        return out;
    }
};

inline std::vector<int> exploration_set(const BanditState& state, const BanditConfig& bcfg, long t) {
    return state.exploration_set(bcfg, t);
}

// Plug-in accuracy estimate: invert the matching probability, then clamp.
inline double plug_in_accuracy(double p_match, double floor_p) {
    const double pm = std::max(p_match, 0.5);
    return std::max(invert_match(pm), floor_p);
}

// Per-worker accuracy recovery under the mean-field assumption: from the
// group-mean accuracy g and a worker's matching rate m,
//   p_i = (m + g - 1) / (2g - 1), clamped to [0.5, 1].
// Degenerate group mean (g == 0.5) keeps the previous value.
inline std::optional<double> mean_field_recover(double worker_match, double group_mean) {
    const double denom = 2.0 * group_mean - 1.0;
    if (denom <= 0.0) return std::nullopt;
    const double p = (worker_match + group_mean - 1.0) / denom;
    return std::clamp(p, 0.5, 1.0);
}

// The sequential mechanism. Construction validates both configs and builds
// the arm grid; rounds 1..N_a are the forced pass that explores each arm
// once. step() advances one round so tests can inspect intermediate state.
class Mechanism {
public:
    using LedgerSink = std::function<void(long t, const BonusLedger&)>;

    Mechanism(BanditConfig bcfg, WorldConfig cfg, std::vector<StrategyProfile> roster,
              std::uint64_t seed, int oracle_grid = 3001)
        : bcfg_(bcfg), cfg_(cfg), roster_(std::move(roster)), streams_{seed}, oracle_(cfg) {
        if (bcfg_.T < 1) throw std::invalid_argument("bandit horizon must be >= 1");
        if (!(bcfg_.z > 0.0 && bcfg_.z < 1.0)) throw std::invalid_argument("z must lie in (0, 1)");
        if (bcfg_.theta < 0.0 || bcfg_.theta > 1.0)
            throw std::invalid_argument("theta must lie in [0, 1]");
        if (bcfg_.mf_batch < 1) throw std::invalid_argument("mf_batch must be >= 1");
        if (bcfg_.B_max <= 0.0) bcfg_.B_max = cfg_.B_max;
        if (bcfg_.B_max > cfg_.B_max)
            throw std::invalid_argument("bandit B_max cannot exceed the world B_max");
        if (bcfg_.p_floor <= 0.0) bcfg_.p_floor = cfg_.p_L;
        if (static_cast<int>(roster_.size()) != cfg_.N)
            throw std::invalid_argument("roster size must equal N");
        if (bcfg_.mode == BanditMode::Equilibrium && !(cfg_.p_L > 0.5))
            throw std::invalid_argument("p_L must exceed 0.5 for equilibrium-mode learning");
        if (bcfg_.mode == BanditMode::MeanField)
            for (const auto& p : roster_)
                if (!p.is_mean_field())
                    throw std::invalid_argument("mean-field mode requires mean-field profiles");

        const int na = bcfg_.arm_count();
        state_.arms.resize(static_cast<std::size_t>(na));
        for (int k = 1; k <= na; ++k)
            state_.arms[static_cast<std::size_t>(k - 1)] = bcfg_.B_max * k / na;
        ArmEstimates blank;
        blank.p_bar = {bcfg_.p_floor, bcfg_.p_floor};  // clamp floor holds from the start
        state_.est.assign(static_cast<std::size_t>(na), blank);
        RngStream grp = streams_.groups();
        state_.group_of = split_groups(cfg_.N, grp);
        if (bcfg_.mode == BanditMode::MeanField) {
            state_.mf_match_sum.assign(static_cast<std::size_t>(cfg_.N),
                                       std::vector<double>(static_cast<std::size_t>(na), 0.0));
            state_.mf_match_count.assign(static_cast<std::size_t>(cfg_.N),
                                         std::vector<long>(static_cast<std::size_t>(na), 0));
            state_.mf_recovered.assign(static_cast<std::size_t>(cfg_.N),
                                       std::vector<double>(static_cast<std::size_t>(na), 0.5));
        }
        build_oracle(oracle_grid);
    }

    const BanditState& state() const { return state_; }
    const BanditConfig& bandit_config() const { return bcfg_; }
    const std::vector<double>& arms() const { return state_.arms; }
    double oracle_optimum() const { return oracle_best_util_; }
    double oracle_utility(double B) const { return oracle_util_(B); }
    long round() const { return t_; }
    bool done() const { return t_ >= bcfg_.T; }
    void set_ledger_sink(LedgerSink sink) { sink_ = std::move(sink); }

    // Advances one round and returns its log entry.
    const RoundLog& step() {
        if (done()) throw std::logic_error("mechanism already ran its horizon");
        ++t_;
        RoundLog log;
        log.t = t_;

        // Initial pass: rounds 1..N_a explore each arm once, unless the arm
        // somehow has samples already.
        int forced = -1;
        if (t_ <= static_cast<long>(state_.arms.size()) &&
            state_.est[static_cast<std::size_t>(t_ - 1)].n == 0)
            forced = static_cast<int>(t_ - 1);
        std::vector<int> need = state_.exploration_set(bcfg_, t_);

        if (forced >= 0 || !need.empty()) {
            int arm = forced;
            if (arm < 0) {
                RngStream pick = streams_.arms(static_cast<int>(t_));
                arm = need[pick.below(need.size())];
            }
            explore_round(arm, log);
        } else {
            exploit_round(log);
        }

        record_regret(log);
        state_.trace.push_back(log);
        return state_.trace.back();
    }

    void run() {
        while (!done()) step();
    }

    // Direct-driving hook for estimation experiments: one exploration of a
    // given arm, outside the schedule.
    void force_exploration(int arm) {
        ++t_;
        RoundLog log;
        log.t = t_;
        explore_round(arm, log);
        record_regret(log);
        state_.trace.push_back(log);
    }

    // Oracle injection for tests: overrides an arm's estimates, for both
    // groups or for one (group = -1/+1).
    void inject_estimate(int arm, double p_match, double p_bar, long n, int group = 0) {
        auto& e = state_.est[static_cast<std::size_t>(arm)];
        e.n = n;
        for (int gi = 0; gi < 2; ++gi) {
            if (group != 0 && gi != group_index(group)) continue;
            e.p_match[gi] = p_match;
            e.p_bar[gi] = p_bar;
        }
    }

    // Exploitation price for one group; ties break to the smaller arm.
    int select_arm_for_group(int group) const {
        const int gi = group_index(group);
        int best = 0;
        double best_u = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < state_.arms.size(); ++k) {
            const double u = plug_in_utility(static_cast<int>(k), gi);
            if (u > best_u) {
                best_u = u;
                best = static_cast<int>(k);
            }
        }
        return best;
    }

private:
    void build_oracle(int oracle_grid) {
        if (oracle_grid < 2) throw std::invalid_argument("oracle grid must be >= 2");
        if (bcfg_.mode == BanditMode::Equilibrium) {
            oracle_util_ = [this](double B) { return utility_at(B, cfg_); };
        } else {
            // Requester utility against the true mean accuracy curve.
            oracle_util_ = [this](double B) {
                double sum = 0.0;
                for (const auto& p : roster_)
                    sum += std::get<MeanFieldBehavioral>(p.kind).accuracy(B, cfg_.B_max);
                return utility(B, std::clamp(sum / cfg_.N, 0.5, 1.0), cfg_);
            };
        }
        oracle_best_util_ = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < oracle_grid; ++i) {
            const double B = bcfg_.B_max * static_cast<double>(i) / (oracle_grid - 1);
            oracle_best_util_ = std::max(oracle_best_util_, oracle_util_(B));
        }
        arm_oracle_util_.resize(state_.arms.size());
        for (std::size_t k = 0; k < state_.arms.size(); ++k)
            arm_oracle_util_[k] = oracle_util_(state_.arms[k]);
    }

    double plug_in_utility(int arm, int gi) const {
        const auto& e = state_.est[static_cast<std::size_t>(arm)];
        const double B = state_.arms[static_cast<std::size_t>(arm)];
        if (bcfg_.payment_estimator == PaymentEstimator::Empirical && e.score_count[gi] > 0) {
            const double acc = majority_accuracy(e.p_bar[gi], cfg_.K);
            const double mean_score = e.score_sum[gi] / static_cast<double>(e.score_count[gi]);
            return acc - cfg_.eta * cfg_.K * B * mean_score;
        }
        return utility(B, e.p_bar[gi], cfg_);
    }

    // One exploration of `arm`: per group, a uniformly chosen pair labels one
    // common task (a batch of them in mean-field mode) plus d distinct tasks
    // each, is paid by the pairwise rule with the partner as reference, and
    // the common-task matches feed the estimate that prices the *other* group.
    void explore_round(int arm, RoundLog& log) {
        const double B = state_.arms[static_cast<std::size_t>(arm)];
        log.explore = true;
        log.arm = arm;
        log.arm_of_group = {arm, arm};
        log.offered = {B, B};

        const int commons = bcfg_.mode == BanditMode::MeanField ? bcfg_.mf_batch : 1;
        BonusLedger round_ledger;
        round_ledger.utility.assign(static_cast<std::size_t>(cfg_.N), 0.0);
        TaskId next_task = 0;

        for (int gi = 0; gi < 2; ++gi) {
            const int g = group_of_index(gi);
            std::vector<WorkerId> members;
            for (WorkerId w = 0; w < cfg_.N; ++w)
                if (state_.group_of[static_cast<std::size_t>(w)] == g) members.push_back(w);
            if (members.size() < 2) throw std::invalid_argument("exploration needs groups of size >= 2");

            RngStream pick = streams_.pairs(static_cast<int>(t_), g);
            std::vector<std::pair<WorkerId, WorkerId>> pairings;
            if (bcfg_.mode == BanditMode::MeanField) {
                // Random partition into pairs; with an odd group one worker sits out.
                std::vector<WorkerId> order = members;
                pick.shuffle(order);
                for (std::size_t i = 0; i + 1 < order.size(); i += 2)
                    pairings.emplace_back(order[i], order[i + 1]);
            } else {
                WorkerId a = members[pick.below(members.size())];
                WorkerId b = a;
                while (b == a) b = members[pick.below(members.size())];
                pairings.emplace_back(a, b);
            }

            double indicator_sum = 0.0;
            long indicator_n = 0;
            for (auto [wa, wb] : pairings) {
                PairOutcome out = run_pair(wa, wb, B, commons, next_task, round_ledger);
                next_task = out.next_task;
                indicator_sum += out.match_sum;
                indicator_n += out.match_count;
                if (bcfg_.mode == BanditMode::MeanField) {
                    for (WorkerId w : {wa, wb}) {
                        auto wi = static_cast<std::size_t>(w);
                        state_.mf_match_sum[wi][static_cast<std::size_t>(arm)] += out.match_sum;
                        state_.mf_match_count[wi][static_cast<std::size_t>(arm)] += out.match_count;
                    }
                }
                auto& e = state_.est[static_cast<std::size_t>(arm)];
                // Payments observed in this group inform the other group's price.
                e.score_sum[1 - gi] += out.score_sum;
                e.score_count[1 - gi] += out.score_count;
            }

            auto& e = state_.est[static_cast<std::size_t>(arm)];
            e.match_sum[1 - gi] += indicator_sum;
            e.match_count[1 - gi] += indicator_n;
        }

        auto& e = state_.est[static_cast<std::size_t>(arm)];
        e.n += 1;
        for (int gi = 0; gi < 2; ++gi) {
            if (e.match_count[gi] > 0)
                e.p_match[gi] = std::max(e.match_sum[gi] / static_cast<double>(e.match_count[gi]), 0.5);
            e.p_bar[gi] = plug_in_accuracy(e.p_match[gi], bcfg_.p_floor);
            log.p_match_est[gi] = e.p_match[gi];
            log.p_bar_est[gi] = e.p_bar[gi];
        }
        if (bcfg_.mode == BanditMode::MeanField) mean_field_update(arm);
        if (sink_) sink_(t_, round_ledger);
    }

    struct PairOutcome {
        double match_sum = 0.0;
        long match_count = 0;
        double score_sum = 0.0;
        long score_count = 0;
        TaskId next_task = 0;
    };

    // Builds the 1-common-plus-d-distinct pair world (with `commons` shared
    // tasks), runs both agents at price B, pays them on the shared tasks with
    // the partner as reference, and reports the match indicators.
    PairOutcome run_pair(WorkerId wa, WorkerId wb, double B, int commons, TaskId first_task,
                         BonusLedger& ledger) {
        PairOutcome out;
        const int d = cfg_.d;
        std::vector<TaskId> shared(static_cast<std::size_t>(commons));
        for (int c = 0; c < commons; ++c) shared[static_cast<std::size_t>(c)] = first_task++;
        std::vector<TaskId> da(static_cast<std::size_t>(d)), db(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) da[static_cast<std::size_t>(i)] = first_task++;
        for (int i = 0; i < d; ++i) db[static_cast<std::size_t>(i)] = first_task++;
        out.next_task = first_task;

        RngStream truth_rng =
            streams_.truths(static_cast<int>(t_)).fork(static_cast<std::uint64_t>(shared[0]));
        std::vector<Label> truths = draw_ground_truth(truth_rng, commons + 2 * d, cfg_.prior_plus);

        auto tasks_for = [&](bool is_a) {
            std::vector<TaskTruth> ts;
            for (int c = 0; c < commons; ++c)
                ts.push_back({shared[static_cast<std::size_t>(c)], truths[static_cast<std::size_t>(c)]});
            const auto& dist = is_a ? da : db;
            for (int i = 0; i < d; ++i) {
                const std::size_t idx = static_cast<std::size_t>(commons + (is_a ? i : d + i));
                ts.push_back({dist[static_cast<std::size_t>(i)], truths[idx]});
            }
            return ts;
        };

        Assignment pw;
        pw.tasks_of.resize(static_cast<std::size_t>(std::max(wa, wb)) + 1);
        std::vector<TaskTruth> ta = tasks_for(true), tb = tasks_for(false);
        for (const auto& tt : ta) pw.tasks_of[static_cast<std::size_t>(wa)].push_back(tt.task);
        for (const auto& tt : tb) pw.tasks_of[static_cast<std::size_t>(wb)].push_back(tt.task);
        pw.group_of.assign(pw.tasks_of.size(), +1);
        detail::index_assignment(pw, d);

        ReportMatrix m;
        m.records.resize(pw.tasks_of.size());
        m.offered_minus = m.offered_plus = B;
        m.records[static_cast<std::size_t>(wa)] = act(roster_[static_cast<std::size_t>(wa)], B, ta,
                                                      cfg_, &oracle_, streams_, wa, static_cast<int>(t_));
        m.records[static_cast<std::size_t>(wb)] = act(roster_[static_cast<std::size_t>(wb)], B, tb,
                                                      cfg_, &oracle_, streams_, wb, static_cast<int>(t_));

        for (int c = 0; c < commons; ++c) {
            const TaskId k = shared[static_cast<std::size_t>(c)];
            const Label ra = m.at(pw, wa, k).report;
            const Label rb = m.at(pw, wb, k).report;
            out.match_sum += (ra == rb) ? 1.0 : 0.0;
            out.match_count += 1;
            const double sa = dg13_score(wa, k, wb, m, pw);
            const double sb = dg13_score(wb, k, wa, m, pw);
            out.score_sum += sa + sb;
            out.score_count += 2;
            ledger_scored(ledger, wa, k, wb, sa, B, m.at(pw, wa, k));
            ledger_scored(ledger, wb, k, wa, sb, B, m.at(pw, wb, k));
        }
        for (int i = 0; i < d; ++i) {
            ledger_unscored(ledger, wa, da[static_cast<std::size_t>(i)],
                            m.at(pw, wa, da[static_cast<std::size_t>(i)]));
            ledger_unscored(ledger, wb, db[static_cast<std::size_t>(i)],
                            m.at(pw, wb, db[static_cast<std::size_t>(i)]));
        }
        ledger.utility[static_cast<std::size_t>(wa)] += (commons + d) * cfg_.b;
        ledger.utility[static_cast<std::size_t>(wb)] += (commons + d) * cfg_.b;
        return out;
    }

    void ledger_scored(BonusLedger& ledger, WorkerId w, TaskId k, WorkerId ref, double raw,
                       double B, const ActRecord& rec) {
        ledger.entries.push_back(
            LedgerEntry{static_cast<int>(t_), w, k, ref, raw, B * raw, rec.incurred()});
        ledger.utility[static_cast<std::size_t>(w)] += B * raw - rec.incurred();
    }

    void ledger_unscored(BonusLedger& ledger, WorkerId w, TaskId k, const ActRecord& rec) {
        ledger.entries.push_back(
            LedgerEntry{static_cast<int>(t_), w, k, -1, 0.0, 0.0, rec.incurred()});
        ledger.utility[static_cast<std::size_t>(w)] -= rec.incurred();
    }

    // Mean-field recovery at one arm: invert the group-average matching rate
    // for the group mean, then back out each worker's accuracy.
    void mean_field_update(int arm) {
        const auto k = static_cast<std::size_t>(arm);
        for (int gi = 0; gi < 2; ++gi) {
            const int g = group_of_index(gi);
            double sum = 0.0;
            int cnt = 0;
            for (WorkerId w = 0; w < cfg_.N; ++w) {
                auto wi = static_cast<std::size_t>(w);
                if (state_.group_of[wi] != g || state_.mf_match_count[wi][k] == 0) continue;
                sum += state_.mf_match_sum[wi][k] / static_cast<double>(state_.mf_match_count[wi][k]);
                ++cnt;
            }
            if (cnt == 0) continue;
            const double group_match = std::max(sum / cnt, 0.5);
            const double group_mean = invert_match(group_match);
            for (WorkerId w = 0; w < cfg_.N; ++w) {
                auto wi = static_cast<std::size_t>(w);
                if (state_.group_of[wi] != g || state_.mf_match_count[wi][k] == 0) continue;
                const double wm = state_.mf_match_sum[wi][k] /
                                  static_cast<double>(state_.mf_match_count[wi][k]);
                if (auto p = mean_field_recover(wm, group_mean)) state_.mf_recovered[wi][k] = *p;
            }
        }
    }

    // Exploitation: every worker participates; each group gets the arm that
    // maximizes its plug-in utility. Estimates are not refreshed here.
    void exploit_round(RoundLog& log) {
        log.explore = false;
        BonusLedger round_ledger;
        round_ledger.utility.assign(static_cast<std::size_t>(cfg_.N), 0.0);
        TaskId next_task = 0;
        for (int gi = 0; gi < 2; ++gi) {
            const int g = group_of_index(gi);
            const int arm = select_arm_for_group(g);
            const double B = state_.arms[static_cast<std::size_t>(arm)];
            log.arm_of_group[gi] = arm;
            log.offered[gi] = B;
            const auto& e = state_.est[static_cast<std::size_t>(arm)];
            log.p_match_est[gi] = e.p_match[gi];
            log.p_bar_est[gi] = e.p_bar[gi];
            next_task = settle_group(g, B, next_task, round_ledger);
        }
        if (sink_) sink_(t_, round_ledger);
    }

    // Runs one group's round at price B over a fresh task pool. Sizes >= 4
    // use the adaptive pairing scheme; 3 uses the triangle it degenerates to;
    // 2 falls back to the exploration pair layout.
    TaskId settle_group(int g, double B, TaskId first_task, BonusLedger& ledger) {
        std::vector<WorkerId> members;
        for (WorkerId w = 0; w < cfg_.N; ++w)
            if (state_.group_of[static_cast<std::size_t>(w)] == g) members.push_back(w);
        const int n = static_cast<int>(members.size());
        if (n < 2) throw std::invalid_argument("exploitation needs groups of size >= 2");

        if (n == 2) {
            PairOutcome out = run_pair(members[0], members[1], B, 1, first_task, ledger);
            return out.next_task;
        }

        std::vector<TaskId> pool(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = first_task++;

        Assignment local = n >= 4 ? generate_pair_assignment(n, pool) : triangle_assignment(pool);
        RngStream shuffle_rng = streams_.shuffles(static_cast<int>(t_), g);
        local = shuffle_identities(local, shuffle_rng);

        // Lift local worker slots onto the group's global ids.
        Assignment global;
        global.tasks_of.assign(static_cast<std::size_t>(cfg_.N), {});
        global.group_of.assign(static_cast<std::size_t>(cfg_.N), g);
        for (int i = 0; i < n; ++i)
            global.tasks_of[static_cast<std::size_t>(members[static_cast<std::size_t>(i)])] =
                local.tasks_of[static_cast<std::size_t>(i)];
        detail::index_assignment(global, cfg_.d);

        RngStream truth_rng =
            streams_.truths(static_cast<int>(t_)).fork(static_cast<std::uint64_t>(first_task));
        std::vector<Label> truths = draw_ground_truth(truth_rng, n, cfg_.prior_plus);

        ReportMatrix m;
        m.records.resize(static_cast<std::size_t>(cfg_.N));
        m.offered_minus = m.offered_plus = B;
        for (WorkerId w : members) {
            std::vector<TaskTruth> ts;
            for (TaskId t : global.tasks_of[static_cast<std::size_t>(w)]) {
                const auto pos = static_cast<std::size_t>(
                    std::find(pool.begin(), pool.end(), t) - pool.begin());
                ts.push_back({t, truths[pos]});
            }
            m.records[static_cast<std::size_t>(w)] =
                act(roster_[static_cast<std::size_t>(w)], B, ts, cfg_, &oracle_, streams_, w,
                    static_cast<int>(t_));
        }

        for (WorkerId w : members) {
            const auto& tasks = global.tasks_of[static_cast<std::size_t>(w)];
            RngStream ref_rng =
                streams_.references(static_cast<int>(t_)).fork(static_cast<std::uint64_t>(w));
            for (std::size_t s = 0; s < tasks.size(); ++s) {
                const TaskId k = tasks[s];
                std::vector<WorkerId> cands;
                for (WorkerId v : global.workers_of.at(k))
                    if (v != w) cands.push_back(v);
                WorkerId ref = cands[ref_rng.below(cands.size())];
                const double raw = dg13_score(w, k, ref, m, global);
                ledger_scored(ledger, w, k, ref, raw, B,
                              m.records[static_cast<std::size_t>(w)][s]);
            }
            ledger.utility[static_cast<std::size_t>(w)] += static_cast<double>(tasks.size()) * cfg_.b;
        }
        return first_task;
    }

    static Assignment triangle_assignment(const std::vector<TaskId>& pool) {
        Assignment a;
        a.tasks_of = {{pool[0], pool[1]}, {pool[0], pool[2]}, {pool[1], pool[2]}};
        a.group_of.assign(3, +1);
        detail::index_assignment(a, 1);
        return a;
    }

    // Regret increment: |sum_g w_g * U(B_g) - U(B*)| with w = 1/2 while
    // exploring and the group-size shares while exploiting.
    void record_regret(RoundLog& log) {
        std::array<double, 2> w{0.5, 0.5};
        if (!log.explore) {
            int plus = 0;
            for (int g : state_.group_of)
                if (g > 0) ++plus;
            w[1] = static_cast<double>(plus) / cfg_.N;
            w[0] = 1.0 - w[1];
        }
        double mix = 0.0;
        for (int gi = 0; gi < 2; ++gi) {
            log.oracle_util[gi] = log.arm_of_group[gi] >= 0
                                      ? arm_oracle_util_[static_cast<std::size_t>(log.arm_of_group[gi])]
                                      : oracle_util_(log.offered[gi]);
            mix += w[gi] * log.oracle_util[gi];
        }
        log.instant_regret = std::abs(mix - oracle_best_util_);
        state_.cumulative_regret += log.instant_regret;
        log.cumulative_regret = state_.cumulative_regret;
    }

    BanditConfig bcfg_;
    WorldConfig cfg_;
    std::vector<StrategyProfile> roster_;
    Streams streams_;
    ThresholdOracle oracle_;
    BanditState state_;
    LedgerSink sink_;
    std::function<double(double)> oracle_util_;
    std::vector<double> arm_oracle_util_;
    double oracle_best_util_ = 0.0;
    long t_ = 0;
};

// Convenience wrapper matching the one-shot contract: runs the whole horizon
// and returns the final state (trace included).
inline BanditState run_mechanism(const BanditConfig& bcfg, const WorldConfig& cfg,
                                 const std::vector<StrategyProfile>& roster, std::uint64_t seed,
                                 Mechanism::LedgerSink sink = nullptr) {
    Mechanism mech(bcfg, cfg, roster, seed);
    if (sink) mech.set_ledger_sink(std::move(sink));
    mech.run();
    return mech.state();
}

} // namespace spp
