#pragma once

// Pairwise scoring and settlement. The raw score for worker i on task k with
// reference j is the DG13 rule
//
//   score = 1(r_i(k) = r_j(k)) - Ld_i * Ld_j - (1 - Ld_i) * (1 - Ld_j)
//
// where Ld is each worker's fraction of +1 reports over their own d-task
// distinct set. Agreement on the shared task is rewarded; agreement that is
// explained by one-sided answer statistics is penalized.

#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "spp/world.hpp"

namespace spp {

enum class Effort { Low, High };

struct DistinctFraction {
    double value = 0.0;            // fraction of +1 reports, a multiple of 1/d
    double complement() const { return 1.0 - value; }
};

inline DistinctFraction distinct_fraction(std::span<const Label> reports) {
    if (reports.empty()) throw std::invalid_argument("distinct_fraction: empty report list");
    double sum = 0.0;
    for (Label r : reports) sum += (1.0 + static_cast<double>(r)) / 2.0;
    return DistinctFraction{sum / static_cast<double>(reports.size())};
}

// One worker-task outcome within a round.
struct ActRecord {
    double cost = 0.0;       // realized cost of high effort on this task
    Effort effort = Effort::Low;
    Label signal = +1;
    Label report = +1;

    double incurred() const { return effort == Effort::High ? cost : 0.0; }
};

// Per-round realized behavior for every (worker, task) slot of an assignment,
// plus the bonus scale offered to each group.
struct ReportMatrix {
    // records[w][s] lines up with Assignment::tasks_of[w][s].
    std::vector<std::vector<ActRecord>> records;
    double offered_minus = 0.0;  // bonus scale for group -1
    double offered_plus = 0.0;   // bonus scale for group +1

    double offered_for(int group) const { return group < 0 ? offered_minus : offered_plus; }

    const ActRecord& at(const Assignment& a, WorkerId w, TaskId t) const {
        const auto& tasks = a.tasks_of[static_cast<std::size_t>(w)];
        for (std::size_t s = 0; s < tasks.size(); ++s)
            if (tasks[s] == t) return records[static_cast<std::size_t>(w)][s];
        throw std::invalid_argument("report matrix has no entry for that (worker, task)");
    }
};

namespace detail {

inline double penalty_term(double ld_i, double ld_j) {
    return ld_i * ld_j + (1.0 - ld_i) * (1.0 - ld_j);
}

inline DistinctFraction distinct_fraction_of(const ReportMatrix& m, const Assignment& a,
                                             WorkerId w, const std::vector<TaskId>& tasks) {
    std::vector<Label> reports;
    reports.reserve(tasks.size());
    for (TaskId t : tasks) reports.push_back(m.at(a, w, t).report);
    return distinct_fraction(reports);
}

} // namespace detail

// Raw score in [-1, 1] for worker i on task k against reference worker j.
inline double dg13_score(WorkerId i, TaskId k, WorkerId j,
                         const ReportMatrix& m, const Assignment& a) {
    if (i == j) throw std::invalid_argument("dg13_score: reference equals scored worker");
    const PairStructure* p = a.find_pair(i, j);
    if (p == nullptr || p->distinct_i.empty() || p->distinct_j.empty())
        throw std::invalid_argument("dg13_score: pair has no distinct sets");

    const auto& di = (p->i == i) ? p->distinct_i : p->distinct_j;
    const auto& dj = (p->i == i) ? p->distinct_j : p->distinct_i;

    double agree = (m.at(a, i, k).report == m.at(a, j, k).report) ? 1.0 : 0.0;
    double ld_i = detail::distinct_fraction_of(m, a, i, di).value;
    double ld_j = detail::distinct_fraction_of(m, a, j, dj).value;
    return agree - detail::penalty_term(ld_i, ld_j);
}

// Majority label over the K reports on one task; ties resolve to -1.
inline Label majority_label(std::span<const Label> reports) {
    if (reports.empty()) throw std::invalid_argument("majority_label: no reports");
    long sum = 0;
    for (Label r : reports) sum += r;
    return sum > 0 ? +1 : -1;
}

struct LedgerEntry {
    int round = 0;
    WorkerId worker = -1;
    TaskId task = -1;
    WorkerId reference = -1;   // -1 when the task had no eligible reference
    double raw_score = 0.0;
    double paid_bonus = 0.0;
    double cost = 0.0;         // cost actually incurred (high effort only)
};

struct BonusLedger {
    std::vector<LedgerEntry> entries;
    std::vector<double> utility;   // per worker: M*b + sum(bonus) - sum(incurred cost)

    static std::string csv_header() {
        return "round,worker,task,reference,raw_score,paid_bonus,cost,utility";
    }
};

// Settles one full round: for every (worker, task) slot a reference is drawn
// uniformly among the other same-group workers on that task, the DG13 score
// is paid at the group's offered scale, and per-worker utilities accumulate
// M*b + bonuses - incurred costs. Throws when some task lacks an in-group
// reference for one of its workers.
inline BonusLedger settle_round(const ReportMatrix& m, const Assignment& a,
                                double B_minus, double B_plus, RngStream& rng,
                                int round = 0, double base_pay = 0.0) {
    const int n = a.worker_count();
    BonusLedger ledger;
    ledger.utility.assign(static_cast<std::size_t>(n), 0.0);

    for (WorkerId w = 0; w < n; ++w) {
        const double B = (a.group_of[w] < 0) ? B_minus : B_plus;
        const auto& tasks = a.tasks_of[static_cast<std::size_t>(w)];
        double round_bonus = 0.0, round_cost = 0.0;
        for (std::size_t s = 0; s < tasks.size(); ++s) {
            const TaskId k = tasks[s];
            std::vector<WorkerId> candidates;
            for (WorkerId v : a.workers_of.at(k))
                if (v != w && a.group_of[v] == a.group_of[w]) candidates.push_back(v);
            if (candidates.empty()) {
                std::ostringstream os;
                os << "task " << k << " has fewer than 2 in-group workers";
                throw std::invalid_argument(os.str());
            }
            WorkerId ref = candidates[rng.below(candidates.size())];
            double raw = dg13_score(w, k, ref, m, a);
            const ActRecord& rec = m.records[static_cast<std::size_t>(w)][s];
            ledger.entries.push_back(LedgerEntry{round, w, k, ref, raw, B * raw, rec.incurred()});
            round_bonus += B * raw;
            round_cost += rec.incurred();
        }
        ledger.utility[static_cast<std::size_t>(w)] =
            static_cast<double>(tasks.size()) * base_pay + round_bonus - round_cost;
    }
    return ledger;
}

} // namespace spp
