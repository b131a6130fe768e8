#pragma once

// World model: validated configuration, ground-truth label generation, and
// the structured randomized task assignment (worker/task incidence plus the
// per-pair shared task and distinct sets that the pairwise scoring rule
// consumes).

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spp/cost_model.hpp"
#include "spp/rng.hpp"

namespace spp {

using Label = int;       // -1 or +1
using WorkerId = int;
using TaskId = int;

struct WorldConfig {
    double p_H = 0.0;        // labeling accuracy under high effort
    double p_L = 0.0;        // labeling accuracy under low effort
    CostLaw cost_law;        // c.d.f. F on [0, c_max]
    double c_max = 0.0;
    double prior_plus = 0.0; // P_+; P_- = 1 - P_+
    double eta = 0.0;        // payment weight in the requester objective
    double b = 0.0;          // base pay per task
    double B_max = 0.0;      // bonus-scale upper bound
    int N = 0;               // workers
    int M = 0;               // tasks per worker
    int K = 0;               // workers per task
    int d = 0;               // distinct-set size per sharing pair
    int D = 0;               // tasks whose distinct set contains a given task

    double prior_minus() const { return 1.0 - prior_plus; }
};

// Validates every model constraint; throws std::invalid_argument naming the
// first violation.
inline WorldConfig build_world(WorldConfig cfg) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
    if (!(cfg.p_L >= 0.5)) fail("p_L below 0.5");
    if (!(cfg.p_H > cfg.p_L)) fail("p_H must exceed p_L");
    if (!(cfg.p_H <= 1.0)) fail("p_H above 1");
    if (cfg.N < 4) fail("N below 4");
    if (cfg.M <= 1) fail("M must exceed 1");
    if (cfg.K < 2) fail("K below 2");
    if (cfg.K >= cfg.N) fail("K equals N (all tasks to all workers)");
    if (cfg.d < 1 || cfg.d >= cfg.M) fail("d must satisfy 1 <= d < M");
    if (cfg.D < 0 || cfg.D > cfg.d) fail("D must satisfy 0 <= D <= d");
    if (!(cfg.prior_plus > 0.0 && cfg.prior_plus < 1.0)) fail("prior_plus must lie in (0, 1)");
    if (!(cfg.eta > 0.0)) fail("eta must be positive");
    if (cfg.b < 0.0) fail("base pay b must be nonnegative");
    if (!(cfg.c_max > 0.0)) fail("c_max must be positive");
    if (!(cfg.B_max > 0.0)) fail("B_max must be positive");
    if (!cfg.cost_law.concave()) fail("cost law not concave");
    if (cfg.cost_law.c_max != cfg.c_max) fail("cost law support must match c_max");
    return cfg;
}

// I.i.d. labels, +1 with probability prior_plus.
inline std::vector<Label> draw_ground_truth(RngStream& rng, int task_count, double prior_plus) {
    if (task_count < 1) throw std::invalid_argument("task_count must be >= 1");
    std::vector<Label> truth(static_cast<std::size_t>(task_count));
    for (auto& s : truth) s = rng.bernoulli(prior_plus) ? +1 : -1;
    return truth;
}

struct PairStructure {
    WorkerId i = -1, j = -1;            // i < j
    std::vector<TaskId> shared;         // tasks held by both
    std::vector<TaskId> distinct_i;     // d tasks of i not held by j
    std::vector<TaskId> distinct_j;     // d tasks of j not held by i
};

struct Assignment {
    std::vector<std::vector<TaskId>> tasks_of;      // worker -> ordered task list
    std::map<TaskId, std::vector<WorkerId>> workers_of;
    std::vector<PairStructure> pairs;               // every pair sharing >= 1 task
    std::vector<int> group_of;                      // worker -> {-1, +1}

    int worker_count() const { return static_cast<int>(tasks_of.size()); }

    const PairStructure* find_pair(WorkerId a, WorkerId b) const {
        if (a > b) std::swap(a, b);
        for (const auto& p : pairs)
            if (p.i == a && p.j == b) return &p;
        return nullptr;
    }

    bool has_two_groups() const {
        bool minus = false, plus = false;
        for (int g : group_of) (g < 0 ? minus : plus) = true;
        return minus && plus;
    }

    std::vector<WorkerId> group_members(int g) const {
        std::vector<WorkerId> out;
        for (WorkerId w = 0; w < worker_count(); ++w)
            if (group_of[w] == g) out.push_back(w);
        return out;
    }
};

namespace detail {

// Rebuilds workers_of and the pair structures from tasks_of, taking the first
// d tasks of the set difference as each member's distinct set.
inline void index_assignment(Assignment& a, int d) {
    a.workers_of.clear();
    const int n = a.worker_count();
    for (WorkerId w = 0; w < n; ++w)
        for (TaskId t : a.tasks_of[w]) a.workers_of[t].push_back(w);

    a.pairs.clear();
    for (WorkerId i = 0; i < n; ++i) {
        std::set<TaskId> ti(a.tasks_of[i].begin(), a.tasks_of[i].end());
        for (WorkerId j = i + 1; j < n; ++j) {
            std::set<TaskId> tj(a.tasks_of[j].begin(), a.tasks_of[j].end());
            PairStructure p;
            p.i = i;
            p.j = j;
            std::set_intersection(ti.begin(), ti.end(), tj.begin(), tj.end(),
                                  std::back_inserter(p.shared));
            if (p.shared.empty()) continue;
            std::vector<TaskId> di, dj;
            std::set_difference(ti.begin(), ti.end(), tj.begin(), tj.end(), std::back_inserter(di));
            std::set_difference(tj.begin(), tj.end(), ti.begin(), ti.end(), std::back_inserter(dj));
            if (static_cast<int>(di.size()) > d) di.resize(static_cast<std::size_t>(d));
            if (static_cast<int>(dj.size()) > d) dj.resize(static_cast<std::size_t>(d));
            p.distinct_i = std::move(di);
            p.distinct_j = std::move(dj);
            a.pairs.push_back(std::move(p));
        }
    }
}

} // namespace detail

// The adaptive pairing scheme for N workers and N tasks (M=2, K=2, d=1, D=1):
//   t_1 = (1,2), t_2 = (1,3), t_i = (t_{i-2}(2), min(t_{i-1}(2)+1, N)).
// task_ids supplies the N concrete task labels, in recurrence order.
inline Assignment generate_pair_assignment(int N, const std::vector<TaskId>& task_ids) {
    if (N < 4) throw std::invalid_argument("pair assignment needs N >= 4");
    if (static_cast<int>(task_ids.size()) != N)
        throw std::invalid_argument("pair assignment needs exactly N tasks");

    // 1-based positions into task_ids, following the recurrence.
    std::vector<std::pair<int, int>> pos(static_cast<std::size_t>(N) + 1);
    pos[1] = {1, 2};
    pos[2] = {1, 3};
    for (int i = 3; i <= N; ++i)
        pos[i] = {pos[i - 2].second, std::min(pos[i - 1].second + 1, N)};

    Assignment a;
    a.tasks_of.resize(static_cast<std::size_t>(N));
    for (int i = 1; i <= N; ++i)
        a.tasks_of[static_cast<std::size_t>(i - 1)] = {task_ids[static_cast<std::size_t>(pos[i].first - 1)],
                                                       task_ids[static_cast<std::size_t>(pos[i].second - 1)]};
    a.group_of.assign(static_cast<std::size_t>(N), +1);
    detail::index_assignment(a, /*d=*/1);
    return a;
}

struct ValidationReport {
    std::vector<std::string> violations;
    bool pass() const { return violations.empty(); }

    bool mentions(std::string_view needle) const {
        for (const auto& v : violations)
            if (v.find(needle) != std::string::npos) return true;
        return false;
    }
};

// Checks every structural invariant of an assignment against the config.
// Group-balance checks apply only when the assignment actually carries two
// nonempty groups (one-shot assignments are single-group).
inline ValidationReport validate_assignment(const Assignment& a, const WorldConfig& cfg) {
    ValidationReport rep;
    auto flag = [&rep](const std::string& s) { rep.violations.push_back(s); };
    const int n = a.worker_count();

    for (WorkerId w = 0; w < n; ++w) {
        if (static_cast<int>(a.tasks_of[w].size()) != cfg.M) {
            std::ostringstream os;
            os << "worker " << w << " holds " << a.tasks_of[w].size() << " tasks, expected M=" << cfg.M;
            flag(os.str());
        }
        std::set<TaskId> uniq(a.tasks_of[w].begin(), a.tasks_of[w].end());
        if (uniq.size() != a.tasks_of[w].size()) flag("worker holds a duplicate task");
    }

    bool all_to_all = !a.workers_of.empty();
    for (const auto& [task, workers] : a.workers_of) {
        if (static_cast<int>(workers.size()) != cfg.K) {
            std::ostringstream os;
            os << "task " << task << " assigned to " << workers.size() << " workers, expected K=" << cfg.K;
            flag(os.str());
        }
        if (static_cast<int>(workers.size()) != n) all_to_all = false;
    }
    if (all_to_all) flag("K equals N (all tasks assigned to all workers)");

    for (const auto& p : a.pairs) {
        if (p.distinct_i.empty() || p.distinct_j.empty()) {
            std::ostringstream os;
            os << "distinct-set empty for pair (" << p.i << "," << p.j << ")";
            flag(os.str());
            continue;
        }
        if (static_cast<int>(p.distinct_i.size()) != cfg.d ||
            static_cast<int>(p.distinct_j.size()) != cfg.d) {
            std::ostringstream os;
            os << "distinct-set size mismatch for pair (" << p.i << "," << p.j << "), expected d=" << cfg.d;
            flag(os.str());
        }
        for (TaskId t : p.distinct_i)
            if (std::find(p.distinct_j.begin(), p.distinct_j.end(), t) != p.distinct_j.end())
                flag("distinct sets overlap");
    }

    // D-regularity: each task of a worker shows up in the worker's distinct
    // set for exactly D of their other tasks.
    for (WorkerId w = 0; w < n; ++w) {
        for (TaskId t : a.tasks_of[w]) {
            std::set<TaskId> carriers;  // other tasks of w whose scoring uses t
            for (const auto& p : a.pairs) {
                const std::vector<TaskId>* dist = nullptr;
                if (p.i == w) dist = &p.distinct_i;
                else if (p.j == w) dist = &p.distinct_j;
                else continue;
                if (std::find(dist->begin(), dist->end(), t) == dist->end()) continue;
                for (TaskId s : p.shared) carriers.insert(s);
            }
            if (static_cast<int>(carriers.size()) != cfg.D) {
                std::ostringstream os;
                os << "task " << t << " of worker " << w << " appears in " << carriers.size()
                   << " distinct sets, expected D=" << cfg.D;
                flag(os.str());
            }
        }
    }

    if (a.has_two_groups()) {
        int plus = 0, minus = 0;
        for (int g : a.group_of) (g < 0 ? minus : plus)++;
        if (std::abs(plus - minus) > 1) flag("group sizes differ by more than 1");
        for (const auto& [task, workers] : a.workers_of) {
            for (WorkerId w : workers) {
                bool has_ref = false;
                for (WorkerId v : workers)
                    if (v != w && a.group_of[v] == a.group_of[w]) has_ref = true;
                if (!has_ref) {
                    std::ostringstream os;
                    os << "no in-group reference for worker " << w << " on task " << task;
                    flag(os.str());
                }
            }
        }
    }

    return rep;
}

// Applies explicit worker/task relabelings. worker_perm[w] is the new id of
// worker w; task_perm maps old task ids to new ones.
inline Assignment relabel_assignment(const Assignment& a,
                                     const std::vector<int>& worker_perm,
                                     const std::map<TaskId, TaskId>& task_perm) {
    const int n = a.worker_count();
    if (static_cast<int>(worker_perm.size()) != n)
        throw std::invalid_argument("worker permutation size mismatch");
    Assignment out;
    out.tasks_of.resize(static_cast<std::size_t>(n));
    out.group_of.resize(static_cast<std::size_t>(n));
    int d = 1;
    for (const auto& p : a.pairs) d = std::max(d, static_cast<int>(p.distinct_i.size()));
    for (WorkerId w = 0; w < n; ++w) {
        auto& dst = out.tasks_of[static_cast<std::size_t>(worker_perm[w])];
        for (TaskId t : a.tasks_of[w]) dst.push_back(task_perm.at(t));
        out.group_of[static_cast<std::size_t>(worker_perm[w])] = a.group_of[w];
    }
    detail::index_assignment(out, d);
    return out;
}

// Independent uniform permutations of worker and task identities, so that
// agents cannot condition strategies on raw ids.
inline Assignment shuffle_identities(const Assignment& a, RngStream& rng) {
    const int n = a.worker_count();
    std::vector<int> worker_perm(static_cast<std::size_t>(n));
    std::iota(worker_perm.begin(), worker_perm.end(), 0);
    rng.shuffle(worker_perm);

    std::vector<TaskId> tasks;
    for (const auto& [t, _] : a.workers_of) tasks.push_back(t);
    std::vector<TaskId> shuffled = tasks;
    rng.shuffle(shuffled);
    std::map<TaskId, TaskId> task_perm;
    for (std::size_t i = 0; i < tasks.size(); ++i) task_perm[tasks[i]] = shuffled[i];

    return relabel_assignment(a, worker_perm, task_perm);
}

// Random half/half split of workers into groups +1 and -1 (sizes differ by at
// most one): shuffle identities, then cut at the middle.
inline std::vector<int> split_groups(int N, RngStream& rng) {
    std::vector<int> order(static_cast<std::size_t>(N));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<int> group(static_cast<std::size_t>(N), -1);
    const int plus_size = (N + 1) / 2;
    for (int i = 0; i < plus_size; ++i) group[static_cast<std::size_t>(order[i])] = +1;
    return group;
}

} // namespace spp
