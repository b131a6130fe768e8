#pragma once

// Requester-side oracle. Solves the effort-threshold fixed point
//
//   B * (V1 * F(c*) + V2) = c*
//
// for the equilibrium threshold c*(B), derives the induced labeling accuracy
// p_bar(B), the pairwise matching probability, the expected raw score, the
// majority-vote accuracy, and the requester utility U(B), and locates the
// optimal bonus scale on a grid.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "spp/world.hpp"

namespace spp {

// Marginal value of effort decomposes as V1 * F(c) + V2 at peer threshold c.
inline std::pair<double, double> compute_v1_v2(const WorldConfig& cfg) {
    const double gap = cfg.p_H - cfg.p_L;
    const double prior_spread = cfg.prior_plus - cfg.prior_minus();
    const double chi = 1.0 - (static_cast<double>(cfg.D) / cfg.d) * prior_spread * prior_spread;
    const double v1 = 2.0 * gap * gap * chi;
    const double v2 = (2.0 * cfg.p_L - 1.0) * chi * (1.0 - 2.0 * cfg.prior_minus()) *
                      (1.0 - 2.0 * cfg.prior_minus());
    return {v1, v2};
}

// Largest c in [0, c_max] with B*(V1*F(c) + V2) = c, by ternary search for the
// maximizer of the concave residual followed by bisection. Saturates at c_max
// when effort is worth its cost everywhere.
inline double solve_threshold(double B, double v1, double v2, const CostLaw& law,
                              double tol = 1e-12) {
    if (!law.concave()) throw std::invalid_argument("solve_threshold: cost law not concave");
    if (B < 0.0) throw std::invalid_argument("solve_threshold: negative bonus scale");
    const double c_max = law.c_max;
    if (B == 0.0 || c_max <= 0.0) return 0.0;

    auto g = [&](double c) { return B * (v1 * law.cdf(c) + v2) - c; };
    if (g(c_max) >= 0.0) return c_max;

    // Residual g is concave (F concave), g(0) = B*v2 >= 0. Locate its
    // maximizer, then bisect on [argmax, c_max] for the largest root.
    double lo = 0.0, hi = c_max;
    for (int it = 0; it < 200; ++it) {
        double m1 = lo + (hi - lo) / 3.0;
        double m2 = hi - (hi - lo) / 3.0;
        if (g(m1) < g(m2)) lo = m1;
        else hi = m2;
        if (hi - lo < tol) break;
    }
    double peak = 0.5 * (lo + hi);
    if (g(peak) < g(0.0)) peak = 0.0;
    if (g(peak) <= 0.0) return 0.0;  // residual never positive: only the trivial root

    lo = peak;
    hi = c_max;
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        double mid = 0.5 * (lo + hi);
        if (g(mid) >= 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline double solve_threshold(double B, const WorldConfig& cfg, double tol = 1e-12) {
    auto [v1, v2] = compute_v1_v2(cfg);
    return solve_threshold(B, v1, v2, cfg.cost_law, tol);
}

// Population labeling accuracy induced by bonus scale B at equilibrium.
inline double accuracy_pbar(double B, const WorldConfig& cfg) {
    const double f = cfg.cost_law.cdf(solve_threshold(B, cfg));
    return f * cfg.p_H + (1.0 - f) * cfg.p_L;
}

// Probability two independent workers of accuracy p_bar agree on a task.
inline double match_prob(double p_bar) {
    if (p_bar < 0.5 || p_bar > 1.0)
        throw std::invalid_argument("match_prob: p_bar outside [0.5, 1]");
    return p_bar * p_bar + (1.0 - p_bar) * (1.0 - p_bar);
}

// Unique inverse of match_prob at or above 1/2.
inline double invert_match(double p_m) {
    if (p_m < 0.5 || p_m > 1.0)
        throw std::invalid_argument("invert_match: p_m outside [0.5, 1]");
    return 0.5 + 0.5 * std::sqrt(2.0 * p_m - 1.0);
}

enum class AccuracyMode { Exact, Chernoff };

// Probability that the K-vote majority is correct when each vote is
// independently correct with probability p_bar. Ties count as wrong,
// consistent with majority_label resolving ties to -1.
inline double majority_accuracy(double p_bar, int K, AccuracyMode mode = AccuracyMode::Exact) {
    if (K < 1) throw std::invalid_argument("majority_accuracy: K must be >= 1");
    if (p_bar < 0.5 || p_bar > 1.0)
        throw std::invalid_argument("majority_accuracy: p_bar outside [0.5, 1]");
    if (mode == AccuracyMode::Chernoff)
        return 1.0 - std::exp(-2.0 * (p_bar - 0.5) * (p_bar - 0.5) * K);
    if (p_bar == 1.0) return 1.0;
    double total = 0.0;
    for (int j = K / 2 + 1; j <= K; ++j) {
        double log_term = std::lgamma(K + 1.0) - std::lgamma(j + 1.0) - std::lgamma(K - j + 1.0) +
                          j * std::log(p_bar) + (K - j) * std::log1p(-p_bar);
        total += std::exp(log_term);
    }
    return std::min(total, 1.0);
}

enum class PaymentForm { Direct, ClosedForm };

// Expected raw score between two independent workers of accuracy p_bar under
// label prior P_+. Direct form: p_m - p_+^2 - (1-p_+)^2, which simplifies to
// 2*P_+*P_-*(2*p_bar-1)^2.
inline double expected_score(double p_bar, double prior_plus,
                             PaymentForm form = PaymentForm::Direct) {
    const double prior_minus = 1.0 - prior_plus;
    if (form == PaymentForm::ClosedForm)
        return prior_minus * (2.0 * p_bar - 1.0) * (prior_plus * (2.0 * p_bar - 1.0) + 1.0);
    const double p_plus = prior_plus * p_bar + prior_minus * (1.0 - p_bar);
    return match_prob(p_bar) - p_plus * p_plus - (1.0 - p_plus) * (1.0 - p_plus);
}

enum class PaymentCount { PerTaskVotes, TasksPerWorker };  // K (default) or M

struct UtilityModel {
    AccuracyMode accuracy = AccuracyMode::Exact;
    PaymentForm payment = PaymentForm::Direct;
    PaymentCount count = PaymentCount::PerTaskVotes;
};

// Per-task requester utility: aggregation accuracy minus eta times the
// expected bonus paid out on the task.
inline double utility(double B, double p_bar, const WorldConfig& cfg,
                      const UtilityModel& model = {}) {
    const double acc = majority_accuracy(p_bar, cfg.K, model.accuracy);
    const double count = model.count == PaymentCount::PerTaskVotes
                             ? static_cast<double>(cfg.K)
                             : static_cast<double>(cfg.M);
    return acc - cfg.eta * count * B * expected_score(p_bar, cfg.prior_plus, model.payment);
}

inline double utility_at(double B, const WorldConfig& cfg, const UtilityModel& model = {}) {
    return utility(B, accuracy_pbar(B, cfg), cfg, model);
}

// Equilibrium quantities tabulated on a bonus grid.
struct EquilibriumCurve {
    double v1 = 0.0, v2 = 0.0;
    std::vector<double> bonus, c_star, p_bar, p_match, exp_score, accuracy, util;

    std::size_t size() const { return bonus.size(); }

    // Smallest grid bonus whose threshold reaches cost c; nullopt when no
    // grid bonus does. Monotone search, valid because c_star is nondecreasing.
    std::optional<double> bonus_for_threshold(double c) const {
        auto it = std::lower_bound(c_star.begin(), c_star.end(), c);
        if (it == c_star.end()) return std::nullopt;
        return bonus[static_cast<std::size_t>(it - c_star.begin())];
    }
};

inline EquilibriumCurve build_curve(const WorldConfig& cfg, int grid_points,
                                    const UtilityModel& model = {}) {
    if (grid_points < 2) throw std::invalid_argument("build_curve: need at least 2 grid points");
    EquilibriumCurve curve;
    auto [v1, v2] = compute_v1_v2(cfg);
    curve.v1 = v1;
    curve.v2 = v2;
    curve.bonus.reserve(static_cast<std::size_t>(grid_points));
    for (int i = 0; i < grid_points; ++i) {
        const double B = cfg.B_max * static_cast<double>(i) / (grid_points - 1);
        const double c = solve_threshold(B, v1, v2, cfg.cost_law);
        const double f = cfg.cost_law.cdf(c);
        const double p = f * cfg.p_H + (1.0 - f) * cfg.p_L;
        curve.bonus.push_back(B);
        curve.c_star.push_back(c);
        curve.p_bar.push_back(p);
        curve.p_match.push_back(match_prob(p));
        curve.exp_score.push_back(expected_score(p, cfg.prior_plus, model.payment));
        curve.accuracy.push_back(majority_accuracy(p, cfg.K, model.accuracy));
        curve.util.push_back(utility(B, p, cfg, model));
    }
    return curve;
}

// Diagnostic modulus of continuity of a tabulated curve: the largest grid
// difference quotient of p_bar and of utility with respect to B.
struct CurveModulus {
    double p_bar = 0.0;
    double util = 0.0;
};

inline CurveModulus curve_modulus(const EquilibriumCurve& curve) {
    CurveModulus m;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const double db = curve.bonus[i] - curve.bonus[i - 1];
        if (db <= 0.0) continue;
        m.p_bar = std::max(m.p_bar, std::abs(curve.p_bar[i] - curve.p_bar[i - 1]) / db);
        m.util = std::max(m.util, std::abs(curve.util[i] - curve.util[i - 1]) / db);
    }
    return m;
}

// Argmax of utility over an explicit bonus grid; ties break to the smaller B.
inline std::pair<double, double> optimal_bonus(const WorldConfig& cfg,
                                               std::span<const double> grid,
                                               const UtilityModel& model = {}) {
    if (grid.size() < 1) throw std::invalid_argument("optimal_bonus: empty grid");
    double best_B = grid[0];
    double best_U = -std::numeric_limits<double>::infinity();
    for (double B : grid) {
        const double u = utility_at(B, cfg, model);
        if (u > best_U) {
            best_U = u;
            best_B = B;
        }
    }
    return {best_B, best_U};
}

// Uniform grid of `resolution` points on [0, B_max].
inline std::pair<double, double> optimal_bonus(const WorldConfig& cfg, int resolution,
                                               const UtilityModel& model = {}) {
    if (resolution < 2) throw std::invalid_argument("optimal_bonus: resolution must be >= 2");
    std::vector<double> grid(static_cast<std::size_t>(resolution));
    for (int i = 0; i < resolution; ++i)
        grid[static_cast<std::size_t>(i)] = cfg.B_max * static_cast<double>(i) / (resolution - 1);
    return optimal_bonus(cfg, grid, model);
}

// Memoizing wrapper used by threshold-playing agents; also carries the curve
// that backs the monotone inverse map from costs to bonus levels.
class ThresholdOracle {
public:
    explicit ThresholdOracle(const WorldConfig& cfg, int inverse_grid = 1024)
        : cfg_(cfg), inverse_grid_(inverse_grid) {
        auto vv = compute_v1_v2(cfg);
        v1_ = vv.first;
        v2_ = vv.second;
    }

    double c_star(double B) const {
        auto it = cache_.find(B);
        if (it != cache_.end()) return it->second;
        double c = solve_threshold(B, v1_, v2_, cfg_.cost_law);
        cache_.emplace(B, c);
        return c;
    }

    // Smallest grid bonus with c_star(B) >= c; infinity when unreachable.
    double bonus_for_threshold(double c) const {
        if (!inverse_) inverse_ = build_curve(cfg_, inverse_grid_);
        auto B = inverse_->bonus_for_threshold(c);
        return B ? *B : std::numeric_limits<double>::infinity();
    }

    const WorldConfig& config() const { return cfg_; }
    double v1() const { return v1_; }
    double v2() const { return v2_; }

private:
    WorldConfig cfg_;
    double v1_ = 0.0, v2_ = 0.0;
    int inverse_grid_;
    mutable std::map<double, double> cache_;
    mutable std::optional<EquilibriumCurve> inverse_;
};

} // namespace spp
