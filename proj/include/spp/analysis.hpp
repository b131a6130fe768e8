#pragma once

// Post-hoc analysis of regret traces: least-squares slope of ln R(t) against
// ln t over the final fraction of the horizon.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace spp {

struct RegretTrace {
    std::vector<double> cumulative;  // cumulative[i] = R(t = i + 1), nondecreasing

    double final_regret() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t points = 0;
};

// Fits ln R(t) = slope * ln t + intercept over the final `window` fraction of
// rounds, skipping rounds where R(t) is still zero.
inline SlopeFit fit_regret_exponent(const RegretTrace& trace, double window) {
    if (trace.cumulative.size() < 100)
        throw std::invalid_argument("fit_regret_exponent: trace shorter than 100 rounds");
    if (!(window > 0.0 && window <= 1.0))
        throw std::invalid_argument("fit_regret_exponent: window must lie in (0, 1]");

    const std::size_t T = trace.cumulative.size();
    const auto start = static_cast<std::size_t>(std::floor((1.0 - window) * T));

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = start; i < T; ++i) {
        const double r = trace.cumulative[i];
        if (r <= 0.0) continue;
        const double x = std::log(static_cast<double>(i + 1));
        const double y = std::log(r);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw std::invalid_argument("fit_regret_exponent: regret is identically zero");

    const double denom = sxx - sx * sx / n;
    SlopeFit fit;
    fit.points = n;
    fit.slope = denom > 0.0 ? (sxy - sx * sy / n) / denom : 0.0;
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

} // namespace spp
