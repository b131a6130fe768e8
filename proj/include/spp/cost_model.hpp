#pragma once

// Effort-cost distributions. Only concave c.d.f.s on [0, c_max] are
// representable: the uniform law and power laws F(c) = (c/c_max)^gamma with
// 0 < gamma <= 1. Concavity is what makes the effort-threshold fixed point
// well posed, so arbitrary user laws are rejected at construction.

#include <cmath>
#include <stdexcept>
#include <string>

#include "spp/rng.hpp"

namespace spp {

enum class CostFamily { Uniform, Power };

struct CostLaw {
    CostFamily family = CostFamily::Uniform;
    double gamma = 1.0;   // exponent, used by the power family only
    double c_max = 1.0;

    static CostLaw uniform(double c_max) {
        CostLaw law;
        law.family = CostFamily::Uniform;
        law.gamma = 1.0;
        law.c_max = check_cmax(c_max);
        return law;
    }

    static CostLaw power(double gamma, double c_max) {
        if (!(gamma > 0.0) || gamma > 1.0)
            throw std::invalid_argument("cost law not concave: power gamma must be in (0, 1], got " +
                                        std::to_string(gamma));
        CostLaw law;
        law.family = CostFamily::Power;
        law.gamma = gamma;
        law.c_max = check_cmax(c_max);
        return law;
    }

    bool concave() const {
        return family == CostFamily::Uniform || (gamma > 0.0 && gamma <= 1.0);
    }

    double cdf(double c) const {
        if (c_max <= 0.0) return c >= 0.0 ? 1.0 : 0.0;  // degenerate point mass at 0
        if (c <= 0.0) return 0.0;
        if (c >= c_max) return 1.0;
        if (family == CostFamily::Uniform) return c / c_max;
        return std::pow(c / c_max, gamma);
    }

    // Inverse-c.d.f. sampling.
    double sample(RngStream& rng) const {
        if (c_max <= 0.0) return 0.0;
        double u = rng.uniform01();
        if (family == CostFamily::Uniform) return u * c_max;
        return c_max * std::pow(u, 1.0 / gamma);
    }

private:
    static double check_cmax(double c) {
        if (c < 0.0) throw std::invalid_argument("c_max must be nonnegative");
        return c;
    }
};

} // namespace spp
