#pragma once
#include <cmath>
#include <string>

#include "circlelab/errors.hpp"

namespace circlelab {

enum class ProfileMode { paper, practical };

// The constants lambda, alpha, N0, delta, sigma, M0 of the inducing scheme.
// paper mode pins the published asymptotic choices; practical mode exposes
// them so the construction terminates at desk scale.
struct ExperimentProfile {
    double lambda = 0.0;
    double alpha = 0.0;
    int N0 = 0;
    double delta = 0.0;
    double sigma = 0.0;
    int M0 = 0;
    ProfileMode mode = ProfileMode::practical;

    // Growth-phase knobs (see inducing module): N1 = floor(10 alpha N0)
    // unless overridden; growth budget defaults to 2*M0.
    int N1_override = 0;
    int growth_budget_override = 0;

    int N1() const {
        if (N1_override > 0) return N1_override;
        return static_cast<int>(std::floor(10.0 * alpha * N0));
    }
    int growth_budget() const {
        return growth_budget_override > 0 ? growth_budget_override : 2 * M0;
    }
};

inline ExperimentProfile paper_profile(double L, int N0) {
    ExperimentProfile p;
    p.mode = ProfileMode::paper;
    p.lambda = 1e-3;
    p.alpha = 1e-6;
    p.N0 = N0;
    p.delta = std::pow(L, -p.alpha * N0);
    p.sigma = std::pow(L, -1.0 / 6.0);
    p.M0 = static_cast<int>(std::floor(2.0 * p.alpha * N0 / p.lambda));
    return p;
}

inline void validate(const ExperimentProfile& p) {
    if (p.mode == ProfileMode::practical) {
        if (!(p.delta > 0.0 && p.delta < p.sigma && p.sigma < 1.0))
            throw LabError("practical profile requires 0 < delta < sigma < 1 (got delta=" +
                           std::to_string(p.delta) + ", sigma=" + std::to_string(p.sigma) + ")");
        if (p.M0 < 1) throw LabError("practical profile requires M0 >= 1");
        if (p.lambda <= 0.0 || p.alpha <= 0.0 || p.N0 < 1)
            throw LabError("practical profile requires positive lambda, alpha, N0");
    }
}

enum class WorkingPrecision { double_precision, extended };

struct PrecisionPolicy {
    WorkingPrecision working_precision = WorkingPrecision::extended;
    double singular_exclusion_radius = 1e-13;
    double promotion_threshold = 1e-8;
    long max_orbit_length = 1000000;
};

inline void validate(const PrecisionPolicy& pp, const ExperimentProfile& prof) {
    if (!(pp.singular_exclusion_radius < pp.promotion_threshold &&
          pp.promotion_threshold < prof.sigma))
        throw LabError("precision policy requires exclusion < promotion < sigma");
    if (pp.max_orbit_length < 1) throw LabError("max_orbit_length must be positive");
}

} // namespace circlelab
