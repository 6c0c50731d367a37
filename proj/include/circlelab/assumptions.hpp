#pragma once
#include <optional>
#include <vector>

#include "circlelab/marked_set.hpp"
#include "circlelab/profile.hpp"

namespace circlelab {

enum class AssumptionCondition { a, G1, G2, G3, proximity };

struct AssumptionFailure {
    AssumptionCondition condition;
    double critical_point;
    long time;
};

struct AssumptionVerdict {
    bool passed = false;
    std::optional<AssumptionFailure> first_failure;
    long horizon = 0;
};

// Follows v_0 = f(c) for every critical point c and checks, up to `horizon`:
//   (a)  d_C(v_n) > sigma and d_S(v_n) > sigma for n <= N0,
//   (G1) |(f^{j-i})' v_i| >= L min{sigma, L^{-alpha i}}   (all pairs i < j),
//   (G2) |(f^i)' v_0| >= L^{lambda i},
//   (G3) d_S(v_i) >= L^{-4 alpha i} for i >= N0.
// G1 is evaluated incrementally from the log-derivative prefix (running max
// of Lambda_i + threshold_i), which is O(horizon) instead of O(horizon^2).
// Critical points whose orbits are exact half-period translates of one
// another (Phi(x + 1/2) = -Phi(x) makes the displacement 1/2-periodic) are
// checked once: iterating both copies in floating point would just let
// rounding decorrelate two mathematically identical condition sequences.
AssumptionVerdict check_dynamical_assumptions(const CircleMap& m,
                                              const MarkedSets& sets,
                                              const ExperimentProfile& profile,
                                              long horizon);

} // namespace circlelab
