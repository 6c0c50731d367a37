#pragma once
#include <stdexcept>
#include <string>

namespace circlelab {

// Base class for every failure the lab can signal. Each condition gets its
// own type so tests and the CLI can match on what actually went wrong.
struct LabError : std::runtime_error {
    explicit LabError(const std::string& what) : std::runtime_error(what) {}
};

#define CIRCLELAB_ERROR(Name)                                              \
    struct Name : LabError {                                               \
        explicit Name(const std::string& what) : LabError(#Name ": " + what) {} \
    }

CIRCLELAB_ERROR(SingularProximity);
CIRCLELAB_ERROR(NoZeros);
CIRCLELAB_ERROR(UnresolvedRoot);
CIRCLELAB_ERROR(UnboundedRatio);
CIRCLELAB_ERROR(UndefinedAtStep);
CIRCLELAB_ERROR(OrbitHitsSet);
CIRCLELAB_ERROR(CriticalOrbitTruncated);
CIRCLELAB_ERROR(OutOfBindingRange);
CIRCLELAB_ERROR(NotAFreeReturn);
CIRCLELAB_ERROR(UnresolvableCut);
CIRCLELAB_ERROR(BudgetExceeded);
CIRCLELAB_ERROR(GrowthFailed);
CIRCLELAB_ERROR(InsufficientData);
CIRCLELAB_ERROR(NonConvergence);
CIRCLELAB_ERROR(DivergentIntegral);
CIRCLELAB_ERROR(NoiseDominated);
CIRCLELAB_ERROR(NegativeVarianceEstimate);
CIRCLELAB_ERROR(EmptyBall);

#undef CIRCLELAB_ERROR

} // namespace circlelab
