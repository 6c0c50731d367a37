#pragma once
#include "circlelab/orbit.hpp"
#include "circlelab/rng.hpp"

namespace circlelab {

// Empirical check of the bounded-distortion estimate on [x - D_n, x + D_n]:
// sampled pairs must satisfy |(f^n)'xi| / |(f^n)'eta| <= 2 and the refined
// bound |ratio - 1| <= L^{-1/3} |f^n xi - f^n eta| / (D_n(x) |(f^n)'x|).
struct DistortionReport {
    double D_n = 0.0;
    double max_ratio = 0.0;
    double max_refined = 0.0;   // max of |ratio-1| D_n |(f^n)'x| / image gap
    double refined_threshold = 0.0; // L^{-1/3}
    bool pass = false;
    int samples = 0;
};

DistortionReport check_distortion(const CircleMap& m, const MarkedSets& sets,
                                  double x, int n, int samples, Rng& rng,
                                  double tol = 0.0);

// Admissibility filter used by samplers: the orbit of x must stay clear of
// C and S for n steps and D_n must be wide enough that sampled offsets are
// representable around x.
bool distortion_admissible(const CircleMap& m, const MarkedSets& sets, double x,
                           int n, double clearance = 1e-9);

// Empirical margins for the expansion-outside-C_delta estimate:
// (a) |(f^n)'x| >= delta L^{2 lambda n} while the orbit avoids C_delta,
// (b) |(f^n)'x| >= L^{2 lambda n} when it then enters C_delta.
struct ExpansionReport {
    long trials = 0;
    long skipped = 0;         // started in C_delta (vacuous) or truncated
    long violations_a = 0;
    long violations_b = 0;
    double worst_margin_a = HUGE_VAL; // min of |(f^n)'x| / (delta L^{2 lambda n})
    double worst_margin_b = HUGE_VAL;
    double violation_rate = 0.0;
};

ExpansionReport check_expansion_outside(const CircleMap& m, const MarkedSets& sets,
                                        const ExperimentProfile& profile,
                                        long trials, Rng& rng,
                                        long max_steps = 10000);

} // namespace circlelab
