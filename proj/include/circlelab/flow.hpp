#pragma once
#include <cmath>

#include "circlelab/circle_map.hpp"
#include "circlelab/marked_set.hpp"

namespace circlelab {

// State of the lift after n steps from a domain point.
struct Flow {
    double image;     // F_n(x)
    double log_deriv; // ln |(f^n)'(x)|
    double y;         // frac(f^n x)
};

// Endpoint/anchor evaluation of the lift flow. Refinement machinery must not
// refuse evaluation anywhere: cut endpoints produced by marked-point splits
// map within ulps of S, where the displacement is large but representable, so
// the exclusion radius here is effectively zero.
class FlowEval {
public:
    static constexpr double tiny_exclusion = 1e-300;

    FlowEval(const CircleMap& m, const MarkedSets& sets) : m_(m), sets_(sets) {}

    Flow at(double x, int n) const {
        LiftValue lv = lift_of(x);
        double lam = 0.0;
        for (int i = 0; i < n; ++i) {
            lam += log_abs_fprime(m_, lv.y, tiny_exclusion);
            eval_step(m_, lv, tiny_exclusion);
        }
        return {lv.value(), lam, lv.y};
    }

    double image(double x, int n) const {
        LiftValue lv = lift_of(x);
        for (int i = 0; i < n; ++i) eval_step(m_, lv, tiny_exclusion);
        return lv.value();
    }

    // Double-double state for branches whose plain-double image noise reaches
    // the wrap-window scale (pieces born next to a critical point, where the
    // first step contracts and everything after amplifies).
    Flow at_dd(double x, int n) const {
        LiftValueDD v = lift_dd(x);
        double lam = 0.0;
        for (int i = 0; i < n; ++i) {
            lam += log_abs_fprime_dd(m_, v.y, tiny_exclusion);
            eval_step_dd(m_, v, tiny_exclusion);
        }
        return {v.value(), lam, v.y.to_double()};
    }

    dd image_dd(double x, int n) const {
        LiftValueDD v = lift_dd(x);
        for (int i = 0; i < n; ++i) eval_step_dd(m_, v, tiny_exclusion);
        return v.value_dd();
    }

    // D_n(x) through an online log-sum-exp; the plain sum of 1/d_i overflows
    // once the accumulated derivative passes e^700. Returns 0 when the scale
    // underflows, which callers treat as "finer than representable".
    double contraction_scale(double x, int n) const {
        if (n == 0) return HUGE_VAL;
        LiftValue lv = lift_of(x);
        double lam = 0.0, peak = -HUGE_VAL, sum = 0.0;
        for (int i = 0; i < n; ++i) {
            double dc = distance_to_set(sets_.critical, lv.y);
            double ds = distance_to_set(sets_.singular, lv.y);
            if (dc < 1e-300 || ds < 1e-300) return 0.0;
            double e = lam - std::log(dc * ds);
            if (e > peak) {
                sum = sum * std::exp(peak - e) + 1.0;
                peak = e;
            } else {
                sum += std::exp(e - peak);
            }
            lam += log_abs_fprime(m_, lv.y, tiny_exclusion);
            eval_step(m_, lv, tiny_exclusion);
        }
        return std::exp(-(peak + std::log(sum))) / std::sqrt(m_.L);
    }

    const CircleMap& map() const { return m_; }
    const MarkedSets& sets() const { return sets_; }

private:
    const CircleMap& m_;
    const MarkedSets& sets_;
};

} // namespace circlelab
