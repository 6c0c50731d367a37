#pragma once
#include "circlelab/circle_map.hpp"
#include "circlelab/marked_set.hpp"

namespace circlelab {

// Fitted constants of the two-sided derivative comparison
//   K0^{-1} L d_C/d_S <= |f'| <= K0 L d_C/d_S,   |f''| <= K0 L / d_S^2,
// and, on the critical neighborhood C_{eps0},  K0^{-1} L < |f''| < K0 L.
struct DerivativeBounds {
    double K0 = 0.0;
    double eps0 = 0.0;
};

struct BoundsCheck {
    bool passed = false;
    double worst_ratio = 0.0;  // max over grid of the binding ratio / K0
    long violations = 0;
};

DerivativeBounds fit_derivative_bounds(const CircleMap& m, const MarkedSets& sets,
                                       int grid_points);

// Spec-shaped convenience: locates the marked sets on the same grid first.
inline DerivativeBounds fit_derivative_bounds(const CircleMap& m, int grid_points) {
    return fit_derivative_bounds(m, find_marked_sets(m, grid_points), grid_points);
}

// Re-verify all three inequalities on an independent grid (offset midpoints).
BoundsCheck verify_derivative_bounds(const CircleMap& m, const MarkedSets& sets,
                                     const DerivativeBounds& b, int grid_points);

} // namespace circlelab
