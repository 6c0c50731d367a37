#pragma once
#include <vector>

#include "circlelab/derivative_bounds.hpp"
#include "circlelab/orbit.hpp"

namespace circlelab {

// Binding family around a critical point c:
//   I_p(c) = ( c + sqrt(D_p(v0)/(K0 L)), c + sqrt(D_{p-1}(v0)/(K0 L)) ],
// p >= 2, with the mirror interval reflected through c. Consecutive entries
// share endpoints; the radii strictly decrease in p.
struct BindingEntry {
    int p;
    double inner_radius; // sqrt(D_p / (K0 L))
    double outer_radius; // sqrt(D_{p-1} / (K0 L))
};

struct BindingIntervals {
    double critical_point;
    std::vector<BindingEntry> entries; // p = 2 .. p_max

    double outermost_radius() const { return entries.front().outer_radius; }
    double innermost_radius() const { return entries.back().inner_radius; }
};

BindingIntervals build_binding_intervals(const CircleMap& m, const MarkedSets& sets,
                                         double c, int p_max,
                                         const DerivativeBounds& bounds);

// The unique p with x in I_p(c) or its mirror (right-closed convention).
// OutOfBindingRange if x == c, closer than the innermost entry, or farther
// than I_2.
int bound_period_of(const BindingIntervals& b, double x);

} // namespace circlelab
