#pragma once
#include <string>
#include <vector>

#include "circlelab/circle_map.hpp"

namespace circlelab {

enum class MarkedKind { critical, singular };

// Certified zero set: C(f) = {f' = 0} or S(f) = {Phi = 0}, points sorted in
// [0,1), with the achieved residual (|f'| resp. |Phi|) stored per point.
struct MarkedSet {
    MarkedKind kind;
    std::vector<double> points;
    std::vector<double> certification;

    bool empty() const { return points.empty(); }
};

struct MarkedSets {
    MarkedSet critical;
    MarkedSet singular;
};

// Locate both sets by grid scan + bracketed bisection. Singular roots certify
// to |Phi| < 1e-12 outright; critical roots certify to the smallest residual
// double resolution allows, |f''| * ulp(c) (which is < 1e-12 for the L used
// in acceptance), else UnresolvedRoot.
MarkedSets find_marked_sets(const CircleMap& m, int grid_points);

// Circle distance min_k dist(x, p_k), in [0, 1/2].
double distance_to_set(const MarkedSet& s, double x);

// The marked point realizing distance_to_set, paired with its distance.
struct NearestPoint {
    double point;
    double distance;
};
NearestPoint nearest_point(const MarkedSet& s, double x);

} // namespace circlelab
