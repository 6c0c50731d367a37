#pragma once

namespace circlelab {

// Closed interval on the line (domain pieces live on the lift, so no wrap).
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

} // namespace circlelab
