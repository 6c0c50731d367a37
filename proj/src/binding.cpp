#include "circlelab/binding.hpp"

#include <cmath>

#include "circlelab/errors.hpp"

namespace circlelab {

BindingIntervals build_binding_intervals(const CircleMap& m, const MarkedSets& sets,
                                         double c, int p_max,
                                         const DerivativeBounds& bounds) {
    if (p_max < 2) throw LabError("build_binding_intervals: p_max must be >= 2");
    const double v0 = eval_map(m, c);

    PrecisionPolicy policy;
    OrbitRecord orbit = iterate_orbit(m, sets, v0, p_max, policy);
    if (orbit.truncated())
        throw CriticalOrbitTruncated("critical value orbit hits the singular "
                                     "exclusion zone before step " + std::to_string(p_max));

    ContractionData contraction = compute_contraction(m, orbit, p_max);

    BindingIntervals out;
    out.critical_point = c;
    out.entries.reserve(static_cast<std::size_t>(p_max - 1));
    const double scale = bounds.K0 * m.L;
    for (int p = 2; p <= p_max; ++p) {
        BindingEntry e;
        e.p = p;
        e.inner_radius = std::sqrt(contraction.Dn[static_cast<std::size_t>(p)] / scale);
        e.outer_radius = std::sqrt(contraction.Dn[static_cast<std::size_t>(p - 1)] / scale);
        if (!(e.inner_radius < e.outer_radius))
            throw LabError("build_binding_intervals: radii not strictly decreasing at p=" +
                           std::to_string(p));
        out.entries.push_back(e);
    }
    return out;
}

int bound_period_of(const BindingIntervals& b, double x) {
    double dx = x - b.critical_point;
    dx -= std::floor(dx + 0.5); // nearest circle representative, in [-1/2, 1/2)
    const double r = std::fabs(dx);
    if (r == 0.0)
        throw OutOfBindingRange("point coincides with the critical point");
    if (r > b.outermost_radius())
        throw OutOfBindingRange("point lies outside I_2");
    if (r <= b.innermost_radius())
        throw OutOfBindingRange("point closer than the innermost entry; increase p_max");
    // Right-closed: r in (inner_p, outer_p] selects p.
    for (const BindingEntry& e : b.entries)
        if (r > e.inner_radius && r <= e.outer_radius) return e.p;
    throw LabError("bound_period_of: radii do not tile (internal)");
}

} // namespace circlelab
