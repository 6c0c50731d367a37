#include "circlelab/derivative_bounds.hpp"

#include <algorithm>
#include <cmath>

namespace circlelab {

namespace {

struct GridScan {
    double K_needed = 1.0;   // from inequalities (i) and (ii)
    double K_center = 1.0;   // |f''|/L window at the deepest critical approach
    // per-point records for the eps0 scan
    std::vector<double> dC;
    std::vector<double> r3; // |f''|/L
};

GridScan scan(const CircleMap& m, const MarkedSets& sets, int grid_points,
              double offset) {
    GridScan g;
    g.dC.reserve(grid_points);
    g.r3.reserve(grid_points);
    double best_dc = 1.0;
    for (int i = 0; i < grid_points; ++i) {
        double x = (i + offset) / grid_points;
        double ds = distance_to_set(sets.singular, x);
        double dc = distance_to_set(sets.critical, x);
        if (ds < 1e-12 || dc < 1e-12) continue; // exclusion slivers
        Derivatives d = eval_derivatives(m, x);
        double afp = std::fabs(d.f_prime);
        if (afp > 0.0) {
            double r1 = afp * ds / (m.L * dc);
            g.K_needed = std::max({g.K_needed, r1, 1.0 / r1});
        }
        double r2 = std::fabs(d.f_double_prime) * ds * ds / m.L;
        g.K_needed = std::max(g.K_needed, r2);
        double r3 = std::fabs(d.f_double_prime) / m.L;
        g.dC.push_back(dc);
        g.r3.push_back(r3);
        if (dc < best_dc) {
            best_dc = dc;
            g.K_center = std::max(r3, 1.0 / r3);
        }
    }
    return g;
}

} // namespace

DerivativeBounds fit_derivative_bounds(const CircleMap& m, const MarkedSets& sets,
                                       int grid_points) {
    GridScan g = scan(m, sets, grid_points, 0.5);
    // The third inequality pins K0 from below near the critical points
    // themselves (|f''(c)|/L is an O(1) constant of Phi), so the smallest
    // admissible K0 is the max of all three requirements; 4% headroom keeps
    // re-verification on shifted grids stable and stays within the 5% fit
    // accuracy the contract asks for.
    for (double c : sets.critical.points) {
        double r3 = std::fabs(eval_derivatives(m, c).f_double_prime) / m.L;
        g.K_center = std::max({g.K_center, r3, 1.0 / r3});
    }
    double K0 = 1.04 * std::max(g.K_needed, g.K_center);
    if (K0 > 1e6)
        throw UnboundedRatio("no K0 < 1e6 satisfies the derivative comparison");

    // Largest eps0 such that every grid point with d_C <= eps0 keeps |f''|/L
    // inside (1/K0, K0).
    double eps0 = 0.5;
    for (std::size_t i = 0; i < g.dC.size(); ++i) {
        bool ok = g.r3[i] > 1.0 / K0 && g.r3[i] < K0;
        if (!ok) eps0 = std::min(eps0, g.dC[i]);
    }
    eps0 = std::max(0.0, eps0 - 1.0 / grid_points);
    if (eps0 <= 0.0)
        throw UnboundedRatio("no positive eps0 certifies the |f''| window");
    return {K0, eps0};
}

BoundsCheck verify_derivative_bounds(const CircleMap& m, const MarkedSets& sets,
                                     const DerivativeBounds& b, int grid_points) {
    BoundsCheck out;
    for (int i = 0; i < grid_points; ++i) {
        double x = (i + 0.25) / grid_points; // offset from the fitting grid
        double ds = distance_to_set(sets.singular, x);
        double dc = distance_to_set(sets.critical, x);
        if (ds < 1e-12 || dc < 1e-12) continue;
        Derivatives d = eval_derivatives(m, x);
        double afp = std::fabs(d.f_prime);
        double needed = 1.0;
        if (afp > 0.0) {
            double r1 = afp * ds / (m.L * dc);
            needed = std::max({needed, r1, 1.0 / r1});
        }
        needed = std::max(needed, std::fabs(d.f_double_prime) * ds * ds / m.L);
        if (dc <= b.eps0) {
            double r3 = std::fabs(d.f_double_prime) / m.L;
            needed = std::max({needed, r3, 1.0 / r3});
        }
        out.worst_ratio = std::max(out.worst_ratio, needed / b.K0);
        if (needed > b.K0) ++out.violations;
    }
    out.passed = out.violations == 0;
    return out;
}

} // namespace circlelab
