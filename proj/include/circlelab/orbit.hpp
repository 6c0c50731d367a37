#pragma once
#include <vector>

#include "circlelab/circle_map.hpp"
#include "circlelab/marked_set.hpp"
#include "circlelab/profile.hpp"

namespace circlelab {

enum class StepFlag { ok, promoted, truncated };

// Orbit with per-step log-derivative prefix sums and marked-set distances.
// log_deriv_prefix[i] = ln|(f^i)'(x0)| (so entry 0 is 0); points, dC, dS and
// flags all have the same length.
struct OrbitRecord {
    std::vector<double> points;
    std::vector<double> log_deriv_prefix;
    std::vector<double> dC;
    std::vector<double> dS;
    std::vector<StepFlag> flags;

    std::size_t length() const { return points.size(); }
    bool truncated() const {
        return !flags.empty() && flags.back() == StepFlag::truncated;
    }
};

OrbitRecord iterate_orbit(const CircleMap& m, const MarkedSets& sets, double x0,
                          long n, const PrecisionPolicy& policy);

// D_n(x) = (1/sqrt L) [ sum_{i<n} d_i(x)^{-1} ]^{-1},
// d_i(x) = d_C(f^i x) d_S(f^i x) / |(f^i)'(x)|. Dn[0] is +infinity by
// convention (empty sum); entries are strictly decreasing from n = 1 on.
struct ContractionData {
    double base_point = 0.0;
    std::vector<double> Dn;
    std::vector<double> di_inv_prefix;
};

ContractionData compute_contraction(const CircleMap& m, const OrbitRecord& orbit,
                                    int n_max);

} // namespace circlelab
