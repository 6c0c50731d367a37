#include "circlelab/orbit.hpp"

#include <cmath>

namespace circlelab {

OrbitRecord iterate_orbit(const CircleMap& m, const MarkedSets& sets, double x0,
                          long n, const PrecisionPolicy& policy) {
    if (n > policy.max_orbit_length) n = policy.max_orbit_length;
    double excl = policy.singular_exclusion_radius;
    double promo = policy.working_precision == WorkingPrecision::extended
                       ? policy.promotion_threshold
                       : 0.0;

    OrbitRecord rec;
    rec.points.reserve(n + 1);
    double x = frac(x0);
    if (distance_to_set(sets.singular, x) < excl)
        throw SingularProximity("orbit start inside exclusion radius");

    double lam = 0.0;
    for (long i = 0; i <= n; ++i) {
        rec.points.push_back(x);
        rec.log_deriv_prefix.push_back(lam);
        rec.dC.push_back(distance_to_set(sets.critical, x));
        rec.dS.push_back(distance_to_set(sets.singular, x));
        rec.flags.push_back(StepFlag::ok);
        if (i == n) break;
        MapEval e;
        double fp;
        try {
            e = eval_displacement(m, x, excl, promo);
            fp = eval_derivatives(m, x, excl, promo).f_prime;
        } catch (const SingularProximity&) {
            rec.flags.back() = StepFlag::truncated;
            break;
        }
        if (e.promoted) rec.flags.back() = StepFlag::promoted;
        lam += std::log(std::fabs(fp));
        x = frac(x + e.displacement);
    }
    return rec;
}

ContractionData compute_contraction(const CircleMap& m, const OrbitRecord& orbit,
                                    int n_max) {
    if (static_cast<std::size_t>(n_max) >= orbit.length())
        throw LabError("compute_contraction: orbit shorter than n_max");
    ContractionData cd;
    cd.base_point = orbit.points[0];
    cd.Dn.assign(n_max + 1, HUGE_VAL);
    cd.di_inv_prefix.assign(n_max + 1, 0.0);
    double inv_sqrtL = 1.0 / std::sqrt(m.L);
    for (int i = 0; i < n_max; ++i) {
        double dc = orbit.dC[i], ds = orbit.dS[i];
        if (dc < 1e-15 || ds < 1e-15)
            throw UndefinedAtStep("orbit touches C or S at step " + std::to_string(i));
        double di_inv = std::exp(orbit.log_deriv_prefix[i]) / (dc * ds);
        if (!std::isfinite(di_inv))
            throw UndefinedAtStep("derivative product overflow at step " + std::to_string(i));
        cd.di_inv_prefix[i + 1] = cd.di_inv_prefix[i] + di_inv;
        cd.Dn[i + 1] = inv_sqrtL / cd.di_inv_prefix[i + 1];
    }
    return cd;
}

} // namespace circlelab
