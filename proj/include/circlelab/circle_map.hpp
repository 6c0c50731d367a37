#pragma once
#include <cmath>
#include <cstdint>

#include "circlelab/dd.hpp"
#include "circlelab/errors.hpp"
#include "circlelab/trig_poly.hpp"

namespace circlelab {

// f(x) = x + a + L ln|Phi(x)| on the circle. The displacement
// Delta(x) = a + L ln|Phi(x)| depends only on the fractional part, so the
// lift F(u) = u + Delta(frac u) satisfies F(u+1) = F(u) + 1 identically.
struct CircleMap {
    double a = 0.0;
    double L = 1.0;
    PhiSpec phi;
    PhiCertificate phi_cert;

    CircleMap(double a_, double L_, PhiSpec phi_)
        : a(a_), L(L_), phi(std::move(phi_)), phi_cert(certify(phi)) {}
};

inline double frac(double x) {
    double f = x - std::floor(x);
    return f < 1.0 ? f : 0.0; // floor rounding can yield f == 1 for tiny x < 0
}

// Circle position carried as integer wrap count + fractional part. Keeps the
// map and its lift bit-consistent and makes wrap counting exact.
struct LiftValue {
    std::int64_t wraps = 0;
    double y = 0.0; // in [0,1)
    double value() const { return static_cast<double>(wraps) + y; }
};

inline LiftValue lift_of(double u) {
    double fl = std::floor(u);
    return {static_cast<std::int64_t>(fl), frac(u - fl)};
}

namespace detail {
// |Phi| threshold below which evaluation is refused: transversality gives
// |Phi(x)| ~ slope * d_S(x) near each zero, so this realizes the policy's
// distance-based exclusion without needing the marked sets.
inline double exclusion_phi(const CircleMap& m, double radius) {
    return radius * m.phi_cert.min_root_slope;
}
inline double promotion_phi(const CircleMap& m, double threshold) {
    return 4.0 * threshold * m.phi_cert.max_root_slope;
}
} // namespace detail

inline constexpr double default_exclusion_radius = 1e-13;
inline constexpr double default_promotion_threshold = 1e-8;

struct MapEval {
    double displacement; // a + L ln|Phi(x)|
    bool promoted;       // evaluated through double-double
};

// Displacement with automatic promotion to double-double near the singular
// set (cancellation in multi-term Phi would otherwise poison ln|Phi|).
inline MapEval eval_displacement(const CircleMap& m, double x,
                                 double exclusion = default_exclusion_radius,
                                 double promotion = default_promotion_threshold) {
    double p = phi_eval(m.phi, x);
    double ap = std::fabs(p);
    if (ap < detail::exclusion_phi(m, exclusion))
        throw SingularProximity("|Phi| = " + std::to_string(ap) + " at x = " + std::to_string(x));
    if (ap < detail::promotion_phi(m, promotion)) {
        dd pd = phi_eval_dd(m.phi, dd(x));
        dd disp = dd_log(fabs(pd)) * m.L + m.a;
        return {disp.to_double(), true};
    }
    return {m.a + m.L * std::log(ap), false};
}

inline MapEval eval_step(const CircleMap& m, LiftValue& v,
                         double exclusion = default_exclusion_radius,
                         double promotion = default_promotion_threshold) {
    MapEval e = eval_displacement(m, v.y, exclusion, promotion);
    double t = v.y + e.displacement;
    double fl = std::floor(t);
    v.wraps += static_cast<std::int64_t>(fl);
    v.y = frac(t - fl);
    return e;
}

inline double eval_map(const CircleMap& m, double x, bool lift = false,
                       double exclusion = default_exclusion_radius,
                       double promotion = default_promotion_threshold) {
    MapEval e = eval_displacement(m, frac(x), exclusion, promotion);
    double t = x + e.displacement;
    return lift ? t : frac(t);
}

struct Derivatives {
    double f_prime;
    double f_double_prime;
};

// f' = 1 + L Phi'/Phi,  f'' = L (Phi'' Phi - Phi'^2) / Phi^2.
inline Derivatives eval_derivatives(const CircleMap& m, double x,
                                    double exclusion = default_exclusion_radius,
                                    double promotion = default_promotion_threshold) {
    double xf = frac(x);
    double p = phi_eval(m.phi, xf);
    double ap = std::fabs(p);
    if (ap < detail::exclusion_phi(m, exclusion))
        throw SingularProximity("derivative at x = " + std::to_string(x));
    if (ap < detail::promotion_phi(m, promotion)) {
        dd pd = phi_eval_dd(m.phi, dd(xf));
        dd dpd = phi_deriv_dd(m.phi, dd(xf));
        dd ratio = dpd / pd;
        double fp = (ratio * m.L + 1.0).to_double();
        double pp = phi_second(m.phi, xf);
        dd fpp = (dd(pp) / pd - ratio * ratio) * m.L;
        return {fp, fpp.to_double()};
    }
    double dp = phi_deriv(m.phi, xf);
    double pp = phi_second(m.phi, xf);
    double r = dp / p;
    return {1.0 + m.L * r, m.L * (pp / p - r * r)};
}

inline double log_abs_fprime(const CircleMap& m, double x,
                             double exclusion = default_exclusion_radius,
                             double promotion = default_promotion_threshold) {
    return std::log(std::fabs(eval_derivatives(m, x, exclusion, promotion).f_prime));
}

// --- double-double orbit state -------------------------------------------
//
// Near an extremum of Phi the plain-double ln|Phi| keeps only absolute
// accuracy (~1e-16), and for a branch that starts next to a critical point
// of f the post-contraction derivative amplifies that into image noise that
// can reach whole wrap windows. Carrying the circle position itself in
// double-double restores relative accuracy end to end; the callers decide
// per branch whether the double path is noise-dominated.

struct LiftValueDD {
    std::int64_t wraps = 0;
    dd y{}; // in [0,1)
    double value() const { return static_cast<double>(wraps) + y.to_double(); }
    dd value_dd() const { return y + static_cast<double>(wraps); }
};

inline dd eval_displacement_dd(const CircleMap& m, dd y,
                               double exclusion = default_exclusion_radius) {
    dd p = phi_eval_dd(m.phi, y);
    dd ap = fabs(p);
    if (ap.hi < detail::exclusion_phi(m, exclusion))
        throw SingularProximity("|Phi| = " + std::to_string(ap.hi) +
                                " at x = " + std::to_string(y.hi));
    return dd_log(ap) * m.L + m.a;
}

inline void eval_step_dd(const CircleMap& m, LiftValueDD& v,
                         double exclusion = default_exclusion_radius) {
    dd t = v.y + eval_displacement_dd(m, v.y, exclusion);
    double fl = std::floor(t.hi);
    dd r = t - fl;
    if (r.hi < 0.0) {
        r = r + 1.0;
        fl -= 1.0;
    } else if (r.hi >= 1.0) {
        r = r - 1.0;
        fl += 1.0;
    }
    v.wraps += static_cast<std::int64_t>(fl);
    v.y = r;
}

inline double log_abs_fprime_dd(const CircleMap& m, dd y,
                                double exclusion = default_exclusion_radius) {
    dd p = phi_eval_dd(m.phi, y);
    if (fabs(p).hi < detail::exclusion_phi(m, exclusion))
        throw SingularProximity("derivative at x = " + std::to_string(y.hi));
    dd fp = (phi_deriv_dd(m.phi, y) / p) * m.L + 1.0;
    return std::log(std::fabs(fp.to_double()));
}

} // namespace circlelab
