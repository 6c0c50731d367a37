#pragma once
#include <cmath>
#include <cstddef>
#include <vector>

#include "circlelab/dd.hpp"
#include "circlelab/errors.hpp"
#include "circlelab/roots.hpp"

namespace circlelab {

// Phi(x) = constant_offset + sum_k [ c_k cos(2 pi k x) + s_k sin(2 pi k x) ].
// Exactly 1-periodic by construction; Morse/transversality is certified
// numerically at construction time (see certify()).
struct PhiSpec {
    std::vector<double> cosine_coefficients; // c_1, c_2, ...
    std::vector<double> sine_coefficients;   // s_1, s_2, ...
    double constant_offset = 0.0;

    std::size_t order() const {
        return std::max(cosine_coefficients.size(), sine_coefficients.size());
    }
    double coeff_cos(std::size_t k) const {
        return k <= cosine_coefficients.size() ? cosine_coefficients[k - 1] : 0.0;
    }
    double coeff_sin(std::size_t k) const {
        return k <= sine_coefficients.size() ? sine_coefficients[k - 1] : 0.0;
    }
    // Phi(x + 1/2) = -Phi(x) iff only odd harmonics and zero offset. Used to
    // deduplicate critical orbits that are exact half-period translates.
    bool half_period_antisymmetric() const {
        if (constant_offset != 0.0) return false;
        for (std::size_t k = 1; k <= order(); ++k)
            if (k % 2 == 0 && (coeff_cos(k) != 0.0 || coeff_sin(k) != 0.0))
                return false;
        return true;
    }
};

inline PhiSpec canonical_phi() { return PhiSpec{{}, {1.0}, 0.0}; }

inline double phi_eval(const PhiSpec& p, double x) {
    double v = p.constant_offset;
    for (std::size_t k = 1; k <= p.order(); ++k) {
        double s, c;
        sincos2pi(k * x, s, c);
        v += p.coeff_cos(k) * c + p.coeff_sin(k) * s;
    }
    return v;
}

inline double phi_deriv(const PhiSpec& p, double x) {
    double v = 0.0;
    for (std::size_t k = 1; k <= p.order(); ++k) {
        double s, c;
        sincos2pi(k * x, s, c);
        double w = 2.0 * M_PI * k;
        v += w * (-p.coeff_cos(k) * s + p.coeff_sin(k) * c);
    }
    return v;
}

inline double phi_second(const PhiSpec& p, double x) {
    double v = 0.0;
    for (std::size_t k = 1; k <= p.order(); ++k) {
        double s, c;
        sincos2pi(k * x, s, c);
        double w2 = 4.0 * M_PI * M_PI * k * k;
        v -= w2 * (p.coeff_cos(k) * c + p.coeff_sin(k) * s);
    }
    return v;
}

inline dd phi_eval_dd(const PhiSpec& p, dd x) {
    dd v(p.constant_offset);
    for (std::size_t k = 1; k <= p.order(); ++k) {
        dd s, c;
        dd_sincos2pi(x * static_cast<double>(k), s, c);
        v = v + c * p.coeff_cos(k) + s * p.coeff_sin(k);
    }
    return v;
}

inline dd phi_deriv_dd(const PhiSpec& p, dd x) {
    dd v(0.0);
    for (std::size_t k = 1; k <= p.order(); ++k) {
        dd s, c;
        dd_sincos2pi(x * static_cast<double>(k), s, c);
        dd w = dd_2pi * static_cast<double>(k);
        v = v + w * (c * p.coeff_sin(k) - s * p.coeff_cos(k));
    }
    return v;
}

// Construction-time certificate: zeros of Phi with their slopes (transverse)
// and zeros of Phi' with |Phi''| (Morse). Tolerances per the build contract.
struct PhiCertificate {
    std::vector<double> phi_roots;      // sorted, in [0,1)
    std::vector<double> phi_root_slopes; // |Phi'| at each root
    double min_root_slope = 0.0;
    double max_root_slope = 0.0;
    double min_morse_curvature = 0.0;   // min |Phi''| over roots of Phi'
};

inline PhiCertificate certify(const PhiSpec& p,
                              double tol_transverse = 1e-6,
                              double tol_morse = 1e-6,
                              int grid = 4096) {
    PhiCertificate cert;
    scan_roots([&](double x) { return phi_eval(p, x); }, 0.0, 1.0, grid,
               [&](double r) {
                   if (r >= 1.0) r -= 1.0;
                   cert.phi_roots.push_back(r);
                   cert.phi_root_slopes.push_back(std::fabs(phi_deriv(p, r)));
               });
    if (cert.phi_roots.empty())
        throw NoZeros("Phi has no zero in [0,1); the map family requires one");
    cert.min_root_slope = cert.phi_root_slopes[0];
    cert.max_root_slope = cert.phi_root_slopes[0];
    for (double s : cert.phi_root_slopes) {
        cert.min_root_slope = std::min(cert.min_root_slope, s);
        cert.max_root_slope = std::max(cert.max_root_slope, s);
    }
    if (cert.min_root_slope <= tol_transverse)
        throw UnresolvedRoot("Phi has a non-transverse zero (|Phi'| below tolerance)");
    cert.min_morse_curvature = HUGE_VAL;
    scan_roots([&](double x) { return phi_deriv(p, x); }, 0.0, 1.0, grid,
               [&](double r) {
                   cert.min_morse_curvature =
                       std::min(cert.min_morse_curvature, std::fabs(phi_second(p, r)));
               });
    if (cert.min_morse_curvature <= tol_morse)
        throw UnresolvedRoot("Phi has a degenerate extremum (|Phi''| below tolerance)");
    return cert;
}

} // namespace circlelab
