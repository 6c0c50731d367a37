#pragma once
#include <cmath>

// Double-double arithmetic (~106-bit significand) used when orbits pass very
// close to the singular set: the log-derivative there loses about
// |log10 d_S| digits in plain double, so the map promotes to dd below the
// policy's promotion threshold. Algorithms are the standard error-free
// transforms (two_sum / two_prod with fused multiply-add).

namespace circlelab {

struct dd {
    double hi = 0.0;
    double lo = 0.0;
    dd() = default;
    constexpr dd(double h) : hi(h), lo(0.0) {}
    constexpr dd(double h, double l) : hi(h), lo(l) {}
    double to_double() const { return hi + lo; }
};

inline double two_sum(double a, double b, double& err) {
    double s = a + b;
    double bb = s - a;
    err = (a - (s - bb)) + (b - bb);
    return s;
}

inline double quick_two_sum(double a, double b, double& err) {
    double s = a + b;
    err = b - (s - a);
    return s;
}

inline double two_prod(double a, double b, double& err) {
    double p = a * b;
    err = std::fma(a, b, -p);
    return p;
}

inline dd operator+(dd a, dd b) {
    double e1, e2;
    double s = two_sum(a.hi, b.hi, e1);
    double t = two_sum(a.lo, b.lo, e2);
    e1 += t;
    s = quick_two_sum(s, e1, e1);
    e1 += e2;
    s = quick_two_sum(s, e1, e1);
    return {s, e1};
}

inline dd operator+(dd a, double b) {
    double e;
    double s = two_sum(a.hi, b, e);
    e += a.lo;
    s = quick_two_sum(s, e, e);
    return {s, e};
}

inline dd operator-(dd a) { return {-a.hi, -a.lo}; }
inline dd operator-(dd a, dd b) { return a + (-b); }
inline dd operator-(dd a, double b) { return a + (-b); }
inline dd operator-(double a, dd b) { return (-b) + a; }

inline dd operator*(dd a, dd b) {
    double e;
    double p = two_prod(a.hi, b.hi, e);
    e += a.hi * b.lo + a.lo * b.hi;
    p = quick_two_sum(p, e, e);
    return {p, e};
}

inline dd operator*(dd a, double b) {
    double e;
    double p = two_prod(a.hi, b, e);
    e += a.lo * b;
    p = quick_two_sum(p, e, e);
    return {p, e};
}

inline dd operator/(dd a, dd b) {
    double q1 = a.hi / b.hi;
    dd r = a - b * q1;
    double q2 = r.hi / b.hi;
    r = r - b * q2;
    double q3 = r.hi / b.hi;
    double e;
    double q = quick_two_sum(q1, q2, e);
    dd res{q, e};
    return res + q3;
}

inline dd operator/(dd a, double b) { return a / dd(b); }

inline dd ldexp(dd a, int n) { return {std::ldexp(a.hi, n), std::ldexp(a.lo, n)}; }
inline dd fabs(dd a) { return a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0) ? -a : a; }
inline bool operator<(dd a, double b) { return a.hi < b || (a.hi == b && a.lo < 0.0); }

inline constexpr dd dd_2pi   {6.283185307179586232e+00, 2.449293598294706414e-16};
inline constexpr dd dd_ln2   {6.931471805599452862e-01, 2.319046813846299558e-17};

// exp(a) for |a.hi| up to ~700. Reduction a = m*ln2 + r, Taylor on r/2^9,
// then nine squarings of expm1 to avoid cancellation.
inline dd dd_exp(dd a) {
    if (a.hi < -746.0) return dd(0.0);
    double m = std::nearbyint(a.hi / dd_ln2.hi);
    dd r = a - dd_ln2 * m;
    dd t = ldexp(r, -9);
    // expm1(t) by Taylor; |t| <= 7e-4 so 10 terms reach ~1e-34
    dd term = t;
    dd sum = t;
    for (int k = 2; k <= 10; ++k) {
        term = term * t / static_cast<double>(k);
        sum = sum + term;
    }
    for (int i = 0; i < 9; ++i) sum = sum * sum + ldexp(sum, 1); // e := e^2 + 2e
    dd res = sum + 1.0;
    return ldexp(res, static_cast<int>(m));
}

// log(a) for a.hi > 0: double seed + one Newton correction in dd.
inline dd dd_log(dd a) {
    double y0 = std::log(a.hi);
    dd r = a * dd_exp(dd(-y0));     // = a * e^{-y0}, within ~1e-16 of 1
    dd u = r - 1.0;
    dd corr = u - ldexp(u * u, -1); // log(1+u) to O(u^3) ~ 1e-48
    return corr + y0;
}

// sin(2*pi*x) and cos(2*pi*x) with exact quarter-period reduction, so
// accuracy is relative (not just absolute) near the zeros at half-integers.
inline void dd_sincos2pi(dd x, dd& s, dd& c) {
    double n = std::nearbyint(x.hi);
    dd t = x - n;                       // |t| <= 0.5 + tiny
    double kd = std::nearbyint(4.0 * t.hi);
    dd r = t - kd * 0.25;               // exact: kd/4 is dyadic
    dd th = r * dd_2pi;                 // |th| <= pi/4 + eps
    dd th2 = th * th;
    dd ss = th, sterm = th;
    dd cc = dd(1.0), cterm = dd(1.0);
    for (int k = 1; k <= 16; ++k) {
        sterm = sterm * th2 / static_cast<double>((2 * k) * (2 * k + 1));
        ss = (k % 2) ? ss - sterm : ss + sterm;
        cterm = cterm * th2 / static_cast<double>((2 * k - 1) * (2 * k));
        cc = (k % 2) ? cc - cterm : cc + cterm;
    }
    int k = static_cast<int>(kd);
    switch (k) {
        case 0: s = ss; c = cc; break;
        case 1: s = cc; c = -ss; break;
        case -1: s = -cc; c = ss; break;
        default: s = -ss; c = -cc; break; // k = +-2
    }
}

// Plain-double versions with the same exact reduction; used everywhere the
// map is evaluated so that sin(2*pi*x) keeps full relative accuracy near
// x = 0, 1/2, 1 (where |Phi| -> 0 and ln|Phi| is about to explode).
inline void sincos2pi(double x, double& s, double& c) {
    double t = x - std::nearbyint(x);
    double kd = std::nearbyint(4.0 * t);
    double th = 6.283185307179586232e+00 * (t - kd * 0.25);
    double ss = std::sin(th), cc = std::cos(th);
    switch (static_cast<int>(kd)) {
        case 0: s = ss; c = cc; break;
        case 1: s = cc; c = -ss; break;
        case -1: s = -cc; c = ss; break;
        default: s = -ss; c = -cc; break;
    }
}

inline double sin2pi(double x) {
    double s, c;
    sincos2pi(x, s, c);
    return s;
}

inline double cos2pi(double x) {
    double s, c;
    sincos2pi(x, s, c);
    return c;
}

} // namespace circlelab
