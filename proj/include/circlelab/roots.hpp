#pragma once
#include <cmath>
#include <utility>

#include "circlelab/errors.hpp"

namespace circlelab {

// Bracketed root refinement (Illinois variant of regula falsi with bisection
// fallback). Requires fa*fb <= 0; shrinks [a,b] until it is at most xtol wide
// or the bracket collapses to adjacent doubles, and returns the endpoint with
// the smaller |f|.
template <class F>
double refine_root(F&& f, double a, double b, double fa, double fb,
                   double xtol = 0.0, int max_iter = 200) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw UnresolvedRoot("no sign change in bracket");
    double side = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        double m = (a * fb - b * fa) / (fb - fa);
        double width = b - a;
        if (!(m > a && m < b)) m = a + 0.5 * width;
        if (width <= xtol || m <= a || m >= b) break;
        double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m; fa = fm;
            if (side == -1.0) fb *= 0.5;
            side = -1.0;
        } else {
            b = m; fb = fm;
            if (side == 1.0) fa *= 0.5;
            side = 1.0;
        }
    }
    return std::fabs(fa) <= std::fabs(fb) ? a : b;
}

// Scan [lo, hi) on a uniform grid and refine every sign change of f.
template <class F, class Out>
void scan_roots(F&& f, double lo, double hi, int grid, Out&& emit) {
    double prev_x = lo, prev_f = f(lo);
    for (int i = 1; i <= grid; ++i) {
        double x = lo + (hi - lo) * static_cast<double>(i) / grid;
        double fx = f(x);
        if (prev_f == 0.0) {
            emit(prev_x);
        } else if (fx != 0.0 && (prev_f > 0.0) != (fx > 0.0)) {
            emit(refine_root(f, prev_x, x, prev_f, fx));
        }
        prev_x = x;
        prev_f = fx;
    }
}

} // namespace circlelab
