#include "circlelab/marked_set.hpp"

#include <algorithm>
#include <cmath>

#include "circlelab/roots.hpp"

namespace circlelab {

namespace {

double circle_dist(double x, double p) {
    double d = std::fabs(frac(x) - p);
    return std::min(d, 1.0 - d);
}

} // namespace

MarkedSets find_marked_sets(const CircleMap& m, int grid_points) {
    if (grid_points < 1000) throw LabError("find_marked_sets needs grid_points >= 1000");

    MarkedSets out;
    out.singular.kind = MarkedKind::singular;
    out.critical.kind = MarkedKind::critical;

    // Singular set: zeros of Phi. The construction certificate already
    // located them; re-derive at the requested grid and polish.
    auto phi = [&](double x) { return phi_eval(m.phi, x); };
    scan_roots(phi, 0.0, 1.0, grid_points, [&](double r) {
        r = frac(r);
        double res = std::fabs(phi(r));
        // one Newton polish; Phi' is bounded away from 0 here by transversality
        double step = phi_eval(m.phi, r) / phi_deriv(m.phi, r);
        if (std::isfinite(step) && std::fabs(step) < 1.0 / grid_points) {
            double r2 = frac(r - step);
            double res2 = std::fabs(phi(r2));
            if (res2 < res) { r = r2; res = res2; }
        }
        if (res >= 1e-12)
            throw UnresolvedRoot("singular root residual " + std::to_string(res));
        out.singular.points.push_back(r);
        out.singular.certification.push_back(res);
    });
    if (out.singular.points.empty())
        throw NoZeros("Phi has no sign change on the grid");
    std::sort(out.singular.points.begin(), out.singular.points.end());

    // Critical set: zeros of f' away from the singular neighborhoods where
    // f' has poles. Exclude a band of a few grid cells around each singular
    // point; f' is huge there and cannot vanish.
    double band = 4.0 / grid_points;
    auto fp = [&](double x) { return eval_derivatives(m, x).f_prime; };
    auto in_band = [&](double x) {
        for (double s : out.singular.points)
            if (circle_dist(x, s) < band) return true;
        return false;
    };
    double prev_x = 0.0;
    bool have_prev = false;
    double prev_f = 0.0;
    auto flush_root = [&](double a, double b, double fa, double fb) {
        double r = refine_root(fp, a, b, fa, fb);
        double res = std::fabs(fp(r));
        double fpp = std::fabs(eval_derivatives(m, r).f_double_prime);
        double attainable = std::max(1e-12, 4.0 * fpp * std::fabs(r) * 2.2204460492503131e-16);
        if (res >= attainable)
            throw UnresolvedRoot("critical root residual " + std::to_string(res));
        out.critical.points.push_back(frac(r));
        out.critical.certification.push_back(res);
    };
    for (int i = 0; i <= grid_points; ++i) {
        double x = static_cast<double>(i) / grid_points;
        if (in_band(x)) { have_prev = false; continue; }
        double fx = fp(x);
        if (have_prev && (prev_f > 0.0) != (fx > 0.0)) flush_root(prev_x, x, prev_f, fx);
        prev_x = x; prev_f = fx; have_prev = true;
    }
    std::sort(out.critical.points.begin(), out.critical.points.end());

    // Marked points must be separated and genuinely bracketed.
    for (auto* s : {&out.critical, &out.singular}) {
        for (std::size_t i = 1; i < s->points.size(); ++i)
            if (s->points[i] - s->points[i - 1] <= 10.0 / grid_points)
                throw UnresolvedRoot("marked points closer than 10 grid cells");
    }
    return out;
}

double distance_to_set(const MarkedSet& s, double x) {
    return nearest_point(s, x).distance;
}

NearestPoint nearest_point(const MarkedSet& s, double x) {
    if (s.points.empty()) throw LabError("distance_to_set on empty set");
    double xf = frac(x);
    auto it = std::lower_bound(s.points.begin(), s.points.end(), xf);
    NearestPoint best{s.points.front(), 0.5};
    auto consider = [&](std::size_t idx) {
        double d = circle_dist(xf, s.points[idx]);
        if (d < best.distance) best = NearestPoint{s.points[idx], d};
    };
    std::size_t n = s.points.size();
    std::size_t i = static_cast<std::size_t>(it - s.points.begin());
    consider(i % n);
    consider((i + n - 1) % n);
    return best;
}

} // namespace circlelab
