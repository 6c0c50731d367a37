#include "circlelab/returns.hpp"

#include <algorithm>
#include <cmath>

#include "circlelab/errors.hpp"

namespace circlelab {

namespace {

int r_index_of(double distance, double lnL) {
    // unique r >= 1 with distance in (L^-r, L^-(r-1)]
    double t = -std::log(distance) / lnL;
    int r = static_cast<int>(std::floor(t)) + 1;
    return std::max(r, 1);
}

const BindingIntervals* match_binding(const std::vector<BindingIntervals>& bindings,
                                      double c) {
    for (const BindingIntervals& b : bindings) {
        double d = std::fabs(frac(b.critical_point) - frac(c));
        if (std::min(d, 1.0 - d) < 1e-9) return &b;
    }
    return nullptr;
}

} // namespace

ReturnDecomposition decompose_orbit(const CircleMap& m, const MarkedSets& sets,
                                    const OrbitRecord& orbit,
                                    const ExperimentProfile& profile,
                                    const std::vector<BindingIntervals>& bindings) {
    ReturnDecomposition out;
    const std::size_t n = orbit.length();
    if (n == 0) return out;
    const double lnL = std::log(m.L);

    std::size_t seg_begin = 0;
    std::size_t i = 0;
    while (i < n) {
        if (orbit.dC[i] > profile.delta) { ++i; continue; }

        ReturnEvent e;
        e.time = i;
        NearestPoint np = nearest_point(sets.critical, orbit.points[i]);
        e.critical_point = np.point;
        e.distance = orbit.dC[i];
        e.r_index = r_index_of(e.distance, lnL);

        const BindingIntervals* b = match_binding(bindings, np.point);
        if (!b)
            throw LabError("decompose_orbit: no binding family for critical point " +
                           std::to_string(np.point));
        if (e.distance > b->outermost_radius()) {
            // The return is inside C_delta but beyond I_2; the binding family
            // does not reach that far out, so the minimal period applies.
            e.bound_period = 2;
        } else {
            try {
                e.bound_period = bound_period_of(*b, orbit.points[i]);
            } catch (const OutOfBindingRange& ex) {
                throw OutOfBindingRange(std::string(ex.what()) + " (return time " +
                                        std::to_string(i) + ")");
            }
        }

        out.events.push_back(e);
        out.free_segments.push_back(FreeSegment{seg_begin, i});
        seg_begin = i + static_cast<std::size_t>(e.bound_period);
        i = seg_begin;
    }
    if (seg_begin <= n - 1)
        out.free_segments.push_back(FreeSegment{seg_begin, n - 1});
    return out;
}

ReturnDecomposition classify_returns(const ReturnDecomposition& d, double L) {
    ReturnDecomposition out = d;
    const double lnL = std::log(L);
    const std::size_t K = out.events.size();
    std::vector<double> logd(K);
    for (std::size_t q = 0; q < K; ++q)
        logd[q] = std::log(out.events[q].distance) / lnL;

    for (std::size_t q = 0; q < K; ++q) {
        bool deep = true;
        double suffix = 0.0; // sum_{j=k+1}^{q-1} 2 log_L d(n_j), built downward in k
        for (std::size_t k = q; k-- > 0;) {
            double lhs = 2.0 * logd[q] + suffix;
            if (!(lhs <= logd[k] + 1e-12)) { deep = false; break; }
            suffix += 2.0 * logd[k];
        }
        out.events[q].depth = deep ? ReturnDepth::deep : ReturnDepth::shallow;
    }
    return out;
}

ThetaDecomposition theta_contributions(const CircleMap& m, const OrbitRecord& orbit,
                                       const ReturnDecomposition& d, std::size_t nu,
                                       const ExperimentProfile& profile) {
    (void)m;
    auto ev = std::find_if(d.events.begin(), d.events.end(),
                           [&](const ReturnEvent& e) { return e.time == nu; });
    if (ev == d.events.end())
        throw NotAFreeReturn("time " + std::to_string(nu) +
                             " is not a free return of this decomposition");
    if (nu >= orbit.length())
        throw LabError("theta_contributions: decomposition does not match orbit");

    const std::vector<double>& pre = orbit.log_deriv_prefix;
    const double shift = pre[nu];

    // Tag each index i < nu with the bound window containing it, if any.
    std::vector<long> window_of(nu, -1);
    std::vector<const ReturnEvent*> windows;
    for (const ReturnEvent& e : d.events) {
        if (e.time >= nu) break;
        for (std::size_t t = e.time;
             t < e.time + static_cast<std::size_t>(e.bound_period) && t < nu; ++t)
            window_of[t] = static_cast<long>(windows.size());
        windows.push_back(&e);
    }

    // Scaled terms u_i = exp(Lambda_i - Lambda_nu) / (dC_i dS_i): the shift
    // keeps every partial sum representable.
    std::vector<double> win_sum(windows.size(), 0.0);
    double free_sum = 0.0, total_sum = 0.0;
    for (std::size_t i = 0; i < nu; ++i) {
        double u = std::exp(pre[i] - shift) / (orbit.dC[i] * orbit.dS[i]);
        total_sum += u;
        if (window_of[i] >= 0)
            win_sum[static_cast<std::size_t>(window_of[i])] += u;
        else
            free_sum += u;
    }

    ThetaDecomposition out;
    out.theta_total_log = std::log(total_sum) + shift;
    out.theta0_log = std::log(free_sum) + shift;

    const double exponent = -18.0 * profile.alpha / profile.lambda;
    for (std::size_t k = 0; k < windows.size(); ++k) {
        const ReturnEvent& e = *windows[k];
        ThetaEvent te;
        te.event_index = k;
        te.time = e.time;
        te.bound_period = e.bound_period;
        te.theta_log = std::log(win_sum[k]) + shift;
        double lhs = te.theta_log - pre[e.time + static_cast<std::size_t>(e.bound_period)];
        double rhs = exponent * std::log(e.distance);
        te.window_margin = rhs - lhs;
        te.window_ok = te.window_margin >= -1e-12;
        out.events.push_back(te);
    }

    double free_lhs = out.theta0_log - pre[nu];
    double free_rhs = -std::log(profile.delta) / 3.0;
    out.free_margin = free_rhs - free_lhs;
    out.free_ok = out.free_margin > 0.0;
    return out;
}

} // namespace circlelab
