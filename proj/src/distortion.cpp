#include "circlelab/distortion.hpp"

#include <cmath>

namespace circlelab {

namespace {

// Iterate y for n steps accumulating ln|(f^n)'| and the lift displacement
// relative to the start. Throws SingularProximity if the orbit leaves the
// evaluable region.
struct TrackResult {
    double log_deriv;
    double lift_image; // F^n(y) as a real number with y's own integer part 0
};

TrackResult track(const CircleMap& m, double y, int n) {
    LiftValue v{0, frac(y)};
    double lam = 0.0;
    for (int i = 0; i < n; ++i) {
        lam += std::log(std::fabs(eval_derivatives(m, v.y).f_prime));
        eval_step(m, v);
    }
    return {lam, v.value()};
}

} // namespace

bool distortion_admissible(const CircleMap& m, const MarkedSets& sets, double x,
                           int n, double clearance) {
    OrbitRecord orb;
    try {
        PrecisionPolicy pol;
        orb = iterate_orbit(m, sets, x, n, pol);
    } catch (const SingularProximity&) {
        return false;
    }
    if (orb.length() < static_cast<std::size_t>(n) + 1 || orb.truncated()) return false;
    for (std::size_t i = 0; i + 1 < orb.length(); ++i)
        if (orb.dC[i] < clearance || orb.dS[i] < clearance) return false;
    ContractionData cd;
    try {
        cd = compute_contraction(m, orb, n);
    } catch (const LabError&) {
        return false;
    }
    // offsets inside [x - D_n, x + D_n] must be resolvable in double
    return cd.Dn[n] > 64.0 * 2.220446049250313e-16 * std::max(1.0, std::fabs(x));
}

DistortionReport check_distortion(const CircleMap& m, const MarkedSets& sets,
                                  double x, int n, int samples, Rng& rng,
                                  double tol) {
    PrecisionPolicy pol;
    OrbitRecord orb = iterate_orbit(m, sets, x, n, pol);
    if (orb.length() < static_cast<std::size_t>(n) + 1 || orb.truncated())
        throw OrbitHitsSet("base orbit truncated before n");
    for (std::size_t i = 0; i + 1 < orb.length(); ++i)
        if (orb.dC[i] < 1e-12 || orb.dS[i] < 1e-12)
            throw OrbitHitsSet("base orbit touches C or S at step " + std::to_string(i));
    ContractionData cd = compute_contraction(m, orb, n);

    DistortionReport rep;
    rep.D_n = cd.Dn[n];
    rep.refined_threshold = std::pow(m.L, -1.0 / 3.0);
    rep.samples = samples;
    double base_log = orb.log_deriv_prefix[n];

    for (int s = 0; s < samples; ++s) {
        double xi = x + rep.D_n * (2.0 * rng.uniform() - 1.0);
        double eta = x + rep.D_n * (2.0 * rng.uniform() - 1.0);
        TrackResult a, b;
        try {
            a = track(m, xi, n);
            b = track(m, eta, n);
        } catch (const SingularProximity&) {
            throw OrbitHitsSet("sampled point hits the exclusion radius");
        }
        double ratio = std::exp(std::fabs(a.log_deriv - b.log_deriv));
        rep.max_ratio = std::max(rep.max_ratio, ratio);
        double gap = std::fabs((a.lift_image + (xi - frac(xi))) -
                               (b.lift_image + (eta - frac(eta))));
        // the pair straddles the interval around x; images stay on one
        // monotone branch, so the lift gap is the true image distance
        if (gap > 0.0) {
            double refined = std::fabs(ratio - 1.0) * rep.D_n *
                             std::exp(base_log) / gap;
            rep.max_refined = std::max(rep.max_refined, refined);
        }
    }
    rep.pass = rep.max_ratio <= 2.0 * (1.0 + tol);
    return rep;
}

ExpansionReport check_expansion_outside(const CircleMap& m, const MarkedSets& sets,
                                        const ExperimentProfile& profile,
                                        long trials, Rng& rng, long max_steps) {
    ExpansionReport rep;
    rep.trials = trials;
    double lnL = std::log(m.L);
    for (long t = 0; t < trials; ++t) {
        double x = rng.uniform();
        if (distance_to_set(sets.critical, x) <= profile.delta ||
            distance_to_set(sets.singular, x) < 1e-12) {
            ++rep.skipped;
            continue;
        }
        double lam = 0.0;
        bool violated = false;
        bool done = false;
        double y = x;
        for (long n = 1; n <= max_steps && !done; ++n) {
            double fp;
            try {
                fp = eval_derivatives(m, y).f_prime;
                y = eval_map(m, y);
            } catch (const SingularProximity&) {
                ++rep.skipped;
                done = true;
                break;
            }
            lam += std::log(std::fabs(fp));
            double need = 2.0 * profile.lambda * n * lnL;
            if (distance_to_set(sets.critical, y) <= profile.delta) {
                // entry step: bound (b) without the delta factor
                double margin = std::exp(lam - need);
                rep.worst_margin_b = std::min(rep.worst_margin_b, margin);
                if (margin < 1.0) { ++rep.violations_b; violated = true; }
                done = true;
            } else {
                double margin = std::exp(lam - need) / profile.delta;
                rep.worst_margin_a = std::min(rep.worst_margin_a, margin);
                if (margin < 1.0) { ++rep.violations_a; violated = true; }
            }
        }
        if (violated) rep.violation_rate += 1.0;
    }
    long used = rep.trials - rep.skipped;
    rep.violation_rate = used > 0 ? rep.violation_rate / used : 0.0;
    return rep;
}

} // namespace circlelab
