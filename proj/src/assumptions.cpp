#include "circlelab/assumptions.hpp"

#include <algorithm>
#include <cmath>

namespace circlelab {

namespace {

std::vector<double> dedup_half_period(const CircleMap& m,
                                      const std::vector<double>& points) {
    if (!m.phi.half_period_antisymmetric()) return points;
    std::vector<double> reps;
    for (double c : points) {
        bool translate = false;
        for (double r : reps)
            if (std::fabs(std::fabs(c - r) - 0.5) < 1e-9) translate = true;
        if (!translate) reps.push_back(c);
    }
    return reps;
}

} // namespace

AssumptionVerdict check_dynamical_assumptions(const CircleMap& m,
                                              const MarkedSets& sets,
                                              const ExperimentProfile& profile,
                                              long horizon) {
    if (horizon < profile.N0)
        throw LabError("assumption checker horizon must be >= N0");
    AssumptionVerdict verdict;
    verdict.horizon = horizon;
    double lnL = std::log(m.L);
    double ln_sigma = std::log(profile.sigma);

    for (double c : dedup_half_period(m, sets.critical.points)) {
        double v;
        try {
            v = eval_map(m, c);
        } catch (const SingularProximity&) {
            verdict.first_failure = {AssumptionCondition::proximity, c, 0};
            verdict.passed = false;
            return verdict;
        }
        double lam = 0.0; // Lambda_n = ln|(f^n)' v_0|
        // running max over i of Lambda_i + ln(L min{sigma, L^{-alpha i}})
        double runmax = lnL + std::min(ln_sigma, 0.0);
        for (long n = 0; n <= horizon; ++n) {
            double dc = distance_to_set(sets.critical, v);
            double ds = distance_to_set(sets.singular, v);
            if (n <= profile.N0 && std::min(dc, ds) <= profile.sigma) {
                verdict.first_failure = {AssumptionCondition::a, c, n};
                verdict.passed = false;
                return verdict;
            }
            if (n >= profile.N0 && ds < std::pow(m.L, -4.0 * profile.alpha * n)) {
                verdict.first_failure = {AssumptionCondition::G3, c, n};
                verdict.passed = false;
                return verdict;
            }
            if (n == horizon) break;
            double fp;
            try {
                fp = eval_derivatives(m, v).f_prime;
                v = eval_map(m, v);
            } catch (const SingularProximity&) {
                verdict.first_failure = {AssumptionCondition::proximity, c, n + 1};
                verdict.passed = false;
                return verdict;
            }
            lam += std::log(std::fabs(fp));
            long j = n + 1;
            if (j > profile.N0) {
                if (lam < profile.lambda * j * lnL - 1e-12) {
                    verdict.first_failure = {AssumptionCondition::G2, c, j};
                    verdict.passed = false;
                    return verdict;
                }
                if (lam < runmax - 1e-12) {
                    verdict.first_failure = {AssumptionCondition::G1, c, j};
                    verdict.passed = false;
                    return verdict;
                }
            }
            runmax = std::max(runmax,
                              lam + lnL + std::min(ln_sigma, -profile.alpha * j * lnL));
        }
    }
    verdict.passed = true;
    return verdict;
}

} // namespace circlelab
