#include "circlelab/induced.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "circlelab/errors.hpp"

namespace circlelab {

namespace {

// Stopped elements adjacent to a singular preimage can have an endpoint whose
// orbit lands exactly on a representable zero of Phi; a one-ulp retreat into
// the element fixes the evaluation.
double endpoint_image(const FlowEval& fe, double x, int n, double toward) {
    double dx = default_exclusion_radius;
    for (int k = 0; k < 6; ++k) {
        try {
            return fe.image(x, n);
        } catch (const SingularProximity&) {
            double x2 = toward > x ? x + dx : x - dx;
            x = x2 == x ? std::nextafter(x, toward) : x2;
            dx *= 4.0;
        }
    }
    return fe.image(x, n); // let the final attempt propagate its error
}

} // namespace

InducedMarkovMap build_full_return_map(const CircleMap& m, const MarkedSets& sets,
                                       const ExperimentProfile& profile,
                                       const std::vector<BindingIntervals>& bindings,
                                       const InducedOptions& opt) {
    int nb = opt.base_intervals > 0
                 ? opt.base_intervals
                 : static_cast<int>(std::ceil(1.0 / profile.delta));
    double h = 1.0 / nb;
    if (h > profile.delta || h < profile.delta / 10.0)
        throw LabError("base interval length outside [delta/10, delta]");

    GrowthOptions gopt = opt.growth;
    if (gopt.wrap_margin <= 0.0 && gopt.case2_margin <= 0.0 && gopt.recycle_floor <= 0.0) {
        GrowthOptions d = default_growth_options(profile);
        gopt.wrap_margin = d.wrap_margin;
        gopt.case2_margin = d.case2_margin;
        gopt.recycle_floor = d.recycle_floor;
    }

    FlowEval fe(m, sets);
    InducedMarkovMap out;
    std::vector<WrapFamily> fams;

    static const bool trace = std::getenv("CIRCLELAB_TRACE_INDUCED") != nullptr;

    for (int i = 0; i < nb; ++i) {
        if (trace)
            std::fprintf(stderr, "[induced] base %d/%d families=%zu elements=%ld "
                         "unres=%.3g\n", i, nb, fams.size(), out.element_count,
                         out.partition_unresolved + out.growth_stats.unresolved);
        Interval base{i * h, (i + 1) * h};
        StoppingPartition part;
        try {
            part = build_stopping_partition(m, sets, profile, base, opt.partition);
        } catch (const BudgetExceeded&) {
            // the base is reported as unresolved mass; the final mass-target
            // check decides whether the map as a whole is still acceptable
            out.partition_unresolved += base.length();
            continue;
        }
        out.partition_unresolved += part.unresolved_measure;
        out.element_count += static_cast<long>(part.elements.size());
        if (trace)
            std::fprintf(stderr, "[induced] base %d partition: %zu elements "
                         "unres=%.3g\n", i, part.elements.size(), part.unresolved_measure);
        for (const PartitionElement& el : part.elements) {
            GrowthPiece seed;
            seed.domain = el.interval;
            seed.steps = el.stop_time;
            seed.birth = el.stop_time;
            seed.large_scale_times.push_back(el.stop_time);
            try {
                seed.img_u = endpoint_image(fe, el.interval.lo, el.stop_time, el.interval.hi);
                seed.img_v = endpoint_image(fe, el.interval.hi, el.stop_time, el.interval.lo);
            } catch (const SingularProximity&) {
                out.growth_stats.unresolved += el.interval.length();
                continue;
            }
            grow_piece(fe, profile, bindings, std::move(seed), gopt, out.growth_stats, fams);
        }
    }

    std::sort(fams.begin(), fams.end(), [](const WrapFamily& a, const WrapFamily& b) {
        return a.domain.lo < b.domain.lo;
    });
    double mass_r_weighted = 0.0;
    for (const WrapFamily& f : fams) {
        double len = f.domain.length();
        out.total_mass += len;
        out.branch_count += f.branch_count();
        out.max_R = std::max(out.max_R, f.R);
        if (static_cast<std::size_t>(f.R) >= out.r_mass.size())
            out.r_mass.resize(static_cast<std::size_t>(f.R) + 1, 0.0);
        out.r_mass[static_cast<std::size_t>(f.R)] += len;
        mass_r_weighted += f.R * len;
        out.max_corner_defect = std::max(out.max_corner_defect, f.corner_defect);
    }
    out.families = std::move(fams);
    out.lebesgue_mean_R = out.total_mass > 0.0 ? mass_r_weighted / out.total_mass : 0.0;
    out.unresolved_mass = out.partition_unresolved + out.growth_stats.unresolved;
    out.coverage_defect = 1.0 - out.total_mass;

    if (opt.strict && out.total_mass < opt.mass_target)
        throw BudgetExceeded("induced map reached mass " + std::to_string(out.total_mass) +
                             " < target " + std::to_string(opt.mass_target));
    return out;
}

std::ptrdiff_t locate_family(const InducedMarkovMap& imap, double x) {
    x = frac(x);
    auto it = std::upper_bound(imap.families.begin(), imap.families.end(), x,
                               [](double v, const WrapFamily& f) { return v < f.domain.lo; });
    if (it == imap.families.begin()) return -1;
    --it;
    if (x <= it->domain.hi) return it - imap.families.begin();
    return -1;
}

MarkovCertificate verify_markov_property(const FlowEval& fe, const InducedMarkovMap& imap,
                                         long branch_samples, int interior_points,
                                         Rng& rng) {
    MarkovCertificate cert;
    cert.injective = true;
    cert.min_expansion = HUGE_VAL;

    for (std::size_t i = 1; i < imap.families.size(); ++i) {
        double ov = imap.families[i - 1].domain.hi - imap.families[i].domain.lo;
        cert.max_domain_overlap = std::max(cert.max_domain_overlap, ov);
    }

    std::int64_t total = imap.branch_count;
    if (total == 0 || imap.families.empty()) return cert;

    // cumulative branch counts for uniform branch sampling
    std::vector<std::int64_t> cum(imap.families.size() + 1, 0);
    for (std::size_t i = 0; i < imap.families.size(); ++i)
        cum[i + 1] = cum[i] + imap.families[i].branch_count();

    long samples = std::min<long>(branch_samples, total);
    for (long s = 0; s < samples; ++s) {
        std::int64_t pick = samples == total
                                ? s
                                : static_cast<std::int64_t>(
                                      rng.integer(static_cast<std::uint64_t>(total)));
        std::size_t fi =
            static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), pick) -
                                     cum.begin()) -
            1;
        const WrapFamily& fam = imap.families[fi];
        std::int64_t wrap = fam.wrap_lo + (pick - cum[fi]);
        Branch b;
        try {
            b = materialize_branch(fe, fam, wrap);
        } catch (const LabError&) {
            cert.injective = false; // a branch the family cannot deliver
            continue;
        }
        // Branches within a few thousand ulps of collapse cannot host an
        // interior sample grid; the family-corner checks already cover them.
        double thin = 4096.0 * std::numeric_limits<double>::epsilon() *
                      std::max(1.0, std::fabs(b.domain.lo));
        if (b.domain.length() < thin) {
            cert.thin_skipped += 1;
            continue;
        }
        cert.branches_checked += 1;
        cert.max_endpoint_defect =
            std::max({cert.max_endpoint_defect, b.defect_lo, b.defect_hi});

        double len = b.domain.length();
        double lo_corner = fam.decreasing ? static_cast<double>(wrap + 1)
                                          : static_cast<double>(wrap);
        double hi_corner = fam.decreasing ? static_cast<double>(wrap)
                                          : static_cast<double>(wrap + 1);
        double prev_img = lo_corner;
        double min_logd = HUGE_VAL, max_logd = -HUGE_VAL;
        double at_min = 0.0, at_max = 0.0;
        bool mono = true;
        double gap = 0.0;
        for (int j = 0; j < interior_points; ++j) {
            double x = b.domain.lo + len * (j + 0.5) / interior_points;
            Flow fl = fe.at(x, b.R);
            if (fam.decreasing ? fl.image >= prev_img : fl.image <= prev_img) mono = false;
            gap = std::max(gap, std::fabs(fl.image - prev_img));
            prev_img = fl.image;
            if (fl.log_deriv < min_logd) { min_logd = fl.log_deriv; at_min = fl.image; }
            if (fl.log_deriv > max_logd) { max_logd = fl.log_deriv; at_max = fl.image; }
        }
        gap = std::max(gap, std::fabs(hi_corner - prev_img));
        cert.max_interior_gap = std::max(cert.max_interior_gap, gap);
        static const bool trace_mono = std::getenv("CIRCLELAB_TRACE_MONO") != nullptr;
        if (trace_mono && (!mono || gap > 0.1))
            std::fprintf(stderr,
                         "[mono] fam=%zu R=%d wrap=%lld of [%lld,%lld] dec=%d dom=[%.17g,%.17g]"
                         " w=%.3g bw=%.3g gap=%.3g mono=%d tail=%d deflo=%.3g defhi=%.3g\n",
                         fi, fam.R, static_cast<long long>(wrap),
                         static_cast<long long>(fam.wrap_lo),
                         static_cast<long long>(fam.wrap_hi), fam.decreasing ? 1 : 0,
                         fam.domain.lo, fam.domain.hi, fam.domain.length(),
                         b.domain.length(), gap, mono ? 1 : 0, fam.tail_step,
                         b.defect_lo, b.defect_hi);
        if (!mono) cert.injective = false;
        cert.min_expansion = std::min(cert.min_expansion, std::exp(min_logd));
        double sep = std::max(std::fabs(at_max - at_min), 1e-6);
        cert.distortion_constant =
            std::max(cert.distortion_constant, (max_logd - min_logd) / sep);
    }
    return cert;
}

ReturnTimeStats return_time_statistics(const InducedMarkovMap& imap,
                                       const ExperimentProfile& profile, double L,
                                       double mass_floor) {
    ReturnTimeStats out;
    out.masses = imap.r_mass;
    std::vector<double> xs, ys;
    double rate = profile.lambda * std::log(L) / 26.0;
    double lead = std::log(profile.delta);
    out.max_log_excess = -HUGE_VAL;
    for (std::size_t n = 0; n < out.masses.size(); ++n) {
        if (out.masses[n] <= mass_floor) continue;
        double ln_mass = std::log(out.masses[n]);
        xs.push_back(static_cast<double>(n));
        ys.push_back(ln_mass);
        out.max_log_excess =
            std::max(out.max_log_excess, ln_mass - (lead - rate * static_cast<double>(n)));
    }
    if (xs.size() < 2) throw InsufficientData("return-time histogram has < 2 usable bins");
    out.fit = fit_line(xs, ys);
    return out;
}

} // namespace circlelab
