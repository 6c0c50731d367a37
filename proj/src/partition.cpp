#include "circlelab/partition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <utility>

#include "circlelab/errors.hpp"
#include "circlelab/flow.hpp"
#include "circlelab/roots.hpp"

namespace circlelab {

namespace {

struct WorkItem {
    Interval iv;
    int step;                // generation the piece is refined into when popped
    double prev_lo, prev_hi; // lift images of iv endpoints one step earlier
    std::vector<int> itinerary;
    std::vector<GenerationStep> log;
};

// Cut endpoints produced by marked-point splits can have forward images that
// land inside the evaluator's exclusion zone around a zero of Phi; retreats
// into the piece, escalating from the exclusion radius, restore a finite flow
// while staying far below the width floor.
Flow flow_nudged(const FlowEval& fe, double x, int n, double toward) {
    double dx = default_exclusion_radius;
    for (int k = 0; k < 6; ++k) {
        try {
            return fe.at(x, n);
        } catch (const SingularProximity&) {
            double x2 = toward > x ? x + dx : x - dx;
            x = x2 == x ? std::nextafter(x, toward) : x2;
            dx *= 4.0;
        }
    }
    return fe.at(x, n);
}

} // namespace

StoppingPartition build_stopping_partition(const CircleMap& m, const MarkedSets& sets,
                                           const ExperimentProfile& profile,
                                           Interval base, const PartitionOptions& opt) {
    const double len = base.length();
    if (!(len >= profile.delta / 10.0 * (1.0 - 1e-9) && len <= profile.delta * (1.0 + 1e-9)))
        throw LabError("base interval length must lie in [delta/10, delta]");

    FlowEval fe(m, sets);

    // Merged marked points, sorted: gap labels for itineraries and split
    // targets for the marked-image case.
    std::vector<double> mpts;
    mpts.insert(mpts.end(), sets.critical.points.begin(), sets.critical.points.end());
    mpts.insert(mpts.end(), sets.singular.points.begin(), sets.singular.points.end());
    std::sort(mpts.begin(), mpts.end());
    auto gap_index = [&](double y) -> int {
        auto it = std::upper_bound(mpts.begin(), mpts.end(), y);
        if (it == mpts.begin() || it == mpts.end())
            return static_cast<int>(mpts.size()) - 1; // wrap gap
        return static_cast<int>(it - mpts.begin()) - 1;
    };

    const double sqrt_delta = std::sqrt(profile.delta);
    // Elements certify (P3) at their endpoints with a factor-two cushion;
    // weaker stretches (the quadratic shadow of a critical point) are peeled
    // off and keep refining until the expansion recovers.
    const double logd_floor = -std::log(profile.delta) / 3.0 + std::log(2.0);

    StoppingPartition out;
    out.base_interval = base;

    std::vector<double> len_by_stop; // indexed by stop time

    // Queue invariant: the one-step-earlier images carried by an item are the
    // endpoints of a monotone stretch whose interior avoids marked points, so
    // the item's image at its own generation is well defined, and an
    // unstopped item's earlier image is shorter than sqrt(delta).
    std::deque<WorkItem> queue;
    queue.push_back(WorkItem{base, 1, base.lo, base.hi, {}, {}});

    static const bool trace = std::getenv("CIRCLELAB_TRACE_PARTITION") != nullptr;
    long pops = 0;

    while (!queue.empty()) {
        WorkItem w = std::move(queue.front());
        queue.pop_front();
        if (trace && ++pops % 20000 == 0)
            std::fprintf(stderr, "[partition] pops=%ld queue=%zu step=%d width=%.3g "
                         "elements=%zu unresolved=%.3g\n",
                         pops, queue.size(), w.step, w.iv.length(), out.elements.size(),
                         out.unresolved_measure);

        if (w.iv.length() < opt.width_floor || w.step > opt.stop_time_cap) {
            out.unresolved_measure += w.iv.length();
            continue;
        }
        const int n = w.step;
        const double A = std::min(w.prev_lo, w.prev_hi);
        const double B = std::max(w.prev_lo, w.prev_hi);

        // Marked points strictly inside the previous image, on the lift.
        std::vector<double> targets;
        bool too_many = false;
        double tol = 1e-12 * std::max(1.0, std::max(std::fabs(A), std::fabs(B)));
        for (double p : mpts) {
            for (double k = std::floor(A - p); p + k <= B; k += 1.0) {
                double t = p + k;
                if (t > A + tol && t < B - tol) {
                    targets.push_back(t);
                    if (targets.size() > static_cast<std::size_t>(opt.max_split_targets)) {
                        too_many = true;
                        break;
                    }
                }
            }
            if (too_many) break;
        }
        if (too_many) {
            out.unresolved_measure += w.iv.length();
            continue;
        }

        // Monotone components at this generation: the whole piece when the
        // previous image was clean, otherwise the stretches between the
        // preimages of the intruding marked copies.
        const bool marked = !targets.empty();
        std::vector<Interval> comps;
        if (!marked) {
            comps.push_back(w.iv);
        } else {
            try {
                std::vector<double> splits;
                splits.reserve(targets.size());
                for (double t : targets) {
                    auto g = [&](double x) { return fe.image(x, n - 1) - t; };
                    double r = refine_root(g, w.iv.lo, w.iv.hi, w.prev_lo - t,
                                           w.prev_hi - t, opt.width_floor * 0.25);
                    splits.push_back(std::min(std::max(r, w.iv.lo), w.iv.hi));
                }
                std::sort(splits.begin(), splits.end());
                double prev = w.iv.lo;
                for (double s : splits) {
                    comps.push_back({prev, s});
                    prev = s;
                }
                comps.push_back({prev, w.iv.hi});
            } catch (const SingularProximity&) {
                out.unresolved_measure += w.iv.length();
                continue;
            } catch (const UnresolvedRoot&) {
                out.unresolved_measure += w.iv.length();
                continue;
            }
        }

        // Depth-one worklist: a stopping component whose weak end fails the
        // derivative floor is split there, and the two halves rejoin the list.
        std::deque<Interval> local(comps.begin(), comps.end());
        while (!local.empty()) {
            Interval comp = local.front();
            local.pop_front();
            if (comp.length() < opt.width_floor) {
                out.unresolved_measure += comp.length();
                continue;
            }
            Flow clo, chi_, cmid;
            try {
                clo = flow_nudged(fe, comp.lo, n, comp.hi);
                chi_ = flow_nudged(fe, comp.hi, n, comp.lo);
                cmid = flow_nudged(fe, comp.mid(), n, comp.hi);
            } catch (const SingularProximity&) {
                out.unresolved_measure += comp.length();
                continue;
            }
            double img_len = std::fabs(chi_.image - clo.image);

            std::vector<int> itin = w.itinerary;
            itin.push_back(gap_index(cmid.y));
            std::vector<GenerationStep> glog = w.log;

            if (n < profile.M0 || img_len < sqrt_delta) {
                glog.push_back(GenerationStep{
                    n, marked ? RefineCase::marked_cut : RefineCase::pass});
                queue.push_back(WorkItem{comp, n + 1, clo.image, chi_.image,
                                         std::move(itin), std::move(glog)});
                continue;
            }

            // Large scale reached. Peel the end whose derivative sits below
            // the floor (only one end can: the image is long, so the average
            // expansion across the component is far above it).
            const double margin = 0.05;
            if (std::min(clo.log_deriv, chi_.log_deriv) < logd_floor - margin &&
                std::max(clo.log_deriv, chi_.log_deriv) > logd_floor + margin &&
                comp.length() > 4.0 * opt.width_floor) {
                bool weak_lo = clo.log_deriv < chi_.log_deriv;
                double a = comp.lo, b = comp.hi;
                double fa = clo.log_deriv - logd_floor, fb = chi_.log_deriv - logd_floor;
                try {
                    auto g = [&](double x) {
                        return flow_nudged(fe, x, n, comp.mid()).log_deriv - logd_floor;
                    };
                    double x_split = refine_root(g, a, b, fa, fb, opt.width_floor);
                    if (x_split - comp.lo > opt.width_floor &&
                        comp.hi - x_split > opt.width_floor) {
                        // weak half keeps refining; strong half stops next round
                        local.push_back({comp.lo, x_split});
                        local.push_back({x_split, comp.hi});
                        continue;
                    }
                } catch (const SingularProximity&) {
                    // fall through: stop the component whole
                } catch (const UnresolvedRoot&) {
                }
                (void)weak_lo;
            }

            glog.push_back(GenerationStep{
                n, marked ? RefineCase::marked_cut : RefineCase::free_cut});

            PartitionElement e;
            e.interval = comp;
            e.stop_time = n;
            e.image_length = img_len;
            double md = std::min(std::exp(clo.log_deriv),
                                 std::min(std::exp(chi_.log_deriv), std::exp(cmid.log_deriv)));
            try {
                for (double q : {0.25, 0.75}) {
                    Flow fq = flow_nudged(fe, comp.lo + q * comp.length(), n, comp.mid());
                    md = std::min(md, std::exp(fq.log_deriv));
                }
            } catch (const SingularProximity&) {
                // quartile orbit grazed a marked point: keep the coarser value
            }
            e.min_deriv = md;
            e.itinerary = std::move(itin);
            e.generation_log = std::move(glog);
            if (static_cast<std::size_t>(n) >= len_by_stop.size())
                len_by_stop.resize(static_cast<std::size_t>(n) + 1, 0.0);
            len_by_stop[static_cast<std::size_t>(n)] += comp.length();
            out.elements.push_back(std::move(e));
        }
    }

    std::sort(out.elements.begin(), out.elements.end(),
              [](const PartitionElement& a, const PartitionElement& b) {
                  return a.interval.lo < b.interval.lo;
              });

    out.tail_counts.assign(len_by_stop.size() + 1, 0.0);
    double acc = 0.0;
    for (std::size_t s = len_by_stop.size(); s-- > 0;) {
        acc += len_by_stop[s];
        out.tail_counts[s] = acc;
    }

    if (out.unresolved_measure > 0.10 * len)
        throw BudgetExceeded("unresolved mass " + std::to_string(out.unresolved_measure) +
                             " exceeds 10% of the base interval");
    return out;
}

TailFit tail_statistics(const StoppingPartition& p, const ExperimentProfile& profile,
                        double L, double mass_floor) {
    std::vector<double> xs, ys;
    TailFit tf;
    tf.max_log_excess = -HUGE_VAL;
    const double lnL = std::log(L);
    const double base = (11.0 / 12.0) * std::log(profile.delta);
    for (std::size_t n = static_cast<std::size_t>(profile.M0) + 1; n < p.tail_counts.size(); ++n) {
        if (p.tail_counts[n] <= mass_floor) continue;
        double lt = std::log(p.tail_counts[n]);
        xs.push_back(static_cast<double>(n));
        ys.push_back(lt);
        double bound = base - profile.lambda * static_cast<double>(n) * lnL / 24.0;
        tf.max_log_excess = std::max(tf.max_log_excess, lt - bound);
    }
    if (xs.size() < 3)
        throw InsufficientData("tail fit needs at least 3 populated bins");
    tf.fit = fit_line(xs, ys);
    return tf;
}

} // namespace circlelab
