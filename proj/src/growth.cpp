#include "circlelab/growth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>

#include "circlelab/errors.hpp"
#include "circlelab/orbit.hpp"
#include "circlelab/roots.hpp"

namespace circlelab {

namespace {

// Family corners sit at preimages of integers, and deep orbits can land on a
// representable zero of Phi midway; retreats into the piece escalating from
// the exclusion radius recover a finite image.
double image_nudged(const FlowEval& fe, double x, int n, double toward) {
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
    return fe.image(x, n);
}

// Preimage of a lift target under F_T restricted to a monotone piece. Targets
// sitting on a piece corner resolve to that corner, either at defect-level
// residuals or, on very steep pieces where endpoint images are quantized at
// |F'|*ulp, when the target is crossed within one ulp of the corner. Query
// points whose orbit grazes a zero of Phi are evaluated with the nudged
// image: the nudge moves it by far less than a wrap, which is all the
// bracketing needs.
double preimage_of(const FlowEval& fe, const Interval& dom, int T, double target,
                   double img_u, double img_v) {
    double fa = img_u - target, fb = img_v - target;
    double mid = dom.mid();
    auto g = [&](double x) { return image_nudged(fe, x, T, mid) - target; };
    if ((fa > 0.0) == (fb > 0.0)) {
        double ra = std::fabs(fa), rb = std::fabs(fb);
        bool at_lo = ra <= rb;
        double corner = at_lo ? dom.lo : dom.hi;
        if (std::min(ra, rb) < 1e-6) return corner;
        // Corners come from earlier ulp-collapsed root finds, so the true
        // preimage can sit within one ulp on either side of the corner; a
        // sign flip one step in or out certifies that and the corner is the
        // best in-domain double.
        double g0 = at_lo ? fa : fb;
        double gin = g(std::nextafter(corner, at_lo ? HUGE_VAL : -HUGE_VAL));
        double gout = g(std::nextafter(corner, at_lo ? -HUGE_VAL : HUGE_VAL));
        if ((g0 > 0.0) != (gin > 0.0) || (g0 > 0.0) != (gout > 0.0)) return corner;
        throw UnresolvedRoot("target outside the piece image");
    }
    return refine_root(g, dom.lo, dom.hi, fa, fb);
}

// Distance from a corner image to its integer target beyond representability:
// when the target is crossed within one ulp of the corner, the true preimage
// lies between adjacent doubles and the residual is purely the image grid,
// not a defect of the branch.
double defect_beyond_ulp(const FlowEval& fe, int T, double x, double target,
                         double toward) {
    try {
        double g0 = fe.image(x, T) - target;
        if (g0 == 0.0) return 0.0;
        double gp = fe.image(std::nextafter(x, HUGE_VAL), T) - target;
        if ((g0 > 0.0) != (gp > 0.0)) return 0.0;
        double gm = fe.image(std::nextafter(x, -HUGE_VAL), T) - target;
        if ((g0 > 0.0) != (gm > 0.0)) return 0.0;
        return std::min({std::fabs(g0), std::fabs(gp), std::fabs(gm)});
    } catch (const SingularProximity&) {
        return std::fabs(image_nudged(fe, x, T, toward) - target);
    }
}

// Split endpoints can land exactly on a zero of Phi in doubles; a one-ulp
// nudge restores a finite displacement.
double safe_displacement(const FlowEval& fe, double y) {
    const CircleMap& m = fe.map();
    double lo = y, hi = y;
    for (int k = 0; k < 8; ++k) {
        double probe = (k % 2 == 0) ? hi : lo;
        try {
            return eval_displacement(m, frac(probe), FlowEval::tiny_exclusion).displacement;
        } catch (const SingularProximity&) {
            if (k % 2 == 0) hi = std::nextafter(hi, hi + 1.0);
            else lo = std::nextafter(lo, lo - 1.0);
        }
    }
    throw SingularProximity("endpoint displacement unrecoverable");
}

void advance_piece(const FlowEval& fe, GrowthPiece& p) {
    p.img_u += safe_displacement(fe, p.img_u);
    p.img_v += safe_displacement(fe, p.img_v);
    p.steps += 1;
}

struct MarkedCopy {
    double t; // lift position inside the image span
    bool singular;
};

struct MarkedCircle {
    std::vector<double> pos;
    std::vector<char> singular;
};

std::vector<MarkedCopy> copies_inside(const MarkedCircle& mc, double A, double B) {
    std::vector<MarkedCopy> out;
    double tol = 1e-12 * std::max(1.0, std::max(std::fabs(A), std::fabs(B)));
    for (std::size_t i = 0; i < mc.pos.size(); ++i) {
        for (double k = std::floor(A - mc.pos[i]); mc.pos[i] + k <= B; k += 1.0) {
            double t = mc.pos[i] + k;
            if (t > A + tol && t < B - tol) out.push_back({t, mc.singular[i] != 0});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const MarkedCopy& a, const MarkedCopy& b) { return a.t < b.t; });
    return out;
}

struct Engine {
    const FlowEval& fe;
    const ExperimentProfile& profile;
    const std::vector<BindingIntervals>& bindings;
    const GrowthOptions& opt;
    GrowthStats& stats;
    std::vector<WrapFamily>& out;
    std::deque<GrowthPiece> queue;
    MarkedCircle mc;
    double sqrt_delta;
    int budget;

    void spawn(Interval dom, int steps, double img_u, double img_v,
               const GrowthPiece& parent, bool fresh_birth) {
        if (dom.length() < opt.piece_width_floor) {
            stats.unresolved += dom.length();
            stats.unresolved_floor += dom.length();
            return;
        }
        GrowthPiece p;
        p.domain = dom;
        p.steps = steps;
        p.img_u = img_u;
        p.img_v = img_v;
        p.birth = fresh_birth ? steps : parent.birth;
        p.large_scale_times = parent.large_scale_times;
        if (fresh_birth && std::fabs(img_v - img_u) >= sqrt_delta &&
            (p.large_scale_times.empty() || p.large_scale_times.back() != steps))
            p.large_scale_times.push_back(steps);
        if (fresh_birth) ++stats.recycled_pieces;
        queue.push_back(std::move(p));
    }

    // Emit a wrap family from w if a full branch fits inside the margins.
    // Consumes the piece when it returns true.
    bool emit_family(const GrowthPiece& w, double margin) {
        const double A = std::min(w.img_u, w.img_v);
        const double B = std::max(w.img_u, w.img_v);
        std::int64_t k_lo = static_cast<std::int64_t>(std::ceil(A + margin));
        std::int64_t k_hi = static_cast<std::int64_t>(std::floor(B - margin)) - 1;
        if (k_hi < k_lo) return false;
        const bool inc = w.img_u <= w.img_v;
        const int T = w.steps;

        auto pre = [&](double t) {
            return preimage_of(fe, w.domain, T, t, w.img_u, w.img_v);
        };
        auto img_at = [&](double x) {
            return image_nudged(fe, x, T, w.domain.mid());
        };
        // Recycle the stretch between a piece edge and a resolved corner, or
        // drop it when it is below the recycle floors.
        auto leftover = [&](double corner_x, double corner_img, bool low_side) {
            double edge = (low_side == inc) ? w.domain.lo : w.domain.hi;
            Interval dom{std::min(edge, corner_x), std::max(edge, corner_x)};
            double img_len = low_side ? corner_img - A : B - corner_img;
            if (img_len < opt.recycle_floor || dom.length() < opt.leftover_width_floor ||
                dom.length() < opt.piece_width_floor) {
                stats.unresolved += dom.length();
                stats.unresolved_floor += dom.length();
                return;
            }
            double edge_img = (edge == w.domain.lo) ? w.img_u : w.img_v;
            if (edge == dom.lo) spawn(dom, T, edge_img, corner_img, w, true);
            else spawn(dom, T, corner_img, edge_img, w, true);
        };

        // Truncate the wraps that cannot be resolved in doubles. Every wrap
        // window contained in the image of a 2*floor-wide domain sliver at a
        // tail corner has width below 2*floor by containment, so one image
        // probe per pass certifies a cut; re-anchoring the corner then either
        // confirms the survivors or cuts again. No derivative model is
        // involved, which matters because corner derivatives are poisoned
        // whenever an earlier orbit point grazed a zero of Phi. When nothing
        // survives, the resolved side stretches are still recycled.
        const double fw2 = 2.0 * opt.branch_width_floor;
        bool trunc_lo = false, trunc_hi = false;
        double xa = pre(static_cast<double>(k_lo));
        for (int pass = 0;; ++pass) {
            double probe = inc ? xa + fw2 : xa - fw2;
            if (probe <= w.domain.lo || probe >= w.domain.hi) {
                // everything past this corner sits within two floor widths
                double far_edge = inc ? w.domain.hi : w.domain.lo;
                stats.unresolved += std::fabs(far_edge - xa);
                stats.unresolved_truncated += std::fabs(far_edge - xa);
                leftover(xa, img_at(xa), true);
                return true;
            }
            std::int64_t cut = static_cast<std::int64_t>(std::floor(img_at(probe)));
            if (cut <= k_lo || pass == 5) break;
            trunc_lo = true;
            k_lo = cut;
            if (k_lo > k_hi) { // every full wrap is sub-floor dust
                double xb = pre(static_cast<double>(k_hi + 1));
                stats.unresolved += std::fabs(xa - xb);
                stats.unresolved_truncated += std::fabs(xa - xb);
                leftover(xa, img_at(xa), true);
                leftover(xb, img_at(xb), false);
                return true;
            }
            xa = pre(static_cast<double>(k_lo));
        }
        double xb = pre(static_cast<double>(k_hi + 1));
        for (int pass = 0;; ++pass) {
            double probe = inc ? xb - fw2 : xb + fw2;
            if (probe <= w.domain.lo || probe >= w.domain.hi) {
                double near_edge = inc ? w.domain.lo : w.domain.hi;
                stats.unresolved += std::fabs(xb - near_edge);
                stats.unresolved_truncated += std::fabs(xb - near_edge);
                leftover(xb, img_at(xb), false);
                return true;
            }
            std::int64_t cut = static_cast<std::int64_t>(std::ceil(img_at(probe))) - 1;
            if (cut >= k_hi || pass == 5) break;
            trunc_hi = true;
            k_hi = cut;
            if (k_hi < k_lo) {
                stats.unresolved += std::fabs(xa - xb);
                stats.unresolved_truncated += std::fabs(xa - xb);
                leftover(xa, img_at(xa), true);
                leftover(xb, img_at(xb), false);
                return true;
            }
            xb = pre(static_cast<double>(k_hi + 1));
        }

        WrapFamily fam;
        fam.corner_defect = std::max(
            defect_beyond_ulp(fe, T, xa, static_cast<double>(k_lo), w.domain.mid()),
            defect_beyond_ulp(fe, T, xb, static_cast<double>(k_hi + 1), w.domain.mid()));
        static const bool trace_bad = std::getenv("CIRCLELAB_TRACE_BADFAM") != nullptr;
        if (trace_bad && fam.corner_defect > 1e-3)
            std::fprintf(stderr,
                         "[badfam] T=%d birth=%d A=%.17g B=%.17g k=[%lld,%lld] dom=[%.17g,%.17g]"
                         " w=%.3g img_u=%.17g img_v=%.17g ia=%.17g ib=%.17g trunc=%d%d\n",
                         T, w.birth, A, B, static_cast<long long>(k_lo),
                         static_cast<long long>(k_hi), w.domain.lo, w.domain.hi,
                         w.domain.length(), w.img_u, w.img_v, fe.image(xa, T),
                         fe.image(xb, T), trunc_lo ? 1 : 0, trunc_hi ? 1 : 0);
        fam.domain = {std::min(xa, xb), std::max(xa, xb)};
        fam.R = T;
        fam.wrap_lo = k_lo;
        fam.wrap_hi = k_hi;
        fam.decreasing = !inc;
        fam.singular_tail = trunc_lo || trunc_hi;
        fam.large_scale_times = w.large_scale_times;
        fam.tail_step =
            T - (w.large_scale_times.empty() ? w.birth : w.large_scale_times.back());

        // Sides: either a recycled leftover (image >= recycle floor) or dust.
        // The near-integer corner image is handed on as measured, never as
        // the integer itself: Phi vanishes exactly at representable zeros and
        // a later displacement there would be refused.
        auto side = [&](double corner_x, bool low_side, bool truncated) {
            if (truncated) {
                double edge = (low_side == inc) ? w.domain.lo : w.domain.hi;
                Interval dom{std::min(edge, corner_x), std::max(edge, corner_x)};
                fam.truncated_mass += dom.length();
                stats.unresolved += dom.length();
                stats.unresolved_truncated += dom.length();
                return;
            }
            leftover(corner_x, img_at(corner_x), low_side);
        };
        side(xa, true, trunc_lo);
        side(xb, false, trunc_hi);

        if (fam.singular_tail) ++stats.singular_families;
        out.push_back(std::move(fam));
        return true;
    }

    const BindingIntervals* binding_near(double t) const {
        double c = frac(t);
        for (const BindingIntervals& b : bindings) {
            double d = std::fabs(frac(b.critical_point) - c);
            if (std::min(d, 1.0 - d) < 1e-9) return &b;
        }
        return nullptr;
    }

    // Iterate a carved critical-side piece N1+1 steps and wrap it with the
    // sigma/2 margin; intermediate marked hits or a short final span push it
    // back into the generic queue.
    void run_case2(GrowthPiece p) {
        ++stats.case2_events;
        int n1 = std::max(profile.N1(), 2);
        for (int s = 1; s <= n1 + 1; ++s) {
            advance_piece(fe, p);
            // A marked copy intruding at any step folds the next iterate, so
            // the piece must go back through the splitting path before it can
            // be advanced or emitted.
            double A = std::min(p.img_u, p.img_v), B = std::max(p.img_u, p.img_v);
            if (!copies_inside(mc, A, B).empty()) {
                queue.push_back(std::move(p));
                return;
            }
        }
        if (!emit_family(p, opt.case2_margin)) queue.push_back(std::move(p));
    }

    void process(GrowthPiece w) {
        if (emit_family(w, opt.wrap_margin)) return;

        const double A = std::min(w.img_u, w.img_v);
        const double B = std::max(w.img_u, w.img_v);
        std::vector<MarkedCopy> copies = copies_inside(mc, A, B);

        const int T = w.steps;
        struct End {
            double x;
            double img;
            int tag; // -1 boundary, else index into copies
        };
        std::vector<End> ends;
        ends.push_back({w.domain.lo, w.img_u, -1});
        for (std::size_t i = 0; i < copies.size(); ++i) {
            double x = preimage_of(fe, w.domain, T, copies[i].t, w.img_u, w.img_v);
            // A copy whose preimage grazes a piece edge folds only a sub-floor
            // sliver; splitting there again would stall the queue.
            if (x - w.domain.lo < opt.piece_width_floor ||
                w.domain.hi - x < opt.piece_width_floor)
                continue;
            ends.push_back({x, image_nudged(fe, x, T, w.domain.mid()),
                            static_cast<int>(i)});
        }
        if (ends.size() == 1) { // nothing split off: the piece stays monotone
            advance_piece(fe, w);
            queue.push_back(std::move(w));
            return;
        }
        ends.push_back({w.domain.hi, w.img_v, -1});
        std::sort(ends.begin(), ends.end(),
                  [](const End& a, const End& b) { return a.x < b.x; });

        int n1 = std::max(profile.N1(), 2);
        for (std::size_t i = 0; i + 1 < ends.size(); ++i) {
            End le = ends[i], re = ends[i + 1];
            if (re.x - le.x < opt.piece_width_floor) {
                stats.unresolved += re.x - le.x;
                stats.unresolved_floor += re.x - le.x;
                continue;
            }
            double span = std::fabs(re.img - le.img);

            auto carve = [&](End& from, const End& other) -> bool {
                // Case II: peel the binding interval I_{N1} off a critical
                // end; the dust inside the inner radius is given up.
                if (from.tag < 0 || copies[from.tag].singular) return false;
                const BindingIntervals* b = binding_near(copies[from.tag].t);
                if (!b || b->entries.size() < static_cast<std::size_t>(n1 - 1)) return false;
                const BindingEntry& e = b->entries[static_cast<std::size_t>(n1 - 2)];
                if (span <= e.outer_radius * 1.5) return false;
                double dir = other.img > from.img ? 1.0 : -1.0;
                Interval comp{std::min(from.x, other.x), std::max(from.x, other.x)};
                double x_in = preimage_of(fe, comp, T, from.img + dir * e.inner_radius,
                                          le.img, re.img);
                double x_out = preimage_of(fe, comp, T, from.img + dir * e.outer_radius,
                                           le.img, re.img);
                stats.unresolved += std::fabs(x_in - from.x); // dust inside r_in
                stats.unresolved_floor += std::fabs(x_in - from.x);
                GrowthPiece p2;
                p2.domain = {std::min(x_in, x_out), std::max(x_in, x_out)};
                p2.steps = T;
                double mi = image_nudged(fe, x_in, T, comp.mid());
                double mo = image_nudged(fe, x_out, T, comp.mid());
                p2.img_u = x_in < x_out ? mi : mo;
                p2.img_v = x_in < x_out ? mo : mi;
                p2.birth = w.birth;
                p2.large_scale_times = w.large_scale_times;
                if (p2.domain.length() >= opt.piece_width_floor) run_case2(std::move(p2));
                else {
                    stats.unresolved += p2.domain.length();
                    stats.unresolved_floor += p2.domain.length();
                }
                from.x = x_out;
                from.img = mo;
                span -= e.outer_radius;
                return true;
            };
            carve(le, re);
            carve(re, le);

            if (re.x - le.x < opt.piece_width_floor) {
                stats.unresolved += std::max(0.0, re.x - le.x);
                stats.unresolved_floor += std::max(0.0, re.x - le.x);
                continue;
            }
            spawn({le.x, re.x}, T, le.img, re.img, w, false);
        }
    }
};

} // namespace

GrowthOptions default_growth_options(const ExperimentProfile& profile) {
    GrowthOptions o;
    o.wrap_margin = std::sqrt(profile.delta) / 3.0;
    o.case2_margin = profile.sigma / 2.0;
    o.recycle_floor = profile.delta / 10.0;
    return o;
}

void grow_piece(const FlowEval& fe, const ExperimentProfile& profile,
                const std::vector<BindingIntervals>& bindings, GrowthPiece seed,
                const GrowthOptions& opt, GrowthStats& stats,
                std::vector<WrapFamily>& out) {
    Engine eng{fe, profile, bindings, opt, stats, out, {}, {}, std::sqrt(profile.delta),
               profile.growth_budget() + std::max(profile.N1(), 2) + 1};
    for (double p : fe.sets().critical.points) {
        eng.mc.pos.push_back(p);
        eng.mc.singular.push_back(0);
    }
    for (double p : fe.sets().singular.points) {
        eng.mc.pos.push_back(p);
        eng.mc.singular.push_back(1);
    }
    // sort positions with their kinds
    std::vector<std::size_t> order(eng.mc.pos.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return eng.mc.pos[a] < eng.mc.pos[b];
    });
    MarkedCircle sorted;
    for (std::size_t i : order) {
        sorted.pos.push_back(eng.mc.pos[i]);
        sorted.singular.push_back(eng.mc.singular[i]);
    }
    eng.mc = std::move(sorted);

    eng.queue.push_back(std::move(seed));
    static const bool trace = std::getenv("CIRCLELAB_TRACE_GROWTH") != nullptr;
    static long pops = 0;
    while (!eng.queue.empty()) {
        GrowthPiece w = std::move(eng.queue.front());
        eng.queue.pop_front();
        if (trace && ++pops % 5000 == 0)
            std::fprintf(stderr, "[growth] pops=%ld queue=%zu steps=%d width=%.3g "
                         "span=%.3g families=%zu unres=%.3g\n",
                         pops, eng.queue.size(), w.steps, w.domain.length(),
                         w.img_v - w.img_u, out.size(), stats.unresolved);
        if (w.domain.length() < opt.piece_width_floor) {
            stats.unresolved += w.domain.length();
            stats.unresolved_floor += w.domain.length();
            continue;
        }
        if (w.steps > opt.r_cap || w.steps - w.birth > eng.budget) {
            stats.unresolved += w.domain.length();
            stats.unresolved_budget += w.domain.length();
            if (w.steps - w.birth > eng.budget) ++stats.budget_failures;
            continue;
        }
        static const bool trace_dust = std::getenv("CIRCLELAB_TRACE_DUST") != nullptr;
        try {
            eng.process(std::move(w));
        } catch (const SingularProximity& e) {
            stats.unresolved += w.domain.length();
            stats.unresolved_error += w.domain.length();
            if (trace_dust)
                std::fprintf(stderr, "[dust] S %s w=%.3g T=%d b=%d span=%.3g\n",
                             e.what(), w.domain.length(), w.steps, w.birth,
                             w.img_v - w.img_u);
        } catch (const UnresolvedRoot& e) {
            stats.unresolved += w.domain.length();
            stats.unresolved_error += w.domain.length();
            if (trace_dust)
                std::fprintf(stderr, "[dust] U %s w=%.3g T=%d b=%d span=%.3g\n",
                             e.what(), w.domain.length(), w.steps, w.birth,
                             w.img_v - w.img_u);
        }
    }
}

GoodPair grow_to_full_circle(const FlowEval& fe, const ExperimentProfile& profile,
                             const std::vector<BindingIntervals>& bindings,
                             const GrowthPiece& seed, const GrowthOptions& opt,
                             double epsilon0) {
    GrowthStats st;
    std::vector<WrapFamily> fams;
    grow_piece(fe, profile, bindings, seed, opt, st, fams);
    if (fams.empty())
        throw GrowthFailed("no full-circle family within the growth budget");
    const WrapFamily* best = &fams.front();
    for (const WrapFamily& f : fams)
        if (f.R < best->R) best = &f;

    GoodPair gp;
    gp.outer = {std::min(seed.img_u, seed.img_v), std::max(seed.img_u, seed.img_v)};
    double iu = fe.image(best->domain.lo, seed.steps);
    double iv = fe.image(best->domain.hi, seed.steps);
    gp.inner = {std::min(iu, iv), std::max(iu, iv)};
    gp.M = best->R - seed.steps;
    gp.epsilon = epsilon0;
    return gp;
}

Branch materialize_branch(const FlowEval& fe, const WrapFamily& f, std::int64_t wrap) {
    if (wrap < f.wrap_lo || wrap > f.wrap_hi)
        throw LabError("materialize_branch: wrap outside the family range");
    double iu = image_nudged(fe, f.domain.lo, f.R, f.domain.mid());
    double iv = image_nudged(fe, f.domain.hi, f.R, f.domain.mid());
    double xa = preimage_of(fe, f.domain, f.R, static_cast<double>(wrap), iu, iv);
    double xb = preimage_of(fe, f.domain, f.R, static_cast<double>(wrap + 1), iu, iv);
    Branch b;
    b.domain = {std::min(xa, xb), std::max(xa, xb)};
    b.wrap = wrap;
    b.R = f.R;
    double lo_t = static_cast<double>(f.decreasing ? wrap + 1 : wrap);
    double hi_t = static_cast<double>(f.decreasing ? wrap : wrap + 1);
    b.defect_lo = defect_beyond_ulp(fe, f.R, b.domain.lo, lo_t, b.domain.hi);
    b.defect_hi = defect_beyond_ulp(fe, f.R, b.domain.hi, hi_t, b.domain.lo);
    return b;
}

double compute_epsilon0(const CircleMap& m, const MarkedSets& sets,
                        const ExperimentProfile& profile, const DerivativeBounds& bounds,
                        double cap) {
    double e = std::min({profile.delta / 10.0, profile.sigma / 2.0, cap});
    int n = std::max(profile.N1(), 2) + 1;
    PrecisionPolicy pol;
    for (double c : sets.critical.points) {
        double v0 = eval_map(m, c);
        OrbitRecord orb = iterate_orbit(m, sets, v0, n, pol);
        if (orb.truncated())
            throw CriticalOrbitTruncated("critical value orbit truncated inside epsilon0");
        ContractionData cd = compute_contraction(m, orb, n);
        e = std::min(e, std::sqrt(cd.Dn[static_cast<std::size_t>(n)] / (bounds.K0 * m.L)));
    }
    return e;
}

} // namespace circlelab
