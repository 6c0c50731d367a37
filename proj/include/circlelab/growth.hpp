#pragma once
#include <cstdint>
#include <vector>

#include "circlelab/binding.hpp"
#include "circlelab/derivative_bounds.hpp"
#include "circlelab/flow.hpp"
#include "circlelab/interval.hpp"
#include "circlelab/profile.hpp"

namespace circlelab {

// epsilon_0 = min(delta/10, sigma/2, inf_c sqrt(D_{N1+1}(f c)/(K0 L)), cap).
double compute_epsilon0(const CircleMap& m, const MarkedSets& sets,
                        const ExperimentProfile& profile, const DerivativeBounds& bounds,
                        double cap = 1e-4);

// Nested image arcs: f^M maps the closure of inner onto exactly one full
// circle and inner keeps its distance from the ends of outer.
struct GoodPair {
    Interval outer; // lift image of the seed piece
    Interval inner; // lift sub-arc mapping onto [w, w+1] under M more steps
    int M = 0;
    double epsilon = 0.0;
};

// A maximal monotone stretch of full-circle branches from one growth event:
// f^R is monotone on domain with lift image [wrap_lo, wrap_hi + 1], and
// branch w is the preimage of [w, w+1]. All branches share R; they are
// materialized on demand.
struct WrapFamily {
    Interval domain;
    int R = 0;
    std::int64_t wrap_lo = 0;
    std::int64_t wrap_hi = 0;
    bool decreasing = false;    // orientation of F_R on domain
    bool singular_tail = false; // a side was truncated at the branch width floor
    double truncated_mass = 0.0;
    double corner_defect = 0.0; // max |F_R(domain end) - integer corner|
    int tail_step = 0; // R minus the last large-scale time of the chain
    std::vector<int> large_scale_times;

    std::int64_t branch_count() const { return wrap_hi - wrap_lo + 1; }
};

struct Branch {
    Interval domain;
    std::int64_t wrap = 0;
    int R = 0;
    double defect_lo = 0.0; // |F_R(domain.lo) - image corner|
    double defect_hi = 0.0;
};

Branch materialize_branch(const FlowEval& fe, const WrapFamily& f, std::int64_t wrap);

// Work item: f^steps is monotone on domain; img_u, img_v are the lift images
// of domain.lo and domain.hi.
struct GrowthPiece {
    Interval domain;
    int steps = 0;
    double img_u = 0.0;
    double img_v = 0.0;
    int birth = 0; // step count at spawn; the growth budget counts from here
    std::vector<int> large_scale_times;
};

struct GrowthOptions {
    double wrap_margin = 0.0;  // sqrt(delta)/3 kept clear at the span ends
    double case2_margin = 0.0; // sigma/2 for critical-side families
    double recycle_floor = 0.0; // delta/10: shorter leftover images are dropped
    double branch_width_floor = 2e-10;
    double piece_width_floor = 1e-12;
    double leftover_width_floor = 1e-9; // corner leftovers narrower than this are dropped
    int r_cap = 400;
};

GrowthOptions default_growth_options(const ExperimentProfile& profile);

struct GrowthStats {
    double unresolved = 0.0; // domain mass given up, total of the below
    double unresolved_budget = 0.0;   // pieces that ran out of growth steps
    double unresolved_floor = 0.0;    // width / image floors and carve dust
    double unresolved_truncated = 0.0; // sub-resolution wrap tails
    double unresolved_error = 0.0;    // evaluation or root-finding failures
    long budget_failures = 0;
    long case2_events = 0;
    long singular_families = 0;
    long recycled_pieces = 0;
};

// Drive one seed to completion: every descendant piece either lands in a wrap
// family or is accounted to stats.unresolved.
void grow_piece(const FlowEval& fe, const ExperimentProfile& profile,
                const std::vector<BindingIntervals>& bindings, GrowthPiece seed,
                const GrowthOptions& opt, GrowthStats& stats,
                std::vector<WrapFamily>& out);

// Single-piece frontend: the good pair realized by the lowest-R family the
// seed produces. GrowthFailed when the budget runs out with none.
GoodPair grow_to_full_circle(const FlowEval& fe, const ExperimentProfile& profile,
                             const std::vector<BindingIntervals>& bindings,
                             const GrowthPiece& seed, const GrowthOptions& opt,
                             double epsilon0);

} // namespace circlelab
