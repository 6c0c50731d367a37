#pragma once
#include <cstddef>
#include <vector>

#include "circlelab/interval.hpp"
#include "circlelab/linefit.hpp"
#include "circlelab/marked_set.hpp"
#include "circlelab/profile.hpp"

namespace circlelab {

enum class RefineCase { pass, free_cut, marked_cut };

struct GenerationStep {
    int step;
    RefineCase action;
};

// One stopped element: f^S is a diffeomorphism on interval, the image has
// length >= sqrt(delta), and the generation log records how the element was
// carved out of the base interval. itinerary[i] identifies the gap between
// consecutive marked points (C and S merged, sorted) containing f^i(mid).
struct PartitionElement {
    Interval interval;
    int stop_time = 0;
    double image_length = 0.0;
    double min_deriv = 0.0; // min over interior samples of |(f^S)'|
    std::vector<int> itinerary;
    std::vector<GenerationStep> generation_log;
};

struct StoppingPartition {
    Interval base_interval;
    std::vector<PartitionElement> elements;
    double unresolved_measure = 0.0;
    // tail_counts[n] = Lebesgue measure of the union of elements with S >= n
    // (unresolved mass excluded).
    std::vector<double> tail_counts;
};

struct PartitionOptions {
    int stop_time_cap = 200;      // elements alive past this go to unresolved
    double width_floor = 1e-11;   // slivers below this go to unresolved
    int max_split_targets = 4096; // marked-point preimages per refine step
};

// Iterative refinement of a base interval with delta/10 <= |I| <= delta.
// Each generation splits a piece at the preimages of the marked points that
// intruded into its previous image, keeping every piece a monotone stretch;
// a piece with n >= M0 and |f^n piece| >= sqrt(delta) stops whole, except
// that a stretch whose expansion at the weak end sits under 2 delta^{-1/3}
// (the quadratic shadow of a critical point) is peeled off there and keeps
// refining until the expansion recovers. BudgetExceeded when the unresolved
// mass ends up above 10% of the base length.
StoppingPartition build_stopping_partition(const CircleMap& m, const MarkedSets& sets,
                                           const ExperimentProfile& profile,
                                           Interval base,
                                           const PartitionOptions& opt = {});

// ln tail mass vs n over the entries above mass_floor.
struct TailFit {
    LineFit fit;
    double max_log_excess; // worst ln(tail) - ln(delta^{11/12} L^{-lambda n/24})
};
TailFit tail_statistics(const StoppingPartition& p, const ExperimentProfile& profile,
                        double L, double mass_floor = 1e-8);

} // namespace circlelab
