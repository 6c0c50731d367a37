#pragma once
#include <cstddef>
#include <vector>

#include "circlelab/growth.hpp"
#include "circlelab/linefit.hpp"
#include "circlelab/partition.hpp"
#include "circlelab/rng.hpp"

namespace circlelab {

struct InducedOptions {
    PartitionOptions partition;
    GrowthOptions growth;        // all-zero margins -> derive from the profile
    double mass_target = 0.999;
    int base_intervals = 0;      // 0 -> ceil(1/delta) equal pieces of the circle
    bool strict = true;          // throw BudgetExceeded below mass_target
};

// Induced full-branch map of the circle: a countable family of monotone
// branch windows, each mapping onto S^1 under f^R. Branches are grouped by
// growth event (WrapFamily) and share R within a group.
struct InducedMarkovMap {
    std::vector<WrapFamily> families; // sorted by domain.lo, pairwise disjoint
    double total_mass = 0.0;          // sum of family domain lengths
    double unresolved_mass = 0.0;     // partition + growth dust given up
    double coverage_defect = 0.0;     // 1 - total_mass
    double partition_unresolved = 0.0;
    long element_count = 0;           // stopped partition elements (seeds)
    std::int64_t branch_count = 0;
    int max_R = 0;
    std::vector<double> r_mass;       // index n: Lebesgue measure of {R = n}
    double lebesgue_mean_R = 0.0;     // sum R |domain| / total_mass
    double max_corner_defect = 0.0;
    GrowthStats growth_stats;
};

InducedMarkovMap build_full_return_map(const CircleMap& m, const MarkedSets& sets,
                                       const ExperimentProfile& profile,
                                       const std::vector<BindingIntervals>& bindings,
                                       const InducedOptions& opt = {});

// Index of the family whose domain contains x, or -1.
std::ptrdiff_t locate_family(const InducedMarkovMap& imap, double x);

// Branch-level certificate: endpoint wrap defects, interior image coverage,
// monotonicity (injectivity), domain disjointness, and the empirical
// distortion constant, measured on a seeded branch sample.
struct MarkovCertificate {
    long branches_checked = 0;
    long thin_skipped = 0;            // branches too near ulp scale to sample
    double max_endpoint_defect = 0.0; // vs the integer corners of [w, w+1]
    double max_interior_gap = 0.0;    // circular gap of sampled forward images
    double max_domain_overlap = 0.0;  // adjacent family domains
    double min_expansion = 0.0;       // min |(f^R)'| over sampled interiors
    double distortion_constant = 0.0; // sup |log ratio| / image distance
    bool injective = false;           // every sampled branch strictly monotone
};

MarkovCertificate verify_markov_property(const FlowEval& fe, const InducedMarkovMap& imap,
                                         long branch_samples, int interior_points,
                                         Rng& rng);

// Histogram of branch mass by return time and the log-scale line fit over
// bins with mass above the floor.
struct ReturnTimeStats {
    std::vector<double> masses; // index n: measure{R = n}
    LineFit fit;
    double max_log_excess = 0.0; // vs ln(delta) - (lambda ln L / 26) n
};

ReturnTimeStats return_time_statistics(const InducedMarkovMap& imap,
                                       const ExperimentProfile& profile, double L,
                                       double mass_floor = 1e-8);

} // namespace circlelab
