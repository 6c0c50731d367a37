#pragma once
#include <cstddef>
#include <vector>

#include "circlelab/binding.hpp"
#include "circlelab/orbit.hpp"
#include "circlelab/profile.hpp"

namespace circlelab {

enum class ReturnDepth { unclassified, shallow, deep };

// A free return: an iterate outside every bound window with d_C <= delta.
struct ReturnEvent {
    std::size_t time;
    double critical_point; // the nearest critical point
    double distance;       // d_C at the return
    int r_index;           // unique r >= 1 with distance in (L^-r, L^-(r-1)]
    int bound_period;      // >= 2
    ReturnDepth depth = ReturnDepth::unclassified;
};

// Times [begin, end] are free iterates; end is the next free return (or the
// last orbit index for the final segment).
struct FreeSegment {
    std::size_t begin;
    std::size_t end;
};

struct ReturnDecomposition {
    std::vector<ReturnEvent> events;
    std::vector<FreeSegment> free_segments;
};

// Walk the orbit, emit free returns with their bound periods, and tile the
// index range with free segments. Returns with d_C beyond the reach of the
// binding family (possible because the practical delta exceeds the outer
// radius of I_2) take the minimal period p = 2. bindings must hold one entry
// per critical point of the map.
ReturnDecomposition decompose_orbit(const CircleMap& m, const MarkedSets& sets,
                                    const OrbitRecord& orbit,
                                    const ExperimentProfile& profile,
                                    const std::vector<BindingIntervals>& bindings);

// Mark each event deep or shallow. An event at time nu is deep when it is the
// first event, or when for every earlier event at time n_k
//   2 log_L d(nu) + sum_{n_j in (n_k, n_t]} 2 log_L d(n_j) <= log_L d(n_k),
// with n_t the last event before nu. Pure function of the event list, so
// applying it twice changes nothing.
ReturnDecomposition classify_returns(const ReturnDecomposition& d, double L);

// Theta split of sum_{i<nu} 1/d_i(x), d_i = d_C d_S / |(f^i)'|, at a free
// return nu: one Theta_k per completed bound window, Theta_0 the free-time
// remainder. Everything is carried in logs; the linear-scale values overflow
// for long orbits.
struct ThetaEvent {
    std::size_t event_index;
    std::size_t time;
    int bound_period;
    double theta_log;
    double window_margin; // log rhs - log lhs of the per-window bound; >= 0 ok
    bool window_ok;
};

struct ThetaDecomposition {
    double theta_total_log;
    double theta0_log;
    std::vector<ThetaEvent> events;
    double free_margin; // log rhs - log lhs of the free-part bound; >= 0 ok
    bool free_ok;
};

ThetaDecomposition theta_contributions(const CircleMap& m, const OrbitRecord& orbit,
                                       const ReturnDecomposition& d, std::size_t nu,
                                       const ExperimentProfile& profile);

} // namespace circlelab
