#pragma once

#include <cstdint>
#include <optional>

#include "optwvp/solution.hpp"

namespace optwvp {

// Independent reference solvers used to cross-check the fast path.  The two
// service-time oracles below implement the same discretized problem twice,
// with deliberately different algorithms (exhaustive enumeration vs dynamic
// programming), and must agree on it to within float-summation noise.
//
// Shared discretized semantics, pinned so both sides compute identical
// arithmetic:
//   - service at an adjustable visit is m * res for integer m in
//     [0, floor(max_service / res + 1e-9)];
//   - simulated starts live on the grid as integer indices k (time k * res);
//     the depot leaves at k = 0;
//   - stepping with service m uses arrival a = (k + m) * res + travel,
//     continuation sc = max(a, window_open);
//   - the window close of the step target (its own close, except the final
//     depot visit where it is min(close, budget)) is checked against sc
//     BEFORE rounding, with kFeasibilityTol; rounding therefore never
//     manufactures infeasibility, and any discretized-feasible vector is
//     feasible in the continuous problem as well;
//   - the next index is k' = max(0, ceil(sc / res - 1e-9)).
// Both return the profit-maximal service vector (lexicographically smallest
// on ties) as a schedule with earliest continuous starts, or nullopt when
// even the all-zero vector is infeasible.

// Plain exhaustive enumeration over the service grid.  Exponential in the
// number of adjustable visits; refuses more than 3 of them.
std::optional<Schedule> grid_search_services(const Instance& inst,
                                             const Trajectory& traj,
                                             double resolution = 1e-2);

// Dynamic program over (position, start-grid-index) states.  Handles longer
// trajectories and finer grids; linear in trajectory length times grid size.
std::optional<Schedule> dp_services(const Instance& inst,
                                    const Trajectory& traj,
                                    double resolution = 1e-3);

struct ExactResult {
  Schedule best_schedule;     // empty tour {0,0} when nothing better exists
  double best_reward = 0.0;
  std::uint64_t routes_examined = 0;  // complete routes evaluated
  double elapsed_s = 0.0;
  bool complete = true;  // false when the deadline cut enumeration short
};

// Exhaustive route enumeration: every depot-anchored simple route with at
// most max_visits customers, each scored by optimize_service_times.  Prefix
// pruning only discards extensions that are provably infeasible even at zero
// service, so when `complete` is true the result is the true optimum.
// Ties go to the lexicographically smallest visit sequence.  Practical for
// small instances only; throws CapacityError above 64 vertices.
ExactResult exact_solve(const Instance& inst, int max_visits,
                        double time_limit_s = 0.0);  // <= 0: no deadline

}  // namespace optwvp
