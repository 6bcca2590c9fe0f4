#pragma once

#include <cstdint>
#include <vector>

#include "optwvp/solution.hpp"

namespace optwvp {

// What stopped a visit's service from growing further.
enum class ServiceBound {
  zero,              // no room at all (or nothing to gain)
  max_service,       // the visit's own capacity
  downstream_window  // some later visit's window close
};

struct BindingInfo {
  ServiceBound bound = ServiceBound::zero;
  // Trajectory position of the binding window when bound ==
  // downstream_window, -1 otherwise.
  int window_position = -1;
};

struct StoResult {
  Schedule schedule;
  double total_reward = 0.0;
  std::vector<BindingInfo> binding_info;  // aligned with the trajectory
};

// Maximizes total collected profit over service durations for a fixed
// trajectory.  Precondition: the trajectory is feasible with all services at
// zero; otherwise PreconditionError.  Greedy by unit profit: visits are
// processed in descending-profit order (ties to the earlier position) and
// each receives the largest service its own capacity and all downstream
// window closes allow, with start times re-propagated after every
// assignment.  The returned schedule always passes check_feasibility.
//
// The per-visit headroom against a downstream close is computed exactly (the
// waiting slack already absorbed in the propagated starts does not depend on
// the candidate's own duration), which is what makes this single greedy pass
// optimal rather than merely heuristic; see the optimality tests, which pit
// it against exhaustive search.
StoResult optimize_service_times(const Instance& inst, const Trajectory& traj);

// Stochastic first-order check that a schedule is locally maximal: samples
// `trials` random directions over the service vector, projects them onto the
// active box bounds, line-searches the largest feasible step, and reports
// true iff no probe improved total profit by more than 1e-9.  Deterministic
// for a given seed.
bool verify_no_improvement(const Instance& inst, const StoResult& result,
                           int trials, std::uint64_t seed);

}  // namespace optwvp
