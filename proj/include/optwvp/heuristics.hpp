#pragma once

#include <cstdint>
#include <limits>

#include "optwvp/solution.hpp"
#include "optwvp/sto.hpp"

namespace optwvp {

// Greedy route construction by profit-rate: repeatedly append the reachable
// customer maximizing
//     p_j * d_j / (travel + wait + d_j)
// where d_j is the service the builder would commit there:
// min(service_fraction * max_service_j, room left to still return to the
// depot in budget), never negative.  A 0/0 rate counts as 0; ties go to the
// smaller vertex id.  The committed services advance the clock, so the
// emitted schedule is feasible as constructed.
Schedule greedy_construct(const Instance& inst, double service_fraction);

// The standard pipeline: full-service greedy construction
// (service_fraction = 1), then optimal service re-allocation on the chosen
// route.
StoResult greedy_prs(const Instance& inst);

// Baseline that skips the second stage entirely: services stay frozen at
// ratio * max_service (truncated to the budget) exactly as constructed.
// ratio must lie in [0, 1].
Schedule fixed_ratio_schedule(const Instance& inst, double ratio);

struct SearchConfig {
  double time_limit_s = 10.0;
  std::uint64_t max_iterations =
      std::numeric_limits<std::uint64_t>::max();  // 0 = construction only
  int no_improve_limit = 100;  // consecutive fruitless perturbations allowed
  int perturbation_strength = 3;  // visits removed per kick
  std::uint64_t seed = 0;
};

struct IlsResult {
  Schedule schedule;
  double total_reward = 0.0;
  double initial_reward = 0.0;  // greedy starting point, before any search
  std::uint64_t iterations = 0;
  double total_ms = 0.0;
  double first_hit_ms = 0.0;  // when the final score was first reached
};

// Iterated local search over routes, every candidate route re-scored from
// scratch by optimize_service_times.  Local moves: insert an unvisited
// customer, remove a visit, relocate a visit, swap two visits; best
// improvement, strict acceptance.  Perturbation removes random visits from
// the incumbent.  Deterministic for a given seed when the iteration budget
// (not the wall clock) is the binding stop rule.
IlsResult ils_solve(const Instance& inst, const SearchConfig& cfg);

}  // namespace optwvp
