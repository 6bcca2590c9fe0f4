#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "optwvp/instance.hpp"

namespace optwvp {

// Absolute tolerance used by every feasibility comparison in the library.
inline constexpr double kFeasibilityTol = 1e-9;
// Floor applied to travel times when they appear in a denominator.
inline constexpr double kTravelFloor = 1e-9;

// A depot-anchored route: visits.front() == visits.back() == 0, interior
// vertices pairwise distinct and nonzero.  The shortest legal trajectory is
// {0, 0}, the empty tour.
struct Trajectory {
  std::vector<int> visits;

  int length() const { return static_cast<int>(visits.size()); }
  bool operator==(const Trajectory&) const = default;
};

// Throws ParameterError when the trajectory breaks the shape rules above or
// references vertices outside the instance.
void validate_trajectory(const Instance& inst, const Trajectory& traj);

// A trajectory plus aligned service-start times and service durations, one
// entry per visit (depot entries are zero-service).
struct Schedule {
  Trajectory trajectory;
  std::vector<double> starts;
  std::vector<double> services;

  bool operator==(const Schedule&) const = default;
};

// Earliest feasible start times under the recurrence
//   s[0] = 0,  s[k] = max(s[k-1] + d[k-1] + travel(v[k-1], v[k]), open(v[k])).
// Window-close violations are NOT checked here; callers compare against the
// closes themselves.  services.size() must equal the trajectory length.
std::vector<double> propagate_starts(const Instance& inst,
                                     const Trajectory& traj,
                                     const std::vector<double>& services);

// Every violated constraint as a human-readable string; empty means feasible.
// Checks trajectory shape, vector alignment, service bounds, window starts,
// chain consistency (each start at least the previous start + service +
// travel) and the budget at the final depot visit.  All comparisons use
// kFeasibilityTol.
std::vector<std::string> check_feasibility(const Instance& inst,
                                           const Schedule& sched);

// Total collected profit, sum of unit_profit * service over the visits.
double reward(const Instance& inst, const Schedule& sched);

// Profit-per-travel-time ratio: sum over non-depot visits of
// unit_profit * service / max(entering travel, kTravelFloor), where the
// entering travel is the arc actually used to reach the visit.
double ptar(const Instance& inst, const Schedule& sched);

// Plain-text form:
//   route <id> <id> ...
//   starts <float> ...
//   services <float> ...
void write_schedule(std::ostream& out, const Schedule& sched);
std::string schedule_to_string(const Schedule& sched);
Schedule parse_schedule(std::istream& in);
Schedule parse_schedule_string(const std::string& text);

}  // namespace optwvp
