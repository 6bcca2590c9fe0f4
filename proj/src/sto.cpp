#include "optwvp/sto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "optwvp/errors.hpp"
#include "optwvp/rng.hpp"
#include "text_util.hpp"

namespace optwvp {

StoResult optimize_service_times(const Instance& inst, const Trajectory& traj) {
  validate_trajectory(inst, traj);
  const auto& v = traj.visits;
  const int l = traj.length();

  std::vector<double> services(l, 0.0);
  std::vector<double> starts = propagate_starts(inst, traj, services);

  // Feasible-at-zero precondition.  The final depot close equals the budget
  // on well-formed instances, so this covers the budget too; we check the
  // budget explicitly anyway to stay honest on hand-built data.
  for (int k = 0; k < l; ++k) {
    double close = inst.vertex(v[k]).window_close;
    if (starts[k] > close + kFeasibilityTol)
      throw PreconditionError(
          "zero-service start " + detail::g17(starts[k]) + " at position " +
          std::to_string(k) + " (vertex " + std::to_string(v[k]) +
          ") already violates window close " + detail::g17(close));
  }
  if (starts[l - 1] > inst.budget() + kFeasibilityTol)
    throw PreconditionError("zero-service return " + detail::g17(starts[l - 1]) +
                            " already exceeds budget " +
                            detail::g17(inst.budget()));

  // Interior visits in descending unit-profit order, earlier position first
  // on ties.
  std::vector<int> order;
  for (int k = 1; k + 1 < l; ++k) order.push_back(k);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return inst.vertex(v[a]).unit_profit > inst.vertex(v[b]).unit_profit;
  });

  std::vector<BindingInfo> binding(l);
  for (int i : order) {
    // Headroom before each downstream window close if we lengthen service
    // here: close(m) - start(i) - services already granted strictly between
    // i and m - travel from i to m.  Waiting already baked into start(m)
    // only shrinks when this visit's service grows, so the straight-line sum
    // below is exact, not a bound.
    double slack = std::numeric_limits<double>::infinity();
    int binding_pos = -1;
    double cum = 0.0;  // services + travel accumulated past i
    for (int m = i + 1; m < l; ++m) {
      cum += inst.travel(v[m - 1], v[m]);
      double close_m = inst.vertex(v[m]).window_close;
      // the budget acts as one more close on the final depot visit; on
      // well-formed instances the depot window already encodes it
      if (m + 1 == l) close_m = std::min(close_m, inst.budget());
      double room = close_m - starts[i] - cum;
      if (room < slack) {
        slack = room;
        binding_pos = m;
      }
      cum += services[m];
    }
    const double cap = inst.vertex(v[i]).max_service;
    double d = std::min(cap, slack);
    if (d < -kFeasibilityTol)
      throw std::logic_error("negative service headroom " + detail::g17(d) +
                             " despite a zero-feasible route; slack bookkeeping"
                             " is broken");
    d = std::max(d, 0.0);
    services[i] = d;
    if (cap <= slack)
      binding[i] = {ServiceBound::max_service, -1};
    else if (slack <= 0.0)
      binding[i] = {ServiceBound::zero, -1};
    else
      binding[i] = {ServiceBound::downstream_window, binding_pos};

    for (int m = i + 1; m < l; ++m) {
      double arrive = starts[m - 1] + services[m - 1] + inst.travel(v[m - 1], v[m]);
      starts[m] = std::max(arrive, inst.vertex(v[m]).window_open);
    }
  }

  StoResult res;
  res.schedule = Schedule{traj, std::move(starts), std::move(services)};
  res.total_reward = reward(inst, res.schedule);
  res.binding_info = std::move(binding);

  auto bad = check_feasibility(inst, res.schedule);
  if (!bad.empty())
    throw std::logic_error("optimizer produced an infeasible schedule: " +
                           bad.front());
  return res;
}

namespace {

// Largest alpha in [0, hi] such that services + alpha*dir keeps every
// window-close and the budget satisfied (box bounds are respected by the
// caller's choice of hi).  The feasible set is convex, so feasibility along
// the ray is an interval and bisection is sound.  Starts are recomputed with
// a running clock instead of a scratch vector; this runs millions of times.
double max_feasible_step(const Instance& inst, const Trajectory& traj,
                         const std::vector<double>& base,
                         const std::vector<double>& dir, double hi) {
  const auto& v = traj.visits;
  const int l = traj.length();
  auto feasible = [&](double a) {
    double s = 0.0;  // same anchor as propagate_starts
    for (int k = 1; k < l; ++k) {
      double d = base[k - 1] + a * dir[k - 1];
      s = std::max(s + d + inst.travel(v[k - 1], v[k]),
                   inst.vertex(v[k]).window_open);
      if (s > inst.vertex(v[k]).window_close + kFeasibilityTol) return false;
    }
    return s <= inst.budget() + kFeasibilityTol;
  };
  if (feasible(hi)) return hi;
  double lo = 0.0;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

bool verify_no_improvement(const Instance& inst, const StoResult& result,
                           int trials, std::uint64_t seed) {
  if (trials <= 0) throw ParameterError("trials must be positive");
  const auto& v = result.schedule.trajectory.visits;
  const int l = static_cast<int>(v.size());
  if (l <= 2) return true;  // nothing adjustable

  const std::vector<double>& base = result.schedule.services;

  std::mt19937_64 rng(seed);
  std::vector<double> dir(l, 0.0);
  for (int trial = 0; trial < trials; ++trial) {
    for (int k = 1; k + 1 < l; ++k) dir[k] = uniform_range(rng, -1.0, 1.0);

    // Project onto the active box bounds so the direction is admissible.
    double gain_rate = 0.0;
    double norm = 0.0;
    for (int k = 1; k + 1 < l; ++k) {
      const double cap = inst.vertex(v[k]).max_service;
      if (base[k] <= kFeasibilityTol) dir[k] = std::max(dir[k], 0.0);
      if (base[k] >= cap - kFeasibilityTol) dir[k] = std::min(dir[k], 0.0);
      gain_rate += inst.vertex(v[k]).unit_profit * dir[k];
      norm += dir[k] * dir[k];
    }
    // Profit is linear along the ray, so only ascent directions matter and
    // only the endpoint needs to be evaluated.
    if (norm < 1e-18 || gain_rate <= 0.0) continue;

    double hi = std::numeric_limits<double>::infinity();
    for (int k = 1; k + 1 < l; ++k) {
      const double cap = inst.vertex(v[k]).max_service;
      if (dir[k] > 0.0) hi = std::min(hi, (cap - base[k]) / dir[k]);
      if (dir[k] < 0.0) hi = std::min(hi, (0.0 - base[k]) / dir[k]);
    }
    if (!std::isfinite(hi)) hi = inst.budget();  // pure shrink directions
    hi = std::max(hi, 0.0);
    if (hi == 0.0) continue;

    double alpha =
        max_feasible_step(inst, result.schedule.trajectory, base, dir, hi);
    if (alpha * gain_rate > 1e-9) return false;  // found an improvement
  }
  return true;
}

}  // namespace optwvp
