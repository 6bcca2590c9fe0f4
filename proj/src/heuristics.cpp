#include "optwvp/heuristics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "optwvp/errors.hpp"
#include "optwvp/rng.hpp"

namespace optwvp {

Schedule greedy_construct(const Instance& inst, double service_fraction) {
  if (!(service_fraction >= 0.0 && service_fraction <= 1.0))
    throw ParameterError("service fraction must lie in [0, 1]");
  const int n = inst.size();
  const double tol = kFeasibilityTol;

  Schedule out;
  out.trajectory.visits = {0};
  out.starts = {0.0};
  out.services = {0.0};

  std::vector<char> visited(n, 0);
  int cur = 0;
  double clock = 0.0;  // ready-to-leave time at cur

  for (;;) {
    int pick = -1;
    double pick_rate = -1.0, pick_start = 0.0, pick_service = 0.0;
    for (int j = 1; j < n; ++j) {
      if (visited[j]) continue;
      const Vertex& vj = inst.vertex(j);
      double travel = inst.travel(cur, j);
      double start = std::max(clock + travel, vj.window_open);
      if (start > vj.window_close + tol) continue;
      double room = inst.budget() - start - inst.travel(j, 0);
      if (room < -tol) continue;  // could not return afterwards
      double service =
          std::max(0.0, std::min(service_fraction * vj.max_service, room));
      double denom = travel + (start - (clock + travel)) + service;
      double rate = denom > 0.0 ? vj.unit_profit * service / denom : 0.0;
      if (rate > pick_rate) {
        pick = j;
        pick_rate = rate;
        pick_start = start;
        pick_service = service;
      }
    }
    if (pick < 0) break;
    visited[pick] = 1;
    out.trajectory.visits.push_back(pick);
    out.starts.push_back(pick_start);
    out.services.push_back(pick_service);
    clock = pick_start + pick_service;
    cur = pick;
  }

  out.trajectory.visits.push_back(0);
  out.starts.push_back(std::max(clock + inst.travel(cur, 0),
                                inst.vertex(0).window_open));
  out.services.push_back(0.0);
  return out;
}

StoResult greedy_prs(const Instance& inst) {
  Schedule built = greedy_construct(inst, 1.0);
  return optimize_service_times(inst, built.trajectory);
}

Schedule fixed_ratio_schedule(const Instance& inst, double ratio) {
  return greedy_construct(inst, ratio);
}

namespace {

// Zero-service feasibility: cheap gate before paying for the optimizer.
bool route_feasible(const Instance& inst, const Trajectory& traj) {
  const auto& v = traj.visits;
  double s = 0.0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    s = std::max(s + inst.travel(v[k - 1], v[k]),
                 inst.vertex(v[k]).window_open);
    if (s > inst.vertex(v[k]).window_close + kFeasibilityTol) return false;
  }
  return s <= inst.budget() + kFeasibilityTol;
}

struct Scored {
  Trajectory traj;
  StoResult sto;
};

// Best-improvement local search.  Every candidate is evaluated by a full
// second-stage run from scratch; nothing incremental, nothing stale.
Scored local_search(const Instance& inst, Scored cur) {
  const int n = inst.size();
  for (;;) {
    const auto& visits = cur.traj.visits;
    const int l = static_cast<int>(visits.size());
    std::vector<char> in_route(n, 0);
    for (int id : visits) in_route[id] = 1;

    double best_reward = cur.sto.total_reward + 1e-9;
    Trajectory best;
    bool found = false;
    auto consider = [&](Trajectory cand) {
      if (!route_feasible(inst, cand)) return;
      StoResult r = optimize_service_times(inst, cand);
      if (r.total_reward > best_reward) {
        best_reward = r.total_reward;
        best = std::move(cand);
        found = true;
      }
    };

    // insert an unvisited customer at any position
    for (int c = 1; c < n; ++c) {
      if (in_route[c]) continue;
      for (int pos = 1; pos < l; ++pos) {
        Trajectory t = cur.traj;
        t.visits.insert(t.visits.begin() + pos, c);
        consider(std::move(t));
      }
    }
    // drop a visit
    for (int pos = 1; pos + 1 < l; ++pos) {
      Trajectory t = cur.traj;
      t.visits.erase(t.visits.begin() + pos);
      consider(std::move(t));
    }
    // relocate a visit
    for (int pos = 1; pos + 1 < l; ++pos) {
      for (int to = 1; to + 1 < l; ++to) {
        if (to == pos) continue;
        Trajectory t = cur.traj;
        int id = t.visits[pos];
        t.visits.erase(t.visits.begin() + pos);
        t.visits.insert(t.visits.begin() + to, id);
        if (t.visits == cur.traj.visits) continue;
        consider(std::move(t));
      }
    }
    // swap two visits
    for (int a = 1; a + 1 < l; ++a)
      for (int b = a + 1; b + 1 < l; ++b) {
        Trajectory t = cur.traj;
        std::swap(t.visits[a], t.visits[b]);
        consider(std::move(t));
      }

    if (!found) return cur;
    cur.traj = std::move(best);
    cur.sto = optimize_service_times(inst, cur.traj);
  }
}

}  // namespace

IlsResult ils_solve(const Instance& inst, const SearchConfig& cfg) {
  if (!(cfg.time_limit_s > 0.0))
    throw ParameterError("time limit must be positive");
  if (cfg.perturbation_strength < 1)
    throw ParameterError("perturbation strength must be >= 1");
  if (cfg.no_improve_limit < 1)
    throw ParameterError("no-improve limit must be >= 1");

  const auto t0 = std::chrono::steady_clock::now();
  auto ms = [&] {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  };

  Scored incumbent;
  incumbent.traj = greedy_construct(inst, 1.0).trajectory;
  incumbent.sto = optimize_service_times(inst, incumbent.traj);

  IlsResult res;
  res.initial_reward = incumbent.sto.total_reward;
  res.first_hit_ms = ms();

  std::mt19937_64 rng(cfg.seed);
  int no_improve = 0;
  while (res.iterations < cfg.max_iterations && ms() < cfg.time_limit_s * 1e3 &&
         no_improve < cfg.no_improve_limit) {
    ++res.iterations;
    Scored trial = incumbent;
    if (res.iterations > 1) {
      // kick: drop a few random visits, then descend again
      auto& vs = trial.traj.visits;
      int removable = static_cast<int>(vs.size()) - 2;
      int k = std::min(cfg.perturbation_strength, removable);
      for (int i = 0; i < k; ++i) {
        int pos = 1 + static_cast<int>(uniform_index(
                          rng, static_cast<std::uint64_t>(vs.size()) - 2));
        vs.erase(vs.begin() + pos);
      }
      trial.sto = optimize_service_times(inst, trial.traj);
    }
    trial = local_search(inst, std::move(trial));
    if (trial.sto.total_reward > incumbent.sto.total_reward + 1e-9) {
      incumbent = std::move(trial);
      res.first_hit_ms = ms();
      no_improve = 0;
    } else if (res.iterations > 1) {
      ++no_improve;
    }
  }

  res.schedule = incumbent.sto.schedule;
  res.total_reward = incumbent.sto.total_reward;
  res.total_ms = ms();
  return res;
}

}  // namespace optwvp
