#include "optwvp/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

#include "optwvp/errors.hpp"
#include "optwvp/sto.hpp"

namespace optwvp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

long long ceil_grid_index(double t, double res) {
  long long k = static_cast<long long>(std::ceil(t / res - 1e-9));
  return k < 0 ? 0 : k;
}

// Window close actually enforced when stepping onto position m: the final
// depot visit additionally caps at the budget.
double effective_close(const Instance& inst, const Trajectory& traj, int m) {
  double c = inst.vertex(traj.visits[m]).window_close;
  if (m + 1 == traj.length()) c = std::min(c, inst.budget());
  return c;
}

}  // namespace

std::optional<Schedule> grid_search_services(const Instance& inst,
                                             const Trajectory& traj,
                                             double resolution) {
  validate_trajectory(inst, traj);
  if (!(resolution > 0.0)) throw ParameterError("resolution must be positive");
  const auto& v = traj.visits;
  const int l = traj.length();
  if (l - 2 > 3)
    throw CapacityError("grid search handles at most 3 adjustable visits, got " +
                        std::to_string(l - 2));
  if (0.0 > effective_close(inst, traj, 0) + kFeasibilityTol)
    return std::nullopt;  // cannot even stand at the depot at time zero

  std::vector<long long> steps(l, 0);
  for (int k = 1; k + 1 < l; ++k)
    steps[k] = static_cast<long long>(
        std::floor(inst.vertex(v[k]).max_service / resolution + 1e-9));

  double best_sum = kNegInf;
  std::vector<long long> m_cur(l, 0), m_best;

  // Depth-first over service multiples, ascending at each level, so the
  // first schedule reaching any given total is the lexicographically
  // smallest one; strict improvement keeps it.
  auto recurse = [&](auto&& self, int pos, long long kidx, double sum) -> void {
    if (pos == l - 1) {
      if (sum > best_sum) {
        best_sum = sum;
        m_best = m_cur;
      }
      return;
    }
    const double t = inst.travel(v[pos], v[pos + 1]);
    const double open_next = inst.vertex(v[pos + 1]).window_open;
    const double close_next = effective_close(inst, traj, pos + 1);
    const double p = inst.vertex(v[pos]).unit_profit;
    for (long long m = 0; m <= steps[pos]; ++m) {
      double a = (kidx + m) * resolution + t;
      double sc = std::max(a, open_next);
      if (sc > close_next + kFeasibilityTol) break;  // grows with m
      m_cur[pos] = m;
      self(self, pos + 1, ceil_grid_index(sc, resolution),
           sum + p * (m * resolution));
    }
    m_cur[pos] = 0;
  };
  recurse(recurse, 0, 0, 0.0);

  if (m_best.empty() && best_sum == kNegInf) return std::nullopt;

  Schedule out;
  out.trajectory = traj;
  out.services.resize(l, 0.0);
  for (int k = 0; k < l; ++k) out.services[k] = m_best[k] * resolution;
  out.starts = propagate_starts(inst, traj, out.services);
  return out;
}

std::optional<Schedule> dp_services(const Instance& inst,
                                    const Trajectory& traj,
                                    double resolution) {
  validate_trajectory(inst, traj);
  if (!(resolution > 0.0)) throw ParameterError("resolution must be positive");
  const auto& v = traj.visits;
  const int l = traj.length();
  if (0.0 > effective_close(inst, traj, 0) + kFeasibilityTol)
    return std::nullopt;

  double horizon = 0.0;
  for (int m = 0; m < l; ++m)
    horizon = std::max(horizon, effective_close(inst, traj, m));
  const long long K =
      static_cast<long long>(std::ceil(horizon / resolution)) + 1;
  if (K > 50'000'000 || static_cast<double>(K) * l > 3e8)
    throw CapacityError("time grid of " + std::to_string(K) +
                        " points per position is too large; coarsen the "
                        "resolution");

  // value[k]: best profit collectable from position j onward when the
  // simulated grid start there is k * resolution.
  std::vector<double> value(K + 1, 0.0), next_value(K + 1);
  // choice[j][k]: the maximizing q = k + m, kNegInf states hold -1.
  std::vector<std::vector<std::int32_t>> choice(
      l - 1, std::vector<std::int32_t>(K + 1, -1));

  std::vector<double> score(K + 1);  // A[q] = p*res*q + value[target(q)]
  for (int j = l - 2; j >= 0; --j) {
    const double t = inst.travel(v[j], v[j + 1]);
    const double open_next = inst.vertex(v[j + 1]).window_open;
    const double close_next = effective_close(inst, traj, j + 1);
    const double p = inst.vertex(v[j]).unit_profit;
    const long long M =
        (j == 0) ? 0
                 : static_cast<long long>(std::floor(
                       inst.vertex(v[j]).max_service / resolution + 1e-9));

    for (long long q = 0; q <= K; ++q) {
      double a = q * resolution + t;
      double sc = std::max(a, open_next);
      if (sc > close_next + kFeasibilityTol) {
        score[q] = kNegInf;
        continue;
      }
      long long k2 = ceil_grid_index(sc, resolution);
      double cont = k2 <= K ? value[k2] : kNegInf;
      score[q] = cont == kNegInf ? kNegInf : p * resolution * q + cont;
    }

    // Sliding maximum of score over windows [k, k+M]; earliest index wins
    // ties, which keeps the service here, and so the whole vector,
    // lexicographically smallest.
    std::deque<long long> dq;
    long long r = -1;
    for (long long k = 0; k <= K; ++k) {
      long long edge = std::min(k + M, K);
      while (r < edge) {
        ++r;
        while (!dq.empty() && score[dq.back()] < score[r]) dq.pop_back();
        dq.push_back(r);
      }
      while (dq.front() < k) dq.pop_front();
      double best = score[dq.front()];
      if (best == kNegInf) {
        next_value[k] = kNegInf;
        choice[j][k] = -1;
      } else {
        next_value[k] = best - p * resolution * k;
        choice[j][k] = static_cast<std::int32_t>(dq.front());
      }
    }
    std::swap(value, next_value);
  }

  if (value[0] == kNegInf) return std::nullopt;

  Schedule out;
  out.trajectory = traj;
  out.services.resize(l, 0.0);
  long long k = 0;
  for (int j = 0; j + 1 < l; ++j) {
    long long q = choice[j][k];
    out.services[j] = (q - k) * resolution;
    double sc = std::max(q * resolution + inst.travel(v[j], v[j + 1]),
                         inst.vertex(v[j + 1]).window_open);
    k = ceil_grid_index(sc, resolution);
  }
  out.starts = propagate_starts(inst, traj, out.services);
  return out;
}

ExactResult exact_solve(const Instance& inst, int max_visits,
                        double time_limit_s) {
  const int n = inst.size();
  if (n > 64)
    throw CapacityError("exhaustive enumeration refuses instances above 64 "
                        "vertices");
  if (max_visits < 0) throw ParameterError("max_visits must be >= 0");

  const auto t0 = std::chrono::steady_clock::now();
  const bool deadline = time_limit_s > 0.0;
  ExactResult res;
  res.best_reward = kNegInf;

  std::vector<int> prefix{0};
  std::uint64_t ticks = 0;
  bool out_of_time = false;

  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  // DFS over route prefixes in ascending-id order; completing a route before
  // extending it means routes are produced in lexicographic order, so strict
  // improvement keeps the lexicographically smallest optimum.
  auto dfs = [&](auto&& self, int cur, double start_cur, std::uint64_t mask,
                 int depth) -> void {
    if (out_of_time) return;
    if (deadline && (++ticks & 1023) == 0 && elapsed() > time_limit_s) {
      out_of_time = true;
      return;
    }

    double back = start_cur + inst.travel(cur, 0);
    if (back <= inst.budget() + kFeasibilityTol &&
        back <= inst.vertex(0).window_close + kFeasibilityTol) {
      Trajectory traj;
      traj.visits = prefix;
      traj.visits.push_back(0);
      StoResult sto = optimize_service_times(inst, traj);
      ++res.routes_examined;
      if (sto.total_reward > res.best_reward) {
        res.best_reward = sto.total_reward;
        res.best_schedule = std::move(sto.schedule);
      }
    }

    if (depth == max_visits) return;
    for (int next = 1; next < n; ++next) {
      if (mask & (1ull << next)) continue;
      double arrive = start_cur + inst.travel(cur, next);
      double s = std::max(arrive, inst.vertex(next).window_open);
      if (s > inst.vertex(next).window_close + kFeasibilityTol) continue;
      if (s > inst.budget() + kFeasibilityTol) continue;
      prefix.push_back(next);
      self(self, next, s, mask | (1ull << next), depth + 1);
      prefix.pop_back();
      if (out_of_time) return;
    }
  };
  dfs(dfs, 0, 0.0, 1ull, 0);

  res.elapsed_s = elapsed();
  res.complete = !out_of_time;
  if (res.best_reward == kNegInf) {
    // Even the empty tour failed (malformed depot window); surface that.
    throw PreconditionError("no feasible route exists, the empty tour itself "
                            "violates the depot window or budget");
  }
  return res;
}

}  // namespace optwvp
