#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "optwvp/errors.hpp"
#include "optwvp/instance.hpp"
#include "optwvp/oracles.hpp"
#include "optwvp/solution.hpp"
#include "optwvp/sto.hpp"

using namespace optwvp;

namespace {

// Uniform chain: travel 1 between route neighbours.  Used for hand-checked
// fixtures below.
Instance chain(double budget, std::vector<Vertex> customers) {
  std::vector<Vertex> vs;
  vs.push_back({0, 0, 0, 0.0, budget, 0.0, 0.0});
  for (auto& c : customers) vs.push_back(c);
  const int n = static_cast<int>(vs.size());
  for (int i = 0; i < n; ++i) {
    vs[i].id = i;
    vs[i].x = static_cast<double>(i);
    vs[i].y = 0.0;
  }
  std::vector<double> t(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t[i * n + j] = std::abs(i - j);
  return Instance(std::move(vs), std::move(t), budget);
}

// A random route over a generated instance that is feasible with zero
// services: shuffle the customers, then grow the tour with each one that
// keeps it feasible, up to `interior` visits.  Partial routes are returned
// too; only a route with no interior visit at all yields an empty optional.
std::optional<Trajectory> random_feasible_route(const Instance& inst,
                                                std::mt19937_64& rng,
                                                int interior) {
  std::vector<int> ids(inst.size() - 1);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i) + 1;
  std::shuffle(ids.begin(), ids.end(), rng);

  std::vector<int> visits = {0};
  double clock = 0.0;
  int cur = 0;
  for (int j : ids) {
    if (static_cast<int>(visits.size()) - 1 == interior) break;
    double start =
        std::max(clock + inst.travel(cur, j), inst.vertex(j).window_open);
    if (start > inst.vertex(j).window_close + kFeasibilityTol) continue;
    double back = start + inst.travel(j, 0);
    if (back > inst.budget() + kFeasibilityTol) continue;
    if (back > inst.vertex(0).window_close + kFeasibilityTol) continue;
    visits.push_back(j);
    clock = start;
    cur = j;
  }
  if (visits.size() < 2) return std::nullopt;
  visits.push_back(0);
  return Trajectory{visits};
}

}  // namespace

TEST_CASE("two customers, generous budget: both services saturate") {
  // route 0-1-2-0 with travel 1,1,2 and no meaningful window pressure
  Instance inst = chain(20.0, {{0, 0, 0, 0.0, 10.0, 1.0, 8.0},
                               {0, 0, 0, 0.0, 12.0, 0.5, 8.0}});
  StoResult res = optimize_service_times(inst, {{0, 1, 2, 0}});

  // worked by hand: d1 = d2 = 8, starts 0, 1, 10, 20
  CHECK(res.total_reward == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(res.schedule.services == std::vector<double>{0, 8, 8, 0});
  CHECK(res.schedule.starts == std::vector<double>{0, 1, 10, 20});
  CHECK(res.binding_info[1].bound == ServiceBound::max_service);
  CHECK(res.binding_info[2].bound == ServiceBound::max_service);
  CHECK(check_feasibility(inst, res.schedule).empty());
}

TEST_CASE("tight budget binds the lower-profit visit") {
  Instance inst = chain(15.0, {{0, 0, 0, 0.0, 10.0, 1.0, 8.0},
                               {0, 0, 0, 0.0, 12.0, 0.5, 8.0}});
  StoResult res = optimize_service_times(inst, {{0, 1, 2, 0}});

  // d1 keeps its 8; d2 only gets budget room 15 - 10 - 2 = 3
  CHECK(res.total_reward == doctest::Approx(9.5).epsilon(1e-12));
  CHECK(res.schedule.services == std::vector<double>{0, 8, 3, 0});
  CHECK(res.schedule.starts.back() == 15.0);  // exactly exhausts the budget
  CHECK(res.binding_info[1].bound == ServiceBound::max_service);
  CHECK(res.binding_info[2].bound == ServiceBound::downstream_window);
  CHECK(res.binding_info[2].window_position == 3);
}

TEST_CASE("profit order beats position order") {
  // the late visit is worth ten times more; granting the early one its
  // window-limited 2 units first would push the start at 2 to its close and
  // leave the budget room to a far less valuable allocation
  Instance inst = chain(10.5, {{0, 0, 0, 0.0, 10.0, 0.1, 6.0},
                               {0, 0, 0, 0.0, 4.0, 1.0, 6.0}});
  StoResult res = optimize_service_times(inst, {{0, 1, 2, 0}});

  // hand optimum: d2 = 6 saturates (budget room 10.5-2-2 = 6.5); d1 then
  // gets the leftover budget room 10.5 - 1 - (1 + 6 + 2) = 0.5.
  // position-order assignment would stop at 0.2 + 4.5 = 4.7.
  CHECK(res.total_reward == doctest::Approx(6.05).epsilon(1e-12));
  CHECK(res.schedule.services == std::vector<double>{0, 0.5, 6, 0});
  CHECK(res.schedule.starts.back() == 10.5);
  CHECK(res.binding_info[2].bound == ServiceBound::max_service);
  CHECK(res.binding_info[1].bound == ServiceBound::downstream_window);
  CHECK(res.binding_info[1].window_position == 3);

  // confirm with the discretized oracle that 6.05 is the route optimum
  auto dp = dp_services(inst, {{0, 1, 2, 0}}, 1e-3);
  REQUIRE(dp.has_value());
  CHECK(reward(inst, *dp) <= res.total_reward + 1e-9);
  CHECK(reward(inst, *dp) == doctest::Approx(6.05).epsilon(1e-6));
}

TEST_CASE("visit whose window permits no service at all") {
  // vertex 2 must be started at its close; nothing may be served at 1
  Instance inst = chain(20.0, {{0, 0, 0, 0.0, 10.0, 1.0, 8.0},
                               {0, 0, 0, 2.0, 2.0, 2.0, 8.0}});
  StoResult res = optimize_service_times(inst, {{0, 1, 2, 0}});
  // d1 is blocked by vertex 2's close (2 - 1 - 1 = 0); d2 then takes the
  // remaining budget room min(8, 20 - 2 - 1) = 8 (higher profit, runs first)
  CHECK(res.schedule.services[1] == 0.0);
  CHECK(res.schedule.services[2] == 8.0);
  CHECK(res.binding_info[1].bound == ServiceBound::zero);
  CHECK(res.total_reward == doctest::Approx(16.0));
}

TEST_CASE("empty tour and single visits") {
  Instance inst = chain(9.0, {{0, 0, 0, 0.0, 8.0, 1.0, 5.0},
                              {0, 0, 0, 0.0, 8.0, 0.5, 25.0}});
  SUBCASE("empty tour") {
    StoResult res = optimize_service_times(inst, {{0, 0}});
    CHECK(res.total_reward == 0.0);
    CHECK(res.schedule.starts == std::vector<double>{0, 0});
  }
  SUBCASE("single visit capped by its own max") {
    StoResult res = optimize_service_times(inst, {{0, 1, 0}});
    CHECK(res.schedule.services[1] == 5.0);  // budget room is 9-1-1=7
    CHECK(res.binding_info[1].bound == ServiceBound::max_service);
  }
  SUBCASE("single visit capped by the budget") {
    StoResult res = optimize_service_times(inst, {{0, 2, 0}});
    CHECK(res.schedule.services[1] == 5.0);  // 9 - 2 - 2 = 5 < 25
    CHECK(res.binding_info[1].bound == ServiceBound::downstream_window);
    CHECK(res.schedule.starts.back() == 9.0);
  }
}

TEST_CASE("single-customer routes match the closed form") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Instance inst = Instance::generate(5, 40.0, 150.0, seed);
    for (int c = 1; c < inst.size(); ++c) {
      const Vertex& v = inst.vertex(c);
      double s1 = std::max(inst.travel(0, c), v.window_open);
      if (s1 > v.window_close || s1 + inst.travel(c, 0) > inst.budget())
        continue;  // zero-infeasible, covered by the precondition test
      StoResult res = optimize_service_times(inst, {{0, c, 0}});
      double want =
          std::max(0.0, std::min(v.max_service,
                                 inst.budget() - s1 - inst.travel(c, 0)));
      CHECK(res.schedule.services[1] == doctest::Approx(want).epsilon(1e-12));
      CHECK(res.total_reward ==
            doctest::Approx(v.unit_profit * want).epsilon(1e-12));
    }
  }
}

TEST_CASE("zero-infeasible routes are rejected up front") {
  Instance inst = chain(6.0, {{0, 0, 0, 0.0, 10.0, 1.0, 8.0},
                              {0, 0, 0, 0.0, 12.0, 0.5, 8.0}});
  SUBCASE("budget too small for the loop") {
    // 0->1->2->0 takes 4 even with no service; shrink further
    Instance tight = chain(3.9, {{0, 0, 0, 0.0, 10.0, 1.0, 8.0},
                                 {0, 0, 0, 0.0, 12.0, 0.5, 8.0}});
    CHECK_THROWS_AS(optimize_service_times(tight, {{0, 1, 2, 0}}),
                    PreconditionError);
  }
  SUBCASE("window already closed on arrival") {
    Instance late = chain(20.0, {{0, 0, 0, 0.0, 0.5, 1.0, 8.0},
                                 {0, 0, 0, 0.0, 12.0, 0.5, 8.0}});
    CHECK_THROWS_AS(optimize_service_times(late, {{0, 1, 2, 0}}),
                    PreconditionError);
  }
  SUBCASE("bad trajectory is a parameter error, not a precondition") {
    CHECK_THROWS_AS(optimize_service_times(inst, {{0, 1, 1, 0}}),
                    ParameterError);
  }
}

TEST_CASE("waiting downstream does not scare the slack computation") {
  // vertex 2 opens late: at zero service the route waits there.  Service at
  // 1 can eat that waiting for free, so d1 should saturate its max even
  // though naive arrival bookkeeping would claim the close at 2 binds first.
  Instance inst = chain(30.0, {{0, 0, 0, 0.0, 25.0, 1.0, 5.0},
                               {0, 0, 0, 10.0, 14.0, 0.9, 4.0}});
  StoResult res = optimize_service_times(inst, {{0, 1, 2, 0}});
  CHECK(res.schedule.services[1] == 5.0);
  CHECK(res.schedule.services[2] == 4.0);
  // starts: 0, 1, max(1+5+1, 10) = 10, 10+4+2 = 16
  CHECK(res.schedule.starts == std::vector<double>{0, 1, 10, 16});
  CHECK(res.total_reward == doctest::Approx(5.0 + 3.6));
}

TEST_CASE("result is always feasible and deterministic on random routes") {
  std::mt19937_64 rng(99);
  int tested = 0;
  for (int round = 0; round < 150; ++round) {
    Instance inst = Instance::generate(8, 60.0, 250.0, 5000 + round);
    auto traj = random_feasible_route(inst, rng, 1 + round % 5);
    if (!traj) continue;
    StoResult a = optimize_service_times(inst, *traj);
    StoResult b = optimize_service_times(inst, *traj);
    CHECK(check_feasibility(inst, a.schedule).empty());
    CHECK(a.schedule.starts == b.schedule.starts);
    CHECK(a.schedule.services == b.schedule.services);
    CHECK(a.total_reward == b.total_reward);
    CHECK(a.total_reward == doctest::Approx(reward(inst, a.schedule)));
    REQUIRE(a.binding_info.size() == traj->visits.size());
    ++tested;
  }
  CHECK(tested > 100);
}

TEST_CASE("optimum is sandwiched by the discretized oracle") {
  // dp reward <= continuous optimum <= dp reward + discretization slop,
  // where the slop is one grid step per adjustable visit of profit mass
  std::mt19937_64 rng(4242);
  int tested = 0;
  for (int round = 0; round < 40; ++round) {
    Instance inst = Instance::generate(7, 8.0, 120.0, 7000 + round);
    auto traj = random_feasible_route(inst, rng, 1 + round % 4);
    if (!traj) continue;
    StoResult sto = optimize_service_times(inst, *traj);
    const double res = 1e-3;
    auto dp = dp_services(inst, *traj, res);
    REQUIRE(dp.has_value());
    double dp_reward = reward(inst, *dp);
    double slop = 0.0;
    for (std::size_t k = 1; k + 1 < traj->visits.size(); ++k)
      slop += inst.vertex(traj->visits[k]).unit_profit * res;
    // the grid can round every service down by at most res, and rounding
    // starts up can steal at most one more step per visit
    slop *= 2.0 * static_cast<double>(traj->visits.size());
    CHECK(sto.total_reward >= dp_reward - 1e-9);
    CHECK(sto.total_reward <= dp_reward + slop + 1e-9);
    ++tested;
  }
  CHECK(tested > 25);
}

TEST_CASE("random ascent directions cannot improve the optimizer's answer") {
  std::mt19937_64 rng(31);
  int tested = 0;
  for (int round = 0; round < 40; ++round) {
    Instance inst = Instance::generate(8, 30.0, 200.0, 11000 + round);
    auto traj = random_feasible_route(inst, rng, 1 + round % 5);
    if (!traj) continue;
    StoResult res = optimize_service_times(inst, *traj);
    CHECK(verify_no_improvement(inst, res, 2000, 77 + round));
    ++tested;
  }
  CHECK(tested > 25);
}

TEST_CASE("an unconverged schedule is caught by the improvement search") {
  std::mt19937_64 rng(13);
  int caught = 0, positive = 0;
  for (int round = 0; round < 30; ++round) {
    Instance inst = Instance::generate(8, 60.0, 300.0, 17000 + round);
    auto traj = random_feasible_route(inst, rng, 2 + round % 4);
    if (!traj) continue;
    StoResult res = optimize_service_times(inst, *traj);
    if (res.total_reward < 1e-6) continue;
    ++positive;
    // halve the services: still feasible, no longer optimal
    StoResult crippled = res;
    for (double& d : crippled.schedule.services) d *= 0.5;
    crippled.schedule.starts =
        propagate_starts(inst, *traj, crippled.schedule.services);
    crippled.total_reward = reward(inst, crippled.schedule);
    REQUIRE(check_feasibility(inst, crippled.schedule).empty());
    if (!verify_no_improvement(inst, crippled, 2000, 978 + round)) ++caught;
  }
  CHECK(positive > 10);
  CHECK(caught == positive);
}

TEST_CASE("improvement search parameter checks") {
  Instance inst = chain(20.0, {{0, 0, 0, 0.0, 10.0, 1.0, 8.0}});
  StoResult res = optimize_service_times(inst, {{0, 1, 0}});
  CHECK_THROWS_AS(verify_no_improvement(inst, res, 0, 1), ParameterError);
  // nothing adjustable on the empty tour: trivially true
  StoResult empty = optimize_service_times(inst, {{0, 0}});
  CHECK(verify_no_improvement(inst, empty, 10, 1));
}
