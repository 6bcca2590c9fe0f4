#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "optwvp/solution.hpp"
#include "optwvp/sto.hpp"

namespace optwvp {

// Per-candidate features, all finite, normalized either by the budget or by
// the max over the currently admissible candidates:
//   [0] travel time from the current vertex, / budget
//   [1] unit profit, / max unit profit over customers (0 if that max is 0)
//   [2] max_service, / budget
//   [3] wait before the window opens if leaving now, / budget
//   [4] window-close slack after the earliest possible start, / budget
//   [5] budget remaining after visiting (zero service) and returning, / budget
//   [6] profit-rate proxy p * max_service / max(travel, floor), / max of the
//       same quantity over the admissible candidates (0 if that max is <= 0)
// Every component is reported relative to the depot candidate (= stopping
// now), so the depot row is identically zero and a customer's vector reads
// as its advantage over ending the route here.
inline constexpr int kFeatureCount = 7;
using FeatureVec = std::array<double, kFeatureCount>;

// Linear stand-in for a learned encoder: a scoring head over route
// candidates and a logistic head for the service fraction.  Zero-initialized
// weights give the uniform policy.
struct PolicyParams {
  std::array<double, kFeatureCount> route_weights{};
  // last entry is the bias
  std::array<double, kFeatureCount + 1> service_weights{};
  // sharpness of the route softmax; scores are temperature * tanh(w . f)
  double temperature = 10.0;

  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  std::string save_string() const;
  static PolicyParams load(std::istream& in);
  static PolicyParams load_file(const std::string& path);
  static PolicyParams load_string(const std::string& text);

  bool operator==(const PolicyParams&) const = default;
};

// Construction state: where we stand, when we can leave, whom we have seen.
struct PartialState {
  int current = 0;
  double clock = 0.0;  // ready-to-leave time at `current`
  std::vector<char> visited;  // size n; depot entry ignored
};

// mask[j] == 1 iff appending j (with zero service) keeps the tour feasible:
// the earliest start at j makes its window, and returning to the depot
// afterwards stays within budget.  Visited customers are masked; the depot
// is always admissible and acts as the terminal action.
std::vector<char> feasibility_mask(const Instance& inst,
                                   const PartialState& state);

// Features for one candidate.  Self-contained: the rate-proxy normalizer is
// the max over the candidates admissible in `state`.
FeatureVec candidate_features(const Instance& inst, const PartialState& state,
                              int candidate);

// Numerically stable softmax; sums to 1 up to rounding and does not change
// when a constant is added to every score.  This is the route-choice
// distribution given the per-candidate scores.
std::vector<double> softmax_probabilities(std::span<const double> scores);

// Everything needed to re-evaluate both losses at different parameters
// without touching the instance again.
struct RolloutStep {
  std::vector<int> candidates;       // admissible ids, ascending; [0] is the depot
  std::vector<FeatureVec> features;  // aligned with candidates
  int chosen = 0;                    // index into candidates
  double max_service = 0.0;          // of the chosen vertex
  double unit_profit = 0.0;
  double entering_travel = 0.0;      // travel used to reach the chosen vertex
  double service_cap = 0.0;          // budget room the service clip enforced
};

struct Rollout {
  Schedule predicted;      // stage-1 route with committed services d-hat
  Schedule sto_schedule;   // same route, services re-optimized
  double reward = 0.0;     // reward of sto_schedule
  double log_prob = 0.0;   // route choices only
  double ptar_sto = 0.0;   // profit-per-travel ratio of sto_schedule
  std::vector<RolloutStep> steps;
};

// Stochastic decode: sample each route choice from the masked softmax,
// commit service min(logistic(theta . [f,1]) * max_service, budget room),
// stop when the depot is drawn, then re-optimize services on the fixed
// route.  Deterministic given the rng state.
Rollout sample_rollout(const Instance& inst, const PolicyParams& params,
                       std::mt19937_64& rng);

// Same decode with argmax instead of sampling (first max wins ties).
Rollout greedy_rollout(const Instance& inst, const PolicyParams& params);

struct LossGrad {
  double value = 0.0;
  std::vector<double> grad;
};

// Policy-gradient surrogate with a shared batch baseline:
//   loss = -(1/M) sum_i (R_i - mean R) * log pi(route_i)
// evaluated at `params` (which may differ from the parameters the rollouts
// were sampled with; rewards and chosen actions are held fixed).  Gradient
// is over route_weights.  Needs at least two rollouts.
LossGrad reinforce_loss(const PolicyParams& params,
                        std::span<const Rollout> rollouts);

// Repulsive allocation loss, batch mean of -(ptar(d-hat) - ptar(d*))^2 with
// d-hat recomputed from `params`; the optimized side is a constant.
// Gradient is over service_weights; clipped services contribute zero.
LossGrad ptar_loss(const PolicyParams& params,
                   std::span<const Rollout> rollouts);

struct TrainConfig {
  int n = 20;
  double window_width = 100.0;
  double budget = 300.0;
  int epochs = 200;
  int batch = 64;
  double beta1 = 1000.0;  // weight of the policy-gradient term
  double beta2 = 1000.0;  // weight of the repulsive term
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  int val_size = 16;
  // Divergence guard: abort when held-out reward sits below
  // collapse_fraction * epoch-0 reward for `patience` consecutive epochs.
  double collapse_fraction = 0.10;
  int patience = 20;
};

struct TrainResult {
  PolicyParams params;              // best held-out checkpoint, see train()
  std::vector<double> val_curve;    // size epochs+1, entry 0 = untrained
  std::vector<double> train_curve;  // mean batch reward per epoch
  int best_epoch = 0;               // val_curve index params were taken from
};

// True when the tail of the curve shows a sustained collapse relative to
// its first entry; exposed so the guard itself is testable.
bool training_collapsed(std::span<const double> val_curve,
                        double collapse_fraction, int patience);

// Recommended starting point for train(): route and service weights uniform
// in [-0.1, 0.1] (deterministic per seed), service bias +12 so the policy
// begins in the commit-everything regime the two-stage heuristics operate
// in, temperature 1.  The deep service saturation slows the repulsive
// term's drift, which is what buys the route head its productive epochs;
// zero weights are a poor start because every score ties and greedy decode
// stops at the depot immediately.
PolicyParams default_training_init(std::uint64_t seed);

// Plain gradient descent on beta1 * reinforce + beta2 * ptar, one freshly
// generated instance and one sampled batch per epoch, fully deterministic
// per seed.  Held-out instances are fixed up front and scored by greedy
// decode each epoch.  All epochs run and the full curves are recorded, but
// the returned params are the checkpoint with the best held-out score
// (entry best_epoch of val_curve): the repulsive term deliberately keeps
// perturbing the service head, so the last epoch is rarely the best one.
// Throws DivergenceError on sustained collapse.
TrainResult train(const TrainConfig& cfg, const PolicyParams& init);

}  // namespace optwvp
