#include "optwvp/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "optwvp/errors.hpp"
#include "optwvp/rng.hpp"
#include "text_util.hpp"

namespace optwvp {

using detail::g17;

// ---------------------------------------------------------------------------
// Parameter serialization.
//
//   weights v1
//   temperature <float>
//   route <7 floats>
//   service <8 floats>

void PolicyParams::save(std::ostream& out) const {
  out << "weights v1\n";
  out << "temperature " << g17(temperature) << "\n";
  out << "route";
  for (double w : route_weights) out << " " << g17(w);
  out << "\nservice";
  for (double w : service_weights) out << " " << g17(w);
  out << "\n";
}

void PolicyParams::save_file(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  save(f);
  if (!f) throw IoError("write failed for " + path);
}

std::string PolicyParams::save_string() const {
  std::ostringstream out;
  save(out);
  return out.str();
}

PolicyParams PolicyParams::load(std::istream& in) {
  std::string line;
  int lineno = 0;
  auto next = [&]() -> std::vector<std::string> {
    do {
      if (!std::getline(in, line)) throw ParseError(lineno, "truncated weights");
      ++lineno;
    } while (detail::trim(line).empty());
    return detail::split_ws(line);
  };

  auto head = next();
  if (head.size() != 2 || head[0] != "weights" || head[1] != "v1")
    throw ParseError(lineno, "expected 'weights v1' header");

  PolicyParams p;
  auto temp = next();
  if (temp.size() != 2 || temp[0] != "temperature")
    throw ParseError(lineno, "expected 'temperature <value>'");
  auto tv = detail::parse_double(temp[1]);
  if (!tv) throw ParseError(lineno, "bad temperature: " + temp[1]);
  p.temperature = *tv;

  auto read_row = [&](const char* name, double* dst, std::size_t count) {
    auto toks = next();
    if (toks.empty() || toks[0] != name)
      throw ParseError(lineno, std::string("expected '") + name + "' row");
    if (toks.size() != count + 1)
      throw ParseError(lineno, std::string(name) + " row needs " +
                                   std::to_string(count) + " values, got " +
                                   std::to_string(toks.size() - 1));
    for (std::size_t i = 0; i < count; ++i) {
      auto v = detail::parse_double(toks[1 + i]);
      if (!v) throw ParseError(lineno, "bad number: " + toks[1 + i]);
      dst[i] = *v;
    }
  };
  read_row("route", p.route_weights.data(), p.route_weights.size());
  read_row("service", p.service_weights.data(), p.service_weights.size());
  return p;
}

PolicyParams PolicyParams::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  return load(f);
}

PolicyParams PolicyParams::load_string(const std::string& text) {
  std::istringstream in(text);
  return load(in);
}

// ---------------------------------------------------------------------------
// Mask and features.

std::vector<char> feasibility_mask(const Instance& inst,
                                   const PartialState& state) {
  const int n = inst.size();
  std::vector<char> mask(n, 0);
  mask[0] = 1;  // returning home is always the admissible terminal action
  for (int j = 1; j < n; ++j) {
    if (state.visited[j]) continue;
    const Vertex& vj = inst.vertex(j);
    double arrival = state.clock + inst.travel(state.current, j);
    if (arrival > vj.window_close + kFeasibilityTol) continue;
    double start = std::max(arrival, vj.window_open);
    if (start + inst.travel(j, 0) > inst.budget() + kFeasibilityTol) continue;
    mask[j] = 1;
  }
  return mask;
}

namespace {

double rate_proxy(const Instance& inst, int from, int j) {
  const Vertex& vj = inst.vertex(j);
  return vj.unit_profit * vj.max_service /
         std::max(inst.travel(from, j), kTravelFloor);
}

}  // namespace

namespace {

// The seven raw components for one candidate.  Kept separate so the public
// feature vector can be expressed relative to the depot row below.
FeatureVec raw_features(const Instance& inst, const PartialState& state,
                        int candidate, double max_p, double max_rate) {
  const double b = inst.budget();
  const Vertex& vj = inst.vertex(candidate);
  double travel = inst.travel(state.current, candidate);
  double arrival = state.clock + travel;
  double start = std::max(arrival, vj.window_open);

  FeatureVec f;
  f[0] = travel / b;
  f[1] = max_p > 0.0 ? vj.unit_profit / max_p : 0.0;
  f[2] = vj.max_service / b;
  f[3] = std::max(0.0, vj.window_open - arrival) / b;
  f[4] = (vj.window_close - start) / b;
  f[5] = (b - (start + inst.travel(candidate, 0))) / b;
  f[6] = max_rate > 0.0 ? rate_proxy(inst, state.current, candidate) / max_rate
                        : 0.0;
  return f;
}

}  // namespace

FeatureVec candidate_features(const Instance& inst, const PartialState& state,
                              int candidate) {
  double max_p = 0.0;
  for (int j = 1; j < inst.size(); ++j)
    max_p = std::max(max_p, inst.vertex(j).unit_profit);

  std::vector<char> mask = feasibility_mask(inst, state);
  double max_rate = 0.0;
  for (int j = 0; j < inst.size(); ++j)
    if (mask[j]) max_rate = std::max(max_rate, rate_proxy(inst, state.current, j));

  // Every component is reported relative to the depot candidate (= stopping
  // now), so the depot row is identically zero and a customer's score reads
  // as its advantage over ending the route.  Without the centering, the
  // "don't stop yet" learning signal and the customer ranking fight over the
  // same weights, which wrecks greedy decoding long before the ranking
  // converges.
  FeatureVec f = raw_features(inst, state, candidate, max_p, max_rate);
  if (candidate != 0) {
    FeatureVec base = raw_features(inst, state, 0, max_p, max_rate);
    for (int k = 0; k < kFeatureCount; ++k) f[k] -= base[k];
  } else {
    f.fill(0.0);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Decoding.

namespace {

double dot_route(const PolicyParams& p, const FeatureVec& f) {
  double s = 0.0;
  for (int k = 0; k < kFeatureCount; ++k) s += p.route_weights[k] * f[k];
  return s;
}

double dot_service(const PolicyParams& p, const FeatureVec& f) {
  double s = p.service_weights[kFeatureCount];  // bias
  for (int k = 0; k < kFeatureCount; ++k) s += p.service_weights[k] * f[k];
  return s;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log softmax normalizer, stable against large scores
double logsumexp(std::span<const double> z) {
  double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace

std::vector<double> softmax_probabilities(std::span<const double> scores) {
  if (scores.empty()) throw ParameterError("softmax over an empty score set");
  const double lse = logsumexp(scores);
  std::vector<double> p(scores.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(scores[i] - lse);
  return p;
}

namespace {

Rollout decode(const Instance& inst, const PolicyParams& params,
               std::mt19937_64* rng) {
  const int n = inst.size();
  Rollout out;
  out.predicted.trajectory.visits = {0};
  out.predicted.starts = {0.0};
  out.predicted.services = {0.0};

  PartialState state;
  state.current = 0;
  state.clock = 0.0;
  state.visited.assign(n, 0);

  for (;;) {
    std::vector<char> mask = feasibility_mask(inst, state);
    RolloutStep step;
    for (int j = 0; j < n; ++j)
      if (mask[j]) {
        step.candidates.push_back(j);
        step.features.push_back(candidate_features(inst, state, j));
      }

    std::vector<double> z(step.candidates.size());
    for (std::size_t i = 0; i < z.size(); ++i)
      z[i] = params.temperature * std::tanh(dot_route(params, step.features[i]));
    const double lse = logsumexp(z);

    std::size_t chosen = 0;
    if (rng) {
      double u = uniform01(*rng);
      std::vector<double> prob = softmax_probabilities(z);
      double acc = 0.0;
      chosen = z.size() - 1;  // guard against float underrun of the CDF
      for (std::size_t i = 0; i < z.size(); ++i) {
        acc += prob[i];
        if (u < acc) {
          chosen = i;
          break;
        }
      }
    } else {
      for (std::size_t i = 1; i < z.size(); ++i)
        if (z[i] > z[chosen]) chosen = i;
    }
    out.log_prob += z[chosen] - lse;
    step.chosen = static_cast<int>(chosen);

    const int j = step.candidates[chosen];
    const double travel = inst.travel(state.current, j);
    step.entering_travel = travel;

    if (j == 0) {
      out.steps.push_back(std::move(step));
      double back = state.clock + travel;
      out.predicted.trajectory.visits.push_back(0);
      out.predicted.starts.push_back(
          std::max(back, inst.vertex(0).window_open));
      out.predicted.services.push_back(0.0);
      break;
    }

    const Vertex& vj = inst.vertex(j);
    double start = std::max(state.clock + travel, vj.window_open);
    double cap = inst.budget() - start - inst.travel(j, 0);
    cap = std::max(cap, 0.0);
    double delta = logistic(dot_service(params, step.features[chosen]));
    double service = std::min(delta * vj.max_service, cap);

    step.max_service = vj.max_service;
    step.unit_profit = vj.unit_profit;
    step.service_cap = cap;
    out.steps.push_back(std::move(step));

    out.predicted.trajectory.visits.push_back(j);
    out.predicted.starts.push_back(start);
    out.predicted.services.push_back(service);
    state.visited[j] = 1;
    state.current = j;
    state.clock = start + service;
  }

  StoResult sto = optimize_service_times(inst, out.predicted.trajectory);
  out.sto_schedule = std::move(sto.schedule);
  out.reward = sto.total_reward;
  out.ptar_sto = ptar(inst, out.sto_schedule);
  return out;
}

}  // namespace

Rollout sample_rollout(const Instance& inst, const PolicyParams& params,
                       std::mt19937_64& rng) {
  return decode(inst, params, &rng);
}

Rollout greedy_rollout(const Instance& inst, const PolicyParams& params) {
  return decode(inst, params, nullptr);
}

// ---------------------------------------------------------------------------
// Losses.  Both re-evaluate the policy under `params` while holding the
// sampled actions, rewards and features fixed, which is exactly what a
// finite-difference check needs.

LossGrad reinforce_loss(const PolicyParams& params,
                        std::span<const Rollout> rollouts) {
  const std::size_t M = rollouts.size();
  if (M < 2)
    throw ParameterError("the shared baseline needs at least two rollouts");

  double baseline = 0.0;
  for (const Rollout& r : rollouts) baseline += r.reward;
  baseline /= static_cast<double>(M);

  LossGrad out;
  out.grad.assign(kFeatureCount, 0.0);
  for (const Rollout& r : rollouts) {
    const double adv = r.reward - baseline;
    double logp = 0.0;
    std::array<double, kFeatureCount> glogp{};
    for (const RolloutStep& step : r.steps) {
      std::vector<double> z(step.candidates.size());
      std::vector<double> gate(step.candidates.size());  // d z / d (w . f)
      for (std::size_t i = 0; i < z.size(); ++i) {
        double u = std::tanh(dot_route(params, step.features[i]));
        z[i] = params.temperature * u;
        gate[i] = params.temperature * (1.0 - u * u);
      }
      const double lse = logsumexp(z);
      logp += z[step.chosen] - lse;
      for (std::size_t i = 0; i < z.size(); ++i) {
        double w = (static_cast<int>(i) == step.chosen ? 1.0 : 0.0) -
                   std::exp(z[i] - lse);
        for (int k = 0; k < kFeatureCount; ++k)
          glogp[k] += w * gate[i] * step.features[i][k];
      }
    }
    out.value += -adv * logp;
    for (int k = 0; k < kFeatureCount; ++k) out.grad[k] += -adv * glogp[k];
  }
  out.value /= static_cast<double>(M);
  for (double& g : out.grad) g /= static_cast<double>(M);
  return out;
}

LossGrad ptar_loss(const PolicyParams& params,
                   std::span<const Rollout> rollouts) {
  if (rollouts.empty()) throw ParameterError("empty rollout batch");

  LossGrad out;
  out.grad.assign(kFeatureCount + 1, 0.0);
  for (const Rollout& r : rollouts) {
    double pt_hat = 0.0;
    std::array<double, kFeatureCount + 1> gpt{};  // d pt_hat / d theta
    for (const RolloutStep& step : r.steps) {
      if (step.candidates[step.chosen] == 0) continue;  // depot, no service
      const FeatureVec& f = step.features[step.chosen];
      double delta = logistic(dot_service(params, f));
      double raw = delta * step.max_service;
      double d = std::min(raw, step.service_cap);
      double scale = step.unit_profit /
                     std::max(step.entering_travel, kTravelFloor);
      pt_hat += scale * d;
      if (raw < step.service_cap) {  // clip inactive: gradient flows
        double dd = step.max_service * delta * (1.0 - delta);
        for (int k = 0; k < kFeatureCount; ++k)
          gpt[k] += scale * dd * f[k];
        gpt[kFeatureCount] += scale * dd;
      }
    }
    const double diff = pt_hat - r.ptar_sto;
    out.value += -diff * diff;
    for (int k = 0; k <= kFeatureCount; ++k)
      out.grad[k] += -2.0 * diff * gpt[k];
  }
  const double M = static_cast<double>(rollouts.size());
  out.value /= M;
  for (double& g : out.grad) g /= M;
  return out;
}

// ---------------------------------------------------------------------------
// Training.

bool training_collapsed(std::span<const double> val_curve,
                        double collapse_fraction, int patience) {
  if (val_curve.size() < static_cast<std::size_t>(patience) + 1) return false;
  const double floor = collapse_fraction * val_curve[0];
  for (std::size_t i = val_curve.size() - patience; i < val_curve.size(); ++i)
    if (val_curve[i] >= floor) return false;
  return true;
}

PolicyParams default_training_init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PolicyParams p;
  p.temperature = 1.0;
  auto u = [&] { return 0.1 * (2.0 * uniform01(rng) - 1.0); };
  for (double& w : p.route_weights) w = u();
  for (double& w : p.service_weights) w = u();
  p.service_weights[kFeatureCount] = 12.0;  // start at full commitments
  return p;
}

TrainResult train(const TrainConfig& cfg, const PolicyParams& init) {
  if (cfg.epochs < 0) throw ParameterError("epochs must be >= 0");
  if (cfg.batch < 2) throw ParameterError("batch must be >= 2");
  if (cfg.beta1 < 0.0 || cfg.beta2 < 0.0)
    throw ParameterError("loss weights must be non-negative");
  if (!(cfg.learning_rate > 0.0))
    throw ParameterError("learning rate must be positive");
  if (cfg.val_size < 1) throw ParameterError("validation set must be non-empty");

  std::mt19937_64 master(cfg.seed);

  std::vector<Instance> val;
  val.reserve(cfg.val_size);
  for (int i = 0; i < cfg.val_size; ++i)
    val.push_back(
        Instance::generate(cfg.n, cfg.window_width, cfg.budget, master()));

  TrainResult res;
  res.params = init;
  auto validate = [&] {
    double sum = 0.0;
    for (const Instance& inst : val)
      sum += greedy_rollout(inst, res.params).reward;
    return sum / static_cast<double>(val.size());
  };
  res.val_curve.push_back(validate());
  PolicyParams best = res.params;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const std::uint64_t inst_seed = master();
    const std::uint64_t batch_seed = master();
    Instance inst =
        Instance::generate(cfg.n, cfg.window_width, cfg.budget, inst_seed);

    std::mt19937_64 rng(batch_seed);
    std::vector<Rollout> batch;
    batch.reserve(cfg.batch);
    double mean_reward = 0.0;
    for (int i = 0; i < cfg.batch; ++i) {
      batch.push_back(sample_rollout(inst, res.params, rng));
      mean_reward += batch.back().reward;
    }
    res.train_curve.push_back(mean_reward / cfg.batch);

    LossGrad route = reinforce_loss(res.params, batch);
    LossGrad service = ptar_loss(res.params, batch);
    for (int k = 0; k < kFeatureCount; ++k)
      res.params.route_weights[k] -=
          cfg.learning_rate * cfg.beta1 * route.grad[k];
    for (int k = 0; k <= kFeatureCount; ++k)
      res.params.service_weights[k] -=
          cfg.learning_rate * cfg.beta2 * service.grad[k];

    res.val_curve.push_back(validate());
    if (res.val_curve.back() > res.val_curve[res.best_epoch]) {
      res.best_epoch = epoch;
      best = res.params;
    }
    if (training_collapsed(res.val_curve, cfg.collapse_fraction, cfg.patience))
      throw DivergenceError(
          "held-out reward collapsed below " +
          g17(cfg.collapse_fraction * res.val_curve[0]) + " for " +
          std::to_string(cfg.patience) + " consecutive epochs (epoch " +
          std::to_string(epoch) + ", last value " + g17(res.val_curve.back()) +
          "); lower the learning rate or the loss weights");
  }
  res.params = best;
  return res;
}

}  // namespace optwvp
