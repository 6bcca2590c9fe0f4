#include "optwvp.h"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "optwvp/bench.hpp"
#include "optwvp/errors.hpp"
#include "optwvp/heuristics.hpp"
#include "optwvp/instance.hpp"
#include "optwvp/oracles.hpp"
#include "optwvp/policy.hpp"
#include "optwvp/solution.hpp"
#include "optwvp/sto.hpp"
#include "text_util.hpp"

struct optwvp_instance {
  optwvp::Instance impl;
};
struct optwvp_schedule {
  optwvp::Schedule impl;
};
struct optwvp_policy {
  optwvp::PolicyParams impl;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Translate exceptions into status codes.  Bad arguments and impossible
// requests are config errors; broken files, I/O and internal failures are
// runtime errors.
template <typename F>
int guarded(F&& body) noexcept {
  try {
    body();
    return OPTWVP_OK;
  } catch (const optwvp::ConfigError& e) {
    set_error(e.what());
    return OPTWVP_ERR_CONFIG;
  } catch (const optwvp::ParameterError& e) {
    set_error(e.what());
    return OPTWVP_ERR_CONFIG;
  } catch (const optwvp::CapacityError& e) {
    set_error(e.what());
    return OPTWVP_ERR_CONFIG;
  } catch (const std::exception& e) {
    set_error(e.what());
    return OPTWVP_ERR_RUNTIME;
  } catch (...) {
    set_error("unknown failure");
    return OPTWVP_ERR_RUNTIME;
  }
}

int require(bool ok, const char* what) {
  if (ok) return OPTWVP_OK;
  set_error(std::string("null argument: ") + what);
  return OPTWVP_ERR_CONFIG;
}

optwvp::SearchConfig search_config(const optwvp_solve_options* o) {
  optwvp::SearchConfig cfg;
  if (o) {
    if (o->time_limit_s > 0) cfg.time_limit_s = o->time_limit_s;
    if (o->ils_max_iterations > 0) cfg.max_iterations = o->ils_max_iterations;
    if (o->ils_no_improve_limit > 0)
      cfg.no_improve_limit = o->ils_no_improve_limit;
    if (o->ils_perturbation > 0)
      cfg.perturbation_strength = o->ils_perturbation;
    cfg.seed = o->seed;
  }
  return cfg;
}

}  // namespace

extern "C" {

const char* optwvp_version(void) { return "0.1.0"; }

const char* optwvp_last_error(void) { return g_last_error.c_str(); }

void optwvp_string_free(char* s) { std::free(s); }

/* ---- instances ---------------------------------------------------------- */

int optwvp_instance_generate(int n, double window_width, double budget,
                             uint64_t seed, optwvp_instance** out) {
  if (int rc = require(out, "out")) return rc;
  return guarded([&] {
    *out = new optwvp_instance{
        optwvp::Instance::generate(n, window_width, budget, seed)};
  });
}

int optwvp_instance_load_file(const char* path, optwvp_instance** out) {
  if (int rc = require(path && out, "path/out")) return rc;
  return guarded(
      [&] { *out = new optwvp_instance{optwvp::Instance::load_file(path)}; });
}

int optwvp_instance_load_string(const char* text, optwvp_instance** out) {
  if (int rc = require(text && out, "text/out")) return rc;
  return guarded(
      [&] { *out = new optwvp_instance{optwvp::Instance::load_string(text)}; });
}

int optwvp_instance_read(const char* path, const char* format,
                         optwvp_instance** out) {
  if (int rc = require(path && format && out, "path/format/out")) return rc;
  return guarded([&] {
    std::string f = format;
    if (f == "native")
      *out = new optwvp_instance{optwvp::Instance::load_file(path)};
    else if (f == "solomon")
      *out = new optwvp_instance{optwvp::Instance::parse_solomon_file(path)};
    else
      throw optwvp::ConfigError("unknown instance format '" + f +
                                "', want native or solomon");
  });
}

int optwvp_instance_save_file(const optwvp_instance* inst, const char* path) {
  if (int rc = require(inst && path, "inst/path")) return rc;
  return guarded([&] { inst->impl.save_file(path); });
}

int optwvp_instance_save_string(const optwvp_instance* inst, char** out_text) {
  if (int rc = require(inst && out_text, "inst/out_text")) return rc;
  return guarded([&] { *out_text = dup_string(inst->impl.save_string()); });
}

int optwvp_instance_parse_solomon_file(const char* path,
                                       optwvp_instance** out) {
  if (int rc = require(path && out, "path/out")) return rc;
  return guarded([&] {
    *out = new optwvp_instance{optwvp::Instance::parse_solomon_file(path)};
  });
}

int optwvp_instance_size(const optwvp_instance* inst, int* out_n) {
  if (int rc = require(inst && out_n, "inst/out_n")) return rc;
  *out_n = inst->impl.size();
  return OPTWVP_OK;
}

int optwvp_instance_budget(const optwvp_instance* inst, double* out_budget) {
  if (int rc = require(inst && out_budget, "inst/out_budget")) return rc;
  *out_budget = inst->impl.budget();
  return OPTWVP_OK;
}

int optwvp_instance_metadata(const optwvp_instance* inst, char** out_text) {
  if (int rc = require(inst && out_text, "inst/out_text")) return rc;
  return guarded([&] { *out_text = dup_string(inst->impl.metadata()); });
}

int optwvp_instance_validate(const optwvp_instance* inst, char** out_report,
                             int* out_count) {
  if (int rc = require(inst && out_report && out_count, "inst/out")) return rc;
  return guarded([&] {
    auto bad = inst->impl.validate();
    std::ostringstream report;
    for (const auto& b : bad) report << b << "\n";
    *out_report = dup_string(report.str());
    *out_count = static_cast<int>(bad.size());
  });
}

void optwvp_instance_free(optwvp_instance* inst) { delete inst; }

/* ---- schedules ---------------------------------------------------------- */

int optwvp_schedule_reward(const optwvp_instance* inst,
                           const optwvp_schedule* sched, double* out) {
  if (int rc = require(inst && sched && out, "inst/sched/out")) return rc;
  return guarded([&] { *out = optwvp::reward(inst->impl, sched->impl); });
}

int optwvp_schedule_ptar(const optwvp_instance* inst,
                         const optwvp_schedule* sched, double* out) {
  if (int rc = require(inst && sched && out, "inst/sched/out")) return rc;
  return guarded([&] { *out = optwvp::ptar(inst->impl, sched->impl); });
}

int optwvp_schedule_length(const optwvp_schedule* sched, int* out) {
  if (int rc = require(sched && out, "sched/out")) return rc;
  *out = sched->impl.trajectory.length();
  return OPTWVP_OK;
}

int optwvp_schedule_check(const optwvp_instance* inst,
                          const optwvp_schedule* sched, char** out_report,
                          int* out_count) {
  if (int rc = require(inst && sched && out_report && out_count, "args"))
    return rc;
  return guarded([&] {
    auto bad = optwvp::check_feasibility(inst->impl, sched->impl);
    std::ostringstream report;
    for (const auto& b : bad) report << b << "\n";
    *out_report = dup_string(report.str());
    *out_count = static_cast<int>(bad.size());
  });
}

int optwvp_schedule_save_string(const optwvp_schedule* sched,
                                char** out_text) {
  if (int rc = require(sched && out_text, "sched/out_text")) return rc;
  return guarded(
      [&] { *out_text = dup_string(optwvp::schedule_to_string(sched->impl)); });
}

int optwvp_schedule_load_string(const char* text, optwvp_schedule** out) {
  if (int rc = require(text && out, "text/out")) return rc;
  return guarded([&] {
    *out = new optwvp_schedule{optwvp::parse_schedule_string(text)};
  });
}

void optwvp_schedule_free(optwvp_schedule* sched) { delete sched; }

/* ---- solving ------------------------------------------------------------ */

void optwvp_solve_options_init(optwvp_solve_options* opts) {
  if (!opts) return;
  opts->time_limit_s = 0;
  opts->seed = 0;
  opts->ils_max_iterations = 0;
  opts->ils_no_improve_limit = 0;
  opts->ils_perturbation = 0;
  opts->exact_max_visits = 0;
  opts->policy = nullptr;
}

int optwvp_solve(const optwvp_instance* inst, const char* method,
                 const optwvp_solve_options* opts, optwvp_schedule** out,
                 double* out_runtime_ms) {
  if (int rc = require(inst && method && out, "inst/method/out")) return rc;
  return guarded([&] {
    const std::string m = method;
    const optwvp::Instance& problem = inst->impl;
    optwvp::PolicyParams policy =
        (opts && opts->policy) ? opts->policy->impl : optwvp::PolicyParams{};

    auto t0 = std::chrono::steady_clock::now();
    optwvp::Schedule result;
    if (m == "greedy_prs") {
      result = optwvp::greedy_prs(problem).schedule;
    } else if (m == "ils") {
      result = optwvp::ils_solve(problem, search_config(opts)).schedule;
    } else if (m == "policy") {
      result = optwvp::greedy_rollout(problem, policy).predicted;
    } else if (m == "policy_sto") {
      result = optwvp::greedy_rollout(problem, policy).sto_schedule;
    } else if (m == "exact") {
      int cap = problem.size() - 1;
      if (opts && opts->exact_max_visits > 0)
        cap = std::min(cap, opts->exact_max_visits);
      double limit = opts && opts->time_limit_s > 0 ? opts->time_limit_s : 0.0;
      result = optwvp::exact_solve(problem, cap, limit).best_schedule;
    } else if (m.rfind("fixed_ratio:", 0) == 0) {
      auto r = optwvp::detail::parse_double(m.substr(12));
      if (!r)
        throw optwvp::ConfigError("bad fixed_ratio value in '" + m + "'");
      result = optwvp::fixed_ratio_schedule(problem, *r);
    } else {
      throw optwvp::ConfigError(
          "unknown method '" + m +
          "'; known: greedy_prs, ils, policy, policy_sto, exact, "
          "fixed_ratio:<r>");
    }
    if (out_runtime_ms)
      *out_runtime_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    *out = new optwvp_schedule{std::move(result)};
  });
}

int optwvp_optimize_service_times(const optwvp_instance* inst,
                                  const int* route, int route_len,
                                  optwvp_schedule** out, double* out_reward) {
  if (int rc = require(inst && route && out, "inst/route/out")) return rc;
  return guarded([&] {
    optwvp::Trajectory traj;
    traj.visits.assign(route, route + route_len);
    optwvp::StoResult r = optwvp::optimize_service_times(inst->impl, traj);
    if (out_reward) *out_reward = r.total_reward;
    *out = new optwvp_schedule{std::move(r.schedule)};
  });
}

int optwvp_exact_solve(const optwvp_instance* inst, int max_visits,
                       double time_limit_s, optwvp_schedule** out,
                       double* out_reward, int* out_complete) {
  if (int rc = require(inst && out, "inst/out")) return rc;
  return guarded([&] {
    int cap = max_visits > 0 ? max_visits : inst->impl.size() - 1;
    optwvp::ExactResult r =
        optwvp::exact_solve(inst->impl, cap, time_limit_s);
    if (out_reward) *out_reward = r.best_reward;
    if (out_complete) *out_complete = r.complete ? 1 : 0;
    *out = new optwvp_schedule{std::move(r.best_schedule)};
  });
}

/* ---- policy ------------------------------------------------------------- */

int optwvp_policy_create(optwvp_policy** out) {
  if (int rc = require(out, "out")) return rc;
  return guarded([&] { *out = new optwvp_policy{}; });
}

int optwvp_policy_load_file(const char* path, optwvp_policy** out) {
  if (int rc = require(path && out, "path/out")) return rc;
  return guarded([&] {
    *out = new optwvp_policy{optwvp::PolicyParams::load_file(path)};
  });
}

int optwvp_policy_save_file(const optwvp_policy* policy, const char* path) {
  if (int rc = require(policy && path, "policy/path")) return rc;
  return guarded([&] { policy->impl.save_file(path); });
}

void optwvp_policy_free(optwvp_policy* policy) { delete policy; }

void optwvp_train_options_init(optwvp_train_options* opts) {
  if (!opts) return;
  optwvp::TrainConfig d;
  opts->n = d.n;
  opts->window_width = d.window_width;
  opts->budget = d.budget;
  opts->epochs = d.epochs;
  opts->batch = d.batch;
  opts->beta1 = d.beta1;
  opts->beta2 = d.beta2;
  opts->learning_rate = d.learning_rate;
  opts->seed = d.seed;
  opts->val_size = d.val_size;
}

int optwvp_train(const optwvp_train_options* opts, optwvp_policy** out,
                 char** out_curve) {
  if (int rc = require(opts && out, "opts/out")) return rc;
  return guarded([&] {
    optwvp::TrainConfig cfg;
    cfg.n = opts->n;
    cfg.window_width = opts->window_width;
    cfg.budget = opts->budget;
    cfg.epochs = opts->epochs;
    cfg.batch = opts->batch;
    cfg.beta1 = opts->beta1;
    cfg.beta2 = opts->beta2;
    cfg.learning_rate = opts->learning_rate;
    cfg.seed = opts->seed;
    cfg.val_size = opts->val_size;
    optwvp::TrainResult r =
        optwvp::train(cfg, optwvp::default_training_init(cfg.seed));
    if (out_curve) {
      std::ostringstream curve;
      for (double v : r.val_curve) curve << optwvp::detail::g17(v) << "\n";
      *out_curve = dup_string(curve.str());
    }
    *out = new optwvp_policy{std::move(r.params)};
  });
}

/* ---- benchmarking ------------------------------------------------------- */

void optwvp_bench_options_init(optwvp_bench_options* opts) {
  if (!opts) return;
  opts->reference = "none";
  opts->instance_format = "native";
  opts->export_format = "csv";
  opts->exact_size_cap = 0;
  opts->threads = 0;
  optwvp_solve_options_init(&opts->solve);
}

}  // extern "C"

namespace {

std::vector<optwvp::Instance> load_dataset(const char* const* paths,
                                           int n_paths, const char* format) {
  std::string f = format ? format : "native";
  if (f != "native" && f != "solomon")
    throw optwvp::ConfigError("unknown instance format '" + f + "'");
  std::vector<optwvp::Instance> out;
  out.reserve(n_paths);
  for (int i = 0; i < n_paths; ++i) {
    if (f == "native")
      out.push_back(optwvp::Instance::load_file(paths[i]));
    else
      out.push_back(optwvp::Instance::parse_solomon_file(paths[i]));
  }
  return out;
}

optwvp::BenchOptions bench_options(const optwvp_bench_options* o) {
  optwvp::BenchOptions opt;
  if (!o) return opt;
  std::string ref = o->reference ? o->reference : "none";
  if (ref == "exact")
    opt.reference = optwvp::ReferenceMode::exact;
  else if (ref == "none")
    opt.reference = optwvp::ReferenceMode::none;
  else
    throw optwvp::ConfigError("unknown reference '" + ref +
                              "', want none or exact");
  if (o->exact_size_cap > 0) opt.exact_size_cap = o->exact_size_cap;
  opt.threads = o->threads;
  opt.seed = o->solve.seed;
  if (o->solve.exact_max_visits > 0)
    opt.exact_max_visits = o->solve.exact_max_visits;
  if (o->solve.time_limit_s > 0)
    opt.exact_time_limit_s = o->solve.time_limit_s;
  opt.ils = search_config(&o->solve);
  if (o->solve.policy) opt.policy = o->solve.policy->impl;
  return opt;
}

std::string summary_table(const std::vector<optwvp::MethodSummary>& sums) {
  std::ostringstream out;
  out << "method instances mean_score mean_gap aggregate_gap mean_runtime_ms\n";
  for (const auto& s : sums) {
    out << s.method << " " << s.instances << " "
        << optwvp::detail::f6(s.mean_score) << " "
        << (s.mean_gap ? optwvp::detail::f6(*s.mean_gap) : "-") << " "
        << (s.aggregate_gap ? optwvp::detail::f6(*s.aggregate_gap) : "-")
        << " " << optwvp::detail::f6(s.mean_runtime_ms) << "\n";
  }
  return out.str();
}

}  // namespace

extern "C" {

int optwvp_bench_run(const char* const* instance_paths, int n_paths,
                     const char* methods_csv,
                     const optwvp_bench_options* opts, char** out_records,
                     char** out_summary) {
  if (int rc = require(instance_paths && methods_csv && out_records, "args"))
    return rc;
  return guarded([&] {
    std::vector<std::string> methods;
    for (const auto& m : optwvp::detail::split_on(methods_csv, ','))
      if (!optwvp::detail::trim(m).empty())
        methods.push_back(optwvp::detail::trim(m));

    optwvp::BenchOptions opt = bench_options(opts);
    auto dataset = load_dataset(
        instance_paths, n_paths,
        opts && opts->instance_format ? opts->instance_format : "native");

    optwvp::BenchReport report =
        optwvp::run_benchmark(dataset, methods, opt, nullptr);

    std::string fmt =
        opts && opts->export_format ? opts->export_format : "csv";
    optwvp::ExportFormat ef;
    if (fmt == "csv")
      ef = optwvp::ExportFormat::csv;
    else if (fmt == "text")
      ef = optwvp::ExportFormat::text;
    else
      throw optwvp::ConfigError("unknown export format '" + fmt +
                                "', want csv or text");
    *out_records = dup_string(optwvp::export_records(report.records, ef));
    if (out_summary) *out_summary = dup_string(summary_table(report.summaries));
  });
}

int optwvp_ratio_sweep(const char* const* instance_paths, int n_paths,
                       const double* ratios, int n_ratios,
                       const optwvp_bench_options* opts, char** out_table) {
  if (int rc = require(instance_paths && ratios && out_table, "args"))
    return rc;
  return guarded([&] {
    optwvp::BenchOptions opt = bench_options(opts);
    auto dataset = load_dataset(
        instance_paths, n_paths,
        opts && opts->instance_format ? opts->instance_format : "native");
    std::vector<double> rs(ratios, ratios + n_ratios);
    auto table = optwvp::fixed_ratio_experiment(dataset, rs, opt);
    std::ostringstream out;
    out << "ratio mean_gap_percent\n";
    for (const auto& row : table)
      out << optwvp::detail::f6(row.ratio) << " "
          << optwvp::detail::f6(row.mean_gap) << "\n";
    *out_table = dup_string(out.str());
  });
}

}  // extern "C"
