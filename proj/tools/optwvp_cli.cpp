// Command-line front end for the OPTWVP toolkit.  Talks to the solver
// exclusively through the C API in optwvp.h.
//
// Exit codes: 0 success, 2 configuration error (bad flags, unknown names),
// 1 runtime failure (I/O, parse errors, solver trouble).

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "optwvp.h"

namespace fs = std::filesystem;

namespace {

int fail(int status) {
  std::cerr << "error: " << optwvp_last_error() << "\n";
  return status;
}

struct StringOut {
  char* ptr = nullptr;
  ~StringOut() { optwvp_string_free(ptr); }
  std::string str() const { return ptr ? ptr : ""; }
};

bool write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
  return static_cast<bool>(f);
}

// A dataset argument may be a file or a directory; directories contribute
// their regular files in name order.
std::vector<std::string> expand_dataset(const std::vector<std::string>& args,
                                        std::string& error) {
  std::vector<std::string> paths;
  for (const auto& a : args) {
    std::error_code ec;
    if (fs::is_directory(a, ec)) {
      std::vector<std::string> inner;
      for (const auto& entry : fs::directory_iterator(a, ec)) {
        if (entry.is_regular_file()) inner.push_back(entry.path().string());
      }
      std::sort(inner.begin(), inner.end());
      paths.insert(paths.end(), inner.begin(), inner.end());
    } else if (fs::is_regular_file(a, ec)) {
      paths.push_back(a);
    } else {
      error = "dataset path not found: " + a;
      return {};
    }
  }
  if (paths.empty() && error.empty()) error = "dataset is empty";
  return paths;
}

std::vector<const char*> c_paths(const std::vector<std::string>& paths) {
  std::vector<const char*> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(p.c_str());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OPTWVP solver toolkit"};
  app.require_subcommand(1);

  // --- gen ---------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "Generate random instances");
  int gen_n = 20;
  double gen_tw = 100.0, gen_budget = 300.0;
  int gen_count = 1;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--n", gen_n, "Vertices including the depot")->required();
  gen->add_option("--tw", gen_tw, "Time window width")->required();
  gen->add_option("--budget", gen_budget, "Tour budget")->required();
  gen->add_option("--count", gen_count, "Number of instances (default 1)");
  gen->add_option("--seed", gen_seed, "Base seed; instance i uses seed+i");
  gen->add_option("--out", gen_out,
                  "Output file (count 1) or prefix (files <out><i>.optwvp)")
      ->required();

  // --- solve ---------------------------------------------------------------
  auto* solve = app.add_subcommand("solve", "Solve one instance");
  std::string so_method, so_instance, so_policy, so_out;
  bool so_solomon = false;
  double so_time_limit = 0.0;
  std::uint64_t so_seed = 0;
  std::uint64_t so_max_iter = 0;
  int so_no_improve = 0, so_perturb = 0, so_exact_visits = 0;
  solve
      ->add_option("--method", so_method,
                   "greedy_prs | ils | policy | policy_sto | exact | "
                   "fixed_ratio:<r>")
      ->required();
  solve->add_option("--instance", so_instance, "Instance file")->required();
  solve->add_flag("--solomon", so_solomon,
                  "Instance file is in Solomon format");
  solve->add_option("--policy-file", so_policy,
                    "Weights for the policy methods");
  solve->add_option("--time-limit", so_time_limit,
                    "Wall-clock limit in seconds (ils, exact)");
  solve->add_option("--seed", so_seed, "Random seed (ils)");
  solve->add_option("--max-iterations", so_max_iter,
                    "Iteration budget (ils; 0 = unlimited)");
  solve->add_option("--no-improve", so_no_improve,
                    "Fruitless-perturbation stop limit (ils)");
  solve->add_option("--perturbation", so_perturb,
                    "Visits removed per kick (ils)");
  solve->add_option("--exact-max-visits", so_exact_visits,
                    "Customer cap for exact enumeration");
  solve->add_option("--out", so_out, "Write the schedule here (default stdout)");

  // --- bench ---------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "Run methods over a dataset");
  std::vector<std::string> be_dataset;
  std::string be_methods = "greedy_prs";
  std::string be_reference = "none", be_format = "csv", be_out, be_policy;
  bool be_solomon = false;
  std::uint64_t be_seed = 0, be_max_iter = 0;
  double be_time_limit = 0.0;
  int be_threads = 0, be_size_cap = 0, be_no_improve = 0, be_perturb = 0;
  int be_exact_visits = 0;
  bench
      ->add_option("--dataset", be_dataset,
                   "Instance files and/or directories")
      ->required();
  bench->add_option("--methods", be_methods, "Comma-separated method names");
  bench->add_option("--reference", be_reference, "none | exact");
  bench->add_option("--format", be_format, "csv | text");
  bench->add_option("--out", be_out, "Records file (default stdout)");
  bench->add_flag("--solomon", be_solomon, "Dataset is in Solomon format");
  bench->add_option("--policy-file", be_policy, "Weights for policy methods");
  bench->add_option("--seed", be_seed, "Base seed; instance i uses seed+i");
  bench->add_option("--threads", be_threads, "Worker threads (0 = all cores)");
  bench->add_option("--time-limit", be_time_limit,
                    "Per-instance limit in seconds (ils, exact)");
  bench->add_option("--max-iterations", be_max_iter, "ILS iteration budget");
  bench->add_option("--no-improve", be_no_improve, "ILS no-improve limit");
  bench->add_option("--perturbation", be_perturb, "ILS kick strength");
  bench->add_option("--exact-max-visits", be_exact_visits,
                    "Customer cap for the exact reference");
  bench->add_option("--exact-size-cap", be_size_cap,
                    "Largest n allowed with an exact reference (default 9)");

  // --- train ---------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Train the constructive policy");
  int tr_n = 20, tr_epochs = 200, tr_batch = 64, tr_val = 16;
  double tr_tw = 100.0, tr_budget = 300.0;
  double tr_beta1 = 1000.0, tr_beta2 = 1000.0, tr_lr = 1e-3;
  std::uint64_t tr_seed = 0;
  std::string tr_out;
  train->add_option("--n", tr_n, "Vertices per training instance");
  train->add_option("--tw", tr_tw, "Time window width");
  train->add_option("--budget", tr_budget,
                    "Tour budget of the training distribution (default 300)");
  train->add_option("--epochs", tr_epochs, "Training epochs");
  train->add_option("--batch", tr_batch, "Rollouts per epoch");
  train->add_option("--beta1", tr_beta1, "Policy-gradient loss weight");
  train->add_option("--beta2", tr_beta2, "Repulsive loss weight");
  train->add_option("--lr", tr_lr, "Gradient step size");
  train->add_option("--seed", tr_seed, "Seed for the whole run");
  train->add_option("--val-size", tr_val, "Held-out instances");
  train->add_option("--out", tr_out, "Weights output file")->required();

  // --- ratio-sweep -----------------------------------------------------------
  auto* sweep = app.add_subcommand(
      "ratio-sweep", "Fixed-ratio gap study against the exact reference");
  std::vector<std::string> sw_dataset;
  std::string sw_ratios = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
  std::string sw_out;
  int sw_threads = 0, sw_size_cap = 0;
  sweep
      ->add_option("--dataset", sw_dataset,
                   "Instance files and/or directories")
      ->required();
  sweep->add_option("--ratios", sw_ratios, "Comma-separated ratios in [0,1]");
  sweep->add_option("--out", sw_out, "Table file (default stdout)");
  sweep->add_option("--threads", sw_threads, "Worker threads (0 = all cores)");
  sweep->add_option("--exact-size-cap", sw_size_cap,
                    "Largest n allowed (default 9)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // bad flags are configuration errors
  }

  if (gen->parsed()) {
    if (gen_count < 1) {
      std::cerr << "error: --count must be >= 1\n";
      return 2;
    }
    for (int i = 0; i < gen_count; ++i) {
      optwvp_instance* inst = nullptr;
      int rc = optwvp_instance_generate(gen_n, gen_tw, gen_budget,
                                        gen_seed + i, &inst);
      if (rc != OPTWVP_OK) return fail(rc);
      std::string path = gen_count == 1
                             ? gen_out
                             : gen_out + std::to_string(i) + ".optwvp";
      rc = optwvp_instance_save_file(inst, path.c_str());
      optwvp_instance_free(inst);
      if (rc != OPTWVP_OK) return fail(rc);
      std::cout << path << "\n";
    }
    return 0;
  }

  if (solve->parsed()) {
    optwvp_instance* inst = nullptr;
    int rc = optwvp_instance_read(so_instance.c_str(),
                                  so_solomon ? "solomon" : "native", &inst);
    if (rc != OPTWVP_OK) return fail(rc);
    std::unique_ptr<optwvp_instance, decltype(&optwvp_instance_free)> inst_g(
        inst, optwvp_instance_free);

    optwvp_policy* policy = nullptr;
    if (!so_policy.empty()) {
      rc = optwvp_policy_load_file(so_policy.c_str(), &policy);
      if (rc != OPTWVP_OK) return fail(rc);
    }
    std::unique_ptr<optwvp_policy, decltype(&optwvp_policy_free)> policy_g(
        policy, optwvp_policy_free);

    optwvp_solve_options opts;
    optwvp_solve_options_init(&opts);
    opts.time_limit_s = so_time_limit;
    opts.seed = so_seed;
    opts.ils_max_iterations = so_max_iter;
    opts.ils_no_improve_limit = so_no_improve;
    opts.ils_perturbation = so_perturb;
    opts.exact_max_visits = so_exact_visits;
    opts.policy = policy;

    optwvp_schedule* sched = nullptr;
    double runtime_ms = 0.0;
    rc = optwvp_solve(inst, so_method.c_str(), &opts, &sched, &runtime_ms);
    if (rc != OPTWVP_OK) return fail(rc);
    std::unique_ptr<optwvp_schedule, decltype(&optwvp_schedule_free)> sched_g(
        sched, optwvp_schedule_free);

    double score = 0.0, rate = 0.0;
    int length = 0;
    if ((rc = optwvp_schedule_reward(inst, sched, &score)) != OPTWVP_OK ||
        (rc = optwvp_schedule_ptar(inst, sched, &rate)) != OPTWVP_OK ||
        (rc = optwvp_schedule_length(sched, &length)) != OPTWVP_OK)
      return fail(rc);

    StringOut text;
    if ((rc = optwvp_schedule_save_string(sched, &text.ptr)) != OPTWVP_OK)
      return fail(rc);
    if (!so_out.empty()) {
      if (!write_text_file(so_out, text.str())) {
        std::cerr << "error: cannot write " << so_out << "\n";
        return 1;
      }
    } else {
      std::cout << text.str();
    }
    std::fprintf(stderr,
                 "method=%s score=%.6f ptar=%.6f visits=%d runtime_ms=%.3f\n",
                 so_method.c_str(), score, rate, length, runtime_ms);
    return 0;
  }

  if (bench->parsed()) {
    std::string err;
    auto paths = expand_dataset(be_dataset, err);
    if (!err.empty()) {
      std::cerr << "error: " << err << "\n";
      return 2;
    }

    optwvp_policy* policy = nullptr;
    if (!be_policy.empty()) {
      int rc = optwvp_policy_load_file(be_policy.c_str(), &policy);
      if (rc != OPTWVP_OK) return fail(rc);
    }
    std::unique_ptr<optwvp_policy, decltype(&optwvp_policy_free)> policy_g(
        policy, optwvp_policy_free);

    optwvp_bench_options opts;
    optwvp_bench_options_init(&opts);
    opts.reference = be_reference.c_str();
    opts.instance_format = be_solomon ? "solomon" : "native";
    opts.export_format = be_format.c_str();
    opts.exact_size_cap = be_size_cap;
    opts.threads = be_threads;
    opts.solve.seed = be_seed;
    opts.solve.time_limit_s = be_time_limit;
    opts.solve.ils_max_iterations = be_max_iter;
    opts.solve.ils_no_improve_limit = be_no_improve;
    opts.solve.ils_perturbation = be_perturb;
    opts.solve.exact_max_visits = be_exact_visits;
    opts.solve.policy = policy;

    auto cp = c_paths(paths);
    StringOut records, summary;
    int rc = optwvp_bench_run(cp.data(), static_cast<int>(cp.size()),
                              be_methods.c_str(), &opts, &records.ptr,
                              &summary.ptr);
    if (rc != OPTWVP_OK) return fail(rc);

    if (!be_out.empty()) {
      if (!write_text_file(be_out, records.str())) {
        std::cerr << "error: cannot write " << be_out << "\n";
        return 1;
      }
    } else {
      std::cout << records.str();
    }
    std::cerr << summary.str();
    return 0;
  }

  if (train->parsed()) {
    optwvp_train_options opts;
    optwvp_train_options_init(&opts);
    opts.n = tr_n;
    opts.window_width = tr_tw;
    opts.budget = tr_budget;
    opts.epochs = tr_epochs;
    opts.batch = tr_batch;
    opts.beta1 = tr_beta1;
    opts.beta2 = tr_beta2;
    opts.learning_rate = tr_lr;
    opts.seed = tr_seed;
    opts.val_size = tr_val;

    optwvp_policy* policy = nullptr;
    StringOut curve;
    int rc = optwvp_train(&opts, &policy, &curve.ptr);
    if (rc != OPTWVP_OK) return fail(rc);
    std::unique_ptr<optwvp_policy, decltype(&optwvp_policy_free)> policy_g(
        policy, optwvp_policy_free);

    rc = optwvp_policy_save_file(policy, tr_out.c_str());
    if (rc != OPTWVP_OK) return fail(rc);
    std::cout << curve.str();
    std::cerr << "weights written to " << tr_out << "\n";
    return 0;
  }

  if (sweep->parsed()) {
    std::string err;
    auto paths = expand_dataset(sw_dataset, err);
    if (!err.empty()) {
      std::cerr << "error: " << err << "\n";
      return 2;
    }
    std::vector<double> ratios;
    {
      std::stringstream ss(sw_ratios);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        try {
          ratios.push_back(std::stod(tok));
        } catch (...) {
          std::cerr << "error: bad ratio '" << tok << "'\n";
          return 2;
        }
      }
    }
    optwvp_bench_options opts;
    optwvp_bench_options_init(&opts);
    opts.exact_size_cap = sw_size_cap;
    opts.threads = sw_threads;

    auto cp = c_paths(paths);
    StringOut table;
    int rc = optwvp_ratio_sweep(cp.data(), static_cast<int>(cp.size()),
                                ratios.data(), static_cast<int>(ratios.size()),
                                &opts, &table.ptr);
    if (rc != OPTWVP_OK) return fail(rc);
    if (!sw_out.empty()) {
      if (!write_text_file(sw_out, table.str())) {
        std::cerr << "error: cannot write " << sw_out << "\n";
        return 1;
      }
    } else {
      std::cout << table.str();
    }
    return 0;
  }

  return 0;
}
