#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optwvp/heuristics.hpp"
#include "optwvp/instance.hpp"
#include "optwvp/policy.hpp"

namespace optwvp {

// One (instance, method) measurement.
struct BenchRecord {
  std::string instance_id;
  std::string method;
  double score = 0.0;
  std::optional<double> reference_score;  // present iff an exact reference ran
  std::optional<double> gap_percent;      // present iff reference present and > 0
  double runtime_ms = 0.0;
  std::uint64_t seed = 0;
  int route_length = 0;  // visits including both depot stops

  bool operator==(const BenchRecord&) const = default;
};

// Per-method aggregates over the dataset.  mean_gap averages per-instance
// gaps; aggregate_gap compares mean scores against the mean reference —
// both are reported because they genuinely differ.
struct MethodSummary {
  std::string method;
  int instances = 0;
  double mean_score = 0.0;
  double mean_runtime_ms = 0.0;
  std::optional<double> mean_gap;       // average of per-instance gaps
  std::optional<double> aggregate_gap;  // gap of the averaged scores
};

struct BenchReport {
  std::vector<BenchRecord> records;      // instance-major, method-minor order
  std::vector<MethodSummary> summaries;  // one per requested method
};

enum class ReferenceMode { none, exact };

struct BenchOptions {
  ReferenceMode reference = ReferenceMode::none;
  // Exact-solver settings (for the reference and the "exact" method):
  int exact_max_visits = 0;       // 0 = all customers
  double exact_time_limit_s = 0;  // 0 = run to completion
  int exact_size_cap = 9;         // refuse exact references above this n
  SearchConfig ils;               // seed is overridden per instance
  PolicyParams policy;            // used by the policy methods
  std::uint64_t seed = 0;         // per-instance seed = seed + instance index
  int threads = 0;                // 0 = hardware concurrency
};

// Known method names: greedy_prs, ils, policy, policy_sto, exact, and
// fixed_ratio:<r> with r in [0,1].  Anything else is a ConfigError, as is an
// exact reference on an instance larger than the size cap.  Instances are
// dispatched to a worker pool; each record's slot is fixed up front, so the
// output order never depends on scheduling.  When `sink` is non-null the
// records are streamed to it as CSV after the run.
BenchReport run_benchmark(std::span<const Instance> dataset,
                          const std::vector<std::string>& methods,
                          const BenchOptions& options,
                          std::ostream* sink = nullptr);

struct RatioRow {
  double ratio = 0.0;
  double mean_gap = 0.0;  // percent, vs the exact reference
};

// Sweep of the no-second-stage baseline: for each ratio, construct greedily
// with services frozen at ratio * max_service and average the optimality gap
// over the dataset.  Ratios must lie in [0,1].
std::vector<RatioRow> fixed_ratio_experiment(std::span<const Instance> dataset,
                                             std::span<const double> ratios,
                                             const BenchOptions& options);

enum class ExportFormat { csv, text };

// Stable column order: instance_id, method, score, reference_score,
// gap_percent, runtime_ms, seed, route_length.  Floats carry 6 decimals,
// header row always present, absent optionals are empty (csv) or "-" (text).
void write_records(std::ostream& out, std::span<const BenchRecord> records,
                   ExportFormat format);
std::string export_records(std::span<const BenchRecord> records,
                           ExportFormat format);
std::vector<BenchRecord> parse_records(const std::string& text,
                                       ExportFormat format);

}  // namespace optwvp
