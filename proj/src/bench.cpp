#include "optwvp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "optwvp/errors.hpp"
#include "optwvp/oracles.hpp"
#include "text_util.hpp"

namespace optwvp {

namespace {

enum class MethodKind { greedy_prs, ils, policy, policy_sto, fixed_ratio, exact };

struct MethodSpec {
  MethodKind kind;
  double ratio = 0.0;
  std::string name;  // canonical form for records
};

MethodSpec parse_method(const std::string& name) {
  if (name == "greedy_prs") return {MethodKind::greedy_prs, 0.0, name};
  if (name == "ils") return {MethodKind::ils, 0.0, name};
  if (name == "policy") return {MethodKind::policy, 0.0, name};
  if (name == "policy_sto") return {MethodKind::policy_sto, 0.0, name};
  if (name == "exact") return {MethodKind::exact, 0.0, name};
  const std::string prefix = "fixed_ratio:";
  if (name.rfind(prefix, 0) == 0) {
    auto r = detail::parse_double(name.substr(prefix.size()));
    if (!r || !(*r >= 0.0 && *r <= 1.0))
      throw ConfigError("fixed_ratio needs a ratio in [0,1], got '" + name +
                        "'");
    return {MethodKind::fixed_ratio, *r, name};
  }
  throw ConfigError("unknown method '" + name +
                    "'; known: greedy_prs, ils, policy, policy_sto, exact, "
                    "fixed_ratio:<r>");
}

std::string instance_label(const Instance& inst, std::size_t index) {
  if (!inst.metadata().empty()) return inst.metadata();
  return "inst" + std::to_string(index);
}

int exact_visit_cap(const Instance& inst, const BenchOptions& opt) {
  int all = inst.size() - 1;
  if (opt.exact_max_visits > 0) return std::min(opt.exact_max_visits, all);
  return all;
}

// Run `task(i)` for i in [0, count) on a small pool.  First exception wins
// and is rethrown on the caller's thread.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& task) {
  if (count == 0) return;
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t want = threads > 0 ? static_cast<std::size_t>(threads)
                                 : (hw ? hw : 1);
  want = std::min(want, count);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < want; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double now_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

BenchReport run_benchmark(std::span<const Instance> dataset,
                          const std::vector<std::string>& methods,
                          const BenchOptions& options, std::ostream* sink) {
  if (methods.empty()) throw ConfigError("no methods requested");
  std::vector<MethodSpec> specs;
  specs.reserve(methods.size());
  bool wants_exact = options.reference == ReferenceMode::exact;
  for (const auto& m : methods) {
    specs.push_back(parse_method(m));
    wants_exact |= specs.back().kind == MethodKind::exact;
  }
  if (wants_exact)
    for (const Instance& inst : dataset)
      if (inst.size() > options.exact_size_cap)
        throw ConfigError("exact solving requested but instance '" +
                          inst.metadata() + "' has " +
                          std::to_string(inst.size()) + " vertices (cap " +
                          std::to_string(options.exact_size_cap) +
                          "); raise exact_size_cap or drop the reference");

  BenchReport report;
  report.records.resize(dataset.size() * specs.size());

  parallel_for(dataset.size(), options.threads, [&](std::size_t i) {
    const Instance& inst = dataset[i];
    const std::uint64_t seed = options.seed + i;

    std::optional<ExactResult> ref;
    auto ensure_ref = [&]() -> const ExactResult& {
      if (!ref)
        ref = exact_solve(inst, exact_visit_cap(inst, options),
                          options.exact_time_limit_s);
      return *ref;
    };

    for (std::size_t k = 0; k < specs.size(); ++k) {
      const MethodSpec& spec = specs[k];
      BenchRecord rec;
      rec.instance_id = instance_label(inst, i);
      rec.method = spec.name;
      rec.seed = seed;

      auto t0 = std::chrono::steady_clock::now();
      switch (spec.kind) {
        case MethodKind::greedy_prs: {
          StoResult r = greedy_prs(inst);
          rec.score = r.total_reward;
          rec.route_length = r.schedule.trajectory.length();
          rec.runtime_ms = now_ms(t0);
          break;
        }
        case MethodKind::ils: {
          SearchConfig cfg = options.ils;
          cfg.seed = seed;
          IlsResult r = ils_solve(inst, cfg);
          rec.score = r.total_reward;
          rec.route_length = r.schedule.trajectory.length();
          rec.runtime_ms = r.total_ms;
          break;
        }
        case MethodKind::policy: {
          Rollout r = greedy_rollout(inst, options.policy);
          rec.score = reward(inst, r.predicted);
          rec.route_length = r.predicted.trajectory.length();
          rec.runtime_ms = now_ms(t0);
          break;
        }
        case MethodKind::policy_sto: {
          Rollout r = greedy_rollout(inst, options.policy);
          rec.score = r.reward;
          rec.route_length = r.sto_schedule.trajectory.length();
          rec.runtime_ms = now_ms(t0);
          break;
        }
        case MethodKind::fixed_ratio: {
          Schedule s = fixed_ratio_schedule(inst, spec.ratio);
          rec.score = reward(inst, s);
          rec.route_length = s.trajectory.length();
          rec.runtime_ms = now_ms(t0);
          break;
        }
        case MethodKind::exact: {
          const ExactResult& r = ensure_ref();
          rec.score = r.best_reward;
          rec.route_length = r.best_schedule.trajectory.length();
          rec.runtime_ms = r.elapsed_s * 1e3;
          break;
        }
      }

      if (options.reference == ReferenceMode::exact) {
        const ExactResult& r = ensure_ref();
        rec.reference_score = r.best_reward;
        if (r.best_reward > 0.0)
          rec.gap_percent =
              (r.best_reward - rec.score) / r.best_reward * 100.0;
      }
      report.records[i * specs.size() + k] = std::move(rec);
    }
  });

  for (std::size_t k = 0; k < specs.size(); ++k) {
    MethodSummary sum;
    sum.method = specs[k].name;
    double gap_sum = 0.0, ref_sum = 0.0;
    int gap_n = 0, ref_n = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const BenchRecord& rec = report.records[i * specs.size() + k];
      ++sum.instances;
      sum.mean_score += rec.score;
      sum.mean_runtime_ms += rec.runtime_ms;
      if (rec.gap_percent) {
        gap_sum += *rec.gap_percent;
        ++gap_n;
      }
      if (rec.reference_score) {
        ref_sum += *rec.reference_score;
        ++ref_n;
      }
    }
    if (sum.instances > 0) {
      sum.mean_score /= sum.instances;
      sum.mean_runtime_ms /= sum.instances;
      if (gap_n > 0) sum.mean_gap = gap_sum / gap_n;
      if (ref_n > 0 && ref_sum > 0.0) {
        double mean_ref = ref_sum / ref_n;
        sum.aggregate_gap = (mean_ref - sum.mean_score) / mean_ref * 100.0;
      }
    }
    report.summaries.push_back(std::move(sum));
  }

  if (sink) write_records(*sink, report.records, ExportFormat::csv);
  return report;
}

std::vector<RatioRow> fixed_ratio_experiment(std::span<const Instance> dataset,
                                             std::span<const double> ratios,
                                             const BenchOptions& options) {
  for (double r : ratios)
    if (!(r >= 0.0 && r <= 1.0))
      throw ParameterError("ratio " + detail::g17(r) + " outside [0,1]");
  for (const Instance& inst : dataset)
    if (inst.size() > options.exact_size_cap)
      throw ConfigError("exact reference needs n <= " +
                        std::to_string(options.exact_size_cap) + ", got " +
                        std::to_string(inst.size()));

  std::vector<double> refs(dataset.size());
  parallel_for(dataset.size(), options.threads, [&](std::size_t i) {
    refs[i] = exact_solve(dataset[i], exact_visit_cap(dataset[i], options),
                          options.exact_time_limit_s)
                  .best_reward;
  });

  std::vector<RatioRow> table;
  table.reserve(ratios.size());
  for (double r : ratios) {
    RatioRow row;
    row.ratio = r;
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (!(refs[i] > 0.0)) continue;  // gap undefined, skip
      double score = reward(dataset[i], fixed_ratio_schedule(dataset[i], r));
      sum += (refs[i] - score) / refs[i] * 100.0;
      ++count;
    }
    row.mean_gap = count > 0 ? sum / count : 0.0;
    table.push_back(row);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Record export / import.

namespace {

constexpr const char* kColumns[] = {
    "instance_id", "method",     "score", "reference_score",
    "gap_percent", "runtime_ms", "seed",  "route_length"};

// IDs travel through both formats as single tokens.
std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r') c = '_';
  return out;
}

std::vector<std::string> record_row(const BenchRecord& r) {
  return {sanitize(r.instance_id),
          sanitize(r.method),
          detail::f6(r.score),
          r.reference_score ? detail::f6(*r.reference_score) : "",
          r.gap_percent ? detail::f6(*r.gap_percent) : "",
          detail::f6(r.runtime_ms),
          std::to_string(r.seed),
          std::to_string(r.route_length)};
}

}  // namespace

void write_records(std::ostream& out, std::span<const BenchRecord> records,
                   ExportFormat format) {
  const char sep = format == ExportFormat::csv ? ',' : ' ';
  for (std::size_t c = 0; c < 8; ++c) {
    if (c) out << sep;
    out << kColumns[c];
  }
  out << "\n";
  for (const BenchRecord& r : records) {
    auto row = record_row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << sep;
      if (format == ExportFormat::text && row[c].empty())
        out << "-";
      else
        out << row[c];
    }
    out << "\n";
  }
  if (!out) throw IoError("record export failed mid-write");
}

std::string export_records(std::span<const BenchRecord> records,
                           ExportFormat format) {
  std::ostringstream out;
  write_records(out, records, format);
  return out.str();
}

std::vector<BenchRecord> parse_records(const std::string& text,
                                       ExportFormat format) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fields = [&](const std::string& l) {
    return format == ExportFormat::csv ? detail::split_on(l, ',')
                                       : detail::split_ws(l);
  };

  if (!std::getline(in, line)) throw ParseError(1, "missing header row");
  ++lineno;
  auto head = fields(line);
  if (head.size() != 8)
    throw ParseError(lineno, "header has " + std::to_string(head.size()) +
                                 " columns, expected 8");
  for (int c = 0; c < 8; ++c)
    if (head[c] != kColumns[c])
      throw ParseError(lineno, "unexpected column '" + head[c] + "', want '" +
                                   std::string(kColumns[c]) + "'");

  std::vector<BenchRecord> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto f = fields(line);
    if (f.size() != 8)
      throw ParseError(lineno, "row has " + std::to_string(f.size()) +
                                   " fields, expected 8");
    auto absent = [&](const std::string& v) {
      return v.empty() || (format == ExportFormat::text && v == "-");
    };
    BenchRecord r;
    r.instance_id = f[0];
    r.method = f[1];
    auto need = [&](const std::string& v, const char* what) {
      auto d = detail::parse_double(v);
      if (!d)
        throw ParseError(lineno, std::string("bad ") + what + ": '" + v + "'");
      return *d;
    };
    r.score = need(f[2], "score");
    if (!absent(f[3])) r.reference_score = need(f[3], "reference_score");
    if (!absent(f[4])) r.gap_percent = need(f[4], "gap_percent");
    r.runtime_ms = need(f[5], "runtime_ms");
    auto seed = detail::parse_int(f[6]);
    if (!seed || *seed < 0) throw ParseError(lineno, "bad seed: '" + f[6] + "'");
    r.seed = static_cast<std::uint64_t>(*seed);
    auto len = detail::parse_int(f[7]);
    if (!len) throw ParseError(lineno, "bad route_length: '" + f[7] + "'");
    r.route_length = static_cast<int>(*len);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace optwvp
