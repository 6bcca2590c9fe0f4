#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "optwvp/bench.hpp"
#include "optwvp/errors.hpp"
#include "optwvp/heuristics.hpp"
#include "optwvp/instance.hpp"
#include "optwvp/oracles.hpp"
#include "optwvp/solution.hpp"

using namespace optwvp;

namespace {

std::vector<Instance> small_dataset(int count, int n, std::uint64_t base) {
  std::vector<Instance> out;
  for (int i = 0; i < count; ++i)
    out.push_back(Instance::generate(n, 40.0, 150.0, base + i));
  return out;
}

}  // namespace

TEST_CASE("benchmark records: order, seeds, scores, gaps") {
  std::vector<Instance> data = small_dataset(3, 6, 9000);
  std::vector<std::string> methods = {"greedy_prs", "fixed_ratio:0.5",
                                      "exact"};
  BenchOptions opt;
  opt.reference = ReferenceMode::exact;
  opt.seed = 100;
  opt.threads = 2;
  BenchReport rep = run_benchmark(data, methods, opt);

  REQUIRE(rep.records.size() == 9);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t k = 0; k < methods.size(); ++k) {
      const BenchRecord& rec = rep.records[i * methods.size() + k];
      CHECK(rec.method == methods[k]);
      CHECK(rec.seed == 100 + i);
      CHECK(rec.instance_id == data[i].metadata());
      REQUIRE(rec.reference_score.has_value());
      CHECK(*rec.reference_score > 0.0);
      REQUIRE(rec.gap_percent.has_value());
      // the stored gap is the recomputable one
      double want =
          (*rec.reference_score - rec.score) / *rec.reference_score * 100.0;
      CHECK(*rec.gap_percent == want);
      CHECK(rec.route_length >= 2);
    }
  }

  SUBCASE("method scores equal direct solver calls") {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Instance& inst = data[i];
      CHECK(rep.records[i * 3 + 0].score ==
            greedy_prs(inst).total_reward);
      CHECK(rep.records[i * 3 + 1].score ==
            reward(inst, fixed_ratio_schedule(inst, 0.5)));
      ExactResult ex = exact_solve(inst, inst.size() - 1, 0.0);
      CHECK(rep.records[i * 3 + 2].score == ex.best_reward);
    }
  }
  SUBCASE("the exact method scores its own reference, gap exactly zero") {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const BenchRecord& rec = rep.records[i * 3 + 2];
      CHECK(rec.score == *rec.reference_score);
      CHECK(*rec.gap_percent == 0.0);
    }
  }
  SUBCASE("summaries recompute from the records") {
    REQUIRE(rep.summaries.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
      const MethodSummary& s = rep.summaries[k];
      CHECK(s.method == methods[k]);
      CHECK(s.instances == 3);
      double score_sum = 0.0, gap_sum = 0.0, ref_sum = 0.0;
      for (std::size_t i = 0; i < 3; ++i) {
        const BenchRecord& rec = rep.records[i * 3 + k];
        score_sum += rec.score;
        gap_sum += *rec.gap_percent;
        ref_sum += *rec.reference_score;
      }
      CHECK(s.mean_score == doctest::Approx(score_sum / 3).epsilon(1e-12));
      REQUIRE(s.mean_gap.has_value());
      CHECK(*s.mean_gap == doctest::Approx(gap_sum / 3).epsilon(1e-12));
      REQUIRE(s.aggregate_gap.has_value());
      double mean_ref = ref_sum / 3;
      CHECK(*s.aggregate_gap ==
            doctest::Approx((mean_ref - score_sum / 3) / mean_ref * 100.0)
                .epsilon(1e-12));
      CHECK(s.mean_runtime_ms >= 0.0);
    }
  }
}

TEST_CASE("benchmark without a reference leaves the gap columns empty") {
  std::vector<Instance> data = small_dataset(2, 6, 9100);
  BenchOptions opt;
  BenchReport rep = run_benchmark(data, {"greedy_prs"}, opt);
  REQUIRE(rep.records.size() == 2);
  for (const BenchRecord& rec : rep.records) {
    CHECK(!rec.reference_score.has_value());
    CHECK(!rec.gap_percent.has_value());
  }
  REQUIRE(rep.summaries.size() == 1);
  CHECK(!rep.summaries[0].mean_gap.has_value());
  CHECK(!rep.summaries[0].aggregate_gap.has_value());
}

TEST_CASE("ils and policy methods wire their inputs through") {
  std::vector<Instance> data = small_dataset(2, 6, 9200);
  BenchOptions opt;
  opt.seed = 40;
  opt.ils.max_iterations = 3;
  opt.ils.no_improve_limit = 3;
  std::mt19937_64 rng(7);
  for (double& w : opt.policy.route_weights)
    w = ((rng() >> 11) * 0x1.0p-53) - 0.5;

  BenchReport rep =
      run_benchmark(data, {"ils", "policy", "policy_sto"}, opt);
  REQUIRE(rep.records.size() == 6);
  for (std::size_t i = 0; i < data.size(); ++i) {
    SearchConfig cfg = opt.ils;
    cfg.seed = opt.seed + i;
    CHECK(rep.records[i * 3 + 0].score ==
          ils_solve(data[i], cfg).total_reward);

    Rollout r = greedy_rollout(data[i], opt.policy);
    CHECK(rep.records[i * 3 + 1].score == reward(data[i], r.predicted));
    CHECK(rep.records[i * 3 + 2].score == r.reward);
    // the second stage never loses reward on the same route
    CHECK(rep.records[i * 3 + 2].score >=
          rep.records[i * 3 + 1].score - 1e-9);
  }
}

TEST_CASE("benchmark configuration errors") {
  std::vector<Instance> data = small_dataset(1, 6, 9300);
  BenchOptions opt;
  CHECK_THROWS_AS(run_benchmark(data, {}, opt), ConfigError);
  CHECK_THROWS_AS(run_benchmark(data, {"magic"}, opt), ConfigError);
  CHECK_THROWS_AS(run_benchmark(data, {"fixed_ratio:1.5"}, opt), ConfigError);
  CHECK_THROWS_AS(run_benchmark(data, {"fixed_ratio:-0.1"}, opt), ConfigError);
  CHECK_THROWS_AS(run_benchmark(data, {"fixed_ratio:x"}, opt), ConfigError);

  SUBCASE("exact work refuses instances above the size cap") {
    std::vector<Instance> big = small_dataset(1, 12, 9400);
    BenchOptions ref = opt;
    ref.reference = ReferenceMode::exact;
    CHECK_THROWS_AS(run_benchmark(big, {"greedy_prs"}, ref), ConfigError);
    // the exact *method* triggers the same guard without the reference
    CHECK_THROWS_AS(run_benchmark(big, {"exact"}, opt), ConfigError);
    // raising the cap (and bounding the tree) makes the same call legal
    ref.exact_size_cap = 12;
    ref.exact_max_visits = 2;
    BenchReport rep = run_benchmark(big, {"greedy_prs"}, ref);
    CHECK(rep.records.size() == 1);
  }
}

TEST_CASE("thread count does not change any result") {
  std::vector<Instance> data = small_dataset(6, 6, 9500);
  std::vector<std::string> methods = {"greedy_prs", "fixed_ratio:0.3",
                                      "exact"};
  BenchOptions a;
  a.reference = ReferenceMode::exact;
  a.seed = 5;
  a.threads = 1;
  BenchOptions b = a;
  b.threads = 4;
  BenchReport ra = run_benchmark(data, methods, a);
  BenchReport rb = run_benchmark(data, methods, b);
  REQUIRE(ra.records.size() == rb.records.size());
  for (std::size_t i = 0; i < ra.records.size(); ++i) {
    CHECK(ra.records[i].instance_id == rb.records[i].instance_id);
    CHECK(ra.records[i].method == rb.records[i].method);
    CHECK(ra.records[i].score == rb.records[i].score);
    CHECK(ra.records[i].reference_score == rb.records[i].reference_score);
    CHECK(ra.records[i].gap_percent == rb.records[i].gap_percent);
    CHECK(ra.records[i].seed == rb.records[i].seed);
    CHECK(ra.records[i].route_length == rb.records[i].route_length);
  }
}

TEST_CASE("the sink receives exactly the CSV export") {
  std::vector<Instance> data = small_dataset(2, 5, 9600);
  BenchOptions opt;
  std::ostringstream sink;
  BenchReport rep = run_benchmark(data, {"greedy_prs"}, opt, &sink);
  CHECK(sink.str() == export_records(rep.records, ExportFormat::csv));
}

TEST_CASE("record export and import") {
  BenchRecord full;
  full.instance_id = "alpha";
  full.method = "ils";
  full.score = 12.5;
  full.reference_score = 14.25;
  full.gap_percent = 3.25;
  full.runtime_ms = 0.125;
  full.seed = 42;
  full.route_length = 5;
  BenchRecord bare;
  bare.instance_id = "beta";
  bare.method = "greedy_prs";
  bare.score = 7.75;
  bare.runtime_ms = 1.5;
  bare.seed = 7;
  bare.route_length = 3;
  std::vector<BenchRecord> recs = {full, bare};

  SUBCASE("csv round-trip is exact for clean values") {
    std::string csv = export_records(recs, ExportFormat::csv);
    std::vector<BenchRecord> back = parse_records(csv, ExportFormat::csv);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == full);
    CHECK(back[1] == bare);
    // absent optionals are empty csv cells
    CHECK(csv.find("7.750000,,,1.500000") != std::string::npos);
    // re-export reproduces the bytes
    CHECK(export_records(back, ExportFormat::csv) == csv);
  }
  SUBCASE("text format round-trips with dashes for absent values") {
    std::string txt = export_records(recs, ExportFormat::text);
    CHECK(txt.find("7.750000 - - 1.500000") != std::string::npos);
    std::vector<BenchRecord> back = parse_records(txt, ExportFormat::text);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == full);
    CHECK(back[1] == bare);
  }
  SUBCASE("empty record sets export as a bare header") {
    std::string csv = export_records({}, ExportFormat::csv);
    CHECK(csv ==
          "instance_id,method,score,reference_score,gap_percent,runtime_ms,"
          "seed,route_length\n");
    CHECK(parse_records(csv, ExportFormat::csv).empty());
  }
  SUBCASE("ids with separators are flattened, not quoted") {
    BenchRecord messy = bare;
    messy.instance_id = "gen:n=6,tw=40 b=150";
    std::string csv = export_records({&messy, 1}, ExportFormat::csv);
    CHECK(csv.find("gen:n=6_tw=40_b=150") != std::string::npos);
    std::vector<BenchRecord> back = parse_records(csv, ExportFormat::csv);
    REQUIRE(back.size() == 1);
    CHECK(back[0].instance_id == "gen:n=6_tw=40_b=150");
  }
  SUBCASE("blank lines are skipped") {
    std::string csv = export_records(recs, ExportFormat::csv);
    csv += "\n   \n";
    CHECK(parse_records(csv, ExportFormat::csv).size() == 2);
  }
}

TEST_CASE("record parsing rejects malformed input") {
  const std::string header =
      "instance_id,method,score,reference_score,gap_percent,runtime_ms,"
      "seed,route_length\n";
  auto parse = [](const std::string& s) {
    return parse_records(s, ExportFormat::csv);
  };
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("a,b,c\n"), ParseError);
  // right arity, wrong name
  CHECK_THROWS_AS(parse("instance,method,score,reference_score,gap_percent,"
                        "runtime_ms,seed,route_length\n"),
                  ParseError);
  CHECK_THROWS_AS(parse(header + "a,ils,1.0,,\n"), ParseError);
  CHECK_THROWS_AS(parse(header + "a,ils,oops,,,1.0,0,2\n"), ParseError);
  CHECK_THROWS_AS(parse(header + "a,ils,1.0,,,oops,0,2\n"), ParseError);
  CHECK_THROWS_AS(parse(header + "a,ils,1.0,,,1.0,-4,2\n"), ParseError);
  CHECK_THROWS_AS(parse(header + "a,ils,1.0,,,1.0,0,2.5\n"), ParseError);
  try {
    parse(header + "a,ils,1.0,,,1.0,0,2\nb,ils,bad,,,1.0,0,2\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("fixed ratio sweep") {
  std::vector<Instance> data = small_dataset(2, 5, 9700);
  BenchOptions opt;
  std::vector<double> refs;
  for (const Instance& inst : data) {
    refs.push_back(exact_solve(inst, inst.size() - 1, 0.0).best_reward);
    REQUIRE(refs.back() > 0.0);
  }

  std::vector<double> ratios = {0.0, 0.4, 1.0};
  std::vector<RatioRow> rows = fixed_ratio_experiment(data, ratios, opt);
  REQUIRE(rows.size() == 3);
  for (std::size_t r = 0; r < ratios.size(); ++r) {
    CHECK(rows[r].ratio == ratios[r]);
    double want = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      double score = reward(data[i], fixed_ratio_schedule(data[i], ratios[r]));
      want += (refs[i] - score) / refs[i] * 100.0;
    }
    want /= data.size();
    CHECK(rows[r].mean_gap == doctest::Approx(want).epsilon(1e-12));
  }
  // zero services collect zero reward: the gap is all of it
  CHECK(rows[0].mean_gap == doctest::Approx(100.0));

  SUBCASE("input validation") {
    std::vector<double> bad = {0.5, 1.5};
    CHECK_THROWS_AS(fixed_ratio_experiment(data, bad, opt), ParameterError);
    bad = {-0.2};
    CHECK_THROWS_AS(fixed_ratio_experiment(data, bad, opt), ParameterError);
    std::vector<Instance> big = small_dataset(1, 12, 9800);
    std::vector<double> ok = {0.5};
    CHECK_THROWS_AS(fixed_ratio_experiment(big, ok, opt), ConfigError);
  }
}
