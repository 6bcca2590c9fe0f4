#include "optwvp/instance.hpp"

#include <cassert>
#include <cmath>
#include <fstream>
#include <sstream>

#include "optwvp/errors.hpp"
#include "optwvp/rng.hpp"
#include "text_util.hpp"

namespace optwvp {

using detail::g17;
using detail::parse_double;
using detail::parse_int;
using detail::split_ws;
using detail::trim;

Instance::Instance(std::vector<Vertex> vertices, std::vector<double> travel,
                   double budget, std::string metadata)
    : vertices_(std::move(vertices)),
      travel_(std::move(travel)),
      budget_(budget),
      metadata_(std::move(metadata)) {
  const std::size_t n = vertices_.size();
  if (travel_.size() != n * n)
    throw ParameterError("travel matrix has " + std::to_string(travel_.size()) +
                         " entries, expected " + std::to_string(n * n) +
                         " for " + std::to_string(n) + " vertices");
}

static std::vector<double> euclidean_matrix(const std::vector<Vertex>& vs) {
  const std::size_t n = vs.size();
  std::vector<double> t(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = std::hypot(vs[i].x - vs[j].x, vs[i].y - vs[j].y);
      t[i * n + j] = d;
      t[j * n + i] = d;  // mirrored, so symmetry holds bit-for-bit
    }
  return t;
}

Instance Instance::generate(int n, double window_width, double budget,
                            std::uint64_t seed) {
  if (n < 2) throw ParameterError("need at least depot plus one customer");
  if (!(window_width > 0.0))
    throw ParameterError("window width must be positive");
  if (!(budget > 0.0)) throw ParameterError("budget must be positive");
  if (window_width > budget)
    throw ParameterError("window width " + g17(window_width) +
                         " exceeds budget " + g17(budget) +
                         ", window opens cannot be placed");

  std::mt19937_64 rng(seed);
  std::vector<Vertex> vs(n);
  vs[0].id = 0;
  vs[0].x = uniform_range(rng, 0.0, 100.0);
  vs[0].y = uniform_range(rng, 0.0, 100.0);
  vs[0].window_open = 0.0;
  vs[0].window_close = budget;
  for (int i = 1; i < n; ++i) {
    Vertex& v = vs[i];
    v.id = i;
    v.x = uniform_range(rng, 0.0, 100.0);
    v.y = uniform_range(rng, 0.0, 100.0);
    v.window_open = uniform_range(rng, 0.0, budget - window_width);
    v.window_close = v.window_open + window_width;
    v.unit_profit = 1.0 - uniform01(rng);      // (0, 1]
    v.max_service = window_width * (1.0 - uniform01(rng));  // (0, width]
  }

  std::vector<double> t = euclidean_matrix(vs);
#ifndef NDEBUG
  // Euclidean matrices satisfy the triangle inequality; spot-check small ones.
  if (n <= 64) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          assert(t[i * n + j] <= t[i * n + k] + t[k * n + j] + 1e-9);
  }
#endif

  std::ostringstream meta;
  meta << "gen:n=" << n << ",tw=" << g17(window_width) << ",b=" << g17(budget)
       << ",seed=" << seed;
  return Instance(std::move(vs), std::move(t), budget, meta.str());
}

// ---------------------------------------------------------------------------
// Native format.
//
//   OPTWVP v1
//   budget <float>
//   name <free text>                (optional)
//   vertex <id> <x> <y> <open> <close> <profit> <max_service>   (n lines)
//   travel
//   <n rows of n floats>
//
// Line order is significant.  Floats are written with %.17g so that a
// save/load round trip reproduces the instance exactly.

void Instance::save(std::ostream& out) const {
  out << "OPTWVP v1\n";
  out << "budget " << g17(budget_) << "\n";
  if (!metadata_.empty()) out << "name " << metadata_ << "\n";
  for (const Vertex& v : vertices_) {
    out << "vertex " << v.id << " " << g17(v.x) << " " << g17(v.y) << " "
        << g17(v.window_open) << " " << g17(v.window_close) << " "
        << g17(v.unit_profit) << " " << g17(v.max_service) << "\n";
  }
  out << "travel\n";
  const int n = size();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) out << " ";
      out << g17(travel(i, j));
    }
    out << "\n";
  }
}

void Instance::save_file(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  save(f);
  if (!f) throw IoError("write failed for " + path);
}

std::string Instance::save_string() const {
  std::ostringstream out;
  save(out);
  return out.str();
}

namespace {

struct LineReader {
  std::istream& in;
  int number = 0;  // 1-based line counter of the last line returned
  bool next(std::string& out) {
    if (!std::getline(in, out)) return false;
    ++number;
    return true;
  }
};

}  // namespace

Instance Instance::load(std::istream& in) {
  LineReader lr{in};
  std::string line;

  if (!lr.next(line)) throw ParseError(1, "empty input, schema mismatch");
  {
    auto toks = split_ws(line);
    if (toks.size() != 2 || toks[0] != "OPTWVP")
      throw ParseError(lr.number, "schema mismatch: expected 'OPTWVP v1'");
    if (toks[1] != "v1")
      throw ParseError(lr.number, "version mismatch: got '" + toks[1] + "'");
  }

  if (!lr.next(line)) throw ParseError(lr.number + 1, "missing budget line");
  double budget;
  {
    auto toks = split_ws(line);
    if (toks.size() != 2 || toks[0] != "budget")
      throw ParseError(lr.number, "expected 'budget <value>'");
    auto v = parse_double(toks[1]);
    if (!v) throw ParseError(lr.number, "budget is not a number: " + toks[1]);
    budget = *v;
  }

  std::string metadata;
  std::vector<Vertex> vs;
  bool saw_travel = false;
  while (lr.next(line)) {
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "name") {
      // everything after the keyword, untouched
      auto pos = line.find("name");
      metadata = trim(line.substr(pos + 4));
      continue;
    }
    if (toks[0] == "travel") {
      saw_travel = true;
      break;
    }
    if (toks[0] != "vertex")
      throw ParseError(lr.number, "expected 'vertex' or 'travel', got '" +
                                      toks[0] + "'");
    if (toks.size() != 8)
      throw ParseError(lr.number, "vertex line needs 7 fields, got " +
                                      std::to_string(toks.size() - 1));
    Vertex v;
    auto id = parse_int(toks[1]);
    if (!id) throw ParseError(lr.number, "bad vertex id: " + toks[1]);
    v.id = static_cast<int>(*id);
    double* fields[6] = {&v.x,           &v.y,           &v.window_open,
                         &v.window_close, &v.unit_profit, &v.max_service};
    for (int k = 0; k < 6; ++k) {
      auto d = parse_double(toks[2 + k]);
      if (!d)
        throw ParseError(lr.number, "bad number in vertex line: " + toks[2 + k]);
      *fields[k] = *d;
    }
    if (v.id != static_cast<int>(vs.size()))
      throw ParseError(lr.number, "vertex ids must be sequential from 0, got " +
                                      std::to_string(v.id) + " at position " +
                                      std::to_string(vs.size()));
    vs.push_back(v);
  }
  if (!saw_travel) throw ParseError(lr.number, "missing travel section");
  if (vs.empty()) throw ParseError(lr.number, "no vertex lines before travel");

  const std::size_t n = vs.size();
  std::vector<double> t;
  t.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!lr.next(line))
      throw ParseError(lr.number, "travel matrix truncated: expected " +
                                      std::to_string(n) + " rows");
    auto toks = split_ws(line);
    if (toks.size() != n)
      throw ParseError(lr.number, "travel row has " +
                                      std::to_string(toks.size()) +
                                      " entries, expected " + std::to_string(n));
    for (const auto& tok : toks) {
      auto d = parse_double(tok);
      if (!d) throw ParseError(lr.number, "bad travel entry: " + tok);
      t.push_back(*d);
    }
  }
  while (lr.next(line)) {
    if (!trim(line).empty())
      throw ParseError(lr.number, "unexpected trailing content: " + trim(line));
  }
  return Instance(std::move(vs), std::move(t), budget, std::move(metadata));
}

Instance Instance::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  return load(f);
}

Instance Instance::load_string(const std::string& text) {
  std::istringstream in(text);
  return load(in);
}

// ---------------------------------------------------------------------------
// Solomon-style files.

Instance Instance::parse_solomon(std::istream& in) {
  LineReader lr{in};
  std::string line;

  // Header: first non-blank line is the instance name.
  std::string name;
  bool have_name = false;
  while (lr.next(line)) {
    std::string t = trim(line);
    if (!t.empty()) {
      name = t;
      have_name = true;
      break;
    }
  }
  if (!have_name) throw ParseError("missing header line");

  // Find the CUSTOMER section.
  bool found = false;
  while (lr.next(line)) {
    auto toks = split_ws(line);
    if (!toks.empty() && toks[0] == "CUSTOMER") {
      found = true;
      break;
    }
  }
  if (!found) throw ParseError("missing CUSTOMER section");

  // Rows start at the first line whose leading token is numeric; anything
  // before that is the column header.
  struct Row {
    long long id;
    double x, y, demand, ready, due, service;
  };
  std::vector<Row> rows;
  while (lr.next(line)) {
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (rows.empty() && !parse_int(toks[0])) continue;  // column header
    if (toks.size() != 7)
      throw ParseError(lr.number, "customer row needs 7 fields, got " +
                                      std::to_string(toks.size()));
    Row r;
    auto id = parse_int(toks[0]);
    if (!id) throw ParseError(lr.number, "bad customer id: " + toks[0]);
    r.id = *id;
    double* fields[6] = {&r.x, &r.y, &r.demand, &r.ready, &r.due, &r.service};
    for (int k = 0; k < 6; ++k) {
      auto d = parse_double(toks[1 + k]);
      if (!d)
        throw ParseError(lr.number, "non-numeric field '" + toks[1 + k] + "'");
      *fields[k] = *d;
    }
    if (r.id != static_cast<long long>(rows.size())) {
      if (rows.empty())
        throw ParseError(lr.number, "missing depot row: first id is " +
                                        std::to_string(r.id));
      throw ParseError(lr.number, "customer ids must be sequential, got " +
                                      std::to_string(r.id));
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw ParseError("missing depot row");

  const double budget = rows[0].due;
  double max_demand = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    max_demand = std::max(max_demand, rows[i].demand);

  std::vector<Vertex> vs(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Vertex& v = vs[i];
    v.id = static_cast<int>(i);
    v.x = rows[i].x;
    v.y = rows[i].y;
    if (i == 0) {
      v.window_open = 0.0;
      v.window_close = budget;
      v.unit_profit = 0.0;
      v.max_service = 0.0;
    } else {
      v.window_open = rows[i].ready;
      v.window_close = rows[i].due;
      v.unit_profit = max_demand > 0.0 ? rows[i].demand / max_demand : 0.0;
      v.max_service = rows[i].service;
    }
  }
  std::vector<double> t = euclidean_matrix(vs);
  return Instance(std::move(vs), std::move(t), budget, name);
}

Instance Instance::parse_solomon_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  return parse_solomon(f);
}

// ---------------------------------------------------------------------------

std::vector<std::string> Instance::validate() const {
  std::vector<std::string> bad;
  const int n = size();
  if (n == 0) {
    bad.push_back("no vertices");
    return bad;
  }
  if (!(budget_ > 0.0)) bad.push_back("budget " + g17(budget_) + " is not positive");

  for (int i = 0; i < n; ++i) {
    const Vertex& v = vertices_[i];
    const std::string tag = "vertex " + std::to_string(i);
    if (v.id != i)
      bad.push_back(tag + ": id " + std::to_string(v.id) +
                    " does not match position");
    for (double f : {v.x, v.y, v.window_open, v.window_close, v.unit_profit,
                     v.max_service})
      if (!std::isfinite(f)) {
        bad.push_back(tag + ": non-finite field");
        break;
      }
    if (v.window_open > v.window_close)
      bad.push_back(tag + ": window [" + g17(v.window_open) + ", " +
                    g17(v.window_close) + "] is inverted");
    if (v.unit_profit < 0.0)
      bad.push_back(tag + ": negative unit profit " + g17(v.unit_profit));
    if (v.max_service < 0.0)
      bad.push_back(tag + ": negative max service " + g17(v.max_service));
  }
  const Vertex& depot = vertices_[0];
  if (depot.unit_profit != 0.0) bad.push_back("depot has nonzero unit profit");
  if (depot.max_service != 0.0) bad.push_back("depot has nonzero max service");
  if (depot.window_open != 0.0 || depot.window_close != budget_)
    bad.push_back("depot window must be [0, budget], got [" +
                  g17(depot.window_open) + ", " + g17(depot.window_close) + "]");

  if (travel_.size() != static_cast<std::size_t>(n) * n) {
    bad.push_back("travel matrix has " + std::to_string(travel_.size()) +
                  " entries, expected " + std::to_string(n * n));
    return bad;  // cell checks would index out of bounds
  }
  for (int i = 0; i < n; ++i) {
    if (!(travel(i, i) == 0.0))
      bad.push_back("travel[" + std::to_string(i) + "][" + std::to_string(i) +
                    "] is " + g17(travel(i, i)) + ", diagonal must be zero");
    for (int j = 0; j < n; ++j) {
      if (travel(i, j) < 0.0)
        bad.push_back("travel[" + std::to_string(i) + "][" + std::to_string(j) +
                      "] is negative (" + g17(travel(i, j)) + ")");
      if (j > i && travel(i, j) != travel(j, i))
        bad.push_back("travel[" + std::to_string(i) + "][" + std::to_string(j) +
                      "] != travel[" + std::to_string(j) + "][" +
                      std::to_string(i) + "], matrix must be symmetric");
    }
  }
  return bad;
}

}  // namespace optwvp
