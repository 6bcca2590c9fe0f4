#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace optwvp {

// One vertex of the problem graph.  Vertex 0 is always the depot; its window
// is pinned to [0, budget] and it carries no profit and no service capacity.
struct Vertex {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  double window_open = 0.0;   // earliest allowed service start
  double window_close = 0.0;  // latest allowed service start (start, not end)
  double unit_profit = 0.0;   // profit collected per unit of service time
  double max_service = 0.0;   // upper bound on service duration here

  bool operator==(const Vertex&) const = default;
};

// Immutable problem data: vertices, a dense travel-time matrix and the tour
// budget.  The constructor stores what it is given without judging it;
// validate() reports violations so tests can build broken instances on
// purpose.  The only structural requirement enforced eagerly is that the
// matrix has one row per vertex, since the accessors cannot index it
// otherwise.
class Instance {
public:
  Instance(std::vector<Vertex> vertices, std::vector<double> travel,
           double budget, std::string metadata = "");

  // Random instance: coordinates uniform in [0,100]^2, Euclidean travel,
  // customer windows [o, o+window_width] with o uniform in
  // [0, budget-window_width], unit profits in (0,1], max service in
  // (0, window_width].  Deterministic for a given seed.
  static Instance generate(int n, double window_width, double budget,
                           std::uint64_t seed);

  // Native text format, see README for the exact layout.  All floats are
  // written with enough digits that save/load round-trips exactly.
  static Instance load(std::istream& in);
  static Instance load_file(const std::string& path);
  static Instance load_string(const std::string& text);
  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  std::string save_string() const;

  // Solomon-style benchmark files (header line, VEHICLE section, CUSTOMER
  // table).  Demands are rescaled to unit profits in (0,1]; the service-time
  // column becomes max_service; the depot due date becomes the budget.
  static Instance parse_solomon(std::istream& in);
  static Instance parse_solomon_file(const std::string& path);

  int size() const { return static_cast<int>(vertices_.size()); }
  const Vertex& vertex(int i) const { return vertices_[i]; }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  double travel(int from, int to) const {
    return travel_[static_cast<std::size_t>(from) * vertices_.size() + to];
  }
  double budget() const { return budget_; }
  const std::string& metadata() const { return metadata_; }

  // Human-readable list of invariant violations; empty means well-formed.
  std::vector<std::string> validate() const;

  bool operator==(const Instance&) const = default;

private:
  std::vector<Vertex> vertices_;
  std::vector<double> travel_;  // row-major size() x size()
  double budget_ = 0.0;
  std::string metadata_;
};

}  // namespace optwvp
