#include "optwvp/solution.hpp"

#include <algorithm>
#include <sstream>

#include "optwvp/errors.hpp"
#include "text_util.hpp"

namespace optwvp {

using detail::g17;
using detail::parse_double;
using detail::parse_int;
using detail::split_ws;

void validate_trajectory(const Instance& inst, const Trajectory& traj) {
  const auto& v = traj.visits;
  if (v.size() < 2)
    throw ParameterError("trajectory needs at least the two depot visits");
  if (v.front() != 0 || v.back() != 0)
    throw ParameterError("trajectory must start and end at the depot");
  std::vector<char> seen(inst.size(), 0);
  for (std::size_t k = 1; k + 1 < v.size(); ++k) {
    int id = v[k];
    if (id <= 0 || id >= inst.size())
      throw ParameterError("trajectory visits vertex " + std::to_string(id) +
                           " outside 1.." + std::to_string(inst.size() - 1));
    if (seen[id])
      throw ParameterError("trajectory visits vertex " + std::to_string(id) +
                           " twice");
    seen[id] = 1;
  }
}

std::vector<double> propagate_starts(const Instance& inst,
                                     const Trajectory& traj,
                                     const std::vector<double>& services) {
  validate_trajectory(inst, traj);
  if (services.size() != traj.visits.size())
    throw ParameterError("services has " + std::to_string(services.size()) +
                         " entries for a trajectory of length " +
                         std::to_string(traj.visits.size()));
  const auto& v = traj.visits;
  std::vector<double> s(v.size());
  s[0] = 0.0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    double arrive = s[k - 1] + services[k - 1] + inst.travel(v[k - 1], v[k]);
    s[k] = std::max(arrive, inst.vertex(v[k]).window_open);
  }
  return s;
}

std::vector<std::string> check_feasibility(const Instance& inst,
                                           const Schedule& sched) {
  std::vector<std::string> bad;
  const auto& v = sched.trajectory.visits;
  try {
    validate_trajectory(inst, sched.trajectory);
  } catch (const ParameterError& e) {
    bad.push_back(e.what());
    return bad;
  }
  if (sched.starts.size() != v.size() || sched.services.size() != v.size()) {
    bad.push_back("starts/services not aligned with trajectory length " +
                  std::to_string(v.size()));
    return bad;
  }
  const double tol = kFeasibilityTol;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Vertex& vx = inst.vertex(v[k]);
    const std::string at =
        "visit " + std::to_string(k) + " (vertex " + std::to_string(v[k]) + ")";
    const double d = sched.services[k];
    const double s = sched.starts[k];
    if (d < -tol) bad.push_back(at + ": negative service " + g17(d));
    if (d > vx.max_service + tol)
      bad.push_back(at + ": service " + g17(d) + " exceeds max " +
                    g17(vx.max_service));
    if (s < vx.window_open - tol)
      bad.push_back(at + ": start " + g17(s) + " before window open " +
                    g17(vx.window_open));
    if (s > vx.window_close + tol)
      bad.push_back(at + ": start " + g17(s) + " after window close " +
                    g17(vx.window_close));
    if (k > 0) {
      double arrive =
          sched.starts[k - 1] + sched.services[k - 1] + inst.travel(v[k - 1], v[k]);
      if (s < arrive - tol)
        bad.push_back(at + ": start " + g17(s) +
                      " precedes arrival from previous visit " + g17(arrive));
    }
  }
  if (sched.starts[0] < -tol)
    bad.push_back("tour starts before time zero: " + g17(sched.starts[0]));
  if (sched.starts.back() > inst.budget() + tol)
    bad.push_back("final depot start " + g17(sched.starts.back()) +
                  " exceeds budget " + g17(inst.budget()));
  return bad;
}

double reward(const Instance& inst, const Schedule& sched) {
  double r = 0.0;
  const auto& v = sched.trajectory.visits;
  for (std::size_t k = 0; k < v.size(); ++k)
    r += inst.vertex(v[k]).unit_profit * sched.services[k];
  return r;
}

double ptar(const Instance& inst, const Schedule& sched) {
  double r = 0.0;
  const auto& v = sched.trajectory.visits;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] == 0) continue;  // depot collects nothing
    double entering = inst.travel(v[k - 1], v[k]);
    r += inst.vertex(v[k]).unit_profit * sched.services[k] /
         std::max(entering, kTravelFloor);
  }
  return r;
}

void write_schedule(std::ostream& out, const Schedule& sched) {
  out << "route";
  for (int id : sched.trajectory.visits) out << " " << id;
  out << "\nstarts";
  for (double s : sched.starts) out << " " << g17(s);
  out << "\nservices";
  for (double d : sched.services) out << " " << g17(d);
  out << "\n";
}

std::string schedule_to_string(const Schedule& sched) {
  std::ostringstream out;
  write_schedule(out, sched);
  return out.str();
}

Schedule parse_schedule(std::istream& in) {
  Schedule sched;
  std::string line;
  int lineno = 0;
  const char* expect[3] = {"route", "starts", "services"};
  for (int part = 0; part < 3; ++part) {
    do {
      if (!std::getline(in, line))
        throw ParseError(lineno, std::string("missing '") + expect[part] +
                                     "' line");
      ++lineno;
    } while (detail::trim(line).empty());
    auto toks = split_ws(line);
    if (toks.empty() || toks[0] != expect[part])
      throw ParseError(lineno, std::string("expected '") + expect[part] +
                                   "', got '" + (toks.empty() ? "" : toks[0]) +
                                   "'");
    for (std::size_t i = 1; i < toks.size(); ++i) {
      if (part == 0) {
        auto id = parse_int(toks[i]);
        if (!id) throw ParseError(lineno, "bad vertex id: " + toks[i]);
        sched.trajectory.visits.push_back(static_cast<int>(*id));
      } else {
        auto d = parse_double(toks[i]);
        if (!d) throw ParseError(lineno, "bad number: " + toks[i]);
        (part == 1 ? sched.starts : sched.services).push_back(*d);
      }
    }
  }
  const std::size_t l = sched.trajectory.visits.size();
  if (sched.starts.size() != l || sched.services.size() != l)
    throw ParseError("route/starts/services lengths disagree");
  return sched;
}

Schedule parse_schedule_string(const std::string& text) {
  std::istringstream in(text);
  return parse_schedule(in);
}

}  // namespace optwvp
