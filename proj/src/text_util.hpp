#pragma once

// Small text helpers shared by the parsers and writers.  Header-only and
// internal to the library; not part of the public interface.

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

namespace optwvp::detail {

// Shortest decimal form that round-trips a double exactly.
inline std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Fixed 6 decimals, used by the benchmark exports.
inline std::string f6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

// Whole-token double parse; rejects trailing junk like "1.5x".
inline std::optional<double> parse_double(const std::string& tok) {
  if (tok.empty()) return std::nullopt;
  const char* begin = tok.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + tok.size()) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(const std::string& tok) {
  if (tok.empty()) return std::nullopt;
  const char* begin = tok.c_str();
  char* end = nullptr;
  long long v = std::strtoll(begin, &end, 10);
  if (end != begin + tok.size()) return std::nullopt;
  return v;
}

}  // namespace optwvp::detail
