#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hysparse {

// One weighted hyperedge. Vertices are distinct 0-based ids in ascending
// order; the weight is strictly positive and finite.
struct Hyperedge {
  std::vector<int> vertices;
  double weight = 0.0;

  int size() const { return static_cast<int>(vertices.size()); }
};

// Throws std::invalid_argument if e is not a valid hyperedge over n vertices.
inline void validate_hyperedge(const Hyperedge& e, int n) {
  if (!(std::isfinite(e.weight) && e.weight > 0.0)) {
    throw std::invalid_argument("hyperedge weight must be positive and finite");
  }
  if (e.vertices.size() < 2) {
    throw std::invalid_argument("hyperedge needs at least 2 distinct vertices");
  }
  int prev = -1;
  for (int v : e.vertices) {
    if (v < 0 || v >= n) {
      throw std::invalid_argument("hyperedge vertex id out of range");
    }
    if (v <= prev) {
      throw std::invalid_argument("hyperedge vertices must be strictly ascending");
    }
    prev = v;
  }
}

// Q_e(z) = max_{u,v in e} (z(u) - z(v))^2 = (max_e z - min_e z)^2.
inline double edge_energy(const Hyperedge& e, std::span<const double> z) {
  if (e.vertices.empty()) return 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int v : e.vertices) {
    if (v < 0 || static_cast<std::size_t>(v) >= z.size()) {
      throw std::invalid_argument("edge_energy: vertex id out of range for the probe vector");
    }
    lo = std::min(lo, z[static_cast<std::size_t>(v)]);
    hi = std::max(hi, z[static_cast<std::size_t>(v)]);
  }
  const double d = hi - lo;
  return d * d;
}

// Header line `H <n> [m]`. The edge count is a hint for humans and tools that
// preallocate; nothing in the online pipeline is allowed to act on it.
struct StreamHeader {
  int n = 0;
  std::optional<long long> m_hint;
};

// Parse failure with the 1-based line number it occurred on. The message
// aggregates every problem found on that line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool parse_double(const std::string& tok, double& out) {
  const char* s = tok.c_str();
  char* end = nullptr;
  out = std::strtod(s, &end);
  return end == s + tok.size() && end != s;
}

inline bool parse_ll(const std::string& tok, long long& out) {
  const char* s = tok.c_str();
  char* end = nullptr;
  out = std::strtoll(s, &end, 10);
  return end == s + tok.size() && end != s;
}

}  // namespace detail

// Forward-only pull parser for the text stream format:
//
//   H <n> [m]              header, first content line
//   <w> <v1> <v2> ... <vk> one hyperedge per line
//
// Full-line '#' comments and blank lines are skipped anywhere. Duplicate
// vertex ids on an edge line are merged before validation, so "1 3 3 5" is
// the pair {3,5}. Errors carry the line number and list every issue found on
// the offending line.
class StreamParser {
 public:
  explicit StreamParser(std::istream& in) : in_(&in) { parse_header(); }

  const StreamHeader& header() const { return header_; }

  // Next validated hyperedge, or nullopt at end of stream.
  std::optional<Hyperedge> next() {
    std::string line;
    if (!next_content_line(line)) return std::nullopt;

    const auto tokens = detail::split_ws(line);
    std::vector<std::string> issues;

    Hyperedge e;
    if (!detail::parse_double(tokens[0], e.weight)) {
      issues.push_back("unparsable weight '" + tokens[0] + "'");
    } else if (!(std::isfinite(e.weight) && e.weight > 0.0)) {
      issues.push_back("weight must be positive and finite, got '" + tokens[0] + "'");
    }

    e.vertices.reserve(tokens.size() - 1);
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      long long v = 0;
      if (!detail::parse_ll(tokens[t], v)) {
        issues.push_back("unparsable vertex id '" + tokens[t] + "'");
      } else if (v < 0 || v >= header_.n) {
        issues.push_back("vertex id " + tokens[t] + " out of range [0, " +
                         std::to_string(header_.n) + ")");
      } else {
        e.vertices.push_back(static_cast<int>(v));
      }
    }

    std::sort(e.vertices.begin(), e.vertices.end());
    e.vertices.erase(std::unique(e.vertices.begin(), e.vertices.end()),
                     e.vertices.end());
    if (e.vertices.size() < 2) {
      issues.push_back("edge has fewer than 2 distinct vertices");
    }

    if (!issues.empty()) {
      std::string msg = issues[0];
      for (std::size_t k = 1; k < issues.size(); ++k) msg += "; " + issues[k];
      throw ParseError(line_no_, msg);
    }
    return e;
  }

  std::size_t line_number() const { return line_no_; }

 private:
  void parse_header() {
    std::string line;
    if (!next_content_line(line)) {
      throw ParseError(line_no_ == 0 ? 1 : line_no_, "missing header line 'H <n> [m]'");
    }
    const auto tokens = detail::split_ws(line);
    std::vector<std::string> issues;
    if (tokens[0] != "H") {
      issues.push_back("expected header tag 'H', got '" + tokens[0] + "'");
    }
    if (tokens.size() < 2 || tokens.size() > 3) {
      issues.push_back("header must be 'H <n>' or 'H <n> <m>'");
    }
    if (tokens.size() >= 2) {
      long long n = 0;
      if (!detail::parse_ll(tokens[1], n) || n < 2) {
        issues.push_back("vertex count must be an integer >= 2, got '" + tokens[1] + "'");
      } else if (n > std::numeric_limits<int>::max()) {
        issues.push_back("vertex count too large");
      } else {
        header_.n = static_cast<int>(n);
      }
    }
    if (tokens.size() == 3) {
      long long m = 0;
      if (!detail::parse_ll(tokens[2], m) || m < 0) {
        issues.push_back("edge-count hint must be a nonnegative integer, got '" + tokens[2] + "'");
      } else {
        header_.m_hint = m;
      }
    }
    if (!issues.empty()) {
      std::string msg = issues[0];
      for (std::size_t k = 1; k < issues.size(); ++k) msg += "; " + issues[k];
      throw ParseError(line_no_, msg);
    }
  }

  // Advances to the next non-blank, non-comment line. False at EOF.
  bool next_content_line(std::string& line) {
    while (std::getline(*in_, line)) {
      ++line_no_;
      std::size_t i = 0;
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i == line.size()) continue;
      if (line[i] == '#') continue;
      return true;
    }
    return false;
  }

  std::istream* in_;
  StreamHeader header_;
  std::size_t line_no_ = 0;
};

}  // namespace hysparse
