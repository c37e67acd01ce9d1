#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hysparse/core.hpp"
#include "hysparse/numeric.hpp"
#include "hysparse/rng.hpp"

namespace hysparse {

enum class RankDist { kFixed, kUniform };
enum class WeightDist { kConstant, kLogUniform };
enum class GenModel { kUniform, kPlanted, kGraphOnly };

// Synthetic stream description. Edge i is produced from substream(seed, i),
// so streams with the same spec are identical regardless of how they are
// consumed, and a prefix of a longer stream matches the shorter one.
struct GenSpec {
  int n = 0;
  long long m = 0;
  int rank = 2;                 // max edge size (exact size when kFixed)
  RankDist rank_dist = RankDist::kUniform;
  double w_min = 1.0;
  double w_max = 1.0;
  WeightDist weight_dist = WeightDist::kConstant;
  GenModel model = GenModel::kUniform;
  int clusters = 4;             // kPlanted only
  double in_cluster = 0.9;      // kPlanted: probability an edge stays in one block
  std::uint64_t seed = 0;
};

namespace detail {

inline void validate_gen_spec(const GenSpec& g) {
  if (g.n < 2) throw std::invalid_argument("generator: n must be >= 2");
  if (g.m < 0) throw std::invalid_argument("generator: m must be >= 0");
  const int max_rank = g.model == GenModel::kGraphOnly ? 2 : g.rank;
  if (max_rank < 2 || max_rank > g.n) {
    throw std::invalid_argument("generator: rank must be in [2, n]");
  }
  if (!(g.w_min > 0.0 && std::isfinite(g.w_min)) ||
      !(g.w_max >= g.w_min && std::isfinite(g.w_max))) {
    throw std::invalid_argument("generator: weights need 0 < w_min <= w_max < inf");
  }
  if (g.model == GenModel::kPlanted) {
    if (g.clusters < 1) throw std::invalid_argument("generator: clusters must be >= 1");
    if (g.n / g.clusters < max_rank) {
      throw std::invalid_argument("generator: planted blocks smaller than the edge rank");
    }
    if (!(g.in_cluster >= 0.0 && g.in_cluster <= 1.0)) {
      throw std::invalid_argument("generator: in_cluster must be in [0, 1]");
    }
  }
}

// Floyd's algorithm: s distinct values from [lo, lo + range).
inline std::vector<int> sample_distinct(SplitMix64& rng, int lo, int range, int s) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(s));
  for (int j = range - s; j < range; ++j) {
    const int t = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(j) + 1));
    if (std::find(out.begin(), out.end(), lo + t) == out.end()) {
      out.push_back(lo + t);
    } else {
      out.push_back(lo + j);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

// Edge i of the stream described by g (0-based). Exposed separately so tests
// can cross-check prefix stability.
inline Hyperedge generate_edge(const GenSpec& g, long long i) {
  SplitMix64 rng = substream(g.seed, static_cast<std::uint64_t>(i));

  int s = 2;
  if (g.model != GenModel::kGraphOnly) {
    if (g.rank_dist == RankDist::kFixed) {
      s = g.rank;
    } else {
      s = 2 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(g.rank - 1)));
    }
  }

  Hyperedge e;
  if (g.model == GenModel::kPlanted && rng.next_double() < g.in_cluster) {
    const int b = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(g.clusters)));
    const int lo = static_cast<int>((static_cast<long long>(b) * g.n) / g.clusters);
    const int hi = static_cast<int>((static_cast<long long>(b + 1) * g.n) / g.clusters);
    e.vertices = detail::sample_distinct(rng, lo, hi - lo, s);
  } else {
    e.vertices = detail::sample_distinct(rng, 0, g.n, s);
  }

  if (g.weight_dist == WeightDist::kConstant) {
    e.weight = g.w_min;
  } else {
    const double lw = std::log(g.w_min);
    const double hw = std::log(g.w_max);
    e.weight = std::exp(lw + rng.next_double() * (hw - lw));
  }
  return e;
}

// Full stream as text, header included.
inline std::string generate_stream(const GenSpec& g) {
  detail::validate_gen_spec(g);
  std::ostringstream out;
  out << "H " << g.n << ' ' << g.m << '\n';
  for (long long i = 0; i < g.m; ++i) {
    const Hyperedge e = generate_edge(g, i);
    out << format_double(e.weight);
    for (int v : e.vertices) out << ' ' << v;
    out << '\n';
  }
  return out.str();
}

}  // namespace hysparse
