#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hysparse/core.hpp"
#include "hysparse/numeric.hpp"

namespace hysparse {

// Fully materialized hypergraph. Offline tooling only (verification, tests,
// generators); the online sampler never holds one of these.
struct StoredHypergraph {
  int n = 0;
  std::vector<Hyperedge> edges;

  double total_weight() const {
    KahanSum s;
    for (const auto& e : edges) s.add(e.weight);
    return s.value();
  }
};

// Q_H(z) = sum_e w_e * Q_e(z).
inline double hypergraph_energy(const StoredHypergraph& H, std::span<const double> z) {
  double q = 0.0;
  for (const auto& e : H.edges) q += e.weight * edge_energy(e, z);
  return q;
}

inline StoredHypergraph read_stored(std::istream& in) {
  StreamParser parser(in);
  StoredHypergraph H;
  H.n = parser.header().n;
  if (parser.header().m_hint && *parser.header().m_hint >= 0) {
    H.edges.reserve(static_cast<std::size_t>(*parser.header().m_hint));
  }
  while (auto e = parser.next()) H.edges.push_back(std::move(*e));
  return H;
}

inline StoredHypergraph read_stored_text(const std::string& text) {
  std::istringstream in(text);
  return read_stored(in);
}

inline void write_stream(std::ostream& out, const StoredHypergraph& H) {
  out << "H " << H.n << ' ' << H.edges.size() << '\n';
  for (const auto& e : H.edges) {
    out << format_double(e.weight);
    for (int v : e.vertices) out << ' ' << v;
    out << '\n';
  }
}

}  // namespace hysparse
