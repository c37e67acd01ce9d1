#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hysparse/generator.hpp"
#include "hysparse/stored.hpp"

using namespace hysparse;

namespace {

GenSpec base_spec() {
  GenSpec g;
  g.n = 30;
  g.m = 500;
  g.rank = 5;
  g.seed = 42;
  return g;
}

}  // namespace

TEST_CASE("generation is deterministic in the spec") {
  const GenSpec g = base_spec();
  CHECK(generate_stream(g) == generate_stream(g));
  GenSpec g2 = g;
  g2.seed = 43;
  CHECK(generate_stream(g) != generate_stream(g2));
}

TEST_CASE("a shorter stream is a prefix of a longer one") {
  GenSpec g = base_spec();
  for (long long i = 0; i < 50; ++i) {
    const Hyperedge a = generate_edge(g, i);
    GenSpec g2 = g;
    g2.m = 1000;
    const Hyperedge b = generate_edge(g2, i);
    CHECK(a.vertices == b.vertices);
    CHECK(a.weight == b.weight);
  }
}

TEST_CASE("generated streams parse and respect the spec") {
  GenSpec g = base_spec();
  g.w_min = 0.5;
  g.w_max = 4.0;
  g.weight_dist = WeightDist::kLogUniform;
  const StoredHypergraph H = read_stored_text(generate_stream(g));
  REQUIRE(H.n == g.n);
  REQUIRE(static_cast<long long>(H.edges.size()) == g.m);
  for (const auto& e : H.edges) {
    CHECK_NOTHROW(validate_hyperedge(e, g.n));
    CHECK(e.size() >= 2);
    CHECK(e.size() <= g.rank);
    CHECK(e.weight >= g.w_min);
    CHECK(e.weight <= g.w_max);
  }
}

TEST_CASE("constant weights use w_min") {
  GenSpec g = base_spec();
  g.w_min = g.w_max = 2.25;
  g.m = 40;
  const StoredHypergraph H = read_stored_text(generate_stream(g));
  for (const auto& e : H.edges) CHECK(e.weight == 2.25);
}

TEST_CASE("uniform rank distribution covers 2..rank evenly") {
  GenSpec g = base_spec();
  g.rank = 4;
  g.m = 6000;
  const StoredHypergraph H = read_stored_text(generate_stream(g));
  std::vector<long long> counts(static_cast<std::size_t>(g.rank) + 1, 0);
  for (const auto& e : H.edges) ++counts[static_cast<std::size_t>(e.size())];
  const double expected = 6000.0 / 3.0;
  const double sigma = std::sqrt(6000.0 * (1.0 / 3.0) * (2.0 / 3.0));
  for (int s = 2; s <= 4; ++s) {
    CHECK(std::abs(counts[static_cast<std::size_t>(s)] - expected) < 5.0 * sigma);
  }
}

TEST_CASE("fixed rank distribution pins the edge size") {
  GenSpec g = base_spec();
  g.rank = 3;
  g.rank_dist = RankDist::kFixed;
  g.m = 100;
  const StoredHypergraph H = read_stored_text(generate_stream(g));
  for (const auto& e : H.edges) CHECK(e.size() == 3);
}

TEST_CASE("log-uniform weights have the right log mean") {
  GenSpec g = base_spec();
  g.m = 4000;
  g.w_min = 0.1;
  g.w_max = 10.0;
  g.weight_dist = WeightDist::kLogUniform;
  const StoredHypergraph H = read_stored_text(generate_stream(g));
  double s = 0.0;
  for (const auto& e : H.edges) s += std::log(e.weight);
  const double mean = s / static_cast<double>(g.m);
  const double span = std::log(g.w_max) - std::log(g.w_min);
  const double sigma_mean = span / std::sqrt(12.0 * static_cast<double>(g.m));
  CHECK(std::abs(mean - 0.5 * (std::log(g.w_min) + std::log(g.w_max))) <
        5.0 * sigma_mean);
}

TEST_CASE("planted model keeps edges inside blocks") {
  GenSpec g;
  g.n = 40;
  g.m = 300;
  g.rank = 4;
  g.model = GenModel::kPlanted;
  g.clusters = 4;
  g.in_cluster = 1.0;
  g.seed = 7;
  const StoredHypergraph H = read_stored_text(generate_stream(g));
  for (const auto& e : H.edges) {
    const int block = e.vertices.front() / 10;
    for (int v : e.vertices) CHECK(v / 10 == block);
  }
}

TEST_CASE("planted model mixes in global edges") {
  GenSpec g;
  g.n = 40;
  g.m = 2000;
  g.rank = 3;
  g.model = GenModel::kPlanted;
  g.clusters = 4;
  g.in_cluster = 0.9;
  g.seed = 9;
  const StoredHypergraph H = read_stored_text(generate_stream(g));
  long long in_block = 0;
  for (const auto& e : H.edges) {
    const int block = e.vertices.front() / 10;
    bool same = true;
    for (int v : e.vertices) same = same && (v / 10 == block);
    in_block += same ? 1 : 0;
  }
  // 90% planted plus the global edges that land in one block by chance.
  CHECK(in_block > 1600);
  CHECK(in_block < 2000);
}

TEST_CASE("graph model emits only pairs") {
  GenSpec g = base_spec();
  g.model = GenModel::kGraphOnly;
  g.m = 200;
  const StoredHypergraph H = read_stored_text(generate_stream(g));
  for (const auto& e : H.edges) CHECK(e.size() == 2);
}

TEST_CASE("empty stream is just a header") {
  GenSpec g = base_spec();
  g.m = 0;
  CHECK(generate_stream(g) == "H 30 0\n");
}

TEST_CASE("invalid generator specs are rejected") {
  GenSpec g = base_spec();
  g.rank = 31;
  CHECK_THROWS_AS(generate_stream(g), std::invalid_argument);
  g = base_spec();
  g.n = 1;
  CHECK_THROWS_AS(generate_stream(g), std::invalid_argument);
  g = base_spec();
  g.w_min = 0.0;
  CHECK_THROWS_AS(generate_stream(g), std::invalid_argument);
  g = base_spec();
  g.w_max = 0.1;  // below w_min = 1
  CHECK_THROWS_AS(generate_stream(g), std::invalid_argument);
  g = base_spec();
  g.model = GenModel::kPlanted;
  g.clusters = 16;  // blocks of <2 vertices cannot host rank-5 edges
  CHECK_THROWS_AS(generate_stream(g), std::invalid_argument);
}

TEST_CASE("vertex coverage is complete for long uniform streams") {
  GenSpec g = base_spec();
  g.m = 2000;
  const StoredHypergraph H = read_stored_text(generate_stream(g));
  std::vector<bool> seen(static_cast<std::size_t>(g.n), false);
  for (const auto& e : H.edges) {
    for (int v : e.vertices) seen[static_cast<std::size_t>(v)] = true;
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
}
