#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "hysparse/ridged_laplacian.hpp"
#include "hysparse/rng.hpp"

using namespace hysparse;

namespace {

struct PairUpdate {
  int u, v;
  double w;
};

std::vector<PairUpdate> random_updates(int n, int count, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<PairUpdate> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int u = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    int v = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - 1)));
    if (v >= u) ++v;
    const double w = std::exp(std::log(0.5) + rng.next_double() * std::log(4.0));
    out.push_back({u, v, w});
  }
  return out;
}

Eigen::MatrixXd dense_ridged(const RidgedLaplacianState& st) {
  Eigen::MatrixXd m = st.laplacian();
  m.diagonal().array() += st.eta();
  return m;
}

double fresh_logdet(const RidgedLaplacianState& st) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_ridged(st));
  return es.eigenvalues().array().log().sum();
}

Eigen::MatrixXd fresh_inverse(const RidgedLaplacianState& st) {
  const Eigen::MatrixXd m = dense_ridged(st);
  return m.llt().solve(Eigen::MatrixXd::Identity(st.n(), st.n()));
}

}  // namespace

TEST_CASE("empty state: inverse, logdet, resistance") {
  RidgedLaplacianState st(6, 2.0);
  CHECK(st.trace() == 0.0);
  CHECK(st.logdet() == Catch::Approx(6.0 * std::log(2.0)).epsilon(1e-15));
  // Fresh state resistance is exactly 2/eta.
  CHECK(st.effective_resistance(0, 5) == 1.0);
  CHECK(st.inverse()(0, 0) == 0.5);
  CHECK(st.inverse()(0, 1) == 0.0);
}

TEST_CASE("maintained inverse and logdet match fresh factorizations") {
  const int n = 8;
  RidgedLaplacianState st(n, 0.7);
  for (const auto& [u, v, w] : random_updates(n, 50, 11)) {
    st.add_pair(u, v, w);
  }
  const Eigen::MatrixXd inv = fresh_inverse(st);
  CHECK((st.inverse() - inv).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(st.logdet() - fresh_logdet(st)) < 1e-10);
}

TEST_CASE("effective resistance equals the quadratic form of the inverse") {
  const int n = 9;
  RidgedLaplacianState st(n, 1.3);
  for (const auto& [u, v, w] : random_updates(n, 70, 5)) st.add_pair(u, v, w);
  const Eigen::MatrixXd m = dense_ridged(st);
  SplitMix64 rng(99);
  for (int t = 0; t < 20; ++t) {
    const int u = static_cast<int>(rng.next_below(n));
    int v = static_cast<int>(rng.next_below(n - 1));
    if (v >= u) ++v;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(u) = 1.0;
    b(v) = -1.0;
    const double direct = b.dot(m.llt().solve(b));
    CHECK(st.effective_resistance(u, v) == Catch::Approx(direct).margin(1e-11));
  }
}

TEST_CASE("logdet increment is log1p of the weighted resistance") {
  RidgedLaplacianState st(5, 0.9);
  st.add_pair(0, 3, 2.0);
  st.add_pair(1, 2, 0.5);
  const double before = st.logdet();
  const double r = st.effective_resistance(1, 4);
  st.add_pair(1, 4, 1.7);
  CHECK(st.logdet() - before == Catch::Approx(std::log1p(1.7 * r)).epsilon(1e-13));
}

TEST_CASE("updates never increase any effective resistance") {
  const int n = 10;
  RidgedLaplacianState st(n, 1.0);
  std::vector<double> prev;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) prev.push_back(st.effective_resistance(u, v));
  }
  for (const auto& [u, v, w] : random_updates(n, 200, 21)) {
    st.add_pair(u, v, w);
    std::size_t idx = 0;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b, ++idx) {
        const double cur = st.effective_resistance(a, b);
        CHECK(cur <= prev[idx] + 1e-10);
        prev[idx] = cur;
      }
    }
  }
}

TEST_CASE("resistances stay within (0, 2/eta]") {
  const int n = 7;
  const double eta = 0.25;
  RidgedLaplacianState st(n, eta);
  for (const auto& [u, v, w] : random_updates(n, 120, 31)) {
    st.add_pair(u, v, w);
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        const double r = st.effective_resistance(a, b);
        CHECK(r > 0.0);
        CHECK(r <= 2.0 / eta + 1e-12);
      }
    }
  }
}

TEST_CASE("the maintained inverse stays exactly symmetric") {
  const int n = 12;
  RidgedLaplacianState st(n, 0.4, 1 << 30);
  for (const auto& [u, v, w] : random_updates(n, 500, 41)) st.add_pair(u, v, w);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      CHECK(st.inverse()(i, j) == st.inverse()(j, i));
    }
  }
}

TEST_CASE("the ridge is never folded into the stored Laplacian") {
  const int n = 6;
  RidgedLaplacianState st(n, 3.0);
  double twice_weight = 0.0;
  for (const auto& [u, v, w] : random_updates(n, 40, 51)) {
    st.add_pair(u, v, w);
    twice_weight += 2.0 * w;
  }
  CHECK(st.laplacian().rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(st.trace() == Catch::Approx(twice_weight).epsilon(1e-12));
}

TEST_CASE("refresh restores agreement and resets the counter") {
  const int n = 10;
  RidgedLaplacianState st(n, 0.8, 1 << 30);
  for (const auto& [u, v, w] : random_updates(n, 3000, 61)) st.add_pair(u, v, w);
  CHECK(st.updates_since_refresh() == 3000);
  st.refresh();
  CHECK(st.updates_since_refresh() == 0);
  CHECK((st.inverse() - fresh_inverse(st)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(st.logdet() - fresh_logdet(st)) < 1e-11);
}

TEST_CASE("maybe_refresh fires exactly at the period") {
  RidgedLaplacianState st(4, 1.0, 16);
  for (int i = 0; i < 15; ++i) st.add_pair(0, 1 + (i % 3), 1.0);
  CHECK_FALSE(st.maybe_refresh());
  st.add_pair(0, 1, 1.0);
  CHECK(st.updates_since_refresh() == 16);
  CHECK(st.maybe_refresh());
  CHECK(st.updates_since_refresh() == 0);
}

TEST_CASE("drift after ten thousand updates stays inside the contract") {
  const int n = 24;
  RidgedLaplacianState st(n, 0.5, 1 << 30);  // refresh disabled
  for (const auto& [u, v, w] : random_updates(n, 10000, 71)) st.add_pair(u, v, w);
  CHECK(st.updates_since_refresh() == 10000);
  CHECK((st.inverse() - fresh_inverse(st)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(std::abs(st.logdet() - fresh_logdet(st)) < 1e-8);
}

TEST_CASE("zero-weight updates are no-ops") {
  RidgedLaplacianState st(5, 1.0);
  const Eigen::MatrixXd inv = st.inverse();
  const double ld = st.logdet();
  st.add_pair(1, 3, 0.0);
  CHECK(st.inverse() == inv);
  CHECK(st.logdet() == ld);
  CHECK(st.updates_since_refresh() == 0);
}

TEST_CASE("constructor and update validation") {
  CHECK_THROWS_AS(RidgedLaplacianState(1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(RidgedLaplacianState(4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(RidgedLaplacianState(4, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(RidgedLaplacianState(4, 1.0, 0), std::invalid_argument);
  RidgedLaplacianState st(4, 1.0);
  CHECK_THROWS_AS(st.add_pair(0, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(st.add_pair(0, 4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(st.add_pair(0, 1, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(st.effective_resistance(2, 2), std::invalid_argument);
}

TEST_CASE("footprint reflects the dense state") {
  RidgedLaplacianState st(30, 1.0);
  CHECK(st.footprint_doubles() >= 2 * 30 * 30);
  CHECK(st.footprint_doubles() <= 2 * 30 * 30 + 64 + 30);
}

TEST_CASE("cumulative weight uses compensated summation") {
  RidgedLaplacianState st(4, 1.0);
  for (int i = 0; i < 100000; ++i) st.add_edge_weight(0.1);
  CHECK(st.cum_weight() == Catch::Approx(10000.0).epsilon(1e-13));
}
