#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hysparse/core.hpp"
#include "hysparse/numeric.hpp"
#include "hysparse/rng.hpp"
#include "hysparse/sampler.hpp"
#include "hysparse/stored.hpp"

namespace hysparse {

// ---------------------------------------------------------------------------
// Probe-based (eps, delta) check:
//   (1-eps) Q_H(z) - delta ||z||^2 <= Q_Ht(z) <= (1+eps) Q_H(z) + delta ||z||^2
// with numeric slack 1e-9 * (1 + Q_H(z)) on both sides.
//
// Probe schedule: the first min(n, num_probes) probes are the single-vertex
// indicators, then the families cycle: standard normal, normal projected
// against the all-ones vector, and single-pair differences e_u - e_v.
// ---------------------------------------------------------------------------
struct ProbeCheckResult {
  bool pass = true;
  long long probes = 0;
  long long failures = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::vector<double> worst_probe;
};

namespace detail {

struct ProbeBounds {
  double lower = 0.0;
  double upper = 0.0;
};

inline ProbeBounds probe_bounds(double qh, double z2, double epsilon, double delta) {
  const double slack = 1e-9 * (1.0 + qh);
  return {(1.0 - epsilon) * qh - delta * z2 - slack,
          (1.0 + epsilon) * qh + delta * z2 + slack};
}

}  // namespace detail

inline ProbeCheckResult probe_check(const StoredHypergraph& H, const StoredHypergraph& Ht,
                                    double epsilon, double delta, long long num_probes,
                                    std::uint64_t seed) {
  if (H.n != Ht.n) throw std::invalid_argument("probe_check: vertex counts differ");
  const int n = H.n;
  SplitMix64 rng = substream(seed, 0xabc1);
  std::vector<double> z(static_cast<std::size_t>(n));

  ProbeCheckResult res;
  for (long long i = 0; i < num_probes; ++i) {
    std::fill(z.begin(), z.end(), 0.0);
    if (i < n) {
      z[static_cast<std::size_t>(i)] = 1.0;
    } else {
      switch ((i - n) % 3) {
        case 0:
          for (auto& x : z) x = rng.next_normal();
          break;
        case 1: {
          double mean = 0.0;
          for (auto& x : z) {
            x = rng.next_normal();
            mean += x;
          }
          mean /= n;
          for (auto& x : z) x -= mean;
          break;
        }
        default: {
          const int u = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
          int v = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - 1)));
          if (v >= u) ++v;
          z[static_cast<std::size_t>(u)] = 1.0;
          z[static_cast<std::size_t>(v)] = -1.0;
          break;
        }
      }
    }

    const double qh = hypergraph_energy(H, z);
    const double qt = hypergraph_energy(Ht, z);
    double z2 = 0.0;
    for (double x : z) z2 += x * x;
    const auto [lo, hi] = detail::probe_bounds(qh, z2, epsilon, delta);
    const double margin = std::min(qt - lo, hi - qt);
    ++res.probes;
    if (margin < res.worst_margin) {
      res.worst_margin = margin;
      if (margin < 0.0) res.worst_probe = z;
    }
    if (margin < 0.0) ++res.failures;
  }
  res.pass = res.failures == 0;
  return res;
}

// ---------------------------------------------------------------------------
// Exhaustive cut check: the same inequality on every 0/1 indicator vector.
// Exponential in n; refuses n > 22.
// ---------------------------------------------------------------------------
struct CutCheckResult {
  bool pass = true;
  long long cuts = 0;
  long long failures = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::uint64_t worst_mask = 0;
};

inline CutCheckResult cut_check(const StoredHypergraph& H, const StoredHypergraph& Ht,
                                double epsilon, double delta) {
  if (H.n != Ht.n) throw std::invalid_argument("cut_check: vertex counts differ");
  if (H.n > 22) throw std::invalid_argument("cut_check: refusing n > 22 (2^n cuts)");
  const int n = H.n;
  std::vector<double> z(static_cast<std::size_t>(n));

  CutCheckResult res;
  const std::uint64_t total = 1ULL << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    int pop = 0;
    for (int v = 0; v < n; ++v) {
      const bool in = (mask >> v) & 1ULL;
      z[static_cast<std::size_t>(v)] = in ? 1.0 : 0.0;
      pop += in ? 1 : 0;
    }
    const double qh = hypergraph_energy(H, z);
    const double qt = hypergraph_energy(Ht, z);
    const auto [lo, hi] = detail::probe_bounds(qh, static_cast<double>(pop), epsilon, delta);
    const double margin = std::min(qt - lo, hi - qt);
    ++res.cuts;
    if (margin < res.worst_margin) {
      res.worst_margin = margin;
      if (margin < 0.0) res.worst_mask = mask;
    }
    if (margin < 0.0) ++res.failures;
  }
  res.pass = res.failures == 0;
  return res;
}

// ---------------------------------------------------------------------------
// Clique graph assembled from the per-step reweighting records: the ordinary
// weighted graph whose Laplacian the potential argument actually tracks.
// ---------------------------------------------------------------------------
struct CliqueGraph {
  int n = 0;
  Eigen::MatrixXd lap;
};

inline CliqueGraph build_clique_graph(int n, std::span<const ReweightingRecord> records) {
  CliqueGraph G;
  G.n = n;
  G.lap = Eigen::MatrixXd::Zero(n, n);
  for (const auto& rec : records) {
    for (const auto& pc : rec.rw.pairs) {
      const double w = rec.edge_weight * pc.c;
      if (w == 0.0) continue;
      G.lap(pc.u, pc.u) += w;
      G.lap(pc.v, pc.v) += w;
      G.lap(pc.u, pc.v) -= w;
      G.lap(pc.v, pc.u) -= w;
    }
  }
  return G;
}

// ---------------------------------------------------------------------------
// Energy comparison: for x restricted to the range of L_G,
// Q_H(L_G^{+/2} x) >= ||x_projected||^2 (up to 1e-8), and directly
// Q_H(z) >= z^T L_G z for random z. Eigenvalues below 1e-10 * lambda_max are
// treated as the null space.
// ---------------------------------------------------------------------------
struct EnergyComparisonResult {
  bool pass = true;
  long long probes = 0;
  long long failures = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_direct_margin = std::numeric_limits<double>::infinity();
  int graph_rank = 0;
  double rank_threshold = 0.0;
};

inline EnergyComparisonResult energy_comparison_check(const StoredHypergraph& H,
                                                      const CliqueGraph& G,
                                                      long long num_probes,
                                                      std::uint64_t seed) {
  if (H.n != G.n) throw std::invalid_argument("energy_comparison_check: vertex counts differ");
  const int n = H.n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G.lap);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("energy_comparison_check: eigendecomposition failed");
  }
  const Eigen::VectorXd& lam = es.eigenvalues();
  const Eigen::MatrixXd& U = es.eigenvectors();
  const double lmax = lam.maxCoeff();

  EnergyComparisonResult res;
  res.rank_threshold = 1e-10 * std::max(lmax, 0.0);
  std::vector<int> kept;
  for (int j = 0; j < n; ++j) {
    if (lam(j) > res.rank_threshold) kept.push_back(j);
  }
  res.graph_rank = static_cast<int>(kept.size());

  SplitMix64 rng = substream(seed, 0xec01);
  Eigen::VectorXd x(n), y(n), xproj(n), z(n);
  for (long long i = 0; i < num_probes; ++i) {
    for (int j = 0; j < n; ++j) x(j) = rng.next_normal();
    y.setZero();
    xproj.setZero();
    for (int j : kept) {
      const double coef = U.col(j).dot(x);
      xproj += coef * U.col(j);
      y += coef / std::sqrt(lam(j)) * U.col(j);
    }
    const double target = xproj.squaredNorm();
    const double qh = hypergraph_energy(H, {y.data(), static_cast<std::size_t>(n)});
    const double margin = qh - target + 1e-8;

    for (int j = 0; j < n; ++j) z(j) = rng.next_normal();
    const double quad = z.dot(G.lap.selfadjointView<Eigen::Lower>() * z);
    const double qz = hypergraph_energy(H, {z.data(), static_cast<std::size_t>(n)});
    const double dmargin = qz - quad + 1e-8 * (1.0 + std::abs(quad));

    ++res.probes;
    res.worst_margin = std::min(res.worst_margin, margin);
    res.worst_direct_margin = std::min(res.worst_direct_margin, dmargin);
    if (margin < 0.0 || dmargin < 0.0) ++res.failures;
  }
  res.pass = res.failures == 0;
  return res;
}

// ---------------------------------------------------------------------------
// Size accounting against the run summary:
//   |Ht|          <= 4 c n ln(1 + 2W/(eta n))
//   sum_i p_i     <= (c / ln 2)(phi_m - phi_0)
//   phi_m - phi_0 <= n ln(1 + 2W/(eta n))
// ---------------------------------------------------------------------------
struct SizeBoundResult {
  bool pass = true;
  bool pass_size = true;
  bool pass_sum_p = true;
  bool pass_potential = true;
  double size_bound = 0.0;
  double sum_p_bound = 0.0;
  double potential_cap = 0.0;
  long long sample_count = 0;
  double sum_p = 0.0;
  double potential_gain = 0.0;
};

inline SizeBoundResult size_bound_check(const RunSummary& s) {
  SizeBoundResult r;
  r.size_bound = 4.0 * s.oversampling * s.potential_cap;
  r.sum_p_bound = s.sum_p_bound;
  r.potential_cap = s.potential_cap;
  r.sample_count = s.sample_count;
  r.sum_p = s.sum_p;
  r.potential_gain = s.phi_final - s.phi0;
  const double rel = 1e-6;
  r.pass_size = static_cast<double>(s.sample_count) <= r.size_bound * (1.0 + rel) + 1e-9;
  r.pass_sum_p = s.sum_p <= r.sum_p_bound * (1.0 + rel) + 1e-9;
  r.pass_potential = r.potential_gain <= r.potential_cap * (1.0 + rel) + 1e-9;
  r.pass = r.pass_size && r.pass_sum_p && r.pass_potential;
  return r;
}

// ---------------------------------------------------------------------------
// Telemetry checks: the per-step potential inequality
//   dphi_i >= log(1 + p_i / c) - 1e-8 * (1 + |phi_i|)
// must hold at every step, and kkt_violation <= 1e-5 on at least 99% of steps.
// ---------------------------------------------------------------------------
struct TelemetryCheckResult {
  bool pass = true;
  bool pass_potential = true;
  bool pass_kkt = true;
  long long steps = 0;
  long long potential_violations = 0;
  double worst_potential_margin = std::numeric_limits<double>::infinity();
  double kkt_ok_fraction = 1.0;
  double worst_kkt = 0.0;
};

inline TelemetryCheckResult telemetry_check(std::span<const StepRecord> records,
                                            double oversampling) {
  TelemetryCheckResult r;
  long long kkt_ok = 0;
  for (const auto& rec : records) {
    ++r.steps;
    const double needed = std::log1p(rec.p / oversampling) - 1e-8 * (1.0 + std::abs(rec.phi));
    const double margin = rec.delta_phi - needed;
    r.worst_potential_margin = std::min(r.worst_potential_margin, margin);
    if (margin < 0.0) ++r.potential_violations;
    if (rec.kkt <= 1e-5) ++kkt_ok;
    r.worst_kkt = std::max(r.worst_kkt, rec.kkt);
  }
  r.pass_potential = r.potential_violations == 0;
  r.kkt_ok_fraction = r.steps == 0 ? 1.0 : static_cast<double>(kkt_ok) / r.steps;
  r.pass_kkt = r.kkt_ok_fraction >= 0.99;
  r.pass = r.pass_potential && r.pass_kkt;
  return r;
}

// ---------------------------------------------------------------------------
// Unbiasedness: E Q_Ht(z) = Q_H(z). Monte Carlo over reruns with seeds
// base.seed, base.seed + 1, ...; requires the sample mean to sit within
// 4 standard errors of Q_H(z).
// ---------------------------------------------------------------------------
struct UnbiasednessResult {
  bool pass = true;
  int seeds = 0;
  double target = 0.0;
  double mean = 0.0;
  double stderr_mean = 0.0;
  double tolerance = 0.0;
};

inline UnbiasednessResult unbiasedness_check(const std::string& stream_text,
                                             const SparsifierConfig& base, int num_seeds,
                                             std::span<const double> z) {
  if (num_seeds < 2) throw std::invalid_argument("unbiasedness_check: need >= 2 seeds");
  const StoredHypergraph H = read_stored_text(stream_text);

  UnbiasednessResult res;
  res.seeds = num_seeds;
  res.target = hypergraph_energy(H, z);

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(num_seeds));
  for (int j = 0; j < num_seeds; ++j) {
    SparsifierConfig cfg = base;
    cfg.seed = base.seed + static_cast<std::uint64_t>(j);
    cfg.emit_reweightings = false;
    const RunResult run = run_text(stream_text, cfg);
    const StoredHypergraph Ht = to_stored(H.n, run.samples);
    values.push_back(hypergraph_energy(Ht, z));
  }

  KahanSum sum;
  for (double v : values) sum.add(v);
  res.mean = sum.value() / num_seeds;
  KahanSum sq;
  for (double v : values) sq.add((v - res.mean) * (v - res.mean));
  const double var = sq.value() / (num_seeds - 1);
  res.stderr_mean = std::sqrt(std::max(var, 0.0) / num_seeds);
  res.tolerance = 4.0 * res.stderr_mean + 1e-12 * (1.0 + std::abs(res.target));
  res.pass = std::abs(res.mean - res.target) <= res.tolerance;
  return res;
}

}  // namespace hysparse
