#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hysparse/core.hpp"
#include "hysparse/ridged_laplacian.hpp"

namespace hysparse {

struct PairCoefficient {
  int u = 0;
  int v = 0;
  double c = 0.0;
};

// Simplex point over every unordered vertex pair of one hyperedge, in
// lexicographic pair order, zeros included.
struct Reweighting {
  std::vector<PairCoefficient> pairs;

  double sum() const {
    double s = 0.0;
    for (const auto& p : pairs) s += p.c;
    return s;
  }
};

struct OptimizerConfig {
  double gap_tol = 1e-7;
  int max_iters = 500;
  double line_search_tol = 1e-10;
  bool record_trace = false;  // keep per-iteration objective values
};

struct ReweightingResult {
  Reweighting reweighting;
  double achieved_gap = 0.0;     // duality gap at the returned point
  int iterations = 0;            // descent steps taken
  bool converged = true;         // achieved_gap <= gap_tol
  bool hit_iteration_cap = false;
  double max_resistance = 0.0;   // max pair resistance in the candidate state
  double objective = 0.0;        // log det(L^eta + w * sum_p c_p L_p)
  std::vector<double> objective_trace;
};

namespace detail {

// k x k pair Laplacian accumulation: A += w * (e_a - e_b)(e_a - e_b)^T.
inline void add_pair_block(Eigen::MatrixXd& A, int a, int b, double w) {
  A(a, a) += w;
  A(b, b) += w;
  A(a, b) -= w;
  A(b, a) -= w;
}

inline double logdet_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace detail

// Maximizes log det(L^eta + w * sum_p c_p L_{u_p v_p}) over the simplex of
// vertex pairs of e, without permanently modifying the state.
//
// The n x n problem collapses onto e's vertex set S: with W_S the S-block of
// the maintained inverse, Lam = W_S^{-1}, and A(c) = w * sum_p c_p B_p (B_p
// the k x k pair Laplacian), the matrix determinant lemma gives
//
//   log det(L^eta + w sum_p c_p L_p) = log det(Lam + A(c))
//                                      + log det(W_S) + log det(L^eta),
//
// and the candidate-state pair resistances are read off V = (Lam + A(c))^{-1}
// as V(a,a) + V(b,b) - 2 V(a,b). Each objective evaluation is O(k^3) with
// k = |e|, independent of n.
//
// The maximizer is an away-step conditional-gradient loop with exact
// golden-section line search. The gradient in coefficient p is w * R_c(p), so
// the step directions come from the largest / smallest current resistances;
// away steps that hit their boundary drop the coefficient to exactly zero.
// Ties are broken toward the lexicographically smallest pair. Stopping is
// stricter than the configured gap tolerance: the loop also requires the
// resistance spread over the support to be small relative to the maximum, so
// that downstream KKT telemetry stays clean, and the gap target shrinks to
// 0.25*(w*r)^2 when that is below gap_tol, which keeps the per-step potential
// increase at least log(1 + p_i/c_oversample) net of float noise.
inline ReweightingResult optimal_reweighting(const RidgedLaplacianState& state,
                                             const Hyperedge& e,
                                             const OptimizerConfig& cfg = {}) {
  const int k = e.size();
  if (k < 2) throw std::invalid_argument("optimal_reweighting: edge needs >= 2 vertices");
  if (!(e.weight > 0.0 && std::isfinite(e.weight))) {
    throw std::invalid_argument("optimal_reweighting: edge weight must be positive");
  }
  const double w = e.weight;

  ReweightingResult res;

  if (k == 2) {
    const int u = e.vertices[0];
    const int v = e.vertices[1];
    const double r0 = state.effective_resistance(u, v);
    res.reweighting.pairs = {{u, v, 1.0}};
    res.max_resistance = r0 / (1.0 + w * r0);
    res.objective = state.logdet() + std::log1p(w * r0);
    if (cfg.record_trace) res.objective_trace.push_back(res.objective);
    return res;
  }

  const int P = k * (k - 1) / 2;
  std::vector<std::pair<int, int>> pairs;  // local indices, lexicographic
  pairs.reserve(static_cast<std::size_t>(P));
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) pairs.emplace_back(a, b);
  }

  Eigen::MatrixXd WS(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      WS(a, b) = state.inverse()(e.vertices[static_cast<std::size_t>(a)],
                                 e.vertices[static_cast<std::size_t>(b)]);
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt_ws(WS);
  if (llt_ws.info() != Eigen::Success) {
    throw std::runtime_error("optimal_reweighting: inverse block not positive definite");
  }
  const double logdet_ws = detail::logdet_llt(llt_ws);
  Eigen::MatrixXd Lam = llt_ws.solve(Eigen::MatrixXd::Identity(k, k));
  Lam = (0.5 * (Lam + Lam.transpose())).eval();

  // Objective shift back to the full-state scale.
  const double shift = state.logdet() + logdet_ws;

  Eigen::VectorXd c = Eigen::VectorXd::Constant(P, 1.0 / P);

  const auto build_A = [&](const Eigen::VectorXd& coef) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(k, k);
    for (int p = 0; p < P; ++p) {
      if (coef(p) != 0.0) {
        detail::add_pair_block(A, pairs[static_cast<std::size_t>(p)].first,
                               pairs[static_cast<std::size_t>(p)].second, w * coef(p));
      }
    }
    return A;
  };

  const double eps = std::numeric_limits<double>::epsilon();
  Eigen::MatrixXd A = build_A(c);
  Eigen::MatrixXd V(k, k);
  Eigen::VectorXd R(P);
  double obj = 0.0;

  const auto evaluate = [&]() {
    Eigen::MatrixXd M = Lam + A;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("optimal_reweighting: candidate matrix not positive definite");
    }
    obj = detail::logdet_llt(llt) + shift;
    V = llt.solve(Eigen::MatrixXd::Identity(k, k));
    V = (0.5 * (V + V.transpose())).eval();
    for (int p = 0; p < P; ++p) {
      const auto [a, b] = pairs[static_cast<std::size_t>(p)];
      R(p) = V(a, a) + V(b, b) - 2.0 * V(a, b);
    }
  };

  const double invphi = 0.6180339887498948482;
  const double invphi2 = 1.0 - invphi;
  // Maximizes gamma -> log det(Lam + A + gamma * D) on [0, hi].
  const auto line_search = [&](const Eigen::MatrixXd& D, double hi) {
    const auto f = [&](double g) {
      Eigen::MatrixXd M = Lam + A + g * D;
      Eigen::LLT<Eigen::MatrixXd> llt(M);
      if (llt.info() != Eigen::Success) {
        return -std::numeric_limits<double>::infinity();
      }
      return detail::logdet_llt(llt);
    };
    double a = 0.0, b = hi;
    double h = b - a;
    const double tol = cfg.line_search_tol * std::max(1.0, hi);
    double x1 = a + invphi2 * h, x2 = a + invphi * h;
    double f1 = f(x1), f2 = f(x2);
    int guard = 0;
    while (h > tol && ++guard < 160) {
      if (f1 >= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        h = b - a;
        x1 = a + invphi2 * h;
        f1 = f(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        h = b - a;
        x2 = a + invphi * h;
        f2 = f(x2);
      }
    }
    return 0.5 * (a + b);
  };

  int iter = 0;
  for (;;) {
    evaluate();
    if (cfg.record_trace) res.objective_trace.push_back(obj);

    // Ascent direction bookkeeping. Support for away steps ignores stray
    // sub-1e-12 mass left behind by near-boundary steps.
    int p_plus = 0;
    for (int p = 1; p < P; ++p) {
      if (R(p) > R(p_plus)) p_plus = p;
    }
    const double r_hat = R(p_plus);
    const double avg = c.dot(R);
    int p_minus = -1;
    double support_min = r_hat;
    for (int p = 0; p < P; ++p) {
      if (c(p) >= 1e-12 && (p_minus < 0 || R(p) < support_min)) {
        p_minus = p;
        support_min = R(p);
      }
    }
    double kkt_min = r_hat;
    for (int p = 0; p < P; ++p) {
      if (c(p) > 1e-9) kkt_min = std::min(kkt_min, R(p));
    }

    const double gap_fw = w * (r_hat - avg);
    const double gap_away = p_minus >= 0 ? w * (avg - R(p_minus)) : 0.0;
    res.achieved_gap = std::max(gap_fw, 0.0);
    res.max_resistance = r_hat;
    res.objective = obj;

    const double gap_target =
        std::max(std::min(cfg.gap_tol, 0.25 * (w * r_hat) * (w * r_hat)),
                 512.0 * eps * w * r_hat);
    const double spread_target = std::max(1e-6 * r_hat, 512.0 * eps * r_hat);
    if (gap_fw <= gap_target && (r_hat - kkt_min) <= spread_target) break;
    if (iter >= cfg.max_iters) {
      res.hit_iteration_cap = true;
      break;
    }
    ++iter;

    if (gap_fw >= gap_away || p_minus < 0) {
      // Toward-step: c(g) = (1-g) c + g e_{p+}.
      Eigen::MatrixXd D = -A;
      detail::add_pair_block(D, pairs[static_cast<std::size_t>(p_plus)].first,
                             pairs[static_cast<std::size_t>(p_plus)].second, w);
      const double gamma = line_search(D, 1.0);
      c *= (1.0 - gamma);
      c(p_plus) += gamma;
    } else {
      // Away-step: c(g) = (1+g) c - g e_{p-}, feasible up to c_/(1 - c_).
      const double cm = c(p_minus);
      const double hi = cm >= 1.0 - 1e-12 ? 1e6 : std::min(cm / (1.0 - cm), 1e6);
      Eigen::MatrixXd D = A;
      detail::add_pair_block(D, pairs[static_cast<std::size_t>(p_minus)].first,
                             pairs[static_cast<std::size_t>(p_minus)].second, -w);
      const double gamma = line_search(D, hi);
      c *= (1.0 + gamma);
      c(p_minus) = gamma >= hi * (1.0 - 1e-9) ? 0.0 : (1.0 + gamma) * cm - gamma;
    }
    c = c.cwiseMax(0.0);
    c /= c.sum();
    A = build_A(c);
  }

  res.iterations = iter;
  res.converged = res.achieved_gap <= cfg.gap_tol;
  res.reweighting.pairs.reserve(static_cast<std::size_t>(P));
  for (int p = 0; p < P; ++p) {
    const auto [a, b] = pairs[static_cast<std::size_t>(p)];
    res.reweighting.pairs.push_back({e.vertices[static_cast<std::size_t>(a)],
                                     e.vertices[static_cast<std::size_t>(b)], c(p)});
  }
  return res;
}

// Worst relative KKT slack at the returned point, measured against the state
// the reweighted edge was applied to: pairs carrying mass above 1e-9 should
// all sit at the maximum pair resistance.
inline double kkt_violation(const RidgedLaplacianState& state_after,
                            const Hyperedge& e, const Reweighting& rw) {
  const int k = e.size();
  double r = 0.0;
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      r = std::max(r, state_after.effective_resistance(
                          e.vertices[static_cast<std::size_t>(a)],
                          e.vertices[static_cast<std::size_t>(b)]));
    }
  }
  if (r <= 0.0) return 0.0;
  double worst = 0.0;
  for (const auto& p : rw.pairs) {
    if (p.c > 1e-9) {
      const double rp = state_after.effective_resistance(p.u, p.v);
      worst = std::max(worst, (r - rp) / r);
    }
  }
  return worst;
}

}  // namespace hysparse
