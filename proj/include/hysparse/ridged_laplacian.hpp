#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "hysparse/numeric.hpp"

namespace hysparse {

inline constexpr std::int64_t kDefaultRefreshPeriod = 4096;

// Dense clique-Laplacian accumulator with a maintained inverse of the ridged
// matrix (L + eta*I) and a running log det(L + eta*I). The ridge is never
// folded into the stored Laplacian. Rank-one pair updates cost O(n^2) via
// Sherman-Morrison; a periodic Cholesky refresh bounds the drift of the
// maintained inverse and of the accumulated log-determinant.
//
// The update counter is advanced by add_pair, but the refresh itself only
// happens in refresh()/maybe_refresh(), so callers processing one hyperedge
// as a group of pair updates can keep refreshes off the potential telescope.
class RidgedLaplacianState {
 public:
  RidgedLaplacianState(int n, double eta,
                       std::int64_t refresh_period = kDefaultRefreshPeriod)
      : n_(n), eta_(eta), refresh_period_(refresh_period) {
    if (n < 2) throw std::invalid_argument("RidgedLaplacianState: n must be >= 2");
    if (!(eta > 0.0 && std::isfinite(eta))) {
      throw std::invalid_argument("RidgedLaplacianState: eta must be positive and finite");
    }
    if (refresh_period < 1) {
      throw std::invalid_argument("RidgedLaplacianState: refresh period must be >= 1");
    }
    lap_ = Eigen::MatrixXd::Zero(n, n);
    inv_ = Eigen::MatrixXd::Identity(n, n) / eta;
    logdet_ = n * std::log(eta);
    scratch_.resize(n);
  }

  int n() const { return n_; }
  double eta() const { return eta_; }
  const Eigen::MatrixXd& laplacian() const { return lap_; }
  const Eigen::MatrixXd& inverse() const { return inv_; }
  double logdet() const { return logdet_; }
  double trace() const { return lap_.trace(); }
  double cum_weight() const { return cum_weight_.value(); }
  std::int64_t updates_since_refresh() const { return updates_; }

  // L += w * (e_u - e_v)(e_u - e_v)^T, with the inverse and logdet updated in
  // place. The outer-product update is evaluated coefficient-wise as
  // beta*(q_i*q_j), which keeps the maintained inverse exactly symmetric.
  void add_pair(int u, int v, double w) {
    check_pair(u, v);
    if (!(w >= 0.0 && std::isfinite(w))) {
      throw std::invalid_argument("add_pair: weight must be nonnegative and finite");
    }
    if (w == 0.0) return;

    auto& q = scratch_;
    q = inv_.col(u) - inv_.col(v);
    const double s = q(u) - q(v);  // b^T (L + eta I)^{-1} b
    logdet_ += std::log1p(w * s);
    const double beta = w / (1.0 + w * s);
    // Explicit triangular rank-one update mirrored across the diagonal; the
    // vectorized outer-product kernel rounds (i,j) and (j,i) differently and
    // would let the maintained inverse drift off exact symmetry.
    for (int j = 0; j < n_; ++j) {
      const double qj = q(j);
      for (int i = 0; i <= j; ++i) {
        inv_(i, j) -= beta * (q(i) * qj);
        inv_(j, i) = inv_(i, j);
      }
    }

    lap_(u, u) += w;
    lap_(v, v) += w;
    lap_(u, v) -= w;
    lap_(v, u) -= w;
    ++updates_;
  }

  // Effective resistance in the ridged state: b^T (L + eta I)^{-1} b.
  // Always in (0, 2/eta].
  double effective_resistance(int u, int v) const {
    check_pair(u, v);
    return inv_(u, u) + inv_(v, v) - 2.0 * inv_(u, v);
  }

  // Tracks the cumulative hyperedge weight W (one call per edge, not per pair).
  void add_edge_weight(double w) { cum_weight_.add(w); }

  // Refactorizes (L + eta I): replaces the maintained inverse and logdet with
  // freshly computed values and resets the update counter.
  void refresh() {
    Eigen::MatrixXd m = lap_;
    m.diagonal().array() += eta_;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("RidgedLaplacianState: refresh factorization failed");
    }
    inv_ = llt.solve(Eigen::MatrixXd::Identity(n_, n_));
    Eigen::MatrixXd sym = 0.5 * (inv_ + inv_.transpose());
    inv_.swap(sym);
    logdet_ = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    updates_ = 0;
  }

  bool maybe_refresh() {
    if (updates_ < refresh_period_) return false;
    refresh();
    return true;
  }

  // In-core footprint in doubles; the basis of the memory accounting tests.
  std::int64_t footprint_doubles() const {
    return static_cast<std::int64_t>(lap_.size()) +
           static_cast<std::int64_t>(inv_.size()) +
           static_cast<std::int64_t>(scratch_.size()) + 8;
  }

 private:
  void check_pair(int u, int v) const {
    if (u < 0 || u >= n_ || v < 0 || v >= n_ || u == v) {
      throw std::invalid_argument("vertex pair out of range or degenerate");
    }
  }

  int n_;
  double eta_;
  std::int64_t refresh_period_;
  std::int64_t updates_ = 0;
  Eigen::MatrixXd lap_;
  Eigen::MatrixXd inv_;
  double logdet_ = 0.0;
  KahanSum cum_weight_;
  Eigen::VectorXd scratch_;
};

}  // namespace hysparse
