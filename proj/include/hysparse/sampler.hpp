#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hysparse/core.hpp"
#include "hysparse/numeric.hpp"
#include "hysparse/reweighting.hpp"
#include "hysparse/ridged_laplacian.hpp"
#include "hysparse/rng.hpp"
#include "hysparse/stored.hpp"

namespace hysparse {

// c = max(1, kappa * ln(n) * ln(r) / eps^2): the oversampling factor applied
// to every keep probability. r is the declared rank bound, not the size of
// any particular edge.
inline double oversampling_constant(int n, int r, double epsilon, double kappa) {
  if (n < 2) throw std::invalid_argument("oversampling_constant: n must be >= 2");
  if (r < 2) throw std::invalid_argument("oversampling_constant: rank bound must be >= 2");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("oversampling_constant: epsilon must be in (0, 1)");
  }
  if (!(kappa > 0.0 && std::isfinite(kappa))) {
    throw std::invalid_argument("oversampling_constant: kappa must be positive");
  }
  return std::max(1.0, kappa * std::log(n) * std::log(r) / (epsilon * epsilon));
}

struct DeltaResult {
  double delta = 0.0;
  bool underflowed = false;
};

// delta = eps * w_min^2 * n^(-2r): the additive slack under which an
// (eps,delta)-sparsifier of a hypergraph with min weight w_min and rank r is
// a plain eps-sparsifier. Evaluated in log space; clamped to the smallest
// normal double with the flag set when the true value is below it.
inline DeltaResult delta_for_eps_sparsifier(double epsilon, double w_min, int n, int r) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("delta_for_eps_sparsifier: epsilon must be in (0, 1)");
  }
  if (!(w_min > 0.0 && std::isfinite(w_min))) {
    throw std::invalid_argument("delta_for_eps_sparsifier: w_min must be positive");
  }
  if (n < 2 || r < 2) {
    throw std::invalid_argument("delta_for_eps_sparsifier: need n >= 2 and r >= 2");
  }
  const double log_delta =
      std::log(epsilon) + 2.0 * std::log(w_min) - 2.0 * static_cast<double>(r) * std::log(n);
  DeltaResult out;
  const double min_normal = std::numeric_limits<double>::min();
  if (log_delta < std::log(min_normal)) {
    out.delta = min_normal;
    out.underflowed = true;
  } else {
    out.delta = std::exp(log_delta);
  }
  return out;
}

struct SparsifierConfig {
  double epsilon = 0.5;
  double delta = 0.1;
  double kappa = 1.0;
  std::uint64_t seed = 0;
  int rank_bound = 0;  // required; edges larger than this abort the run
  OptimizerConfig optimizer{};
  std::int64_t refresh_period = kDefaultRefreshPeriod;
  bool emit_reweightings = false;

  double eta() const { return delta / epsilon; }
};

class RankBoundExceeded : public std::runtime_error {
 public:
  RankBoundExceeded(int size, int bound)
      : std::runtime_error("edge of size " + std::to_string(size) +
                           " exceeds the declared rank bound " + std::to_string(bound)) {}
};

// An edge the sampler decided to keep, already reweighted to w/p.
struct SampledEdge {
  Hyperedge edge;
  double new_weight = 0.0;
  double p = 0.0;
  long long step = 0;
};

struct ReweightingRecord {
  long long step = 0;
  double edge_weight = 0.0;
  Reweighting rw;
};

// Per-edge telemetry.
struct StepRecord {
  long long step = 0;  // 1-based
  double r = 0.0;      // max ridged pair resistance after the update
  double p = 0.0;      // keep probability
  double phi = 0.0;    // potential log det(L_i + eta I)
  double delta_phi = 0.0;
  double kkt = 0.0;    // worst relative KKT slack of the applied reweighting
  bool sampled = false;
  double cum_weight = 0.0;
  double optimizer_gap = 0.0;
  bool optimizer_warning = false;  // iteration cap reached
  std::optional<ReweightingRecord> reweighting;
};

struct RunSummary {
  int n = 0;
  long long edges_processed = 0;
  long long sample_count = 0;
  double sum_p = 0.0;
  double phi0 = 0.0;
  double phi_final = 0.0;
  double total_weight = 0.0;
  double oversampling = 0.0;
  double eta = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  double kappa = 0.0;
  int rank_bound = 0;
  std::uint64_t seed = 0;
  double potential_cap = 0.0;  // n * ln(1 + 2W/(eta n)), the cap on phi_m - phi_0
  double sum_p_bound = 0.0;    // (c / ln 2) * (phi_m - phi_0)
  long long optimizer_warnings = 0;
  std::int64_t peak_state_doubles = 0;
};

// One-pass sparsifier. Every edge is processed exactly once: its reweighting
// is applied to the dense ridged state, a keep probability is computed from
// the post-update maximum pair resistance, and the keep/discard decision is
// final. No past hyperedge is retained anywhere in this class; working
// memory is the O(n^2) state plus O(rank_bound^2) optimizer scratch.
class OnlineSparsifier {
 public:
  OnlineSparsifier(int n, const SparsifierConfig& cfg)
      : cfg_(validated(cfg)),
        state_(n, cfg.eta(), cfg.refresh_period),
        c_(oversampling_constant(n, cfg.rank_bound, cfg.epsilon, cfg.kappa)) {
    phi0_ = state_.logdet();
  }

  double oversampling() const { return c_; }
  const RidgedLaplacianState& state() const { return state_; }

  std::pair<std::optional<SampledEdge>, StepRecord> process_edge(const Hyperedge& e) {
    validate_hyperedge(e, state_.n());
    if (e.size() > cfg_.rank_bound) throw RankBoundExceeded(e.size(), cfg_.rank_bound);

    // Refresh between edges so a drift correction never lands inside one
    // step's potential increment.
    state_.maybe_refresh();
    ++step_;

    const double phi_before = state_.logdet();
    ReweightingResult opt = optimal_reweighting(state_, e, cfg_.optimizer);
    for (const auto& pc : opt.reweighting.pairs) {
      if (pc.c > 0.0) state_.add_pair(pc.u, pc.v, e.weight * pc.c);
    }
    state_.add_edge_weight(e.weight);

    double r = 0.0;
    const int k = e.size();
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        r = std::max(r, state_.effective_resistance(
                            e.vertices[static_cast<std::size_t>(a)],
                            e.vertices[static_cast<std::size_t>(b)]));
      }
    }
    const double p = std::min(1.0, c_ * r * e.weight);

    // One substream per step: the decision depends only on (seed, step), not
    // on how much randomness anything else consumed.
    const double u = substream(cfg_.seed, static_cast<std::uint64_t>(step_)).next_double();
    const bool keep = u < p;

    StepRecord rec;
    rec.step = step_;
    rec.r = r;
    rec.p = p;
    rec.phi = state_.logdet();
    rec.delta_phi = rec.phi - phi_before;
    rec.kkt = kkt_violation(state_, e, opt.reweighting);
    rec.sampled = keep;
    rec.cum_weight = state_.cum_weight();
    rec.optimizer_gap = opt.achieved_gap;
    rec.optimizer_warning = opt.hit_iteration_cap;
    if (opt.hit_iteration_cap) ++optimizer_warnings_;
    if (cfg_.emit_reweightings) {
      rec.reweighting = ReweightingRecord{step_, e.weight, std::move(opt.reweighting)};
    }
    sum_p_.add(p);

    std::optional<SampledEdge> out;
    if (keep) {
      ++samples_;
      out = SampledEdge{e, e.weight / p, p, step_};
    }

    const std::int64_t pair_count = static_cast<std::int64_t>(k) * (k - 1) / 2;
    const std::int64_t opt_doubles =
        6LL * k * k + 10LL * pair_count +
        (cfg_.optimizer.record_trace ? cfg_.optimizer.max_iters + 1 : 0);
    peak_doubles_ = std::max(peak_doubles_, state_.footprint_doubles() + opt_doubles + 64);

    return {std::move(out), std::move(rec)};
  }

  RunSummary summary() const {
    RunSummary s;
    s.n = state_.n();
    s.edges_processed = step_;
    s.sample_count = samples_;
    s.sum_p = sum_p_.value();
    s.phi0 = phi0_;
    s.phi_final = state_.logdet();
    s.total_weight = state_.cum_weight();
    s.oversampling = c_;
    s.eta = cfg_.eta();
    s.epsilon = cfg_.epsilon;
    s.delta = cfg_.delta;
    s.kappa = cfg_.kappa;
    s.rank_bound = cfg_.rank_bound;
    s.seed = cfg_.seed;
    s.potential_cap =
        s.n * std::log1p(2.0 * s.total_weight / (s.eta * static_cast<double>(s.n)));
    s.sum_p_bound = c_ / std::numbers::ln2 * (s.phi_final - s.phi0);
    s.optimizer_warnings = optimizer_warnings_;
    s.peak_state_doubles = peak_doubles_;
    return s;
  }

 private:
  static SparsifierConfig validated(const SparsifierConfig& cfg) {
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) {
      throw std::invalid_argument("sparsifier: epsilon must be in (0, 1)");
    }
    if (!(cfg.delta > 0.0 && std::isfinite(cfg.delta))) {
      throw std::invalid_argument("sparsifier: delta must be positive and finite");
    }
    if (!(cfg.kappa > 0.0 && std::isfinite(cfg.kappa))) {
      throw std::invalid_argument("sparsifier: kappa must be positive and finite");
    }
    if (cfg.rank_bound < 2) {
      throw std::invalid_argument("sparsifier: rank_bound must be >= 2");
    }
    return cfg;
  }

  SparsifierConfig cfg_;
  RidgedLaplacianState state_;
  double c_;
  double phi0_ = 0.0;
  long long step_ = 0;
  long long samples_ = 0;
  long long optimizer_warnings_ = 0;
  KahanSum sum_p_;
  std::int64_t peak_doubles_ = 0;
};

struct RunCallbacks {
  std::function<void(const SampledEdge&)> on_sample;
  std::function<void(const StepRecord&, const OnlineSparsifier&)> on_step;
};

struct RunResult {
  RunSummary summary;
  std::vector<SampledEdge> samples;
  std::vector<StepRecord> records;
};

// Drives a full pass over the stream. With keep_outputs=false nothing grows
// with m; samples and telemetry still reach the callbacks.
inline RunResult run_stream(StreamParser& parser, const SparsifierConfig& cfg,
                            const RunCallbacks& cb = {}, bool keep_outputs = true) {
  OnlineSparsifier s(parser.header().n, cfg);
  RunResult res;
  while (auto e = parser.next()) {
    auto [sampled, rec] = s.process_edge(*e);
    if (cb.on_step) cb.on_step(rec, s);
    if (sampled && cb.on_sample) cb.on_sample(*sampled);
    if (keep_outputs) {
      if (sampled) res.samples.push_back(std::move(*sampled));
      res.records.push_back(std::move(rec));
    }
  }
  res.summary = s.summary();
  return res;
}

inline RunResult run_text(const std::string& text, const SparsifierConfig& cfg,
                          const RunCallbacks& cb = {}, bool keep_outputs = true) {
  std::istringstream in(text);
  StreamParser parser(in);
  return run_stream(parser, cfg, cb, keep_outputs);
}

// The kept edges as a materialized hypergraph (offline consumers only).
inline StoredHypergraph to_stored(int n, const std::vector<SampledEdge>& samples) {
  StoredHypergraph H;
  H.n = n;
  H.edges.reserve(samples.size());
  for (const auto& s : samples) {
    Hyperedge e = s.edge;
    e.weight = s.new_weight;
    H.edges.push_back(std::move(e));
  }
  return H;
}

}  // namespace hysparse
