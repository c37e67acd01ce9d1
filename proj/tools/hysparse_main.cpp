// Command-line front end: gen | sparsify | verify.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error,
// 3 input/output or stream-format error (including a violated rank bound).

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hysparse/hysparse.hpp"

namespace {

using nlohmann::json;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::uint64_t h = 14695981039346656037ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
    if (!in) break;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed on " + path);
}

// ---------------------------------------------------------------------- gen

struct GenOpts {
  int n = 0;
  long long m = 0;
  int rank = 2;
  std::string rank_dist = "uniform";
  double weight = 1.0;
  double wmin = 0.0;
  double wmax = 0.0;
  std::string model = "uniform";
  int clusters = 4;
  double in_cluster = 0.9;
  std::uint64_t seed = 0;
  std::string output;
};

int run_gen(const GenOpts& o) {
  hysparse::GenSpec g;
  g.n = o.n;
  g.m = o.m;
  g.rank = o.rank;
  g.rank_dist = o.rank_dist == "fixed" ? hysparse::RankDist::kFixed
                                       : hysparse::RankDist::kUniform;
  if (o.wmin > 0.0 || o.wmax > 0.0) {
    if (!(o.wmin > 0.0 && o.wmax >= o.wmin)) {
      throw CLI::ValidationError("--wmin/--wmax need 0 < wmin <= wmax");
    }
    g.w_min = o.wmin;
    g.w_max = o.wmax;
    g.weight_dist = hysparse::WeightDist::kLogUniform;
  } else {
    g.w_min = g.w_max = o.weight;
    g.weight_dist = hysparse::WeightDist::kConstant;
  }
  if (o.model == "planted") {
    g.model = hysparse::GenModel::kPlanted;
  } else if (o.model == "graph") {
    g.model = hysparse::GenModel::kGraphOnly;
  } else {
    g.model = hysparse::GenModel::kUniform;
  }
  g.clusters = o.clusters;
  g.in_cluster = o.in_cluster;
  g.seed = o.seed;

  const std::string text = hysparse::generate_stream(g);
  if (o.output == "-") {
    std::cout << text;
  } else {
    write_text_file(o.output, text);
  }
  std::cerr << "generated " << o.m << " edges on " << o.n << " vertices -> "
            << o.output << "\n";
  return 0;
}

// ----------------------------------------------------------------- sparsify

struct SparsifyOpts {
  std::string input;
  std::string output;
  std::string telemetry;
  std::string manifest;
  std::string from_manifest;
  double epsilon = 0.0;
  double delta = 0.0;
  double kappa = 1.0;
  bool eps_mode = false;
  double wmin = 0.0;
  int rank_bound = 0;
  std::uint64_t seed = 0;
  double gap_tol = 1e-7;
  int max_iters = 500;
  double line_search_tol = 1e-10;
  long long refresh = hysparse::kDefaultRefreshPeriod;
  bool emit_rw = false;
};

void load_manifest_into(SparsifyOpts& o) {
  std::ifstream in(o.from_manifest);
  if (!in) throw IoError("cannot open manifest " + o.from_manifest);
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    throw IoError("manifest " + o.from_manifest + ": " + e.what());
  }
  const auto& cfg = m.at("config");
  o.epsilon = cfg.at("epsilon").get<double>();
  o.delta = cfg.at("delta").get<double>();
  o.kappa = cfg.at("kappa").get<double>();
  o.seed = cfg.at("seed").get<std::uint64_t>();
  o.rank_bound = cfg.at("rank_bound").get<int>();
  o.gap_tol = cfg.at("gap_tol").get<double>();
  o.max_iters = cfg.at("max_iters").get<int>();
  o.line_search_tol = cfg.at("line_search_tol").get<double>();
  o.refresh = cfg.at("refresh_period").get<long long>();
  o.emit_rw = cfg.at("emit_reweightings").get<bool>();
  o.eps_mode = false;  // delta is already concrete in the manifest
  if (o.input.empty()) o.input = m.at("input").at("path").get<std::string>();
  const auto& outs = m.at("outputs");
  if (o.output.empty() && outs.contains("sparsifier") && !outs["sparsifier"].is_null()) {
    o.output = outs["sparsifier"].get<std::string>();
  }
  if (o.telemetry.empty() && outs.contains("telemetry") && !outs["telemetry"].is_null()) {
    o.telemetry = outs["telemetry"].get<std::string>();
  }
  const std::string recorded = m.at("input").at("fnv1a64").get<std::string>();
  if (hex64(hash_file(o.input)) != recorded) {
    throw IoError("input " + o.input + " does not match the manifest fingerprint " + recorded);
  }
}

int run_sparsify(SparsifyOpts& o) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!o.from_manifest.empty()) load_manifest_into(o);
  if (o.input.empty()) throw CLI::ValidationError("--input is required");
  if (o.output.empty()) throw CLI::ValidationError("--output is required");
  if (o.rank_bound < 2) throw CLI::ValidationError("--rank-bound (>= 2) is required");
  if (!(o.epsilon > 0.0 && o.epsilon < 1.0)) {
    throw CLI::ValidationError("--epsilon must be in (0, 1)");
  }

  const std::uint64_t input_hash = hash_file(o.input);
  std::ifstream in(o.input);
  if (!in) throw IoError("cannot open " + o.input);
  hysparse::StreamParser parser(in);
  const int n = parser.header().n;

  bool delta_underflowed = false;
  if (o.eps_mode) {
    if (!(o.wmin > 0.0)) {
      throw CLI::ValidationError("--eps-mode requires --wmin (the minimum edge weight)");
    }
    const auto d = hysparse::delta_for_eps_sparsifier(o.epsilon, o.wmin, n, o.rank_bound);
    o.delta = d.delta;
    delta_underflowed = d.underflowed;
    if (d.underflowed) {
      std::cerr << "warning: delta underflowed below the smallest normal double; "
                   "clamped to " << hysparse::format_double(d.delta) << "\n";
    }
  }
  if (!(o.delta > 0.0)) {
    throw CLI::ValidationError("--delta (> 0) or --eps-mode is required");
  }

  hysparse::SparsifierConfig cfg;
  cfg.epsilon = o.epsilon;
  cfg.delta = o.delta;
  cfg.kappa = o.kappa;
  cfg.seed = o.seed;
  cfg.rank_bound = o.rank_bound;
  cfg.optimizer.gap_tol = o.gap_tol;
  cfg.optimizer.max_iters = o.max_iters;
  cfg.optimizer.line_search_tol = o.line_search_tol;
  cfg.refresh_period = o.refresh;
  cfg.emit_reweightings = o.emit_rw;

  std::ofstream out(o.output, std::ios::binary);
  if (!out) throw IoError("cannot open " + o.output + " for writing");
  out << "H " << n << "\n";

  std::optional<std::ofstream> tele;
  if (!o.telemetry.empty()) {
    tele.emplace(o.telemetry, std::ios::binary);
    if (!*tele) throw IoError("cannot open " + o.telemetry + " for writing");
  }

  hysparse::OnlineSparsifier sp(n, cfg);
  double worst_trace_rel = 0.0;
  while (auto e = parser.next()) {
    auto [sampled, rec] = sp.process_edge(*e);
    const double tr = sp.state().trace();
    const double cw2 = 2.0 * sp.state().cum_weight();
    worst_trace_rel = std::max(
        worst_trace_rel, std::abs(tr - cw2) / std::max(1.0, std::abs(cw2)));
    if (sampled) {
      out << hysparse::format_double(sampled->new_weight);
      for (int v : sampled->edge.vertices) out << ' ' << v;
      out << '\n';
    }
    if (tele) *tele << hysparse::step_to_json(rec).dump() << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed on " + o.output);
  if (tele) {
    tele->flush();
    if (!*tele) throw IoError("write failed on " + o.telemetry);
  }

  const hysparse::RunSummary s = sp.summary();
  const double size_bound = 4.0 * s.oversampling * s.potential_cap;
  const auto t1 = std::chrono::steady_clock::now();
  const double elapsed = std::chrono::duration<double>(t1 - t0).count();

  std::cout << "kept " << s.sample_count << " / " << s.edges_processed
            << " edges | sum_p " << s.sum_p << " | size_bound " << size_bound
            << " | phi " << s.phi0 << " -> " << s.phi_final << " | W "
            << s.total_weight << " | c " << s.oversampling << " | eta " << s.eta
            << "\n";
  if (s.optimizer_warnings > 0) {
    std::cerr << "warning: optimizer hit its iteration cap on "
              << s.optimizer_warnings << " steps\n";
  }

  if (!o.manifest.empty()) {
    json m{
        {"tool", "hysparse"},
        {"version", hysparse::kVersion},
        {"command", "sparsify"},
        {"input", {{"path", o.input}, {"fnv1a64", hex64(input_hash)}}},
        {"config",
         {{"epsilon", cfg.epsilon},
          {"delta", cfg.delta},
          {"kappa", cfg.kappa},
          {"seed", cfg.seed},
          {"rank_bound", cfg.rank_bound},
          {"gap_tol", cfg.optimizer.gap_tol},
          {"max_iters", cfg.optimizer.max_iters},
          {"line_search_tol", cfg.optimizer.line_search_tol},
          {"refresh_period", cfg.refresh_period},
          {"emit_reweightings", cfg.emit_reweightings},
          {"delta_underflowed", delta_underflowed}}},
        {"outputs",
         {{"sparsifier", o.output},
          {"telemetry", o.telemetry.empty() ? json(nullptr) : json(o.telemetry)}}},
        {"result", hysparse::summary_to_json(s)}};
    m["result"]["size_bound"] = size_bound;
    m["result"]["worst_trace_rel"] = worst_trace_rel;
    m["result"]["elapsed_seconds"] = elapsed;
    write_text_file(o.manifest, m.dump(2) + "\n");
  }
  return 0;
}

// ------------------------------------------------------------------- verify

struct VerifyOpts {
  std::string input;
  std::string sparsifier;
  std::string telemetry;
  std::string report;
  double epsilon = 0.0;
  double delta = 0.0;
  double kappa = 1.0;
  int rank_bound = 0;
  long long probes = 10000;
  long long ec_probes = 1000;
  std::uint64_t seed = 12345;
  bool force_cuts = false;
  bool no_cuts = false;
  int mc_seeds = 0;
};

int run_verify(const VerifyOpts& o) {
  const std::string input_text = hysparse::read_file(o.input);
  const hysparse::StoredHypergraph H = hysparse::read_stored_text(input_text);
  hysparse::StoredHypergraph Ht;
  {
    std::ifstream in(o.sparsifier);
    if (!in) throw IoError("cannot open " + o.sparsifier);
    Ht = hysparse::read_stored(in);
  }
  if (Ht.n != H.n) throw IoError("input and sparsifier disagree on the vertex count");

  int rank_bound = o.rank_bound;
  if (rank_bound == 0) {
    for (const auto& e : H.edges) rank_bound = std::max(rank_bound, e.size());
    rank_bound = std::max(rank_bound, 2);
  }

  bool all_pass = true;
  json checks;

  const auto probe = hysparse::probe_check(H, Ht, o.epsilon, o.delta, o.probes, o.seed);
  all_pass &= probe.pass;
  checks["probe"] = {{"pass", probe.pass},
                     {"probes", probe.probes},
                     {"failures", probe.failures},
                     {"worst_margin", probe.worst_margin}};
  std::cout << (probe.pass ? "PASS" : "FAIL") << " probe_check: " << probe.probes
            << " probes, worst margin " << probe.worst_margin << "\n";

  const bool do_cuts = !o.no_cuts && (o.force_cuts || H.n <= 12);
  if (do_cuts) {
    const auto cut = hysparse::cut_check(H, Ht, o.epsilon, o.delta);
    all_pass &= cut.pass;
    checks["cut"] = {{"pass", cut.pass},
                     {"cuts", cut.cuts},
                     {"failures", cut.failures},
                     {"worst_margin", cut.worst_margin}};
    std::cout << (cut.pass ? "PASS" : "FAIL") << " cut_check: " << cut.cuts
              << " cuts, worst margin " << cut.worst_margin << "\n";
  } else {
    checks["cut"] = {{"skipped", true}};
    std::cout << "SKIP cut_check: n = " << H.n << " (use --cuts to force, n <= 22)\n";
  }

  if (!o.telemetry.empty()) {
    std::ifstream tin(o.telemetry);
    if (!tin) throw IoError("cannot open " + o.telemetry);
    const hysparse::TelemetryFile tf = hysparse::parse_telemetry(tin);

    const double c =
        hysparse::oversampling_constant(H.n, rank_bound, o.epsilon, o.kappa);
    const double eta = o.delta / o.epsilon;

    bool consistent = tf.records.size() == H.edges.size();
    long long sampled = 0;
    hysparse::KahanSum sum_p;
    for (const auto& rec : tf.records) {
      if (rec.sampled) ++sampled;
      sum_p.add(rec.p);
    }
    consistent = consistent && sampled == static_cast<long long>(Ht.edges.size());
    all_pass &= consistent;
    checks["telemetry_consistency"] = {
        {"pass", consistent},
        {"steps", tf.records.size()},
        {"input_edges", H.edges.size()},
        {"sampled", sampled},
        {"sparsifier_edges", Ht.edges.size()}};
    std::cout << (consistent ? "PASS" : "FAIL")
              << " telemetry_consistency: " << tf.records.size() << " steps, "
              << sampled << " sampled\n";

    const auto tc = hysparse::telemetry_check(tf.records, c);
    all_pass &= tc.pass;
    checks["potential"] = {{"pass", tc.pass_potential},
                           {"violations", tc.potential_violations},
                           {"worst_margin", tc.worst_potential_margin}};
    checks["kkt"] = {{"pass", tc.pass_kkt},
                     {"ok_fraction", tc.kkt_ok_fraction},
                     {"worst", tc.worst_kkt}};
    std::cout << (tc.pass_potential ? "PASS" : "FAIL") << " potential_check: "
              << tc.potential_violations << " violations\n";
    std::cout << (tc.pass_kkt ? "PASS" : "FAIL") << " kkt_check: ok fraction "
              << tc.kkt_ok_fraction << "\n";

    hysparse::RunSummary s;
    s.n = H.n;
    s.edges_processed = static_cast<long long>(tf.records.size());
    s.sample_count = sampled;
    s.sum_p = sum_p.value();
    s.phi0 = H.n * std::log(eta);
    s.phi_final = tf.records.empty() ? s.phi0 : tf.records.back().phi;
    s.total_weight = H.total_weight();
    s.oversampling = c;
    s.eta = eta;
    s.potential_cap =
        s.n * std::log1p(2.0 * s.total_weight / (eta * static_cast<double>(s.n)));
    s.sum_p_bound = c / std::numbers::ln2 * (s.phi_final - s.phi0);
    const auto sb = hysparse::size_bound_check(s);
    all_pass &= sb.pass;
    checks["size_bound"] = {{"pass", sb.pass},
                            {"samples", sb.sample_count},
                            {"size_bound", sb.size_bound},
                            {"sum_p", sb.sum_p},
                            {"sum_p_bound", sb.sum_p_bound},
                            {"potential_gain", sb.potential_gain},
                            {"potential_cap", sb.potential_cap}};
    std::cout << (sb.pass ? "PASS" : "FAIL") << " size_bound_check: "
              << sb.sample_count << " <= " << sb.size_bound << ", sum_p "
              << sb.sum_p << " <= " << sb.sum_p_bound << "\n";

    if (!tf.reweightings.empty()) {
      const auto G = hysparse::build_clique_graph(H.n, tf.reweightings);
      const auto ec = hysparse::energy_comparison_check(H, G, o.ec_probes, o.seed);
      all_pass &= ec.pass;
      checks["energy_comparison"] = {{"pass", ec.pass},
                                     {"probes", ec.probes},
                                     {"failures", ec.failures},
                                     {"worst_margin", ec.worst_margin},
                                     {"worst_direct_margin", ec.worst_direct_margin},
                                     {"graph_rank", ec.graph_rank}};
      std::cout << (ec.pass ? "PASS" : "FAIL") << " energy_comparison: rank "
                << ec.graph_rank << ", worst margin " << ec.worst_margin << "\n";
    } else {
      checks["energy_comparison"] = {{"skipped", true}};
      std::cout << "SKIP energy_comparison: telemetry has no reweighting records\n";
    }
  }

  if (o.mc_seeds >= 2) {
    hysparse::SparsifierConfig base;
    base.epsilon = o.epsilon;
    base.delta = o.delta;
    base.kappa = o.kappa;
    base.seed = o.seed;
    base.rank_bound = rank_bound;
    std::vector<double> z(static_cast<std::size_t>(H.n));
    hysparse::SplitMix64 rng = hysparse::substream(o.seed, 0xbead);
    for (auto& x : z) x = rng.next_normal();
    const auto ub = hysparse::unbiasedness_check(input_text, base, o.mc_seeds, z);
    all_pass &= ub.pass;
    checks["unbiasedness"] = {{"pass", ub.pass},
                              {"seeds", ub.seeds},
                              {"target", ub.target},
                              {"mean", ub.mean},
                              {"stderr", ub.stderr_mean},
                              {"tolerance", ub.tolerance}};
    std::cout << (ub.pass ? "PASS" : "FAIL") << " unbiasedness: mean " << ub.mean
              << " vs " << ub.target << " +- " << ub.tolerance << "\n";
  }

  if (!o.report.empty()) {
    json rep{{"tool", "hysparse"},
             {"version", hysparse::kVersion},
             {"command", "verify"},
             {"input", o.input},
             {"sparsifier", o.sparsifier},
             {"epsilon", o.epsilon},
             {"delta", o.delta},
             {"pass", all_pass},
             {"checks", checks}};
    write_text_file(o.report, rep.dump(2) + "\n");
  }

  std::cout << (all_pass ? "VERIFY PASS" : "VERIFY FAIL") << "\n";
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online spectral hypergraph sparsification"};
  app.set_version_flag("--version", hysparse::kVersion);
  app.require_subcommand(1);

  GenOpts g;
  auto* gen = app.add_subcommand("gen", "generate a synthetic hypergraph stream");
  gen->add_option("--n", g.n, "vertex count")->required()->check(CLI::Range(2, 1 << 28));
  gen->add_option("--m", g.m, "edge count")->required()->check(CLI::NonNegativeNumber);
  gen->add_option("--rank", g.rank, "max edge size")->check(CLI::Range(2, 1 << 20));
  gen->add_option("--rank-dist", g.rank_dist, "edge size distribution")
      ->check(CLI::IsMember({"fixed", "uniform"}));
  gen->add_option("--weight", g.weight, "constant edge weight")
      ->check(CLI::PositiveNumber);
  gen->add_option("--wmin", g.wmin, "log-uniform weight lower bound");
  gen->add_option("--wmax", g.wmax, "log-uniform weight upper bound");
  gen->add_option("--model", g.model, "stream model")
      ->check(CLI::IsMember({"uniform", "planted", "graph"}));
  gen->add_option("--clusters", g.clusters, "planted model block count")
      ->check(CLI::PositiveNumber);
  gen->add_option("--in-cluster", g.in_cluster, "planted model in-block probability")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", g.seed, "stream seed");
  gen->add_option("-o,--output", g.output, "output path ('-' for stdout)")->required();

  SparsifyOpts sp;
  auto* spc = app.add_subcommand("sparsify", "one-pass online sparsification");
  spc->add_option("-i,--input", sp.input, "input stream path");
  spc->add_option("-o,--output", sp.output, "sparsifier output path");
  spc->add_option("--telemetry", sp.telemetry, "telemetry JSON-lines output path");
  spc->add_option("--manifest", sp.manifest, "write a reproducibility manifest here");
  spc->add_option("--from-manifest", sp.from_manifest, "replay the run a manifest records");
  spc->add_option("--epsilon", sp.epsilon, "multiplicative error, in (0, 1)");
  spc->add_option("--delta", sp.delta, "additive spectral slack");
  spc->add_flag("--eps-mode", sp.eps_mode,
                "derive delta so the result is a plain eps-sparsifier");
  spc->add_option("--wmin", sp.wmin, "minimum edge weight (eps-mode)");
  spc->add_option("--rank-bound", sp.rank_bound, "declared max edge size");
  spc->add_option("--seed", sp.seed, "sampling seed");
  spc->add_option("--kappa", sp.kappa, "oversampling scale")->check(CLI::PositiveNumber);
  spc->add_option("--gap-tol", sp.gap_tol, "optimizer duality-gap tolerance");
  spc->add_option("--max-iters", sp.max_iters, "optimizer iteration cap");
  spc->add_option("--line-search-tol", sp.line_search_tol, "1-D search tolerance");
  spc->add_option("--refresh-period", sp.refresh, "rank-one updates between refreshes");
  spc->add_flag("--emit-reweightings", sp.emit_rw,
                "include reweighting records in telemetry");

  VerifyOpts v;
  auto* vc = app.add_subcommand("verify", "check a sparsifier against its input");
  vc->add_option("-i,--input", v.input, "original stream path")->required();
  vc->add_option("-s,--sparsifier", v.sparsifier, "sparsifier stream path")->required();
  vc->add_option("--telemetry", v.telemetry, "telemetry JSON-lines from the run");
  vc->add_option("--report", v.report, "write a JSON report here");
  vc->add_option("--epsilon", v.epsilon, "multiplicative error")->required();
  vc->add_option("--delta", v.delta, "additive spectral slack")->required();
  vc->add_option("--kappa", v.kappa, "oversampling scale used by the run");
  vc->add_option("--rank-bound", v.rank_bound,
                 "rank bound used by the run (default: max edge size)");
  vc->add_option("--probes", v.probes, "probe count")->check(CLI::PositiveNumber);
  vc->add_option("--ec-probes", v.ec_probes, "energy-comparison probe count")
      ->check(CLI::PositiveNumber);
  vc->add_option("--seed", v.seed, "probe seed");
  vc->add_flag("--cuts", v.force_cuts, "force the exhaustive cut check (n <= 22)");
  vc->add_flag("--no-cuts", v.no_cuts, "skip the cut check even when n <= 12");
  vc->add_option("--seeds", v.mc_seeds, "Monte Carlo seeds for the unbiasedness check");

  int rc = 0;
  gen->callback([&] { rc = run_gen(g); });
  spc->callback([&] { rc = run_sparsify(sp); });
  vc->callback([&] { rc = run_verify(v); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const hysparse::ParseError& e) {
    std::cerr << "stream error: " << e.what() << "\n";
    return 3;
  } catch (const hysparse::RankBoundExceeded& e) {
    std::cerr << "stream error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return rc;
}
