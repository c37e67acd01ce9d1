#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hysparse/sampler.hpp"

namespace hysparse {

// FNV-1a over raw bytes; used to fingerprint input streams in manifests.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string fnv1a64_hex(std::string_view bytes) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw std::runtime_error("read failed on " + path);
  return ss.str();
}

// One telemetry line. Field set is fixed: i, r, p, phi, dphi, kkt, sampled.
// The optional "rw" object carries the applied reweighting when the run was
// asked to emit them; it is what offline clique-graph reconstruction uses.
inline nlohmann::json step_to_json(const StepRecord& rec) {
  nlohmann::json j{{"i", rec.step},   {"r", rec.r},
                   {"p", rec.p},      {"phi", rec.phi},
                   {"dphi", rec.delta_phi}, {"kkt", rec.kkt},
                   {"sampled", rec.sampled}};
  if (rec.reweighting) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& pc : rec.reweighting->rw.pairs) {
      pairs.push_back({pc.u, pc.v, pc.c});
    }
    j["rw"] = {{"w", rec.reweighting->edge_weight}, {"pairs", std::move(pairs)}};
  }
  return j;
}

inline StepRecord step_from_json(const nlohmann::json& j) {
  StepRecord rec;
  rec.step = j.at("i").get<long long>();
  rec.r = j.at("r").get<double>();
  rec.p = j.at("p").get<double>();
  rec.phi = j.at("phi").get<double>();
  rec.delta_phi = j.at("dphi").get<double>();
  rec.kkt = j.at("kkt").get<double>();
  rec.sampled = j.at("sampled").get<bool>();
  if (j.contains("rw")) {
    ReweightingRecord rw;
    rw.step = rec.step;
    rw.edge_weight = j["rw"].at("w").get<double>();
    for (const auto& item : j["rw"].at("pairs")) {
      rw.rw.pairs.push_back(
          {item.at(0).get<int>(), item.at(1).get<int>(), item.at(2).get<double>()});
    }
    rec.reweighting = std::move(rw);
  }
  return rec;
}

struct TelemetryFile {
  std::vector<StepRecord> records;
  std::vector<ReweightingRecord> reweightings;
};

inline TelemetryFile parse_telemetry(std::istream& in) {
  TelemetryFile out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    StepRecord rec;
    try {
      rec = step_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    if (rec.reweighting) out.reweightings.push_back(*rec.reweighting);
    out.records.push_back(std::move(rec));
  }
  return out;
}

inline TelemetryFile parse_telemetry(const std::string& text) {
  std::istringstream in(text);
  return parse_telemetry(in);
}

inline nlohmann::json summary_to_json(const RunSummary& s) {
  return nlohmann::json{{"n", s.n},
                        {"edges_processed", s.edges_processed},
                        {"samples", s.sample_count},
                        {"sum_p", s.sum_p},
                        {"phi0", s.phi0},
                        {"phi_final", s.phi_final},
                        {"total_weight", s.total_weight},
                        {"oversampling", s.oversampling},
                        {"eta", s.eta},
                        {"epsilon", s.epsilon},
                        {"delta", s.delta},
                        {"kappa", s.kappa},
                        {"rank_bound", s.rank_bound},
                        {"seed", s.seed},
                        {"potential_cap", s.potential_cap},
                        {"sum_p_bound", s.sum_p_bound},
                        {"optimizer_warnings", s.optimizer_warnings},
                        {"peak_state_doubles", s.peak_state_doubles}};
}

}  // namespace hysparse
