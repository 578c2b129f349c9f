#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "transeval/bleu.hpp"
#include "transeval/report.hpp"
#include "transeval/ter.hpp"

namespace transeval {

/// Echoed into every metric report.
inline nlohmann::json bleu_config() {
  return {{"tokenizer", "13a"},
          {"smoothing", "exp"},
          {"case", "mixed"},
          {"numrefs", 1},
          {"max_order", kBleuMaxOrder},
          {"signature", "BLEU+case.mixed+numrefs.1+smooth.exp+tok.13a"}};
}

inline nlohmann::json ter_config(const TerOptions& opt = {}) {
  return {{"tokenizer", "13a"},
          {"case", "mixed"},
          {"shift_cost", 1},
          {"max_shift_size", opt.max_shift_size},
          {"max_shift_distance", opt.max_shift_distance}};
}

inline nlohmann::json to_json(const BleuStats& s) {
  return {{"match", s.match}, {"total", s.total}, {"hyp_len", s.hyp_len}, {"ref_len", s.ref_len}};
}

inline BleuStats bleu_stats_from_json(const nlohmann::json& j) {
  BleuStats s;
  s.match = j.at("match").get<std::array<std::int64_t, kBleuMaxOrder>>();
  s.total = j.at("total").get<std::array<std::int64_t, kBleuMaxOrder>>();
  s.hyp_len = j.at("hyp_len").get<std::int64_t>();
  s.ref_len = j.at("ref_len").get<std::int64_t>();
  return s;
}

inline nlohmann::json to_json(const BleuReport& r) {
  return {{"score", r.score},
          {"score_display", fixed(r.score, 1)},
          {"precisions", r.precisions},
          {"brevity_penalty", r.brevity_penalty},
          {"hyp_len", r.hyp_len},
          {"ref_len", r.ref_len}};
}

inline nlohmann::json to_json(const TerReport& r) {
  return {{"score", r.score},
          {"score_display", fixed(r.score, 3)},
          {"edits", r.edits},
          {"shifts", r.shifts},
          {"ref_len", r.ref_len}};
}

// ---------------------------------------------------------------------------
// Forward/reverse comparison

struct DeltaRow {
  std::string system;
  double fwd = 0.0;
  double rev = 0.0;
  double delta = 0.0;  // rev - fwd, unrounded
};

struct DeltaTable {
  std::vector<DeltaRow> rows;  // ascending delta
};

struct ForwardReverse {
  BleuReport fwd;
  BleuReport rev;
};

/// Rows are ordered by ascending reverse-minus-forward delta; ties keep
/// system-name order.
inline DeltaTable delta_table(const std::map<std::string, ForwardReverse>& per_system) {
  DeltaTable t;
  for (const auto& [name, fr] : per_system)
    t.rows.push_back({name, fr.fwd.score, fr.rev.score, fr.rev.score - fr.fwd.score});
  std::stable_sort(t.rows.begin(), t.rows.end(),
                   [](const DeltaRow& a, const DeltaRow& b) { return a.delta < b.delta; });
  return t;
}

inline std::string render(const DeltaTable& t) {
  TextTable tab({"system", "fwd", "rev", "delta"});
  for (const auto& r : t.rows) tab.add_row({r.system, fixed(r.fwd, 1), fixed(r.rev, 1), fixed(r.delta, 1)});
  return tab.render();
}

inline nlohmann::json to_json(const DeltaTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"system", r.system},
                    {"fwd", r.fwd},
                    {"rev", r.rev},
                    {"delta", r.delta},
                    {"delta_display", fixed(r.delta, 1)}});
  return {{"rows", rows}};
}

}  // namespace transeval
