#pragma once

// Direct-assessment ingestion and aggregation: per-rater z-normalization,
// per-sentence then per-system averaging, the 30-point disagreement flag,
// and the pairwise-preference sign test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "transeval/error.hpp"
#include "transeval/report.hpp"
#include "transeval/text.hpp"

namespace transeval::human {

enum class AssessmentType { kSourceBased, kTargetBased };

inline std::string_view to_string(AssessmentType t) {
  return t == AssessmentType::kSourceBased ? "source_based" : "target_based";
}

struct Judgement {
  std::string rater_id;
  std::string system_id;
  std::string item_id;
  double score = 0.0;  // [1, 100]
  AssessmentType assessment_type = AssessmentType::kSourceBased;
  int round = 1;
};

inline constexpr double kMinScore = 1.0;
inline constexpr double kMaxScore = 100.0;

/// TSV with header: rater_id system_id item_id score assessment_type round.
inline std::vector<Judgement> read_judgements_tsv(std::istream& in, const std::string& name = "<stream>") {
  static const std::vector<std::string> kHeader{"rater_id", "system_id",       "item_id",
                                                "score",    "assessment_type", "round"};
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(name + ": missing header row");
  auto split_tabs = [](const std::string& s) {
    std::vector<std::string> f;
    std::size_t b = 0;
    while (true) {
      const auto e = s.find('\t', b);
      f.emplace_back(text::trim(std::string_view(s).substr(b, e == std::string::npos ? s.npos : e - b)));
      if (e == std::string::npos) break;
      b = e + 1;
    }
    return f;
  };
  if (split_tabs(line) != kHeader)
    throw ValidationError(name + ": header must be rater_id, system_id, item_id, score, assessment_type, round");

  std::vector<Judgement> out;
  std::set<std::tuple<std::string, std::string, std::string, int>> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = split_tabs(line);
    const std::string where = name + " line " + std::to_string(line_no);
    if (f.size() != kHeader.size()) throw ValidationError(where + ": expected 6 tab-separated fields");
    Judgement j;
    j.rater_id = f[0];
    j.system_id = f[1];
    j.item_id = f[2];
    try {
      std::size_t used = 0;
      j.score = std::stod(f[3], &used);
      if (used != f[3].size()) throw std::invalid_argument("trailing");
      j.round = std::stoi(f[5], &used);
      if (used != f[5].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ValidationError(where + ": malformed score or round");
    }
    if (!(j.score >= kMinScore && j.score <= kMaxScore))
      throw ValidationError(where + ": score " + f[3] + " outside [1, 100]");
    if (f[4] == "source_based") j.assessment_type = AssessmentType::kSourceBased;
    else if (f[4] == "target_based") j.assessment_type = AssessmentType::kTargetBased;
    else throw ValidationError(where + ": assessment_type must be source_based or target_based");
    if (!seen.emplace(j.rater_id, j.system_id, j.item_id, j.round).second)
      throw ValidationError(where + ": duplicate judgement for rater " + j.rater_id + ", system " +
                            j.system_id + ", item " + j.item_id + ", round " + f[5]);
    out.push_back(std::move(j));
  }
  return out;
}

/// Keeps, for each (assessment type, system, item), only the judgements of
/// the latest round present. Re-rated items thereby replace the first round.
inline std::vector<Judgement> final_round(std::span<const Judgement> js) {
  std::map<std::tuple<AssessmentType, std::string, std::string>, int> last;
  for (const auto& j : js) {
    auto [it, fresh] = last.try_emplace({j.assessment_type, j.system_id, j.item_id}, j.round);
    if (!fresh) it->second = std::max(it->second, j.round);
  }
  std::vector<Judgement> out;
  for (const auto& j : js)
    if (last.at({j.assessment_type, j.system_id, j.item_id}) == j.round) out.push_back(j);
  return out;
}

// ---------------------------------------------------------------------------
// Normalization

struct NormalizedJudgement {
  Judgement judgement;
  double z = 0.0;
};

enum class StdDivisor { kSample, kPopulation };

struct RaterStats {
  std::string rater_id;
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;
  bool flagged = false;  // single judgement or zero variance: every z is 0
};

struct Normalization {
  std::vector<NormalizedJudgement> judgements;  // input order
  std::vector<RaterStats> raters;               // sorted by rater id
  StdDivisor divisor = StdDivisor::kSample;
};

inline Normalization z_normalize(std::span<const Judgement> js, StdDivisor divisor = StdDivisor::kSample) {
  std::map<std::string, std::vector<double>> by_rater;
  for (const auto& j : js) by_rater[j.rater_id].push_back(j.score);

  Normalization out;
  out.divisor = divisor;
  std::map<std::string, const RaterStats*> index;
  out.raters.reserve(by_rater.size());
  for (const auto& [rater, scores] : by_rater) {
    RaterStats s;
    s.rater_id = rater;
    s.n = scores.size();
    double sum = 0.0;
    for (double v : scores) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    double ss = 0.0;
    for (double v : scores) ss += (v - s.mean) * (v - s.mean);
    const double dof = divisor == StdDivisor::kSample ? static_cast<double>(s.n) - 1.0 : static_cast<double>(s.n);
    s.stddev = dof > 0 ? std::sqrt(ss / dof) : 0.0;
    s.flagged = s.n < 2 || s.stddev == 0.0;
    out.raters.push_back(s);
  }
  for (const auto& s : out.raters) index[s.rater_id] = &s;

  out.judgements.reserve(js.size());
  for (const auto& j : js) {
    const RaterStats& s = *index.at(j.rater_id);
    out.judgements.push_back({j, s.flagged ? 0.0 : (j.score - s.mean) / s.stddev});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation

struct ItemScore {
  std::string item_id;
  double z = 0.0;  // mean over the item's judgements
  std::size_t n_judgements = 0;
};

struct SystemScore {
  std::string system_id;
  double z_score = 0.0;
  std::size_t n_items = 0;
};

/// Mean z per (system, item), items sorted by id.
inline std::map<std::string, std::vector<ItemScore>> per_item_scores(std::span<const NormalizedJudgement> js) {
  std::map<std::string, std::map<std::string, std::pair<double, std::size_t>>> acc;
  for (const auto& nj : js) {
    auto& cell = acc[nj.judgement.system_id][nj.judgement.item_id];
    cell.first += nj.z;
    ++cell.second;
  }
  std::map<std::string, std::vector<ItemScore>> out;
  for (const auto& [sys, items] : acc) {
    auto& v = out[sys];
    for (const auto& [item, cell] : items)
      v.push_back({item, cell.first / static_cast<double>(cell.second), cell.second});
  }
  return out;
}

struct Aggregation {
  std::vector<SystemScore> systems;  // sorted by system id
  std::vector<std::string> warnings;
};

/// Per-sentence mean of z-scores, then the mean of those per system.
/// Systems in `expected_systems` without judgements are reported as warnings.
inline Aggregation aggregate_system_scores(std::span<const NormalizedJudgement> js,
                                           std::span<const std::string> expected_systems = {}) {
  Aggregation out;
  const auto items = per_item_scores(js);
  for (const auto& [sys, scores] : items) {
    double sum = 0.0;
    for (const auto& s : scores) sum += s.z;
    out.systems.push_back({sys, sum / static_cast<double>(scores.size()), scores.size()});
  }
  for (const auto& sys : expected_systems)
    if (!items.contains(sys)) out.warnings.push_back("system " + sys + " has no judgements; excluded");
  return out;
}

// ---------------------------------------------------------------------------
// Disagreement flag

inline constexpr double kMaxSpread = 30.0;
inline constexpr std::size_t kJudgementsPerItem = 3;

struct AgreementReport {
  std::vector<std::pair<std::string, std::string>> flagged;  // (system, item)
  std::vector<std::string> warnings;
};

/// Flags (system, item) groups of three raw scores whose max - min exceeds 30.
/// Groups of any other size are skipped with a warning.
inline AgreementReport flag_low_agreement(std::span<const Judgement> js) {
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const auto& j : js) groups[{j.system_id, j.item_id}].push_back(j.score);
  AgreementReport out;
  for (const auto& [key, scores] : groups) {
    if (scores.size() != kJudgementsPerItem) {
      out.warnings.push_back("system " + key.first + ", item " + key.second + ": " +
                             std::to_string(scores.size()) + " judgements, expected 3; skipped");
      continue;
    }
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    if (*hi - *lo > kMaxSpread) out.flagged.push_back(key);
  }
  return out;
}

inline bool spread_exceeds(std::span<const double> scores) {
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  return *hi - *lo > kMaxSpread;
}

// ---------------------------------------------------------------------------
// Sign test

struct PairwisePreference {
  std::int64_t wins_a = 0;
  std::int64_t wins_b = 0;
  std::int64_t draws = 0;
  double p_value = 1.0;
};

/// P(X >= k) for X ~ Binomial(n, 1/2).
inline double binomial_upper_tail_half(std::int64_t k, std::int64_t n) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  const double log_half_n = static_cast<double>(n) * std::log(0.5);
  const double log_n_fact = std::lgamma(static_cast<double>(n) + 1.0);
  double tail = 0.0;
  for (std::int64_t i = n; i >= k; --i)  // smallest terms first
    tail += std::exp(log_n_fact - std::lgamma(static_cast<double>(i) + 1.0) -
                     std::lgamma(static_cast<double>(n - i) + 1.0) + log_half_n);
  return std::min(tail, 1.0);
}

/// One-sided exact sign test that A is preferred; draws are discarded.
inline PairwisePreference sign_test_pairwise(std::int64_t wins_a, std::int64_t wins_b, std::int64_t draws) {
  if (wins_a < 0 || wins_b < 0 || draws < 0) throw ValidationError("preference counts must be non-negative");
  if (wins_a + wins_b == 0) throw DegenerateInputError("sign test undefined: no decided comparisons");
  return {wins_a, wins_b, draws, binomial_upper_tail_half(wins_a, wins_a + wins_b)};
}

// ---------------------------------------------------------------------------
// Reports

inline nlohmann::json to_json(const PairwisePreference& p) {
  return {{"wins_a", p.wins_a}, {"wins_b", p.wins_b}, {"draws", p.draws}, {"p_value", p.p_value},
          {"test", "one-sided exact binomial sign test, draws excluded"}};
}

inline nlohmann::json to_json(const Aggregation& a, const Normalization& n) {
  nlohmann::json systems = nlohmann::json::array();
  for (const auto& s : a.systems)
    systems.push_back({{"system_id", s.system_id}, {"z_score", s.z_score}, {"n_items", s.n_items}});
  nlohmann::json flagged = nlohmann::json::array();
  for (const auto& r : n.raters)
    if (r.flagged) flagged.push_back(r.rater_id);
  return {{"systems", systems},
          {"flagged_raters", flagged},
          {"std_divisor", n.divisor == StdDivisor::kSample ? "n-1" : "n"},
          {"warnings", a.warnings}};
}

struct HumanBleuRow {
  std::string label;
  std::optional<double> bleu;
  std::optional<double> human_z;
};

/// BLEU and human z-score side by side, one row per system condition.
inline std::string render_human_bleu_table(std::span<const HumanBleuRow> rows) {
  TextTable t({"system", "BLEU", "human"});
  for (const auto& r : rows)
    t.add_row({r.label, r.bleu ? fixed(*r.bleu, 1) : "-", r.human_z ? fixed(*r.human_z, 3) : "-"});
  return t.render();
}

inline std::string render_pairwise_table(std::span<const std::pair<std::string, PairwisePreference>> rows) {
  TextTable t({"pair", "A", "B", "draw", "p"});
  for (const auto& [label, p] : rows)
    t.add_row({label, std::to_string(p.wins_a), std::to_string(p.wins_b), std::to_string(p.draws),
               fixed(p.p_value, 3)});
  return t.render();
}

}  // namespace transeval::human
