#pragma once

// Test-suite data model (direct / reverse partitions with original,
// translated and double-translated roles), bitext filtering, and the
// LM-training disjointness check.

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "transeval/error.hpp"
#include "transeval/text.hpp"

namespace transeval {

enum class Partition { kDirect, kReverse };

/// X, Y: originals. Xstar, Ystar: translations. Xdoublestar, Ydoublestar:
/// translations of translations.
enum class Role { kX, kXstar, kXdoublestar, kY, kYstar, kYdoublestar };

inline constexpr std::array<Role, 6> kAllRoles{Role::kX,     Role::kXstar,  Role::kXdoublestar,
                                               Role::kY,     Role::kYstar,  Role::kYdoublestar};

inline std::string_view to_string(Partition p) {
  return p == Partition::kDirect ? "direct" : "reverse";
}

inline std::string_view to_string(Role r) {
  switch (r) {
    case Role::kX: return "X";
    case Role::kXstar: return "Xstar";
    case Role::kXdoublestar: return "Xdoublestar";
    case Role::kY: return "Y";
    case Role::kYstar: return "Ystar";
    case Role::kYdoublestar: return "Ydoublestar";
  }
  return "?";
}

inline std::optional<Role> parse_role(std::string_view s) {
  for (Role r : kAllRoles)
    if (to_string(r) == s) return r;
  return std::nullopt;
}

inline std::optional<Partition> parse_partition(std::string_view s) {
  if (s == "direct") return Partition::kDirect;
  if (s == "reverse") return Partition::kReverse;
  return std::nullopt;
}

/// 0 for X/Y, 1 for the starred roles, 2 for the double-starred ones.
constexpr int role_depth(Role r) {
  switch (r) {
    case Role::kX: case Role::kY: return 0;
    case Role::kXstar: case Role::kYstar: return 1;
    case Role::kXdoublestar: case Role::kYdoublestar: return 2;
  }
  return -1;
}

constexpr bool role_is_source_side(Role r) {
  return r == Role::kX || r == Role::kXstar || r == Role::kXdoublestar;
}

/// Roles that exist in each partition. The direct chain is X -> Ystar -> Xdoublestar,
/// the reverse chain is Y -> Xstar -> Ydoublestar.
constexpr bool role_allowed(Partition p, Role r) {
  if (p == Partition::kDirect)
    return r == Role::kX || r == Role::kYstar || r == Role::kXdoublestar;
  return r == Role::kY || r == Role::kXstar || r == Role::kYdoublestar;
}

struct Segment {
  std::string id;
  std::string text;
  std::string language;
  std::string origin_language;
  int translation_depth = 0;
};

struct TestSuiteItem {
  std::string item_id;
  Partition partition = Partition::kDirect;
  std::map<Role, Segment> slots;

  const Segment* find(Role r) const {
    auto it = slots.find(r);
    return it == slots.end() ? nullptr : &it->second;
  }
};

struct TestSuite {
  std::string source_language = "src";
  std::string target_language = "tgt";
  std::vector<TestSuiteItem> items;

  std::vector<const TestSuiteItem*> partition(Partition p) const {
    std::vector<const TestSuiteItem*> out;
    for (const auto& it : items)
      if (it.partition == p) out.push_back(&it);
    return out;
  }

  std::size_t partition_size(Partition p) const {
    return static_cast<std::size_t>(std::count_if(
        items.begin(), items.end(), [p](const auto& it) { return it.partition == p; }));
  }

  /// Texts of one role within a partition, in item order.
  std::vector<std::string> role_texts(Partition p, Role r) const {
    std::vector<std::string> out;
    for (const auto* it : partition(p))
      if (const Segment* s = it->find(r)) out.push_back(s->text);
    return out;
  }
};

/// Groups items by partition (direct first), keeping relative order.
inline TestSuite repartition(const TestSuite& suite) {
  TestSuite out{suite.source_language, suite.target_language, {}};
  out.items.reserve(suite.items.size());
  for (Partition p : {Partition::kDirect, Partition::kReverse})
    for (const auto& it : suite.items)
      if (it.partition == p) out.items.push_back(it);
  return out;
}

namespace corpus_detail {

inline std::string item_id(Partition p, std::size_t line_no) {
  return std::string(to_string(p)) + ":" + std::to_string(line_no);
}

inline void check_required_roles(Partition p, const std::map<Role, std::string>& files) {
  const std::array<Role, 2> required = p == Partition::kDirect
                                           ? std::array<Role, 2>{Role::kX, Role::kYstar}
                                           : std::array<Role, 2>{Role::kXstar, Role::kY};
  for (Role r : required)
    if (!files.contains(r))
      throw ValidationError("partition '" + std::string(to_string(p)) + "' lacks required role " +
                            std::string(to_string(r)));
}

}  // namespace corpus_detail

/// Loads a suite from a JSON manifest of the form
///   {"direct": {"X": path, "Ystar": path, ...}, "reverse": {...}}
/// with optional "source_language"/"target_language" strings. Relative paths
/// resolve against the manifest's directory. Line i of every role file in a
/// partition forms item i.
inline TestSuite load_suite(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw LoadError("cannot open manifest: " + manifest_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed manifest " + manifest_path.string() + ": " + e.what());
  }
  if (!manifest.is_object()) throw ValidationError("manifest must be a JSON object");

  TestSuite suite;
  if (manifest.contains("source_language"))
    suite.source_language = manifest["source_language"].get<std::string>();
  if (manifest.contains("target_language"))
    suite.target_language = manifest["target_language"].get<std::string>();

  const auto base = manifest_path.parent_path();
  for (const auto& [key, roles] : manifest.items()) {
    if (key == "source_language" || key == "target_language") continue;
    const auto part = parse_partition(key);
    if (!part) throw ValidationError("unknown partition in manifest: " + key);
    if (!roles.is_object()) throw ValidationError("partition '" + key + "' must map roles to paths");

    std::map<Role, std::string> files;
    for (const auto& [role_name, path] : roles.items()) {
      const auto role = parse_role(role_name);
      if (!role) throw ValidationError("unknown role in manifest: " + role_name);
      if (!role_allowed(*part, *role))
        throw ValidationError("role " + role_name + " does not belong to partition " + key);
      std::filesystem::path p = path.get<std::string>();
      if (p.is_relative()) p = base / p;
      files[*role] = p.string();
    }
    if (files.empty()) continue;
    corpus_detail::check_required_roles(*part, files);

    std::map<Role, std::vector<std::string>> lines;
    for (const auto& [role, path] : files) {
      std::ifstream f(path, std::ios::binary);
      if (!f)
        throw LoadError("cannot open file for role " + std::string(to_string(role)) + " (" + key +
                        "): " + path);
      lines[role] = text::read_lines(f);
    }
    const auto& [first_role, first_lines] = *lines.begin();
    for (const auto& [role, ls] : lines) {
      if (ls.size() != first_lines.size())
        throw AlignmentError("line count mismatch in partition " + key + ": " +
                             files[first_role] + " has " + std::to_string(first_lines.size()) +
                             " lines, " + files[role] + " has " + std::to_string(ls.size()));
      for (std::size_t i = 0; i < ls.size(); ++i)
        if (text::trim(ls[i]).empty())
          throw ValidationError("empty segment at line " + std::to_string(i + 1) + " of " +
                                files[role] + " (role " + std::string(to_string(role)) + ")");
    }

    const std::string& origin =
        *part == Partition::kDirect ? suite.source_language : suite.target_language;
    for (std::size_t i = 0; i < first_lines.size(); ++i) {
      TestSuiteItem item;
      item.partition = *part;
      item.item_id = corpus_detail::item_id(*part, i + 1);
      for (const auto& [role, ls] : lines) {
        Segment seg;
        seg.id = item.item_id + "/" + std::string(to_string(role));
        seg.text = ls[i];
        seg.language = role_is_source_side(role) ? suite.source_language : suite.target_language;
        seg.origin_language = origin;
        seg.translation_depth = role_depth(role);
        item.slots.emplace(role, std::move(seg));
      }
      suite.items.push_back(std::move(item));
    }
  }
  return repartition(suite);
}

// ---------------------------------------------------------------------------
// Bitext filtering

struct BitextPair {
  Segment source;
  Segment target;
  std::size_t source_len = 0;
  std::size_t target_len = 0;

  static BitextPair from_text(std::string src, std::string tgt, std::string src_lang = "src",
                              std::string tgt_lang = "tgt") {
    BitextPair p;
    p.source_len = text::count_whitespace_tokens(src);
    p.target_len = text::count_whitespace_tokens(tgt);
    p.source = {{}, std::move(src), src_lang, src_lang, 0};
    p.target = {{}, std::move(tgt), tgt_lang, src_lang, 1};
    return p;
  }
};

/// Removal counts per rule. A pair failing several rules is counted under the
/// first one in the order: empty, max_len, ratio, language.
struct FilterReport {
  std::int64_t input = 0;
  std::int64_t kept = 0;
  std::int64_t removed_empty = 0;
  std::int64_t removed_max_len = 0;
  std::int64_t removed_ratio = 0;
  std::int64_t removed_language = 0;

  std::int64_t removed() const {
    return removed_empty + removed_max_len + removed_ratio + removed_language;
  }

  FilterReport& operator+=(const FilterReport& o) {
    input += o.input;
    kept += o.kept;
    removed_empty += o.removed_empty;
    removed_max_len += o.removed_max_len;
    removed_ratio += o.removed_ratio;
    removed_language += o.removed_language;
    return *this;
  }
  friend bool operator==(const FilterReport&, const FilterReport&) = default;
};

/// Accepts or rejects one side of a pair given its text and expected language.
using LanguagePredicate = std::function<bool(std::string_view text, std::string_view language)>;

struct FilterOptions {
  std::size_t max_len = 250;
  double max_ratio = 1.5;
  LanguagePredicate lang_predicate;  // empty: no language filtering
};

struct FilterResult {
  std::vector<BitextPair> kept;
  FilterReport report;
};

inline FilterResult filter_bitext(std::span<const BitextPair> pairs, const FilterOptions& opt = {}) {
  if (opt.max_len < 1) throw ValidationError("max_len must be >= 1");
  if (!(opt.max_ratio > 0)) throw ValidationError("max_ratio must be > 0");

  FilterResult res;
  res.report.input = static_cast<std::int64_t>(pairs.size());
  for (const auto& p : pairs) {
    if (p.source_len == 0 || p.target_len == 0) {
      ++res.report.removed_empty;
      continue;
    }
    if (p.source_len > opt.max_len || p.target_len > opt.max_len) {
      ++res.report.removed_max_len;
      continue;
    }
    const double longer = static_cast<double>(std::max(p.source_len, p.target_len));
    const double shorter = static_cast<double>(std::min(p.source_len, p.target_len));
    if (longer / shorter > opt.max_ratio) {
      ++res.report.removed_ratio;
      continue;
    }
    if (opt.lang_predicate && (!opt.lang_predicate(p.source.text, p.source.language) ||
                               !opt.lang_predicate(p.target.text, p.target.language))) {
      ++res.report.removed_language;
      continue;
    }
    res.kept.push_back(p);
  }
  res.report.kept = static_cast<std::int64_t>(res.kept.size());
  return res;
}

enum class Script { kLatin, kCyrillic, kGreek, kUnknown };

/// Script of a handful of common language codes; kUnknown disables the check.
inline Script script_for_language(std::string_view lang) {
  static const std::array<std::string_view, 16> latin{"en", "de", "fr", "es", "it", "pt", "nl", "cs",
                                                      "pl", "ro", "fi", "et", "lv", "lt", "tr", "hu"};
  static const std::array<std::string_view, 5> cyrillic{"ru", "uk", "bg", "sr", "kk"};
  if (std::find(latin.begin(), latin.end(), lang) != latin.end()) return Script::kLatin;
  if (std::find(cyrillic.begin(), cyrillic.end(), lang) != cyrillic.end()) return Script::kCyrillic;
  if (lang == "el") return Script::kGreek;
  return Script::kUnknown;
}

inline Script script_of(char32_t c) {
  if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= 0xC0 && c <= 0x24F && c != 0xD7 && c != 0xF7))
    return Script::kLatin;
  if (c >= 0x400 && c <= 0x52F) return Script::kCyrillic;
  if (c >= 0x370 && c <= 0x3FF) return Script::kGreek;
  return Script::kUnknown;
}

/// Fraction of letters (characters of any recognized script) that belong to
/// `expected`. Text without recognizable letters yields 1.
inline double script_fraction(std::string_view s, Script expected) {
  std::size_t letters = 0, hits = 0;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t len = 1;
    const char32_t c = text::detail::decode_utf8(s, i, len);
    i += len;
    const Script sc = script_of(c);
    if (sc == Script::kUnknown) continue;
    ++letters;
    if (sc == expected) ++hits;
  }
  return letters == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(letters);
}

/// Built-in language heuristic: at least `min_fraction` of the letters are in
/// the script of the expected language. Unknown languages always pass.
inline LanguagePredicate script_language_predicate(double min_fraction = 0.5) {
  return [min_fraction](std::string_view txt, std::string_view lang) {
    const Script expected = script_for_language(lang);
    if (expected == Script::kUnknown) return true;
    return script_fraction(txt, expected) >= min_fraction;
  };
}

// ---------------------------------------------------------------------------
// Disjointness between LM training data and an excluded corpus

struct OverlapReport {
  std::int64_t lm_lines = 0;
  std::int64_t overlapping = 0;

  double fraction() const {
    return lm_lines == 0 ? 0.0 : static_cast<double>(overlapping) / static_cast<double>(lm_lines);
  }
  OverlapReport& operator+=(const OverlapReport& o) {
    lm_lines += o.lm_lines;
    overlapping += o.overlapping;
    return *this;
  }
  friend bool operator==(const OverlapReport&, const OverlapReport&) = default;
};

/// Exact-match index over normalized (trimmed, whitespace-squeezed) lines.
class LineIndex {
 public:
  explicit LineIndex(std::span<const std::string> lines) {
    for (const auto& l : lines) {
      auto norm = text::squeeze(l);
      if (!norm.empty()) set_.insert(std::move(norm));
    }
  }
  bool contains(std::string_view line) const { return set_.contains(text::squeeze(line)); }
  std::size_t size() const { return set_.size(); }

 private:
  std::unordered_set<std::string> set_;
};

/// Blank lines are not counted on either side.
inline OverlapReport disjointness_report(std::span<const std::string> lm_corpus,
                                         const LineIndex& excluded) {
  OverlapReport r;
  for (const auto& line : lm_corpus) {
    if (text::trim(line).empty()) continue;
    ++r.lm_lines;
    if (excluded.contains(line)) ++r.overlapping;
  }
  return r;
}

inline OverlapReport disjointness_report(std::span<const std::string> lm_corpus,
                                         std::span<const std::string> excluded_corpus) {
  return disjointness_report(lm_corpus, LineIndex(excluded_corpus));
}

struct SystemOutput {
  std::string system_id;
  std::string item_id;
  std::string hypothesis;
};

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const FilterReport& r) {
  return {{"input", r.input},
          {"kept", r.kept},
          {"removed", {{"empty", r.removed_empty},
                       {"max_len", r.removed_max_len},
                       {"ratio", r.removed_ratio},
                       {"language", r.removed_language}}}};
}

inline nlohmann::json to_json(const OverlapReport& r) {
  return {{"lm_lines", r.lm_lines}, {"overlapping", r.overlapping}, {"fraction", r.fraction()}};
}

inline nlohmann::json to_json(const TestSuite& s) {
  nlohmann::json parts = nlohmann::json::object();
  for (Partition p : {Partition::kDirect, Partition::kReverse}) {
    const auto items = s.partition(p);
    if (items.empty()) continue;
    nlohmann::json roles = nlohmann::json::array();
    for (Role r : kAllRoles)
      if (items.front()->find(r)) roles.push_back(std::string(to_string(r)));
    parts[std::string(to_string(p))] = {{"items", items.size()}, {"roles", roles}};
  }
  return {{"source_language", s.source_language},
          {"target_language", s.target_language},
          {"total_items", s.items.size()},
          {"partitions", parts}};
}

}  // namespace transeval
