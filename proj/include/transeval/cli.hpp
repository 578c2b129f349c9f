#pragma once

// Command-line front end. dispatch() is the whole program; tools/transeval.cpp
// only forwards argv and the standard streams.
//
// Exit codes: 0 success, 1 usage error, 2 data or validation error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "transeval/bleu.hpp"
#include "transeval/corpus.hpp"
#include "transeval/error.hpp"
#include "transeval/humaneval.hpp"
#include "transeval/lm.hpp"
#include "transeval/metrics.hpp"
#include "transeval/report.hpp"
#include "transeval/significance.hpp"
#include "transeval/ter.hpp"
#include "transeval/tokenizer.hpp"

namespace transeval::cli {

using nlohmann::json;

enum class Format { kJson, kTable };

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

namespace detail {

inline std::vector<TokenSequence> tokenize_file(const std::string& path) {
  std::vector<TokenSequence> out;
  for (const auto& line : text::read_lines(path)) out.push_back(tok13a(line));
  return out;
}

inline void require_same_length(const std::string& a, std::size_t na, const std::string& b, std::size_t nb) {
  if (na != nb)
    throw AlignmentError("line count mismatch: " + a + " has " + std::to_string(na) + " lines, " + b + " has " +
                         std::to_string(nb));
}

/// Splits NAME=VALUE.
inline std::pair<std::string, std::string> split_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("expected NAME=VALUE, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

inline json tool_info(const std::string& subcommand) {
  return {{"name", "transeval"}, {"version", kVersion}, {"subcommand", subcommand}};
}

inline std::string error_kind(const Error& e) {
  if (dynamic_cast<const LoadError*>(&e)) return "load_error";
  if (dynamic_cast<const AlignmentError*>(&e)) return "alignment_error";
  if (dynamic_cast<const ValidationError*>(&e)) return "validation_error";
  if (dynamic_cast<const DegenerateInputError*>(&e)) return "degenerate_input";
  return "error";
}

inline lm::Tokenization parse_tokenization(const std::string& s) {
  return s == "13a" ? lm::Tokenization::k13a : lm::Tokenization::kWhitespace;
}

}  // namespace detail

/// Shared per-invocation options and output handling.
class Context {
 public:
  explicit Context(Streams s) : streams_(s) {}

  std::string format_name = "json";
  std::string out_path;

  Format format() const { return format_name == "table" ? Format::kTable : Format::kJson; }

  void emit_json(const std::string& subcommand, const json& config, const json& result) {
    json doc{{"tool", detail::tool_info(subcommand)}, {"config", config}, {"result", result}};
    write(doc.dump(2) + "\n");
  }

  void write(const std::string& s) {
    if (out_path.empty()) {
      streams_.out << s;
      return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw LoadError("cannot write output: " + out_path);
    f << s;
  }

  /// Table output, or JSON when the table form is not requested.
  void emit(const std::string& subcommand, const json& config, const json& result, const std::string& table) {
    if (format() == Format::kTable) write(table);
    else emit_json(subcommand, config, result);
  }

  Streams& streams() { return streams_; }

 private:
  Streams streams_;
};

// ---------------------------------------------------------------------------
// Subcommand implementations

inline void run_tokenize(Context& ctx, const std::string& in_path) {
  std::vector<std::string> lines;
  if (in_path.empty() || in_path == "-") lines = text::read_lines(ctx.streams().in);
  else lines = text::read_lines(in_path);
  std::string out;
  for (const auto& l : lines) out += tok13a(l).joined() + "\n";
  ctx.write(out);
}

struct FilterArgs {
  std::string src, tgt, src_lang = "src", tgt_lang = "tgt", kept_src, kept_tgt;
  std::size_t max_len = 250;
  double max_ratio = 1.5;
  bool lang_filter = false;
  double script_fraction = 0.5;
};

inline void run_filter_bitext(Context& ctx, const FilterArgs& a) {
  const auto src = text::read_lines(a.src);
  const auto tgt = text::read_lines(a.tgt);
  detail::require_same_length(a.src, src.size(), a.tgt, tgt.size());
  std::vector<BitextPair> pairs;
  pairs.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    auto p = BitextPair::from_text(src[i], tgt[i], a.src_lang, a.tgt_lang);
    p.source.id = p.target.id = std::to_string(i + 1);
    pairs.push_back(std::move(p));
  }
  FilterOptions opt{a.max_len, a.max_ratio, {}};
  if (a.lang_filter) opt.lang_predicate = script_language_predicate(a.script_fraction);
  const auto res = filter_bitext(pairs, opt);

  if (!a.kept_src.empty() || !a.kept_tgt.empty()) {
    std::ofstream fs(a.kept_src, std::ios::binary), ft(a.kept_tgt, std::ios::binary);
    if (!fs || !ft) throw LoadError("cannot write filtered output: " + a.kept_src + ", " + a.kept_tgt);
    for (const auto& p : res.kept) {
      fs << p.source.text << "\n";
      ft << p.target.text << "\n";
    }
  }

  json config{{"max_len", a.max_len}, {"max_ratio", a.max_ratio}, {"ratio", "symmetric max/min"},
              {"word_count", "whitespace"}, {"language_filter", a.lang_filter ? json("script-fraction") : json(nullptr)},
              {"script_fraction", a.script_fraction}, {"source_language", a.src_lang}, {"target_language", a.tgt_lang}};
  TextTable t({"rule", "count"});
  t.add_row({"input", std::to_string(res.report.input)});
  t.add_row({"removed:empty", std::to_string(res.report.removed_empty)});
  t.add_row({"removed:max_len", std::to_string(res.report.removed_max_len)});
  t.add_row({"removed:ratio", std::to_string(res.report.removed_ratio)});
  t.add_row({"removed:language", std::to_string(res.report.removed_language)});
  t.add_row({"kept", std::to_string(res.report.kept)});
  ctx.emit("filter-bitext", config, to_json(res.report), t.render());
}

inline void run_partition(Context& ctx, const std::string& manifest) {
  const TestSuite suite = load_suite(manifest);
  TextTable t({"partition", "items", "roles"});
  for (Partition p : {Partition::kDirect, Partition::kReverse}) {
    const auto items = suite.partition(p);
    std::string roles;
    if (!items.empty())
      for (Role r : kAllRoles)
        if (items.front()->find(r)) roles += (roles.empty() ? "" : ",") + std::string(to_string(r));
    t.add_row({std::string(to_string(p)), std::to_string(items.size()), roles.empty() ? "-" : roles});
  }
  ctx.emit("partition", {{"manifest", manifest}}, to_json(suite), t.render());
}

inline json bleu_stats_file(const std::vector<BleuStats>& stats, const std::string& hyp, const std::string& ref) {
  json items = json::array();
  for (std::size_t i = 0; i < stats.size(); ++i)
    items.push_back({{"item_id", std::to_string(i + 1)}, {"stats", to_json(stats[i])}});
  return {{"metric", "bleu"}, {"hyp", hyp}, {"ref", ref}, {"config", bleu_config()}, {"items", items}};
}

inline void run_bleu(Context& ctx, const std::string& hyp_path, const std::string& ref_path, bool sentence,
                     const std::string& stats_out) {
  const auto hyps = detail::tokenize_file(hyp_path);
  const auto refs = detail::tokenize_file(ref_path);
  detail::require_same_length(hyp_path, hyps.size(), ref_path, refs.size());
  const auto stats = bleu_segment_stats(hyps, refs);
  const BleuReport corpus = bleu_score(sum_stats(stats));

  json result = to_json(corpus);
  TextTable t({"segment", "BLEU"});
  if (sentence) {
    json per = json::array();
    for (std::size_t i = 0; i < stats.size(); ++i) {
      const auto r = bleu_score(stats[i]);
      per.push_back(to_json(r));
      t.add_row({std::to_string(i + 1), fixed(r.score, 1)});
    }
    result["sentences"] = per;
    t.add_rule();
  }
  t.add_row({"corpus", fixed(corpus.score, 1)});
  if (!stats_out.empty()) {
    std::ofstream f(stats_out, std::ios::binary);
    if (!f) throw LoadError("cannot write stats file: " + stats_out);
    f << bleu_stats_file(stats, hyp_path, ref_path).dump() << "\n";
  }
  json config = bleu_config();
  config["hyp"] = hyp_path;
  config["ref"] = ref_path;
  ctx.emit("bleu", config, result, t.render());
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers; results must be
/// written to per-index slots so the outcome is independent of scheduling.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) fn(i);
    });
}

inline void run_ter(Context& ctx, const std::string& hyp_path, const std::string& ref_path, bool sentence,
                    unsigned threads) {
  const auto hyps = detail::tokenize_file(hyp_path);
  const auto refs = detail::tokenize_file(ref_path);
  detail::require_same_length(hyp_path, hyps.size(), ref_path, refs.size());
  std::vector<std::optional<TerReport>> per(hyps.size());
  parallel_for(hyps.size(), threads, [&](std::size_t i) {
    if (!refs[i].empty()) per[i] = ter(hyps[i], refs[i]);
  });
  TerReport total;
  for (std::size_t i = 0; i < per.size(); ++i) {
    if (per[i]) {
      total.edits += per[i]->edits;
      total.shifts += per[i]->shifts;
      total.ref_len += per[i]->ref_len;
    } else {
      total.edits += static_cast<std::int64_t>(hyps[i].size());
    }
  }
  if (total.ref_len == 0) throw DegenerateInputError("TER is undefined: all references are empty");
  total.score = static_cast<double>(total.edits) / static_cast<double>(total.ref_len);

  json result = to_json(total);
  TextTable t({"segment", "TER"});
  if (sentence) {
    json arr = json::array();
    for (std::size_t i = 0; i < per.size(); ++i) {
      arr.push_back(per[i] ? to_json(*per[i]) : json(nullptr));
      t.add_row({std::to_string(i + 1), per[i] ? fixed(per[i]->score, 3) : "-"});
    }
    result["sentences"] = arr;
    t.add_rule();
  }
  t.add_row({"corpus", fixed(total.score, 3)});
  json config = ter_config();
  config["hyp"] = hyp_path;
  config["ref"] = ref_path;
  ctx.emit("ter", config, result, t.render());
}

/// BLEU of a system directory's output for one partition of a suite.
/// The directory holds direct.txt (translations of X) and reverse.txt
/// (translations of Xstar); references are Ystar and Y respectively.
inline std::optional<BleuReport> partition_bleu(const TestSuite& suite, Partition p, const std::string& sys_dir,
                                                std::vector<BleuStats>* per_item = nullptr) {
  const Role ref_role = p == Partition::kDirect ? Role::kYstar : Role::kY;
  const auto refs = suite.role_texts(p, ref_role);
  if (refs.empty()) return std::nullopt;
  const auto hyp_path = (std::filesystem::path(sys_dir) / (std::string(to_string(p)) + ".txt")).string();
  const auto hyp_lines = text::read_lines(hyp_path);
  detail::require_same_length(hyp_path, hyp_lines.size(), std::string(to_string(p)) + " references", refs.size());
  std::vector<BleuStats> stats;
  for (std::size_t i = 0; i < refs.size(); ++i) stats.push_back(bleu_stats(tok13a(hyp_lines[i]), tok13a(refs[i])));
  if (per_item) *per_item = stats;
  return bleu_score(sum_stats(stats));
}

inline void run_delta_table(Context& ctx, const std::string& manifest, const std::vector<std::string>& systems,
                            const std::string& scores_path) {
  std::map<std::string, ForwardReverse> per_system;
  if (!scores_path.empty()) {
    std::ifstream f(scores_path);
    if (!f) throw LoadError("cannot open scores file: " + scores_path);
    const json j = json::parse(f);
    for (const auto& [name, v] : j.items()) {
      ForwardReverse fr;
      fr.fwd.score = v.at("fwd").get<double>();
      fr.rev.score = v.at("rev").get<double>();
      per_system[name] = fr;
    }
  }
  if (!systems.empty()) {
    if (manifest.empty()) throw ValidationError("--system requires --suite");
    const TestSuite suite = load_suite(manifest);
    for (const auto& s : systems) {
      const auto [name, dir] = detail::split_assignment(s);
      auto fwd = partition_bleu(suite, Partition::kDirect, dir);
      auto rev = partition_bleu(suite, Partition::kReverse, dir);
      if (!fwd || !rev) throw ValidationError("delta table needs both direct and reverse partitions");
      per_system[name] = {*fwd, *rev};
    }
  }
  if (per_system.empty()) throw ValidationError("delta table needs at least one system");
  const DeltaTable t = delta_table(per_system);
  json config = bleu_config();
  config["delta"] = "rev - fwd, from unrounded scores";
  config["order"] = "ascending delta";
  ctx.emit("delta-table", config, to_json(t), render(t));
}

struct LmTrainArgs {
  std::string corpus, out, tokenizer = "whitespace";
  int order = 5;
  int unk_threshold = 2;
  std::size_t shards = 1;
};

inline void run_lm_train(Context& ctx, const LmTrainArgs& a) {
  const auto lines = text::read_lines(a.corpus);
  const auto tok = detail::parse_tokenization(a.tokenizer);
  const auto counts = lm::count_ngrams_sharded(lines, a.order, tok, a.shards);
  lm::NGramModel model = lm::estimate_kn(counts, a.unk_threshold);
  model.metadata().tokenization = std::string(lm::to_string(tok));
  lm::save_arpa(model, a.out);

  json result = lm::to_json(model.metadata());
  json sizes = json::array();
  for (int n = 1; n <= model.order(); ++n) sizes.push_back(model.entries(n).size());
  result["ngrams"] = sizes;
  result["vocabulary"] = model.vocab().size();
  result["model"] = a.out;
  TextTable t({"order", "ngrams", "D1", "D2", "D3+"});
  for (int n = 1; n <= model.order(); ++n) {
    const auto& d = model.metadata().discounts[n - 1];
    t.add_row({std::to_string(n), std::to_string(model.entries(n).size()), fixed(d.d[0], 4), fixed(d.d[1], 4),
               fixed(d.d[2], 4)});
  }
  ctx.emit("lm-train",
           {{"order", a.order}, {"corpus", a.corpus}, {"tokenization", a.tokenizer},
            {"unk_threshold", a.unk_threshold}, {"shards", a.shards}, {"log_base", "e (reports), 10 (ARPA)"}},
           result, t.render());
}

inline void run_lm_score(Context& ctx, const std::string& model_path, const std::string& text_path,
                         const std::string& tokenizer) {
  const auto model = lm::load_arpa(model_path);
  const auto r = lm::perplexity(model, text::read_lines(text_path), detail::parse_tokenization(tokenizer));
  TextTable t({"text", "tokens", "OOV", "PPL"});
  t.add_row({text_path, std::to_string(r.token_count), fixed(r.oov_rate(), 4), fixed(r.ppl, 1)});
  ctx.emit("lm-score", {{"model", model_path}, {"text", text_path}, {"tokenization", tokenizer}, {"order", model.order()}},
           lm::to_json(r), t.render());
}

struct FluencyArgs {
  std::string model, a, b, excluded, lm_corpus, tokenizer = "whitespace", label_a = "a", label_b = "b";
};

inline void run_fluency_compare(Context& ctx, const FluencyArgs& args) {
  const auto model = lm::load_arpa(args.model);
  const auto a = text::read_lines(args.a);
  const auto b = text::read_lines(args.b);
  const auto excluded_lines = text::read_lines(args.excluded);
  const LineIndex excluded(excluded_lines);
  std::optional<OverlapReport> lm_overlap;
  if (!args.lm_corpus.empty()) lm_overlap = disjointness_report(text::read_lines(args.lm_corpus), excluded);
  auto r = lm::fluency_compare(model, a, b, lm_overlap, detail::parse_tokenization(args.tokenizer));
  r.a_overlap = disjointness_report(a, excluded);
  r.b_overlap = disjointness_report(b, excluded);

  TextTable t({"", args.label_a, args.label_b});
  t.add_row({"PPL", fixed(r.a.ppl, 1), fixed(r.b.ppl, 1)});
  const std::string winner = r.winner == lm::Winner::kA ? args.label_a : r.winner == lm::Winner::kB ? args.label_b : "tie";
  std::string table = t.render() + "more fluent: " + winner + "\n";
  if (lm_overlap) table += "LM corpus overlap with excluded data: " + fixed(lm_overlap->fraction(), 4) + "\n";
  ctx.emit("fluency-compare",
           {{"model", args.model}, {"a", args.a}, {"b", args.b}, {"excluded", args.excluded},
            {"lm_corpus", args.lm_corpus.empty() ? json(nullptr) : json(args.lm_corpus)},
            {"tokenization", args.tokenizer}, {"overlap_match", "exact, trimmed and whitespace-squeezed"}},
           lm::to_json(r), table);
}

inline void run_disjointness(Context& ctx, const std::string& lm_corpus, const std::string& excluded) {
  const auto r = disjointness_report(text::read_lines(lm_corpus), text::read_lines(excluded));
  TextTable t({"lm lines", "overlapping", "fraction"});
  t.add_row({std::to_string(r.lm_lines), std::to_string(r.overlapping), fixed(r.fraction(), 4)});
  ctx.emit("disjointness", {{"lm_corpus", lm_corpus}, {"excluded", excluded}, {"match", "exact, trimmed and whitespace-squeezed"}},
           to_json(r), t.render());
}

struct DaArgs {
  std::string judgements, type = "all", std_divisor = "sample", stats_dir;
  std::vector<std::string> bleu;
};

inline void run_da_aggregate(Context& ctx, const DaArgs& a) {
  std::ifstream f(a.judgements, std::ios::binary);
  if (!f) throw LoadError("cannot open judgements: " + a.judgements);
  auto all = human::read_judgements_tsv(f, a.judgements);
  std::vector<human::Judgement> js;
  for (auto& j : all)
    if (a.type == "all" || human::to_string(j.assessment_type) == a.type) js.push_back(std::move(j));
  if (js.empty()) throw ValidationError("no judgements of type " + a.type + " in " + a.judgements);

  const auto agreement = human::flag_low_agreement(js);
  const auto final_js = human::final_round(js);
  const auto divisor = a.std_divisor == "population" ? human::StdDivisor::kPopulation : human::StdDivisor::kSample;
  const auto norm = human::z_normalize(final_js, divisor);
  const auto agg = human::aggregate_system_scores(norm.judgements);

  std::map<std::string, double> bleu;
  for (const auto& s : a.bleu) {
    const auto [name, value] = detail::split_assignment(s);
    try {
      bleu[name] = std::stod(value);
    } catch (const std::exception&) {
      throw ValidationError("malformed BLEU value for " + name + ": " + value);
    }
  }

  json result = human::to_json(agg, norm);
  json flagged = json::array();
  for (const auto& [sys, item] : agreement.flagged) flagged.push_back({{"system_id", sys}, {"item_id", item}});
  result["low_agreement"] = {{"flagged", flagged}, {"warnings", agreement.warnings}};

  if (!a.stats_dir.empty()) {
    std::filesystem::create_directories(a.stats_dir);
    for (const auto& [sys, items] : human::per_item_scores(norm.judgements)) {
      json arr = json::array();
      for (const auto& it : items) arr.push_back({{"item_id", it.item_id}, {"z", it.z}});
      const auto path = (std::filesystem::path(a.stats_dir) / (sys + ".json")).string();
      std::ofstream o(path, std::ios::binary);
      if (!o) throw LoadError("cannot write stats file: " + path);
      o << json{{"metric", "human"}, {"system_id", sys}, {"items", arr}}.dump() << "\n";
    }
  }

  std::vector<human::HumanBleuRow> rows;
  for (const auto& s : agg.systems) {
    auto it = bleu.find(s.system_id);
    rows.push_back({s.system_id, it == bleu.end() ? std::nullopt : std::optional(it->second), s.z_score});
  }
  ctx.emit("da-aggregate",
           {{"judgements", a.judgements}, {"assessment_type", a.type}, {"std_divisor", a.std_divisor},
            {"rounds", "latest round per (type, system, item)"}, {"spread_rule", "max - min > 30 over 3 raw scores"}},
           result, human::render_human_bleu_table(rows));
}

struct PairwiseArgs {
  std::string file;
  long long wins_a = -1, wins_b = -1, draws = 0;
  std::string label = "A vs B";
};

inline void run_pairwise(Context& ctx, const PairwiseArgs& a) {
  std::vector<std::pair<std::string, human::PairwisePreference>> rows;
  if (!a.file.empty()) {
    std::size_t line_no = 0;
    for (const auto& line : text::read_lines(a.file)) {
      ++line_no;
      const auto f = text::split_whitespace(line);
      if (f.empty() || f[0].starts_with('#')) continue;
      if (f.size() != 4) throw ValidationError(a.file + " line " + std::to_string(line_no) + ": expected LABEL WINS_A WINS_B DRAWS");
      try {
        rows.emplace_back(f[0], human::sign_test_pairwise(std::stoll(f[1]), std::stoll(f[2]), std::stoll(f[3])));
      } catch (const std::invalid_argument&) {
        throw ValidationError(a.file + " line " + std::to_string(line_no) + ": counts must be integers");
      }
    }
  } else {
    if (a.wins_a < 0 || a.wins_b < 0) throw ValidationError("pairwise needs --wins-a and --wins-b, or --file");
    rows.emplace_back(a.label, human::sign_test_pairwise(a.wins_a, a.wins_b, a.draws));
  }
  json arr = json::array();
  for (const auto& [label, p] : rows) {
    json j = human::to_json(p);
    j["label"] = label;
    j["significant_at_0.05"] = p.p_value < 0.05;
    arr.push_back(j);
  }
  ctx.emit("pairwise", {{"test", "one-sided exact binomial sign test"}, {"draws", "excluded"}, {"alpha", 0.05}},
           {{"rows", arr}}, human::render_pairwise_table(rows));
}

namespace detail {

inline json load_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LoadError("cannot open stats file: " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ValidationError("malformed stats file " + path + ": " + e.what());
  }
}

inline std::vector<std::string> item_ids(const json& j) {
  std::vector<std::string> ids;
  for (const auto& it : j.at("items")) ids.push_back(it.at("item_id").get<std::string>());
  return ids;
}

}  // namespace detail

inline double bleu_scorer(std::span<const BleuStats> items) { return bleu_score(sum_stats(items)).score; }

inline double mean_scorer(std::span<const double> items) {
  double s = 0.0;
  for (double v : items) s += v;
  return s / static_cast<double>(items.size());
}

struct BootstrapArgs {
  std::string a, b, metric = "bleu";
  std::size_t n = 1000;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  bool include_deltas = false;
};

inline BootstrapResult bootstrap_from_files(const BootstrapArgs& args) {
  const json ja = detail::load_json_file(args.a), jb = detail::load_json_file(args.b);
  for (const auto* j : {&ja, &jb})
    if (j->value("metric", "") != args.metric)
      throw ValidationError("stats file metric '" + j->value("metric", "") + "' does not match --metric " + args.metric);
  if (detail::item_ids(ja) != detail::item_ids(jb))
    throw AlignmentError("stats files " + args.a + " and " + args.b + " do not cover the same items in the same order");
  const BootstrapOptions opt{args.n, args.seed, args.threads, 0.95};
  try {
    if (args.metric == "bleu") {
      std::vector<BleuStats> sa, sb;
      for (const auto& it : ja.at("items")) sa.push_back(bleu_stats_from_json(it.at("stats")));
      for (const auto& it : jb.at("items")) sb.push_back(bleu_stats_from_json(it.at("stats")));
      return paired_bootstrap<BleuStats>(sa, sb, bleu_scorer, opt);
    }
    std::vector<double> sa, sb;
    for (const auto& it : ja.at("items")) sa.push_back(it.at("z").get<double>());
    for (const auto& it : jb.at("items")) sb.push_back(it.at("z").get<double>());
    return paired_bootstrap<double>(sa, sb, mean_scorer, opt);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed stats file: ") + e.what());
  }
}

inline void run_bootstrap(Context& ctx, const BootstrapArgs& args) {
  const auto r = bootstrap_from_files(args);
  TextTable t({"delta", "mean", "95% CI", "p"});
  t.add_row({fixed(r.observed_delta, 3), fixed(r.delta_mean, 3), "[" + fixed(r.ci_low, 3) + ", " + fixed(r.ci_high, 3) + "]",
             fixed(r.p_value, 3)});
  ctx.emit("bootstrap",
           {{"a", args.a}, {"b", args.b}, {"metric", args.metric}, {"n_resamples", args.n}, {"seed", args.seed},
            {"threads", args.threads}, {"generator", kBootstrapGenerator}, {"resampling_unit", "test item"}},
           to_json(r, args.include_deltas), t.render());
}

struct CorrelateArgs {
  std::string pairs;
  double r = 2.0;
  std::size_t n = 0;
  double confidence = 0.95;
};

inline void run_correlate(Context& ctx, const CorrelateArgs& a) {
  CorrelationResult c;
  if (!a.pairs.empty()) {
    std::vector<double> x, y;
    std::size_t line_no = 0;
    for (const auto& line : text::read_lines(a.pairs)) {
      ++line_no;
      const auto f = text::split_whitespace(line);
      if (f.empty() || f[0].starts_with('#')) continue;
      if (f.size() != 2) throw ValidationError(a.pairs + " line " + std::to_string(line_no) + ": expected two numbers");
      try {
        x.push_back(std::stod(f[0]));
        y.push_back(std::stod(f[1]));
      } catch (const std::exception&) {
        throw ValidationError(a.pairs + " line " + std::to_string(line_no) + ": malformed number");
      }
    }
    c = pearson_fisher_ci(x, y, a.confidence);
  } else {
    if (a.n == 0 || a.r > 1.0) throw ValidationError("correlate needs --pairs FILE, or --r and --n");
    c = fisher_ci(a.r, a.n, a.confidence);
  }
  TextTable t({"n", "r", "CI low", "CI high"});
  t.add_row({std::to_string(c.n), fixed(c.r, 2), fixed(c.ci_low, 2), fixed(c.ci_high, 2)});
  ctx.emit("correlate", {{"confidence", a.confidence}, {"pairs", a.pairs.empty() ? json(nullptr) : json(a.pairs)}},
           to_json(c), t.render());
}

struct Table4Args {
  std::string suite, sys_a, sys_b, model, name_a = "A", name_b = "B", tokenizer = "whitespace";
  std::size_t n = 1000;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
};

/// BLEU per partition and system, LM perplexity of each system's output, and
/// a paired bootstrap of A against B on each partition.
inline void run_table4(Context& ctx, const Table4Args& a) {
  const TestSuite suite = load_suite(a.suite);
  const auto model = lm::load_arpa(a.model);
  const auto tok = detail::parse_tokenization(a.tokenizer);

  json rows = json::array();
  TextTable t({"partition", "src", "ref", "system", "BLEU", "PPL", "p(A>B)"});
  for (Partition p : {Partition::kDirect, Partition::kReverse}) {
    if (suite.partition_size(p) == 0) continue;
    std::vector<BleuStats> stats_a, stats_b;
    const auto bleu_a = partition_bleu(suite, p, a.sys_a, &stats_a);
    const auto bleu_b = partition_bleu(suite, p, a.sys_b, &stats_b);
    if (!bleu_a || !bleu_b) continue;
    const auto boot = paired_bootstrap<BleuStats>(stats_a, stats_b, bleu_scorer, {a.n, a.seed, a.threads, 0.95});
    const std::string src = p == Partition::kDirect ? "X" : "Xstar";
    const std::string ref = p == Partition::kDirect ? "Ystar" : "Y";
    for (const auto& [name, dir, bleu] : {std::tuple{a.name_a, a.sys_a, *bleu_a}, std::tuple{a.name_b, a.sys_b, *bleu_b}}) {
      const auto hyp = (std::filesystem::path(dir) / (std::string(to_string(p)) + ".txt")).string();
      const auto ppl = lm::perplexity(model, text::read_lines(hyp), tok);
      rows.push_back({{"partition", std::string(to_string(p))}, {"source", src}, {"reference", ref}, {"system", name},
                      {"bleu", to_json(bleu)}, {"perplexity", lm::to_json(ppl)},
                      {"bootstrap_a_vs_b", name == a.name_a ? to_json(boot) : json(nullptr)}});
      t.add_row({std::string(to_string(p)), src, ref, name, fixed(bleu.score, 1), fixed(ppl.ppl, 1),
                 name == a.name_a ? fixed(boot.p_value, 3) : ""});
    }
  }
  json config = bleu_config();
  config.update({{"suite", a.suite}, {"sys_a", a.sys_a}, {"sys_b", a.sys_b}, {"model", a.model},
                 {"lm_tokenization", a.tokenizer}, {"n_resamples", a.n}, {"seed", a.seed}, {"generator", kBootstrapGenerator}});
  ctx.emit("table4", config, {{"rows", rows}}, t.render());
}

// ---------------------------------------------------------------------------

inline int dispatch(const std::vector<std::string>& argv, Streams streams) {
  Context ctx(streams);
  CLI::App app{"transeval: translationese-aware MT evaluation toolkit", "transeval"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--format", ctx.format_name, "report format")->check(CLI::IsMember({"json", "table"}));
    sub->add_option("--out", ctx.out_path, "write the report here instead of standard output");
  };

  std::string tok_in;
  auto* tokenize = app.add_subcommand("tokenize", "13a-tokenize lines from standard input");
  tokenize->add_option("--in", tok_in, "input file (default: standard input)");
  tokenize->add_option("--out", ctx.out_path, "output file");

  FilterArgs filt;
  auto* filter = app.add_subcommand("filter-bitext", "apply length, ratio and language filters to a bitext");
  filter->add_option("--src", filt.src)->required();
  filter->add_option("--tgt", filt.tgt)->required();
  filter->add_option("--max-len", filt.max_len)->check(CLI::PositiveNumber);
  filter->add_option("--max-ratio", filt.max_ratio)->check(CLI::PositiveNumber);
  filter->add_option("--src-lang", filt.src_lang);
  filter->add_option("--tgt-lang", filt.tgt_lang);
  filter->add_flag("--lang-filter", filt.lang_filter, "enable the script-fraction language heuristic");
  filter->add_option("--script-fraction", filt.script_fraction)->check(CLI::Range(0.0, 1.0));
  filter->add_option("--kept-src", filt.kept_src);
  filter->add_option("--kept-tgt", filt.kept_tgt);
  common(filter);

  std::string manifest;
  auto* partition = app.add_subcommand("partition", "load a test-suite manifest and report its partitions");
  partition->add_option("--suite", manifest)->required();
  common(partition);

  std::string hyp, ref, stats_out;
  bool sentence = false;
  unsigned threads = 1;
  auto* bleu = app.add_subcommand("bleu", "corpus BLEU (13a, exp smoothing, mixed case)");
  bleu->add_option("--hyp", hyp)->required();
  bleu->add_option("--ref", ref)->required();
  bleu->add_flag("--sentence", sentence, "also report per-sentence BLEU");
  bleu->add_option("--stats-out", stats_out, "write per-item sufficient statistics for bootstrap");
  common(bleu);

  auto* ter_cmd = app.add_subcommand("ter", "translation edit rate");
  ter_cmd->add_option("--hyp", hyp)->required();
  ter_cmd->add_option("--ref", ref)->required();
  ter_cmd->add_flag("--sentence", sentence);
  ter_cmd->add_option("--threads", threads)->check(CLI::Range(1u, 1024u));
  common(ter_cmd);

  std::vector<std::string> delta_systems;
  std::string delta_scores;
  auto* delta = app.add_subcommand("delta-table", "forward/reverse BLEU per system, sorted by delta");
  delta->add_option("--suite", manifest);
  delta->add_option("--system", delta_systems, "NAME=DIR with direct.txt and reverse.txt");
  delta->add_option("--scores", delta_scores, "JSON {system: {fwd, rev}} of precomputed scores");
  common(delta);

  LmTrainArgs lmt;
  auto* lm_train = app.add_subcommand("lm-train", "estimate a modified Kneser-Ney model and write ARPA");
  lm_train->add_option("--order", lmt.order)->check(CLI::Range(1, lm::kMaxOrder));
  lm_train->add_option("--corpus", lmt.corpus)->required();
  lm_train->add_option("--out", lmt.out)->required();
  lm_train->add_option("--unk-threshold", lmt.unk_threshold)->check(CLI::NonNegativeNumber);
  lm_train->add_option("--tokenizer", lmt.tokenizer)->check(CLI::IsMember({"whitespace", "13a"}));
  lm_train->add_option("--shards", lmt.shards)->check(CLI::PositiveNumber);
  lm_train->add_option("--format", ctx.format_name)->check(CLI::IsMember({"json", "table"}));

  std::string model_path, text_path, tokenizer = "whitespace";
  auto* lm_score = app.add_subcommand("lm-score", "perplexity of a text under an ARPA model");
  lm_score->add_option("--model", model_path)->required();
  lm_score->add_option("--text", text_path)->required();
  lm_score->add_option("--tokenizer", tokenizer)->check(CLI::IsMember({"whitespace", "13a"}));
  common(lm_score);

  FluencyArgs flu;
  auto* fluency = app.add_subcommand("fluency-compare", "compare two output sets under one LM");
  fluency->add_option("--model", flu.model)->required();
  fluency->add_option("--a", flu.a)->required();
  fluency->add_option("--b", flu.b)->required();
  fluency->add_option("--excluded", flu.excluded, "data the LM corpus must be disjoint from")->required();
  fluency->add_option("--lm-corpus", flu.lm_corpus, "LM training corpus, checked against --excluded");
  fluency->add_option("--tokenizer", flu.tokenizer)->check(CLI::IsMember({"whitespace", "13a"}));
  fluency->add_option("--label-a", flu.label_a);
  fluency->add_option("--label-b", flu.label_b);
  common(fluency);

  std::string lm_corpus, excluded;
  auto* disjoint = app.add_subcommand("disjointness", "exact-line overlap of an LM corpus with excluded data");
  disjoint->add_option("--lm-corpus", lm_corpus)->required();
  disjoint->add_option("--excluded", excluded)->required();
  common(disjoint);

  DaArgs da;
  auto* da_cmd = app.add_subcommand("da-aggregate", "z-normalize direct assessments and aggregate per system");
  da_cmd->add_option("--judgements", da.judgements)->required();
  da_cmd->add_option("--type", da.type)->check(CLI::IsMember({"all", "source_based", "target_based"}));
  da_cmd->add_option("--std", da.std_divisor)->check(CLI::IsMember({"sample", "population"}));
  da_cmd->add_option("--stats-dir", da.stats_dir, "write per-item z statistics, one file per system");
  da_cmd->add_option("--bleu", da.bleu, "SYSTEM=SCORE for the side-by-side table");
  common(da_cmd);

  PairwiseArgs pw;
  auto* pairwise = app.add_subcommand("pairwise", "sign test on pairwise preference counts");
  pairwise->add_option("--wins-a", pw.wins_a);
  pairwise->add_option("--wins-b", pw.wins_b);
  pairwise->add_option("--draws", pw.draws);
  pairwise->add_option("--label", pw.label);
  pairwise->add_option("--file", pw.file, "rows of LABEL WINS_A WINS_B DRAWS");
  common(pairwise);

  BootstrapArgs boot;
  auto* bootstrap = app.add_subcommand("bootstrap", "paired bootstrap resampling on per-item statistics");
  bootstrap->add_option("--a", boot.a)->required();
  bootstrap->add_option("--b", boot.b)->required();
  bootstrap->add_option("--metric", boot.metric)->check(CLI::IsMember({"bleu", "human"}));
  bootstrap->add_option("--n", boot.n)->check(CLI::PositiveNumber);
  bootstrap->add_option("--seed", boot.seed);
  bootstrap->add_option("--threads", boot.threads)->check(CLI::Range(1u, 1024u));
  bootstrap->add_flag("--deltas", boot.include_deltas, "include every resampled delta in the report");
  common(bootstrap);

  CorrelateArgs corr;
  auto* correlate = app.add_subcommand("correlate", "Pearson r with a Fisher-transform confidence interval");
  correlate->add_option("--pairs", corr.pairs, "two whitespace-separated numbers per line");
  correlate->add_option("--r", corr.r);
  correlate->add_option("--n", corr.n);
  correlate->add_option("--confidence", corr.confidence)->check(CLI::Range(0.0, 1.0));
  common(correlate);

  Table4Args t4;
  auto* table4 = app.add_subcommand("table4", "BLEU per partition, PPL per system, bootstrap A vs B");
  table4->add_option("--suite", t4.suite)->required();
  table4->add_option("--sys-a", t4.sys_a)->required();
  table4->add_option("--sys-b", t4.sys_b)->required();
  table4->add_option("--model", t4.model)->required();
  table4->add_option("--name-a", t4.name_a);
  table4->add_option("--name-b", t4.name_b);
  table4->add_option("--tokenizer", t4.tokenizer)->check(CLI::IsMember({"whitespace", "13a"}));
  table4->add_option("--n", t4.n)->check(CLI::PositiveNumber);
  table4->add_option("--seed", t4.seed);
  table4->add_option("--threads", t4.threads)->check(CLI::Range(1u, 1024u));
  common(table4);

  std::vector<const char*> cargv;
  cargv.reserve(argv.size() + 1);
  cargv.push_back("transeval");
  for (const auto& a : argv) cargv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp&) {
    streams.out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    streams.out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    streams.out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    streams.err << "usage error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*tokenize) run_tokenize(ctx, tok_in);
    else if (*filter) run_filter_bitext(ctx, filt);
    else if (*partition) run_partition(ctx, manifest);
    else if (*bleu) run_bleu(ctx, hyp, ref, sentence, stats_out);
    else if (*ter_cmd) run_ter(ctx, hyp, ref, sentence, threads);
    else if (*delta) run_delta_table(ctx, manifest, delta_systems, delta_scores);
    else if (*lm_train) run_lm_train(ctx, lmt);
    else if (*lm_score) run_lm_score(ctx, model_path, text_path, tokenizer);
    else if (*fluency) run_fluency_compare(ctx, flu);
    else if (*disjoint) run_disjointness(ctx, lm_corpus, excluded);
    else if (*da_cmd) run_da_aggregate(ctx, da);
    else if (*pairwise) run_pairwise(ctx, pw);
    else if (*bootstrap) run_bootstrap(ctx, boot);
    else if (*correlate) run_correlate(ctx, corr);
    else if (*table4) run_table4(ctx, t4);
  } catch (const Error& e) {
    json err{{"error", {{"type", detail::error_kind(e)}, {"message", e.what()}}}};
    streams.err << err.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    json err{{"error", {{"type", "exception"}, {"message", e.what()}}}};
    streams.err << err.dump() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace transeval::cli
