#pragma once

// N-gram language models: sharded counting, interpolated modified
// Kneser-Ney estimation, ARPA persistence, and perplexity scoring.
//
// Sentences are padded with (order - 1) begin markers and one end marker.
// Begin markers are conditioned on but never predicted.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "transeval/corpus.hpp"
#include "transeval/error.hpp"
#include "transeval/report.hpp"
#include "transeval/text.hpp"
#include "transeval/tokenizer.hpp"

namespace transeval::lm {

inline constexpr std::string_view kUnk = "<unk>";
inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr int kMaxOrder = 6;
/// log10 probability written for n-grams that can never be predicted (<s>).
inline constexpr double kLogZero = -99.0;

using WordId = std::uint32_t;
inline constexpr WordId kUnkId = 0;
inline constexpr WordId kBosId = 1;
inline constexpr WordId kEosId = 2;

class Vocabulary {
 public:
  Vocabulary() {
    insert(std::string(kUnk));
    insert(std::string(kBos));
    insert(std::string(kEos));
  }

  WordId insert(const std::string& w) {
    auto [it, fresh] = ids_.try_emplace(w, static_cast<WordId>(words_.size()));
    if (fresh) words_.push_back(w);
    return it->second;
  }
  std::optional<WordId> find(std::string_view w) const {
    auto it = ids_.find(std::string(w));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }
  /// Unknown words map to <unk>.
  WordId lookup(std::string_view w) const { return find(w).value_or(kUnkId); }
  const std::string& word(WordId id) const { return words_.at(id); }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_map<std::string, WordId> ids_;
  std::vector<std::string> words_;
};

using NGram = std::vector<WordId>;

struct NGramHash {
  std::size_t operator()(const NGram& g) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (WordId w : g) {
      h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h *= 0x100000001b3ull;
    }
    return static_cast<std::size_t>(h);
  }
};

template <typename V>
using NGramMap = std::unordered_map<NGram, V, NGramHash>;

enum class Tokenization { kWhitespace, k13a };

inline std::string_view to_string(Tokenization t) {
  return t == Tokenization::kWhitespace ? "whitespace" : "13a";
}

inline std::vector<std::string> tokenize_line(std::string_view line, Tokenization t) {
  return t == Tokenization::kWhitespace ? text::split_whitespace(line) : tok13a(line).tokens;
}

// ---------------------------------------------------------------------------
// Counting

/// Raw n-gram counts of orders 1..order over boundary-padded sentences.
/// Every substring of a padded sentence is counted, so each counted n-gram's
/// prefix is counted as well.
class CountTable {
 public:
  explicit CountTable(int order) : order_(order), counts_(static_cast<std::size_t>(order)) {
    if (order < 1 || order > kMaxOrder)
      throw ValidationError("n-gram order must be in [1, " + std::to_string(kMaxOrder) + "], got " +
                            std::to_string(order));
  }

  int order() const { return order_; }
  std::uint64_t sentences() const { return sentences_; }
  const Vocabulary& vocab() const { return vocab_; }
  const NGramMap<std::uint64_t>& counts(int n) const { return counts_.at(n - 1); }

  void add_sentence(std::span<const std::string> words) {
    NGram padded(static_cast<std::size_t>(order_ - 1), kBosId);
    for (const auto& w : words) padded.push_back(intern(w));
    padded.push_back(kEosId);
    add_padded(padded, 1);
    ++sentences_;
  }

  /// Adds another table's counts; vocabularies are reconciled by string.
  void merge(const CountTable& other) {
    if (other.order_ != order_) throw ValidationError("cannot merge count tables of different order");
    std::vector<WordId> remap(other.vocab_.size());
    for (WordId id = 0; id < other.vocab_.size(); ++id) remap[id] = vocab_.insert(other.vocab_.word(id));
    for (int n = 1; n <= order_; ++n) {
      for (const auto& [g, c] : other.counts(n)) {
        NGram key(g.size());
        std::transform(g.begin(), g.end(), key.begin(), [&](WordId w) { return remap[w]; });
        counts_[n - 1][key] += c;
      }
    }
    sentences_ += other.sentences_;
  }

  std::uint64_t count(std::span<const std::string> ngram) const {
    if (ngram.empty() || static_cast<int>(ngram.size()) > order_) return 0;
    NGram key;
    for (const auto& w : ngram) {
      auto id = vocab_.find(w);
      if (!id) return 0;
      key.push_back(*id);
    }
    const auto& m = counts_[ngram.size() - 1];
    auto it = m.find(key);
    return it == m.end() ? 0 : it->second;
  }

  /// Vocabulary-independent view, for comparisons.
  std::map<std::vector<std::string>, std::uint64_t> as_string_map() const {
    std::map<std::vector<std::string>, std::uint64_t> out;
    for (int n = 1; n <= order_; ++n)
      for (const auto& [g, c] : counts(n)) {
        std::vector<std::string> key;
        for (WordId w : g) key.push_back(vocab_.word(w));
        out.emplace(std::move(key), c);
      }
    return out;
  }

  /// Rewrites words for which keep(word) is false to <unk>, merging counts.
  CountTable map_to_unk(const std::function<bool(const std::string&)>& keep) const {
    CountTable out(order_);
    std::vector<WordId> remap(vocab_.size());
    for (WordId id = 0; id < vocab_.size(); ++id) {
      const auto& w = vocab_.word(id);
      remap[id] = (id <= kEosId || keep(w)) ? out.vocab_.insert(w) : kUnkId;
    }
    for (int n = 1; n <= order_; ++n)
      for (const auto& [g, c] : counts(n)) {
        NGram key(g.size());
        std::transform(g.begin(), g.end(), key.begin(), [&](WordId w) { return remap[w]; });
        out.counts_[n - 1][key] += c;
      }
    out.sentences_ = sentences_;
    return out;
  }

 private:
  WordId intern(const std::string& w) {
    // Literal markers in text are treated as unknown words.
    if (w == kBos || w == kEos || w == kUnk) return kUnkId;
    return vocab_.insert(w);
  }

  void add_padded(const NGram& s, std::uint64_t weight) {
    for (std::size_t end = 1; end <= s.size(); ++end)
      for (int n = 1; n <= order_ && static_cast<std::size_t>(n) <= end; ++n)
        counts_[n - 1][NGram(s.begin() + (end - n), s.begin() + end)] += weight;
  }

  int order_;
  Vocabulary vocab_;
  std::vector<NGramMap<std::uint64_t>> counts_;
  std::uint64_t sentences_ = 0;
};

/// Counts one sentence per non-blank line. Throws on an empty corpus or an
/// order outside [1, 6].
inline CountTable count_ngrams(std::span<const std::string> lines, int order,
                               Tokenization tok = Tokenization::kWhitespace) {
  CountTable table(order);
  for (const auto& line : lines) {
    auto words = tokenize_line(line, tok);
    if (words.empty()) continue;
    table.add_sentence(words);
  }
  if (table.sentences() == 0) throw ValidationError("cannot count n-grams: corpus is empty");
  return table;
}

/// Counts `shards` contiguous line ranges separately and merges them.
inline CountTable count_ngrams_sharded(std::span<const std::string> lines, int order,
                                       Tokenization tok, std::size_t shards) {
  shards = std::max<std::size_t>(1, std::min(shards, lines.size()));
  CountTable total(order);
  const std::size_t per = (lines.size() + shards - 1) / shards;
  for (std::size_t b = 0; b < lines.size(); b += per) {
    const auto part = lines.subspan(b, std::min(per, lines.size() - b));
    CountTable t(order);
    for (const auto& line : part) {
      auto words = tokenize_line(line, tok);
      if (!words.empty()) t.add_sentence(words);
    }
    total.merge(t);
  }
  if (total.sentences() == 0) throw ValidationError("cannot count n-grams: corpus is empty");
  return total;
}

// ---------------------------------------------------------------------------
// Model

struct Discounts {
  std::array<double, 3> d{0.5, 0.5, 0.5};  // D1, D2, D3+
  std::array<bool, 3> fallback{false, false, false};
  std::array<std::uint64_t, 4> counts_of_counts{};  // n1..n4

  double operator()(std::uint64_t count) const {
    if (count == 0) return 0.0;
    return d[std::min<std::uint64_t>(count, 3) - 1];
  }
};

inline constexpr double kFallbackDiscount = 0.5;

/// Modified Kneser-Ney discounts from counts-of-counts. Slot k uses n_k and
/// n_(k+1); if either is zero, or the result leaves (0, slot], the slot falls
/// back to 0.5.
inline Discounts compute_discounts(const std::array<std::uint64_t, 4>& n) {
  Discounts out;
  out.counts_of_counts = n;
  const double n1 = static_cast<double>(n[0]), n2 = static_cast<double>(n[1]);
  const double y = n1 + 2 * n2 > 0 ? n1 / (n1 + 2 * n2) : 0.0;
  for (int k = 0; k < 3; ++k) {
    const double nk = static_cast<double>(n[k]), next = static_cast<double>(n[k + 1]);
    const double raw = (k + 1) - (k + 2) * y * next / (nk > 0 ? nk : 1.0);
    if (nk > 0 && next > 0 && raw > 0.0 && raw <= k + 1) {
      out.d[k] = raw;
    } else {
      out.d[k] = kFallbackDiscount;
      out.fallback[k] = true;
    }
  }
  return out;
}

struct NGramEntry {
  double log10_prob = kLogZero;
  std::optional<double> log10_backoff;  // set for n-grams that are contexts
};

struct ModelMetadata {
  std::string estimator = "interpolated-modified-kneser-ney";
  std::string tokenization = "whitespace";
  int unk_threshold = 0;
  std::uint64_t training_sentences = 0;
  std::vector<Discounts> discounts;  // per order, empty for loaded models
};

/// Backoff n-gram model with log10 probabilities, as stored in ARPA files.
class NGramModel {
 public:
  explicit NGramModel(int order) : order_(order), entries_(static_cast<std::size_t>(order)) {}

  int order() const { return order_; }
  const Vocabulary& vocab() const { return vocab_; }
  Vocabulary& mutable_vocab() { return vocab_; }
  const NGramMap<NGramEntry>& entries(int n) const { return entries_.at(n - 1); }
  NGramMap<NGramEntry>& mutable_entries(int n) { return entries_.at(n - 1); }
  ModelMetadata& metadata() { return meta_; }
  const ModelMetadata& metadata() const { return meta_; }

  const NGramEntry* find(const NGram& g) const {
    if (g.empty() || static_cast<int>(g.size()) > order_) return nullptr;
    const auto& m = entries_[g.size() - 1];
    auto it = m.find(g);
    return it == m.end() ? nullptr : &it->second;
  }

  /// log10 p(word | context) with standard backoff; only the last
  /// (order - 1) context words matter.
  double log10_prob(std::span<const WordId> context, WordId word) const {
    const std::size_t max_ctx = std::min<std::size_t>(context.size(), order_ - 1);
    double backoff = 0.0;
    NGram key;
    for (std::size_t len = max_ctx + 1; len >= 1; --len) {
      key.assign(context.end() - (len - 1), context.end());
      key.push_back(word);
      if (const NGramEntry* e = find(key)) return backoff + e->log10_prob;
      if (len > 1) {
        key.pop_back();
        if (const NGramEntry* c = find(key); c && c->log10_backoff) backoff += *c->log10_backoff;
      }
    }
    return kLogZero;
  }

  /// Words that can be predicted (everything but the begin marker).
  std::vector<WordId> predictable() const {
    std::vector<WordId> out;
    for (WordId id = 0; id < vocab_.size(); ++id)
      if (id != kBosId && find(NGram{id})) out.push_back(id);
    return out;
  }

  /// Uniform unigram model over `words` plus </s> and <unk>.
  static NGramModel uniform(std::span<const std::string> words) {
    NGramModel m(1);
    for (const auto& w : words) m.vocab_.insert(w);
    const double lp = -std::log10(static_cast<double>(m.vocab_.size() - 1));
    for (WordId id = 0; id < m.vocab_.size(); ++id)
      m.entries_[0][NGram{id}] = NGramEntry{id == kBosId ? kLogZero : lp, std::nullopt};
    m.meta_.estimator = "uniform";
    return m;
  }

 private:
  int order_;
  Vocabulary vocab_;
  std::vector<NGramMap<NGramEntry>> entries_;
  ModelMetadata meta_;
};

namespace detail {

// Adjusted counts: raw counts at the highest order and for n-grams that start
// with <s>; number of distinct left extensions otherwise. N-grams that end in
// <s> are dropped (never predicted).
inline std::vector<NGramMap<std::uint64_t>> adjusted_counts(const CountTable& c) {
  const int order = c.order();
  std::vector<NGramMap<std::uint64_t>> adj(static_cast<std::size_t>(order));
  for (int n = order; n >= 1; --n) {
    NGramMap<std::uint64_t> continuation;
    if (n < order)
      for (const auto& [g, cnt] : c.counts(n + 1)) ++continuation[NGram(g.begin() + 1, g.end())];
    for (const auto& [g, cnt] : c.counts(n)) {
      if (g.back() == kBosId) continue;
      std::uint64_t a = cnt;
      if (n < order && g.front() != kBosId) {
        if (auto it = continuation.find(g); it != continuation.end()) a = it->second;
      }
      adj[n - 1].emplace(g, a);
    }
  }
  return adj;
}

}  // namespace detail

/// Interpolated modified Kneser-Ney. Words seen fewer than `unk_threshold`
/// times become <unk> before estimation.
inline NGramModel estimate_kn(const CountTable& raw_counts, int unk_threshold = 2) {
  if (raw_counts.sentences() == 0) throw ValidationError("cannot estimate a model from zero sentences");

  const auto& unigrams = raw_counts.counts(1);
  const CountTable counts = raw_counts.map_to_unk([&](const std::string& w) {
    auto id = raw_counts.vocab().find(w);
    auto it = unigrams.find(NGram{*id});
    return it != unigrams.end() && it->second >= static_cast<std::uint64_t>(unk_threshold);
  });

  const int order = counts.order();
  NGramModel model(order);
  for (WordId id = 0; id < counts.vocab().size(); ++id) model.mutable_vocab().insert(counts.vocab().word(id));
  model.metadata().unk_threshold = unk_threshold;
  model.metadata().training_sentences = counts.sentences();

  const auto adj = detail::adjusted_counts(counts);

  for (int n = 1; n <= order; ++n) {
    std::array<std::uint64_t, 4> coc{};
    for (const auto& [g, a] : adj[n - 1])
      if (a >= 1 && a <= 4) ++coc[a - 1];
    const Discounts disc = compute_discounts(coc);
    model.metadata().discounts.push_back(disc);

    // Per-context denominators and discounted mass.
    struct ContextStats {
      double denom = 0.0;
      double mass = 0.0;
    };
    NGramMap<ContextStats> ctx;
    for (const auto& [g, a] : adj[n - 1]) {
      auto& cs = ctx[NGram(g.begin(), g.end() - 1)];
      cs.denom += static_cast<double>(a);
      cs.mass += disc(a);
    }

    auto& entries = model.mutable_entries(n);
    if (n == 1) {
      const auto& cs = ctx[NGram{}];
      const double gamma = cs.mass / cs.denom;
      // Uniform floor over every predictable word, seen or not (<unk> may be unseen).
      const double floor = gamma / static_cast<double>(model.vocab().size() - 1);
      for (WordId id = 0; id < model.vocab().size(); ++id) {
        if (id == kBosId) {
          entries[NGram{id}] = NGramEntry{kLogZero, std::nullopt};
          continue;
        }
        double p = floor;
        if (auto it = adj[0].find(NGram{id}); it != adj[0].end())
          p += (static_cast<double>(it->second) - disc(it->second)) / cs.denom;
        entries[NGram{id}] = NGramEntry{std::log10(p), std::nullopt};
      }
    } else {
      for (const auto& [g, a] : adj[n - 1]) {
        const NGram h(g.begin(), g.end() - 1);
        const auto& cs = ctx.at(h);
        const double gamma = cs.mass / cs.denom;
        const double lower = std::pow(10.0, model.log10_prob(std::span(g).subspan(1, n - 2), g.back()));
        const double p = (static_cast<double>(a) - disc(a)) / cs.denom + gamma * lower;
        entries[g] = NGramEntry{std::log10(p), std::nullopt};
      }
    }

    // Contexts of this order carry backoff weights on the (n-1)-gram entries.
    if (n >= 2) {
      auto& lower_entries = model.mutable_entries(n - 1);
      for (const auto& [h, cs] : ctx) {
        auto [it, fresh] = lower_entries.try_emplace(h, NGramEntry{kLogZero, std::nullopt});
        it->second.log10_backoff = std::log10(cs.mass / cs.denom);
      }
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Scoring

struct PerplexityReport {
  std::uint64_t sentences = 0;
  std::uint64_t words = 0;
  std::uint64_t token_count = 0;  // words + one end marker per sentence
  std::uint64_t oov = 0;
  double total_neg_log_prob = 0.0;  // natural log
  double ppl = 0.0;

  double oov_rate() const { return words == 0 ? 0.0 : static_cast<double>(oov) / static_cast<double>(words); }
};

/// Accumulates log10 scores (the model's native base); the natural-log total
/// is derived from it.
inline PerplexityReport perplexity(const NGramModel& model, std::span<const std::string> lines,
                                   Tokenization tok = Tokenization::kWhitespace) {
  PerplexityReport r;
  double sum_log10 = 0.0;
  NGram history;
  for (const auto& line : lines) {
    const auto words = tokenize_line(line, tok);
    if (words.empty()) continue;
    history.assign(static_cast<std::size_t>(std::max(model.order() - 1, 0)), kBosId);
    for (const auto& w : words) {
      WordId id = model.vocab().lookup(w);
      if (id == kBosId || id == kEosId) id = kUnkId;
      if (id == kUnkId) ++r.oov;
      sum_log10 += model.log10_prob(history, id);
      history.push_back(id);
    }
    sum_log10 += model.log10_prob(history, kEosId);
    r.words += words.size();
    r.token_count += words.size() + 1;
    ++r.sentences;
  }
  if (r.token_count == 0) throw ValidationError("cannot compute perplexity: corpus is empty");
  r.total_neg_log_prob = -sum_log10 * std::log(10.0);
  r.ppl = std::pow(10.0, -sum_log10 / static_cast<double>(r.token_count));
  return r;
}

/// Sum of p(w | context) over every predictable word.
inline double probability_mass(const NGramModel& model, std::span<const WordId> context) {
  double total = 0.0;
  for (WordId w : model.predictable()) total += std::pow(10.0, model.log10_prob(context, w));
  return total;
}

// ---------------------------------------------------------------------------
// Fluency comparison

enum class Winner { kA, kB, kTie };

inline std::string_view to_string(Winner w) {
  switch (w) {
    case Winner::kA: return "a";
    case Winner::kB: return "b";
    case Winner::kTie: return "tie";
  }
  return "?";
}

inline constexpr double kTieRelativeTolerance = 1e-9;

struct FluencyReport {
  PerplexityReport a;
  PerplexityReport b;
  Winner winner = Winner::kTie;
  std::optional<OverlapReport> lm_corpus_overlap;  // LM training data vs excluded corpus
  std::optional<OverlapReport> a_overlap;          // outputs vs excluded corpus
  std::optional<OverlapReport> b_overlap;
};

inline Winner lower_ppl(double ppl_a, double ppl_b) {
  if (std::abs(ppl_a - ppl_b) <= kTieRelativeTolerance * std::max(ppl_a, ppl_b)) return Winner::kTie;
  return ppl_a < ppl_b ? Winner::kA : Winner::kB;
}

/// Scores both output sets with one model; lower perplexity is more fluent.
inline FluencyReport fluency_compare(const NGramModel& model, std::span<const std::string> outputs_a,
                                     std::span<const std::string> outputs_b,
                                     std::optional<OverlapReport> lm_corpus_overlap = std::nullopt,
                                     Tokenization tok = Tokenization::kWhitespace) {
  FluencyReport r;
  r.a = perplexity(model, outputs_a, tok);
  r.b = perplexity(model, outputs_b, tok);
  r.winner = lower_ppl(r.a.ppl, r.b.ppl);
  r.lm_corpus_overlap = lm_corpus_overlap;
  return r;
}

// ---------------------------------------------------------------------------
// ARPA

namespace detail {

inline std::string format_log(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

/// Writes the model in ARPA format. Entries are sorted by their word strings
/// so output does not depend on vocabulary id assignment.
inline void write_arpa(const NGramModel& model, std::ostream& out) {
  out << "\n\\data\\\n";
  for (int n = 1; n <= model.order(); ++n) out << "ngram " << n << "=" << model.entries(n).size() << "\n";
  for (int n = 1; n <= model.order(); ++n) {
    out << "\n\\" << n << "-grams:\n";
    std::vector<std::pair<std::vector<std::string_view>, const NGramEntry*>> rows;
    rows.reserve(model.entries(n).size());
    for (const auto& [g, e] : model.entries(n)) {
      std::vector<std::string_view> words;
      for (WordId w : g) words.push_back(model.vocab().word(w));
      rows.emplace_back(std::move(words), &e);
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [words, e] : rows) {
      out << detail::format_log(e->log10_prob) << '\t';
      for (std::size_t i = 0; i < words.size(); ++i) out << (i ? " " : "") << words[i];
      if (e->log10_backoff && n < model.order()) out << '\t' << detail::format_log(*e->log10_backoff);
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

inline std::string to_arpa(const NGramModel& model) {
  std::ostringstream os;
  write_arpa(model, os);
  return os.str();
}

inline void save_arpa(const NGramModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write model: " + path);
  write_arpa(model, out);
}

/// Reads an ARPA model. A missing <unk> unigram is added with log10 prob -100.
inline NGramModel read_arpa(std::istream& in, const std::string& name = "<stream>") {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw ValidationError("ARPA " + name + " line " + std::to_string(line_no) + ": " + what);
  };

  bool in_data = false;
  std::vector<std::size_t> declared;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t == "\\data\\") {
      in_data = true;
      continue;
    }
    if (!in_data) continue;
    if (t.empty()) {
      if (!declared.empty()) break;
      continue;
    }
    if (t.rfind("ngram ", 0) != 0) fail("expected 'ngram N=count'");
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) fail("expected 'ngram N=count'");
    const int n = std::stoi(std::string(t.substr(6, eq - 6)));
    if (n != static_cast<int>(declared.size()) + 1) fail("n-gram orders must be consecutive from 1");
    declared.push_back(std::stoull(std::string(t.substr(eq + 1))));
  }
  if (declared.empty()) throw ValidationError("ARPA " + name + ": missing \\data\\ section");
  if (static_cast<int>(declared.size()) > kMaxOrder) fail("order exceeds maximum");

  NGramModel model(static_cast<int>(declared.size()));
  model.metadata().estimator = "arpa";
  int section = 0;
  std::vector<std::vector<std::pair<std::vector<std::string>, NGramEntry>>> pending(declared.size());
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty()) continue;
    if (t == "\\end\\") break;
    if (t.front() == '\\') {
      const auto dash = t.find("-grams:");
      if (dash == std::string_view::npos) fail("unexpected section header");
      section = std::stoi(std::string(t.substr(1, dash - 1)));
      if (section < 1 || section > model.order()) fail("section order out of range");
      continue;
    }
    if (section == 0) fail("n-gram entry outside a section");
    const auto fields = text::split_whitespace(t);
    const std::size_t n = static_cast<std::size_t>(section);
    if (fields.size() != n + 1 && fields.size() != n + 2) fail("wrong number of fields");
    NGramEntry e;
    try {
      e.log10_prob = std::stod(fields[0]);
      if (fields.size() == n + 2) e.log10_backoff = std::stod(fields[n + 1]);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pending[n - 1].emplace_back(std::vector<std::string>(fields.begin() + 1, fields.begin() + 1 + n), e);
  }

  for (std::size_t k = 0; k < pending.size(); ++k) {
    if (pending[k].size() != declared[k])
      throw ValidationError("ARPA " + name + ": declared " + std::to_string(declared[k]) + " " +
                            std::to_string(k + 1) + "-grams, found " + std::to_string(pending[k].size()));
    for (auto& [words, e] : pending[k]) {
      NGram g;
      for (const auto& w : words) g.push_back(model.mutable_vocab().insert(w));
      model.mutable_entries(static_cast<int>(k + 1))[g] = e;
    }
  }
  auto& uni = model.mutable_entries(1);
  uni.try_emplace(NGram{kUnkId}, NGramEntry{-100.0, std::nullopt});
  uni.try_emplace(NGram{kBosId}, NGramEntry{kLogZero, std::nullopt});
  return model;
}

inline NGramModel load_arpa(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open model: " + path);
  return read_arpa(in, path);
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const PerplexityReport& r) {
  return {{"sentences", r.sentences},
          {"words", r.words},
          {"token_count", r.token_count},
          {"total_neg_log_prob", r.total_neg_log_prob},
          {"ppl", r.ppl},
          {"ppl_display", fixed(r.ppl, 1)},
          {"oov", r.oov},
          {"oov_rate", r.oov_rate()}};
}

inline nlohmann::json to_json(const Discounts& d) {
  return {{"D1", d.d[0]}, {"D2", d.d[1]}, {"D3+", d.d[2]},
          {"fallback", d.fallback}, {"counts_of_counts", d.counts_of_counts}};
}

inline nlohmann::json to_json(const ModelMetadata& m) {
  nlohmann::json disc = nlohmann::json::array();
  for (const auto& d : m.discounts) disc.push_back(to_json(d));
  return {{"estimator", m.estimator},
          {"tokenization", m.tokenization},
          {"unk_threshold", m.unk_threshold},
          {"training_sentences", m.training_sentences},
          {"discounts", disc}};
}

inline nlohmann::json to_json(const FluencyReport& r) {
  auto opt = [](const std::optional<OverlapReport>& o) -> nlohmann::json {
    return o ? transeval::to_json(*o) : nlohmann::json(nullptr);
  };
  return {{"a", to_json(r.a)},
          {"b", to_json(r.b)},
          {"winner", std::string(to_string(r.winner))},
          {"tie_relative_tolerance", kTieRelativeTolerance},
          {"overlap", {{"lm_corpus", opt(r.lm_corpus_overlap)},
                       {"a", opt(r.a_overlap)},
                       {"b", opt(r.b_overlap)}}}};
}

}  // namespace transeval::lm
