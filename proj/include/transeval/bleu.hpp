#pragma once

// Corpus and sentence BLEU with SacreBLEU's configuration:
// case.mixed, numrefs.1, smooth.exp, tok.13a.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "transeval/tokenizer.hpp"

namespace transeval {

inline constexpr int kBleuMaxOrder = 4;

/// Sufficient statistics for BLEU; add componentwise to aggregate a corpus.
struct BleuStats {
  std::array<std::int64_t, kBleuMaxOrder> match{};
  std::array<std::int64_t, kBleuMaxOrder> total{};
  std::int64_t hyp_len = 0;
  std::int64_t ref_len = 0;

  BleuStats& operator+=(const BleuStats& o) {
    for (int k = 0; k < kBleuMaxOrder; ++k) {
      match[k] += o.match[k];
      total[k] += o.total[k];
    }
    hyp_len += o.hyp_len;
    ref_len += o.ref_len;
    return *this;
  }
  friend BleuStats operator+(BleuStats a, const BleuStats& b) { return a += b; }
  friend bool operator==(const BleuStats&, const BleuStats&) = default;
};

struct BleuReport {
  double score = 0.0;  // [0, 100]
  std::array<double, kBleuMaxOrder> precisions{};
  double brevity_penalty = 1.0;
  std::int64_t hyp_len = 0;
  std::int64_t ref_len = 0;
};

namespace detail {

using NgramCounts = std::map<std::vector<std::string_view>, std::int64_t>;

inline NgramCounts count_ngrams_of_order(const std::vector<std::string>& toks, int n) {
  NgramCounts counts;
  if (static_cast<int>(toks.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    std::vector<std::string_view> key(toks.begin() + i, toks.begin() + i + n);
    ++counts[std::move(key)];
  }
  return counts;
}

}  // namespace detail

/// Clipped n-gram matches and totals for one hypothesis/reference pair.
inline BleuStats bleu_stats(const TokenSequence& hyp, const TokenSequence& ref) {
  BleuStats st;
  st.hyp_len = static_cast<std::int64_t>(hyp.size());
  st.ref_len = static_cast<std::int64_t>(ref.size());
  for (int n = 1; n <= kBleuMaxOrder; ++n) {
    const auto hyp_counts = detail::count_ngrams_of_order(hyp.tokens, n);
    const auto ref_counts = detail::count_ngrams_of_order(ref.tokens, n);
    std::int64_t matches = 0;
    for (const auto& [gram, c] : hyp_counts) {
      if (auto it = ref_counts.find(gram); it != ref_counts.end()) matches += std::min(c, it->second);
    }
    st.match[n - 1] = matches;
    st.total[n - 1] = std::max<std::int64_t>(st.hyp_len - n + 1, 0);
  }
  return st;
}

/// BLEU from aggregated statistics with exponential smoothing.
///
/// Orders with total_n = 0 (every hypothesis shorter than n tokens) are left
/// out of the geometric mean, so an identical corpus always scores 100.
inline BleuReport bleu_score(const BleuStats& st) {
  BleuReport r;
  r.hyp_len = st.hyp_len;
  r.ref_len = st.ref_len;
  if (st.hyp_len == 0) {
    r.brevity_penalty = 0.0;
    r.score = 0.0;
    return r;
  }

  double smooth = 1.0;
  double log_sum = 0.0;
  int effective_order = 0;
  for (int k = 0; k < kBleuMaxOrder; ++k) {
    if (st.total[k] == 0) {
      r.precisions[k] = 0.0;
      continue;
    }
    if (st.match[k] == 0) {
      smooth *= 2.0;
      r.precisions[k] = 1.0 / (smooth * static_cast<double>(st.total[k]));
    } else {
      r.precisions[k] = static_cast<double>(st.match[k]) / static_cast<double>(st.total[k]);
    }
    log_sum += std::log(r.precisions[k]);
    ++effective_order;
  }

  r.brevity_penalty = st.hyp_len < st.ref_len
                          ? std::exp(1.0 - static_cast<double>(st.ref_len) /
                                               static_cast<double>(st.hyp_len))
                          : 1.0;
  r.score = 100.0 * r.brevity_penalty * std::exp(log_sum / effective_order);
  return r;
}

inline BleuReport sentence_bleu(const TokenSequence& hyp, const TokenSequence& ref) {
  return bleu_score(bleu_stats(hyp, ref));
}

/// Per-segment statistics for line-aligned hypothesis/reference lists.
inline std::vector<BleuStats> bleu_segment_stats(std::span<const TokenSequence> hyps,
                                                 std::span<const TokenSequence> refs) {
  std::vector<BleuStats> out;
  out.reserve(hyps.size());
  for (std::size_t i = 0; i < hyps.size() && i < refs.size(); ++i)
    out.push_back(bleu_stats(hyps[i], refs[i]));
  return out;
}

inline BleuStats sum_stats(std::span<const BleuStats> stats) {
  BleuStats total;
  for (const auto& s : stats) total += s;
  return total;
}

inline BleuReport corpus_bleu(std::span<const TokenSequence> hyps,
                              std::span<const TokenSequence> refs) {
  const auto segs = bleu_segment_stats(hyps, refs);
  return bleu_score(sum_stats(segs));
}

}  // namespace transeval
