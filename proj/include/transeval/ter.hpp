#pragma once

// Translation edit rate: greedy block-shift search followed by unit-cost
// Levenshtein distance, following the Tercom shift constraints.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "transeval/error.hpp"
#include "transeval/tokenizer.hpp"

namespace transeval {

struct TerReport {
  std::int64_t edits = 0;  // insertions + deletions + substitutions + shifts
  std::int64_t shifts = 0;
  std::int64_t ref_len = 0;
  double score = 0.0;
};

struct TerOptions {
  int max_shift_size = 10;
  int max_shift_distance = 50;
};

namespace ter_detail {

using Words = std::vector<std::string>;

inline int levenshtein(std::span<const std::string> hyp, std::span<const std::string> ref) {
  std::vector<int> prev(ref.size() + 1), cur(ref.size() + 1);
  for (std::size_t j = 0; j <= ref.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= hyp.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      const int sub = prev[j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[ref.size()];
}

/// Alignment derived from one optimal edit path.
struct Alignment {
  int distance = 0;
  std::vector<int> ref_to_hyp;  // hyp index aligned to (or preceding) each ref word; -1 = before start
  std::vector<bool> hyp_err;
  std::vector<bool> ref_err;
};

inline Alignment align(const Words& hyp, const Words& ref) {
  const std::size_t n = hyp.size(), m = ref.size();
  std::vector<int> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> int& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      at(i, j) = std::min({at(i - 1, j - 1) + (hyp[i - 1] == ref[j - 1] ? 0 : 1),
                           at(i - 1, j) + 1, at(i, j - 1) + 1});

  // Backtrace from the end; prefer the diagonal, then dropping a hyp word.
  enum class Op { kDiag, kHypOnly, kRefOnly };
  std::vector<Op> ops;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + (hyp[i - 1] == ref[j - 1] ? 0 : 1)) {
      ops.push_back(Op::kDiag);
      --i;
      --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ops.push_back(Op::kHypOnly);
      --i;
    } else {
      ops.push_back(Op::kRefOnly);
      --j;
    }
  }
  std::reverse(ops.begin(), ops.end());

  Alignment a;
  a.distance = at(n, m);
  a.ref_to_hyp.assign(m, -1);
  a.hyp_err.assign(n, false);
  a.ref_err.assign(m, false);
  int hi = -1, ri = -1;
  for (Op op : ops) {
    switch (op) {
      case Op::kDiag: {
        ++hi;
        ++ri;
        a.ref_to_hyp[ri] = hi;
        const bool err = hyp[hi] != ref[ri];
        a.hyp_err[hi] = err;
        a.ref_err[ri] = err;
        break;
      }
      case Op::kHypOnly:
        ++hi;
        a.hyp_err[hi] = true;
        break;
      case Op::kRefOnly:
        ++ri;
        a.ref_to_hyp[ri] = hi;
        a.ref_err[ri] = true;
        break;
    }
  }
  return a;
}

/// Moves words[start, start+length) so that it lands before original index target.
inline Words perform_shift(const Words& w, int start, int length, int target) {
  // Half-open slice clamped to the sequence, so a target inside the moved
  // span cannot run past the end.
  const int n = static_cast<int>(w.size());
  Words out;
  out.reserve(w.size());
  auto take = [&](int b, int e) {
    b = std::clamp(b, 0, n);
    e = std::clamp(e, 0, n);
    if (b < e) out.insert(out.end(), w.begin() + b, w.begin() + e);
  };
  if (target < start) {
    take(0, target);
    take(start, start + length);
    take(target, start);
    take(start + length, n);
  } else if (target > start + length) {
    take(0, start);
    take(start + length, target);
    take(start, start + length);
    take(target, n);
  } else {
    take(0, start);
    take(start + length, length + target);
    take(start, start + length);
    take(length + target, n);
  }
  return out;
}

struct ShiftCandidate {
  int gain = 0;
  int length = 0;
  int start_h = 0;
  int target = 0;
  Words shifted;

  // Higher gain, then longer span, then earlier span, then earlier target.
  auto rank() const { return std::make_tuple(gain, length, -start_h, -target); }
};

/// Best distance-reducing shift of the current hypothesis, if any.
inline bool best_shift(const Words& hyp, const Words& ref, const TerOptions& opt,
                       ShiftCandidate& best) {
  const Alignment a = align(hyp, ref);
  const int n = static_cast<int>(hyp.size()), m = static_cast<int>(ref.size());
  bool found = false;
  for (int sh = 0; sh < n; ++sh) {
    for (int sr = 0; sr < m; ++sr) {
      if (std::abs(sh - sr) > opt.max_shift_distance) continue;
      for (int len = 1; len <= opt.max_shift_size && sh + len <= n && sr + len <= m; ++len) {
        if (hyp[sh + len - 1] != ref[sr + len - 1]) break;
        bool hyp_wrong = false, ref_wrong = false;
        for (int k = 0; k < len; ++k) {
          hyp_wrong = hyp_wrong || a.hyp_err[sh + k];
          ref_wrong = ref_wrong || a.ref_err[sr + k];
        }
        if (!hyp_wrong || !ref_wrong) continue;
        if (a.ref_to_hyp[sr] >= sh && a.ref_to_hyp[sr] < sh + len) continue;

        int prev_target = -1;
        for (int off = -1; off < len; ++off) {
          const int target = (sr + off == -1) ? 0 : a.ref_to_hyp[sr + off] + 1;
          if (target == prev_target) continue;
          prev_target = target;
          Words shifted = perform_shift(hyp, sh, len, target);
          const int gain = a.distance - levenshtein(shifted, ref);
          ShiftCandidate cand{gain, len, sh, target, {}};
          if (!found || cand.rank() > best.rank()) {
            cand.shifted = std::move(shifted);
            best = std::move(cand);
            found = true;
          }
        }
      }
    }
  }
  return found;
}

}  // namespace ter_detail

/// Edits needed to turn hyp into ref, counting each block shift as one edit.
/// Throws DegenerateInputError for an empty reference.
inline TerReport ter(const TokenSequence& hyp, const TokenSequence& ref,
                     const TerOptions& opt = {}) {
  if (ref.empty()) throw DegenerateInputError("TER is undefined for an empty reference");
  ter_detail::Words cur = hyp.tokens;
  std::int64_t shifts = 0;
  ter_detail::ShiftCandidate best;
  while (ter_detail::best_shift(cur, ref.tokens, opt, best) && best.gain > 0) {
    cur = std::move(best.shifted);
    ++shifts;
  }
  TerReport r;
  r.shifts = shifts;
  r.edits = shifts + ter_detail::levenshtein(cur, ref.tokens);
  r.ref_len = static_cast<std::int64_t>(ref.size());
  r.score = static_cast<double>(r.edits) / static_cast<double>(r.ref_len);
  return r;
}

/// Corpus TER: total edits over total reference words. An empty reference
/// contributes one insertion-edit per hypothesis word.
inline TerReport corpus_ter(std::span<const TokenSequence> hyps,
                            std::span<const TokenSequence> refs, const TerOptions& opt = {}) {
  TerReport total;
  for (std::size_t i = 0; i < hyps.size() && i < refs.size(); ++i) {
    if (refs[i].empty()) {
      total.edits += static_cast<std::int64_t>(hyps[i].size());
      continue;
    }
    const TerReport r = ter(hyps[i], refs[i], opt);
    total.edits += r.edits;
    total.shifts += r.shifts;
    total.ref_len += r.ref_len;
  }
  if (total.ref_len == 0) throw DegenerateInputError("TER is undefined: all references are empty");
  total.score = static_cast<double>(total.edits) / static_cast<double>(total.ref_len);
  return total;
}

}  // namespace transeval
