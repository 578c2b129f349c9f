#pragma once

// mteval-v13a normalization and tokenization, as used by SacreBLEU's
// "tok.13a" setting. Byte-compatible with the reference for UTF-8 input.

#include <string>
#include <string_view>
#include <vector>

#include "transeval/text.hpp"

namespace transeval {

/// Tokens produced by a tokenizer plus the text they came from.
struct TokenSequence {
  std::vector<std::string> tokens;
  std::string source_text;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  std::string joined() const { return text::join(tokens); }

  /// Wraps already-tokenized text (whitespace split), e.g. for LM corpora.
  static TokenSequence from_whitespace(std::string_view s) {
    return {text::split_whitespace(s), std::string(s)};
  }
};

namespace detail {

inline void replace_all(std::string& s, std::string_view from, std::string_view to) {
  if (from.empty()) return;
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = s.find(from, pos);
    if (hit == std::string::npos) break;
    out.append(s, pos, hit - pos);
    out += to;
    pos = hit + from.size();
  }
  if (pos == 0) return;
  out.append(s, pos, std::string::npos);
  s = std::move(out);
}

constexpr bool is_digit(char c) { return c >= '0' && c <= '9'; }

// [{-~] [[-`] [ -&] [(-+] [:-@] [/]
constexpr bool is_13a_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= '{' && u <= '~') || (u >= '[' && u <= '`') || (u >= ' ' && u <= '&') ||
         (u >= '(' && u <= '+') || (u >= ':' && u <= '@') || u == '/';
}

constexpr bool is_period_or_comma(char c) { return c == '.' || c == ','; }

}  // namespace detail

/// Applies only the 13a normalization step (entity and line-break rewrites).
inline std::string normalize_13a(std::string line) {
  detail::replace_all(line, "<skipped>", "");
  detail::replace_all(line, "-\n", "");
  detail::replace_all(line, "\n", " ");
  if (line.find('&') != std::string::npos) {
    detail::replace_all(line, "&quot;", "\"");
    detail::replace_all(line, "&amp;", "&");
    detail::replace_all(line, "&lt;", "<");
    detail::replace_all(line, "&gt;", ">");
  }
  return line;
}

/// Each pass reproduces one left-to-right, non-overlapping regex substitution
/// of the reference tokenizer. Matching bytes instead of code points gives the
/// same result because every pattern anchors on an ASCII byte.
inline std::vector<std::string> tokenize_13a_normalized(std::string_view normalized) {
  std::string s;
  s.reserve(normalized.size() * 2 + 2);
  s.push_back(' ');
  s.append(normalized);
  s.push_back(' ');

  // ([\{-\~\[-\` -\&\(-\+\:-\@\/]) -> " \1 "
  std::string t;
  t.reserve(s.size() * 3);
  for (char c : s) {
    if (detail::is_13a_punct(c)) {
      t.push_back(' ');
      t.push_back(c);
      t.push_back(' ');
    } else {
      t.push_back(c);
    }
  }

  // ([^0-9])([\.,]) -> "\1 \2 "
  s.clear();
  for (std::size_t i = 0; i < t.size();) {
    if (i + 1 < t.size() && !detail::is_digit(t[i]) && detail::is_period_or_comma(t[i + 1])) {
      s.push_back(t[i]);
      s.push_back(' ');
      s.push_back(t[i + 1]);
      s.push_back(' ');
      i += 2;
    } else {
      s.push_back(t[i++]);
    }
  }

  // ([\.,])([^0-9]) -> " \1 \2"
  t.clear();
  for (std::size_t i = 0; i < s.size();) {
    if (i + 1 < s.size() && detail::is_period_or_comma(s[i]) && !detail::is_digit(s[i + 1])) {
      t.push_back(' ');
      t.push_back(s[i]);
      t.push_back(' ');
      t.push_back(s[i + 1]);
      i += 2;
    } else {
      t.push_back(s[i++]);
    }
  }

  // ([0-9])(-) -> "\1 \2 "
  s.clear();
  for (std::size_t i = 0; i < t.size();) {
    if (i + 1 < t.size() && detail::is_digit(t[i]) && t[i + 1] == '-') {
      s.push_back(t[i]);
      s.push_back(' ');
      s.push_back('-');
      s.push_back(' ');
      i += 2;
    } else {
      s.push_back(t[i++]);
    }
  }

  return text::split_unicode_whitespace(s);
}

/// Full 13a pipeline: normalize, tokenize, squeeze whitespace. Case is kept.
inline TokenSequence tok13a(std::string_view input) {
  TokenSequence out;
  out.source_text = std::string(input);
  out.tokens = tokenize_13a_normalized(normalize_13a(std::string(input)));
  return out;
}

}  // namespace transeval
