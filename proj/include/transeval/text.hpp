#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "transeval/error.hpp"

namespace transeval::text {

namespace detail {

// Decodes the code point starting at s[i]; sets len to its byte length.
// Malformed sequences decode as a single byte.
inline char32_t decode_utf8(std::string_view s, std::size_t i, std::size_t& len) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    len = 1;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0) {
    if (int c1 = cont(1); c1 >= 0) {
      len = 2;
      return (char32_t(b0 & 0x1F) << 6) | char32_t(c1);
    }
  } else if ((b0 & 0xF0) == 0xE0) {
    int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) {
      len = 3;
      return (char32_t(b0 & 0x0F) << 12) | (char32_t(c1) << 6) | char32_t(c2);
    }
  } else if ((b0 & 0xF8) == 0xF0) {
    int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      len = 4;
      return (char32_t(b0 & 0x07) << 18) | (char32_t(c1) << 12) | (char32_t(c2) << 6) |
             char32_t(c3);
    }
  }
  len = 1;
  return b0;
}

}  // namespace detail

/// Same set as Python's str.isspace(), which is what the reference
/// tokenizers split on.
constexpr bool is_unicode_space(char32_t c) {
  switch (c) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
    case 0x1C: case 0x1D: case 0x1E: case 0x1F: case 0x20:
    case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

/// Splits on runs of Unicode whitespace; no empty fields.
inline std::vector<std::string> split_unicode_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0, start = std::string_view::npos;
  while (i < s.size()) {
    std::size_t len = 1;
    const char32_t c = detail::decode_utf8(s, i, len);
    if (is_unicode_space(c)) {
      if (start != std::string_view::npos) {
        out.emplace_back(s.substr(start, i - start));
        start = std::string_view::npos;
      }
    } else if (start == std::string_view::npos) {
      start = i;
    }
    i += len;
  }
  if (start != std::string_view::npos) out.emplace_back(s.substr(start));
  return out;
}

constexpr bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

/// Plain whitespace tokenization used for word counts and pre-tokenized LM text.
inline std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_ascii_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_ascii_space(s[i])) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

inline std::size_t count_whitespace_tokens(std::string_view s) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_ascii_space(s[i])) ++i;
    if (i < s.size()) ++n;
    while (i < s.size() && !is_ascii_space(s[i])) ++i;
  }
  return n;
}

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_ascii_space(s[b])) ++b;
  while (e > b && is_ascii_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

/// Trim and collapse internal whitespace runs to one space; case preserved.
inline std::string squeeze(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (const auto& tok : split_whitespace(s)) {
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

inline std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

/// Reads LF-delimited lines; a trailing CR is kept (inputs are LF-only).
/// A final line without terminator is still returned; a trailing LF does not
/// produce an extra empty line.
inline std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open file: " + path);
  return read_lines(in);
}

}  // namespace transeval::text
