#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

namespace transeval {

inline constexpr const char* kVersion = "0.3.0";

/// Fixed-point formatting used by every table; rounds half away from zero.
inline std::string fixed(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  double r = std::round(v * scale) / scale;
  if (r == 0.0) r = 0.0;  // no "-0.0"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, r);
  return buf;
}

/// Plain-text table with a header rule; first column left-aligned, the rest
/// right-aligned.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row) {
    row.resize(header_.size());
    rows_.push_back(std::move(row));
  }
  void add_rule() { rows_.emplace_back(); }

  std::string render() const {
    std::vector<std::size_t> width(header_.size());
    for (std::size_t c = 0; c < header_.size(); ++c) width[c] = header_[c].size();
    for (const auto& r : rows_)
      for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());

    std::size_t total = 0;
    for (auto w : width) total += w;
    total += 2 * (width.size() - 1);

    auto line = [&](const std::vector<std::string>& r) {
      std::string out;
      for (std::size_t c = 0; c < r.size(); ++c) {
        if (c) out += "  ";
        const std::string pad(width[c] - r[c].size(), ' ');
        out += c == 0 ? r[c] + pad : pad + r[c];
      }
      while (!out.empty() && out.back() == ' ') out.pop_back();
      return out + "\n";
    };
    std::string out = line(header_);
    out += std::string(total, '-') + "\n";
    for (const auto& r : rows_) out += r.empty() ? std::string(total, '-') + "\n" : line(r);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace transeval
