#pragma once

// Paired bootstrap resampling over test items and Pearson correlation with a
// Fisher-transform confidence interval.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <json.hpp>

#include "transeval/error.hpp"

namespace transeval {

/// SplitMix64 (Steele, Lea, Flood 2014): state advances by 0x9E3779B97F4A7C15
/// and each output is the state passed through the finalizer below.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  /// Uniform integer in [0, bound) by multiply-high with rejection (Lemire).
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t state_;
};

inline constexpr const char* kBootstrapGenerator = "splitmix64; substream state = mix(seed ^ mix(resample_index))";
inline constexpr std::uint64_t kDefaultSeed = 12345;

/// Generator for resample `index`; independent of how resamples are scheduled.
inline SplitMix64 resample_stream(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(SplitMix64::mix(seed ^ SplitMix64::mix(index)));
}

/// Indices of one bootstrap resample of n items.
inline std::vector<std::size_t> resample_indices(std::uint64_t seed, std::uint64_t index, std::size_t n) {
  SplitMix64 rng = resample_stream(seed, index);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = static_cast<std::size_t>(rng.below(n));
  return idx;
}

struct BootstrapOptions {
  std::size_t n_resamples = 1000;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  double confidence = 0.95;
};

struct BootstrapResult {
  double observed_delta = 0.0;  // scorer(A) - scorer(B) on the full test set
  double delta_mean = 0.0;      // mean of resampled deltas
  double p_value = 1.0;         // fraction of resamples with delta <= 0
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_resamples = 0;
  std::uint64_t seed = 0;
  std::vector<double> deltas;   // per resample, in index order
};

/// scorer maps a span of item statistics to a scalar (higher is better).
template <typename Stat, typename Scorer>
BootstrapResult paired_bootstrap(std::span<const Stat> a, std::span<const Stat> b, Scorer&& scorer,
                                 const BootstrapOptions& opt = {}) {
  if (a.size() != b.size())
    throw ValidationError("paired bootstrap needs equal-length inputs, got " + std::to_string(a.size()) +
                          " and " + std::to_string(b.size()));
  if (a.size() < 2) throw ValidationError("paired bootstrap needs at least 2 items");
  if (opt.n_resamples == 0) throw ValidationError("n_resamples must be positive");

  BootstrapResult res;
  res.n_resamples = opt.n_resamples;
  res.seed = opt.seed;
  res.observed_delta = scorer(a) - scorer(b);
  res.deltas.assign(opt.n_resamples, 0.0);

  const std::size_t n = a.size();
  auto work = [&](std::size_t first, std::size_t stride) {
    std::vector<Stat> sa(n), sb(n);
    for (std::size_t r = first; r < opt.n_resamples; r += stride) {
      const auto idx = resample_indices(opt.seed, r, n);
      for (std::size_t k = 0; k < n; ++k) {
        sa[k] = a[idx[k]];
        sb[k] = b[idx[k]];
      }
      res.deltas[r] = scorer(std::span<const Stat>(sa)) - scorer(std::span<const Stat>(sb));
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(opt.n_resamples)));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }

  double sum = 0.0;
  std::size_t not_better = 0;
  for (double d : res.deltas) {
    sum += d;
    if (d <= 0.0) ++not_better;
  }
  res.delta_mean = sum / static_cast<double>(opt.n_resamples);
  res.p_value = static_cast<double>(not_better) / static_cast<double>(opt.n_resamples);

  // Percentile interval: the values at ranks floor(alpha/2 * N) and
  // ceil((1 - alpha/2) * N) - 1 of the sorted deltas.
  std::vector<double> sorted = res.deltas;
  std::sort(sorted.begin(), sorted.end());
  const double tail = (1.0 - opt.confidence) / 2.0;
  const auto N = static_cast<double>(sorted.size());
  const auto lo = static_cast<std::size_t>(std::floor(tail * N));
  const auto hi = static_cast<std::size_t>(std::max(0.0, std::ceil((1.0 - tail) * N) - 1.0));
  res.ci_low = sorted[std::min(lo, sorted.size() - 1)];
  res.ci_high = sorted[std::min(hi, sorted.size() - 1)];
  return res;
}

inline nlohmann::json to_json(const BootstrapResult& r, bool include_deltas = false) {
  nlohmann::json j{{"observed_delta", r.observed_delta},
                   {"delta_mean", r.delta_mean},
                   {"p_value", r.p_value},
                   {"ci_low", r.ci_low},
                   {"ci_high", r.ci_high},
                   {"n_resamples", r.n_resamples},
                   {"seed", r.seed},
                   {"generator", kBootstrapGenerator},
                   {"p_value_convention", "fraction of resamples with delta <= 0 (one-sided, A better)"},
                   {"verdict", r.p_value >= 1.0 ? "no difference" : (r.p_value < 0.05 ? "A significantly better at p=0.05" : "not significant at p=0.05")}};
  if (include_deltas) j["deltas"] = r.deltas;
  return j;
}

// ---------------------------------------------------------------------------
// Correlation

struct CorrelationResult {
  double r = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
  double confidence = 0.95;
};

/// Two-sided normal quantile z_(1 - alpha/2) for the given confidence level.
inline double normal_two_sided_quantile(double confidence) {
  const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, 1.0 - (1.0 - confidence) / 2.0);
}

/// CI for a correlation coefficient: tanh(atanh(r) +- z / sqrt(n - 3)).
inline CorrelationResult fisher_ci(double r, std::size_t n, double confidence = 0.95) {
  if (n < 4) throw DegenerateInputError("Fisher interval needs n >= 4");
  if (!(std::abs(r) < 1.0)) throw DegenerateInputError("Fisher interval undefined for |r| = 1");
  if (!(confidence > 0.0 && confidence < 1.0)) throw ValidationError("confidence must be in (0, 1)");
  const double z = std::atanh(r);
  const double half = normal_two_sided_quantile(confidence) / std::sqrt(static_cast<double>(n) - 3.0);
  return {r, std::tanh(z - half), std::tanh(z + half), n, confidence};
}

inline constexpr double kDegenerateCorrelation = 1e-12;

inline CorrelationResult pearson_fisher_ci(std::span<const double> x, std::span<const double> y,
                                           double confidence = 0.95) {
  if (x.size() != y.size()) throw ValidationError("correlation needs paired samples of equal length");
  const std::size_t n = x.size();
  if (n < 4) throw DegenerateInputError("correlation interval needs n >= 4, got " + std::to_string(n));
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInputError("correlation undefined: zero variance");
  const double r = sxy / std::sqrt(sxx * syy);
  if (std::abs(r) >= 1.0 - kDegenerateCorrelation)
    throw DegenerateInputError("correlation interval undefined: |r| = 1");
  return fisher_ci(r, n, confidence);
}

inline nlohmann::json to_json(const CorrelationResult& c) {
  return {{"r", c.r}, {"ci_low", c.ci_low}, {"ci_high", c.ci_high}, {"n", c.n},
          {"confidence", c.confidence}, {"method", "Pearson r, Fisher z-transform interval"}};
}

}  // namespace transeval
