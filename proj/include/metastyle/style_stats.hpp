// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef METASTYLE_STYLE_STATS_HPP_
#define METASTYLE_STYLE_STATS_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

#include "metastyle/common.hpp"
#include "metastyle/tensor.hpp"

namespace metastyle {

// Per-channel style summary of a feature map (or of a single-channel image
// batch): the spatial mean and the population standard deviation of each
// channel, averaged over the instances that produced it. `count` tracks how
// many instances contributed, so summaries can be merged as weighted means.
struct StyleStats {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::uint64_t count = 0;

  int channels() const { return static_cast<int>(mean.size()); }
};

inline bool operator==(const StyleStats& a, const StyleStats& b) {
  return a.count == b.count && a.mean == b.mean && a.stddev == b.stddev;
}

// Spatial mean and population standard deviation (divide by H*W, not H*W-1)
// of one channel of one instance.
inline void instance_channel_stats(const Tensor4& x, int n, int c,
                                   double* mean, double* stddev) {
  const double* p = x.channel(n, c);
  const std::size_t hw = x.plane();
  double sum = 0.0;
  for (std::size_t i = 0; i < hw; ++i) sum += p[i];
  const double mu = sum / static_cast<double>(hw);
  double ss = 0.0;
  for (std::size_t i = 0; i < hw; ++i) {
    const double d = p[i] - mu;
    ss += d * d;
  }
  *mean = mu;
  *stddev = std::sqrt(ss / static_cast<double>(hw));
}

// Batch-level style summary: per-channel instance statistics averaged over
// the batch dimension.
inline StyleStats compute_style_stats(const Tensor4& features) {
  if (features.empty()) {
    throw DimensionError("compute_style_stats: empty feature tensor");
  }
  features.require_finite("compute_style_stats");
  StyleStats s;
  s.mean.assign(features.c(), 0.0);
  s.stddev.assign(features.c(), 0.0);
  s.count = static_cast<std::uint64_t>(features.n());
  for (int n = 0; n < features.n(); ++n) {
    for (int c = 0; c < features.c(); ++c) {
      double mu, sd;
      instance_channel_stats(features, n, c, &mu, &sd);
      s.mean[c] += mu;
      s.stddev[c] += sd;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(features.n());
  for (int c = 0; c < features.c(); ++c) {
    s.mean[c] *= inv_n;
    s.stddev[c] *= inv_n;
  }
  return s;
}

// Convex combination of a current and a stored style:
//   mixed = alpha * current + (1 - alpha) * stored, per channel, for both the
// means and the standard deviations. `count` carries over from `current`.
inline StyleStats mix_styles(const StyleStats& current,
                             const StyleStats& stored, double alpha) {
  if (current.channels() != stored.channels()) {
    throw DimensionError("mix_styles: channel count mismatch (" +
                         std::to_string(current.channels()) + " vs " +
                         std::to_string(stored.channels()) + ")");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValueError("mix_styles: alpha must lie in [0, 1], got " +
                     std::to_string(alpha));
  }
  StyleStats out;
  out.mean.resize(current.mean.size());
  out.stddev.resize(current.stddev.size());
  out.count = current.count;
  for (std::size_t c = 0; c < out.mean.size(); ++c) {
    out.mean[c] = alpha * current.mean[c] + (1.0 - alpha) * stored.mean[c];
    out.stddev[c] =
        alpha * current.stddev[c] + (1.0 - alpha) * stored.stddev[c];
  }
  return out;
}

struct StyleRecallConfig {
  // Mixing coefficient toward the current style.
  double alpha = 0.5;
  // Denominator guard when normalizing by the instance deviation.
  double epsilon = 1e-5;
};

// Re-styles a feature map toward `mixed`: each channel of each instance is
// normalized by its own statistics and re-expressed with the mixed ones,
//   out = (x - mu_x) / (sigma_x + eps) * sigma_mixed + mu_mixed.
// A constant channel (sigma_x = 0) collapses onto mu_mixed.
inline Tensor4 recall_normalize(const Tensor4& features,
                                const StyleStats& mixed,
                                const StyleRecallConfig& cfg) {
  if (mixed.channels() != features.c()) {
    throw DimensionError("recall_normalize: stats cover " +
                         std::to_string(mixed.channels()) +
                         " channels but features have " +
                         std::to_string(features.c()));
  }
  if (!(cfg.epsilon > 0.0)) {
    throw ValueError("recall_normalize: epsilon must be positive");
  }
  features.require_finite("recall_normalize");
  Tensor4 out(features.n(), features.c(), features.h(), features.w());
  const std::size_t hw = features.plane();
  for (int n = 0; n < features.n(); ++n) {
    for (int c = 0; c < features.c(); ++c) {
      double mu, sd;
      instance_channel_stats(features, n, c, &mu, &sd);
      const double scale = mixed.stddev[c] / (sd + cfg.epsilon);
      const double* src = features.channel(n, c);
      double* dst = out.channel(n, c);
      for (std::size_t i = 0; i < hw; ++i) {
        dst[i] = (src[i] - mu) * scale + mixed.mean[c];
      }
    }
  }
  return out;
}

// Log-compressed magnitude of a style shift between two summaries:
//   delta = ln(1 + s * mean_c |mu_a - mu_b|) + ln(1 + s * mean_c |sd_a - sd_b|)
// `sensitivity` (s) scales the gaps before compression. Symmetric in its
// arguments and zero iff the summaries coincide.
inline double style_delta(const StyleStats& a, const StyleStats& b,
                          double sensitivity) {
  if (a.channels() != b.channels()) {
    throw DimensionError("style_delta: channel count mismatch (" +
                         std::to_string(a.channels()) + " vs " +
                         std::to_string(b.channels()) + ")");
  }
  if (!(sensitivity > 0.0)) {
    throw ValueError("style_delta: sensitivity must be positive, got " +
                     std::to_string(sensitivity));
  }
  const std::size_t c = a.mean.size();
  double gap_mean = 0.0, gap_sd = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    gap_mean += std::abs(a.mean[i] - b.mean[i]);
    gap_sd += std::abs(a.stddev[i] - b.stddev[i]);
  }
  gap_mean /= static_cast<double>(c);
  gap_sd /= static_cast<double>(c);
  const double delta =
      std::log1p(sensitivity * gap_mean) + std::log1p(sensitivity * gap_sd);
  ensure_finite(delta, "style_delta");
  return delta;
}

// Maps a style shift onto a mixing weight in [0, 1):
//   w = 1 - exp(-delta).
// Saturates toward 1 for large shifts; exactly 0 when the shift is 0. The
// result is clamped below 1 so the [0, 1) range holds even when exp(-delta)
// underflows.
inline double dynamic_weight(double delta) {
  if (!(delta >= 0.0)) {
    throw ValueError("dynamic_weight: delta must be non-negative, got " +
                     std::to_string(delta));
  }
  constexpr double kBelowOne = 0x1.fffffffffffffp-1;  // largest double < 1
  return std::min(-std::expm1(-delta), kBelowOne);
}

}  // namespace metastyle

#endif  // METASTYLE_STYLE_STATS_HPP_
