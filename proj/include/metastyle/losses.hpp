// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef METASTYLE_LOSSES_HPP_
#define METASTYLE_LOSSES_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "metastyle/common.hpp"
#include "metastyle/tensor.hpp"

namespace metastyle {

// ---------------------------------------------------------------------------
// Style embeddings.
//
// A feature map is embedded per instance as its channel-wise global average,
// L2-normalized onto the unit sphere. Exactly-zero pooled vectors (which have
// no direction) map to the first basis vector by convention.
// ---------------------------------------------------------------------------

struct EmbeddingBatch {
  // v[i] is the unit-length embedding of instance i.
  std::vector<std::vector<double>> v;
  int dim = 0;
};

inline EmbeddingBatch feature_embed(const Tensor4& features) {
  features.require_finite("feature_embed");
  EmbeddingBatch out;
  out.dim = features.c();
  out.v.assign(features.n(), std::vector<double>(features.c(), 0.0));
  const std::size_t hw = features.plane();
  const double inv_hw = 1.0 / static_cast<double>(hw);
  for (int n = 0; n < features.n(); ++n) {
    double norm_sq = 0.0;
    for (int c = 0; c < features.c(); ++c) {
      const double* p = features.channel(n, c);
      double sum = 0.0;
      for (std::size_t i = 0; i < hw; ++i) sum += p[i];
      const double g = sum * inv_hw;
      out.v[n][c] = g;
      norm_sq += g * g;
    }
    if (norm_sq == 0.0) {
      out.v[n][0] = 1.0;
      continue;
    }
    const double inv_norm = 1.0 / std::sqrt(norm_sq);
    for (int c = 0; c < features.c(); ++c) out.v[n][c] *= inv_norm;
  }
  return out;
}

// Backward of feature_embed: given d(loss)/d(embedding), returns
// d(loss)/d(features). The normalization projects the gradient onto the
// tangent space of the sphere; degenerate (zero-pooled) instances are treated
// as locally constant and receive zero gradient.
inline Tensor4 feature_embed_backward(const Tensor4& features,
                                      const EmbeddingBatch& emb,
                                      const std::vector<std::vector<double>>&
                                          d_emb) {
  if (static_cast<int>(d_emb.size()) != features.n()) {
    throw DimensionError("feature_embed_backward: batch size mismatch");
  }
  Tensor4 grad(features.n(), features.c(), features.h(), features.w());
  const std::size_t hw = features.plane();
  const double inv_hw = 1.0 / static_cast<double>(hw);
  for (int n = 0; n < features.n(); ++n) {
    // Recover the pooled (pre-normalization) vector's norm from the input.
    double norm_sq = 0.0;
    std::vector<double> pooled(features.c());
    for (int c = 0; c < features.c(); ++c) {
      const double* p = features.channel(n, c);
      double sum = 0.0;
      for (std::size_t i = 0; i < hw; ++i) sum += p[i];
      pooled[c] = sum * inv_hw;
      norm_sq += pooled[c] * pooled[c];
    }
    if (norm_sq == 0.0) continue;
    const double norm = std::sqrt(norm_sq);
    // d(pooled) = (d_emb - v * <v, d_emb>) / norm, with v the unit embedding.
    double dot = 0.0;
    for (int c = 0; c < features.c(); ++c) dot += emb.v[n][c] * d_emb[n][c];
    for (int c = 0; c < features.c(); ++c) {
      const double d_pooled = (d_emb[n][c] - emb.v[n][c] * dot) / norm;
      const double d_px = d_pooled * inv_hw;
      double* g = grad.channel(n, c);
      for (std::size_t i = 0; i < hw; ++i) g[i] = d_px;
    }
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Alignment loss (margin contrastive, averaged over pairs).
//
// Pairs of embeddings are labeled 1 (same content, should coincide) or 0
// (different content, should stay at least `margin` apart):
//   L = (1/N) * sum_i [ y_i * d_i^2 + (1 - y_i) * max(margin - d_i, 0)^2 ]
// with d_i the Euclidean distance between the two embeddings of pair i.
// ---------------------------------------------------------------------------

struct PairBatch {
  // a[i] and b[i] form pair i; label[i] is 1 for positive pairs, 0 for
  // negative pairs. All embeddings must share one dimension.
  std::vector<std::vector<double>> a;
  std::vector<std::vector<double>> b;
  std::vector<int> label;
};

inline void validate_pair_batch(const PairBatch& pairs, double margin) {
  if (pairs.a.empty()) {
    throw ValueError("align_loss: empty pair batch");
  }
  if (pairs.a.size() != pairs.b.size() ||
      pairs.a.size() != pairs.label.size()) {
    throw DimensionError("align_loss: a, b and label must have equal length");
  }
  if (!(margin > 0.0)) {
    throw ValueError("align_loss: margin must be positive, got " +
                     std::to_string(margin));
  }
  const std::size_t dim = pairs.a[0].size();
  for (std::size_t i = 0; i < pairs.a.size(); ++i) {
    if (pairs.a[i].size() != dim || pairs.b[i].size() != dim) {
      throw DimensionError("align_loss: embedding dimension mismatch at pair " +
                           std::to_string(i));
    }
    if (pairs.label[i] != 0 && pairs.label[i] != 1) {
      throw ValueError("align_loss: labels must be 0 or 1, got " +
                       std::to_string(pairs.label[i]) + " at pair " +
                       std::to_string(i));
    }
  }
}

inline double align_loss(const PairBatch& pairs, double margin) {
  validate_pair_batch(pairs, margin);
  const std::size_t n = pairs.a.size();
  const std::size_t dim = pairs.a[0].size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d_sq = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double diff = pairs.a[i][c] - pairs.b[i][c];
      d_sq += diff * diff;
    }
    if (pairs.label[i] == 1) {
      total += d_sq;
    } else {
      const double gap = margin - std::sqrt(d_sq);
      if (gap > 0.0) total += gap * gap;
    }
  }
  const double loss = total / static_cast<double>(n);
  ensure_finite(loss, "align_loss");
  return loss;
}

// Analytic gradient of align_loss with respect to both embedding sets.
// Non-differentiable points (d = margin for negatives, d = 0 for negatives)
// use the subgradient 0 on the hinge side.
inline void align_loss_backward(const PairBatch& pairs, double margin,
                                std::vector<std::vector<double>>* d_a,
                                std::vector<std::vector<double>>* d_b) {
  validate_pair_batch(pairs, margin);
  const std::size_t n = pairs.a.size();
  const std::size_t dim = pairs.a[0].size();
  d_a->assign(n, std::vector<double>(dim, 0.0));
  d_b->assign(n, std::vector<double>(dim, 0.0));
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d_sq = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double diff = pairs.a[i][c] - pairs.b[i][c];
      d_sq += diff * diff;
    }
    if (pairs.label[i] == 1) {
      for (std::size_t c = 0; c < dim; ++c) {
        const double g = 2.0 * (pairs.a[i][c] - pairs.b[i][c]) * inv_n;
        (*d_a)[i][c] = g;
        (*d_b)[i][c] = -g;
      }
    } else {
      const double d = std::sqrt(d_sq);
      if (d <= 0.0 || d >= margin) continue;
      const double coeff = -2.0 * (margin - d) / d * inv_n;
      for (std::size_t c = 0; c < dim; ++c) {
        const double g = coeff * (pairs.a[i][c] - pairs.b[i][c]);
        (*d_a)[i][c] = g;
        (*d_b)[i][c] = -g;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Prediction-map checks shared by the losses below.
// ---------------------------------------------------------------------------

// A prediction map is a Tensor4 of per-pixel class probabilities: entries in
// [0, 1], channels summing to 1 at every pixel (within tolerance).
inline void validate_prediction_map(const Tensor4& p, const char* what) {
  constexpr double kSumTol = 1e-5;
  p.require_finite(what);
  const std::size_t hw = p.plane();
  for (int n = 0; n < p.n(); ++n) {
    for (std::size_t i = 0; i < hw; ++i) {
      double sum = 0.0;
      for (int c = 0; c < p.c(); ++c) {
        const double v = p.channel(n, c)[i];
        if (v < 0.0 || v > 1.0) {
          throw ValueError(std::string(what) +
                           ": probability outside [0, 1]: " +
                           std::to_string(v));
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > kSumTol) {
        throw ValueError(std::string(what) +
                         ": class probabilities sum to " +
                         std::to_string(sum) + " at a pixel");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Consistency loss.
//
// Mean over instances of the squared L2 distance between two prediction maps
// of the same inputs (the sum runs over classes and pixels).
// ---------------------------------------------------------------------------

inline double consistency_loss(const Tensor4& p, const Tensor4& q) {
  if (!p.same_shape(q)) {
    throw DimensionError("consistency_loss: shape mismatch " +
                         p.shape_string() + " vs " + q.shape_string());
  }
  validate_prediction_map(p, "consistency_loss");
  validate_prediction_map(q, "consistency_loss");
  const double* a = p.data();
  const double* b = q.data();
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total / static_cast<double>(p.n());
}

inline void consistency_loss_backward(const Tensor4& p, const Tensor4& q,
                                      Tensor4* d_p, Tensor4* d_q) {
  if (!p.same_shape(q)) {
    throw DimensionError("consistency_loss_backward: shape mismatch");
  }
  *d_p = Tensor4(p.n(), p.c(), p.h(), p.w());
  *d_q = Tensor4(p.n(), p.c(), p.h(), p.w());
  const double scale = 2.0 / static_cast<double>(p.n());
  const double* a = p.data();
  const double* b = q.data();
  double* ga = d_p->data();
  double* gb = d_q->data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double g = scale * (a[i] - b[i]);
    ga[i] = g;
    gb[i] = -g;
  }
}

// ---------------------------------------------------------------------------
// Soft Dice loss over foreground classes.
//
//   L = 1 - (1/(K-1)) * sum_{k=1}^{K-1} (2 * <p_k, t_k> + smooth) /
//                                       (sum p_k + sum t_k + smooth)
// where t_k is the one-hot mask of class k and the sums run over the whole
// batch. The background class contributes only through the softmax that
// produced the probabilities.
// ---------------------------------------------------------------------------

struct DiceTerms {
  // Per foreground class: numerator 2*intersection + smooth, denominator
  // sum p + sum t + smooth. Kept so the backward pass reuses the forward sums.
  std::vector<double> num;
  std::vector<double> den;
};

inline void check_mask_against(const Tensor4& probs, const MaskBatch& mask,
                               const char* what) {
  if (mask.n != probs.n() || mask.h != probs.h() || mask.w != probs.w()) {
    throw DimensionError(std::string(what) + ": mask [" +
                         std::to_string(mask.n) + "," + std::to_string(mask.h) +
                         "," + std::to_string(mask.w) +
                         "] does not match predictions " +
                         probs.shape_string());
  }
  for (std::uint8_t v : mask.labels) {
    if (static_cast<int>(v) >= probs.c()) {
      throw DataError(std::string(what) + ": mask label " + std::to_string(v) +
                      " exceeds class count " + std::to_string(probs.c()));
    }
  }
}

inline double dice_loss(const Tensor4& probs, const MaskBatch& mask,
                        double smooth = 1e-5, DiceTerms* terms = nullptr) {
  if (probs.c() < 2) {
    throw DimensionError("dice_loss: need at least 2 classes, got " +
                         std::to_string(probs.c()));
  }
  check_mask_against(probs, mask, "dice_loss");
  validate_prediction_map(probs, "dice_loss");
  if (!(smooth > 0.0)) {
    throw ValueError("dice_loss: smooth must be positive");
  }
  const int fg = probs.c() - 1;
  std::vector<double> inter(fg, 0.0), psum(fg, 0.0), tsum(fg, 0.0);
  const std::size_t hw = probs.plane();
  for (int n = 0; n < probs.n(); ++n) {
    const std::uint8_t* m = mask.instance(n);
    for (int k = 1; k < probs.c(); ++k) {
      const double* p = probs.channel(n, k);
      double pi = 0.0, ps = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < hw; ++i) {
        ps += p[i];
        if (m[i] == k) {
          pi += p[i];
          ++count;
        }
      }
      inter[k - 1] += pi;
      psum[k - 1] += ps;
      tsum[k - 1] += static_cast<double>(count);
    }
  }
  double dice_sum = 0.0;
  DiceTerms local;
  local.num.resize(fg);
  local.den.resize(fg);
  for (int k = 0; k < fg; ++k) {
    local.num[k] = 2.0 * inter[k] + smooth;
    local.den[k] = psum[k] + tsum[k] + smooth;
    dice_sum += local.num[k] / local.den[k];
  }
  if (terms) *terms = local;
  const double loss = 1.0 - dice_sum / static_cast<double>(fg);
  ensure_finite(loss, "dice_loss");
  return loss;
}

// Analytic gradient of dice_loss with respect to the probabilities.
inline Tensor4 dice_loss_backward(const Tensor4& probs, const MaskBatch& mask,
                                  double smooth = 1e-5) {
  DiceTerms terms;
  dice_loss(probs, mask, smooth, &terms);
  const int fg = probs.c() - 1;
  Tensor4 grad(probs.n(), probs.c(), probs.h(), probs.w());
  const double inv_fg = 1.0 / static_cast<double>(fg);
  const std::size_t hw = probs.plane();
  for (int k = 1; k < probs.c(); ++k) {
    const double num = terms.num[k - 1];
    const double den = terms.den[k - 1];
    const double inv_den = 1.0 / den;
    // d(num/den)/dp = (2 * t - num/den) / den at each pixel.
    const double on_target = -inv_fg * (2.0 - num * inv_den) * inv_den;
    const double off_target = -inv_fg * (-num * inv_den) * inv_den;
    for (int n = 0; n < probs.n(); ++n) {
      const std::uint8_t* m = mask.instance(n);
      double* g = grad.channel(n, k);
      for (std::size_t i = 0; i < hw; ++i) {
        g[i] = (m[i] == k) ? on_target : off_target;
      }
    }
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Loss combiners.
// ---------------------------------------------------------------------------

// Auxiliary loss: consistency and alignment, traded off by the dynamic
// weight w in [0, 1):  L_aux = (1 - w) * L_cons + w * L_align.
inline double aux_loss(double l_cons, double l_align, double w) {
  if (!(w >= 0.0 && w < 1.0)) {
    throw ValueError("aux_loss: weight must lie in [0, 1), got " +
                     std::to_string(w));
  }
  return (1.0 - w) * l_cons + w * l_align;
}

// Full objective:  L = lambda * L_aux + (1 - lambda) * L_dice.
inline double total_loss(double l_aux, double l_dice, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ValueError("total_loss: lambda must lie in [0, 1], got " +
                     std::to_string(lambda));
  }
  return lambda * l_aux + (1.0 - lambda) * l_dice;
}

}  // namespace metastyle

#endif  // METASTYLE_LOSSES_HPP_
