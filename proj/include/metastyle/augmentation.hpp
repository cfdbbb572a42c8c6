// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef METASTYLE_AUGMENTATION_HPP_
#define METASTYLE_AUGMENTATION_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "metastyle/common.hpp"
#include "metastyle/dataset.hpp"
#include "metastyle/tensor.hpp"

namespace metastyle {

// Monotone-in-expectation intensity remapping curve on [0, 1], built from a
// cubic Bezier whose four control points sit at fixed abscissae
// t = {0, 1/3, 2/3, 1}. Because the abscissae are affine in t, the curve's
// x-coordinate equals the parameter, so sampling x(u), y(u) directly yields
// the graph of a function y(x).
class BezierCurve {
 public:
  // Control ordinates after blending toward the identity line.
  std::array<double, 4> y{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
  // Whether the raw draw was order-reversed before blending (so the curve
  // tends to swap dark and bright ends). Recorded for reproducibility.
  bool inverted = false;

  // Value of the curve at v in [0, 1] (exact cubic, no table).
  double value(double v) const {
    const double u = v;
    const double s = 1.0 - u;
    return s * s * s * y[0] + 3.0 * s * s * u * y[1] + 3.0 * s * u * u * y[2] +
           u * u * u * y[3];
  }
};

struct CurveSampler {
  // Blend factor between raw random ordinates (1) and the identity line (0).
  double strength = 0.9;
  // Probability of flipping the curve so dark and bright ends swap.
  double invert_prob = 0.5;
};

// Draws a random intensity curve. Raw control ordinates are uniform in
// [0, 1]; an inversion draw reverses their order, swapping which raw values
// land on the dark and bright ends; the ordinates are then blended toward
// the identity line by `strength`. Because the blend target is always the
// identity, strength 0 yields exactly the identity curve regardless of the
// inversion draw.
inline BezierCurve sample_curve(Rng& rng, const CurveSampler& cfg) {
  if (!(cfg.strength >= 0.0 && cfg.strength <= 1.0)) {
    throw ValueError("sample_curve: strength must lie in [0, 1], got " +
                     std::to_string(cfg.strength));
  }
  std::array<double, 4> raw;
  for (double& r : raw) r = rng.uniform();
  const bool invert = rng.uniform() < cfg.invert_prob;
  if (invert) std::reverse(raw.begin(), raw.end());
  static constexpr std::array<double, 4> kIdentity{0.0, 1.0 / 3.0, 2.0 / 3.0,
                                                   1.0};
  BezierCurve curve;
  curve.inverted = invert;
  for (int i = 0; i < 4; ++i) {
    curve.y[i] = cfg.strength * raw[i] + (1.0 - cfg.strength) * kIdentity[i];
  }
  return curve;
}

// Tabulated curve for fast application: 1024 knots with linear interpolation
// between them. The identity curve tabulates to the exact identity.
class CurveLut {
 public:
  static constexpr int kBins = 1024;

  explicit CurveLut(const BezierCurve& curve) {
    for (int i = 0; i < kBins; ++i) {
      table_[i] = curve.value(static_cast<double>(i) / (kBins - 1));
    }
  }

  double map(double v) const {
    const double pos = v * (kBins - 1);
    int i = static_cast<int>(pos);
    if (i >= kBins - 1) return table_[kBins - 1];
    const double frac = pos - i;
    return table_[i] + frac * (table_[i + 1] - table_[i]);
  }

 private:
  std::array<double, kBins> table_;
};

// Applies an intensity curve to a batch of images (values must lie in
// [0, 1]). Masks are untouched by design: augmentation changes appearance
// only, never geometry.
inline Tensor4 apply_bezier(const Tensor4& images, const BezierCurve& curve) {
  images.require_finite("apply_bezier");
  const double* src = images.data();
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (src[i] < 0.0 || src[i] > 1.0) {
      throw DataError("apply_bezier: intensity " + std::to_string(src[i]) +
                      " outside [0, 1]");
    }
  }
  const CurveLut lut(curve);
  Tensor4 out(images.n(), images.c(), images.h(), images.w());
  double* dst = out.data();
  for (std::size_t i = 0; i < images.size(); ++i) {
    // Clamp away sub-ulp rounding excursions so the [0, 1] output contract
    // holds exactly for downstream range validation.
    dst[i] = clamp01(lut.map(src[i]));
  }
  return out;
}

// Builds `count` re-styled copies of a source dataset, one fresh curve per
// copy (styles are domain-level, not per image). Masks are carried over
// unchanged and domain ids continue sequentially after the source id. The
// sampled curves are optionally returned so other splits of the same source
// can be transformed consistently.
inline std::vector<DomainDataset> build_augmented_domains(
    const DomainDataset& src, int count, Rng& rng,
    const CurveSampler& sampler = CurveSampler{},
    std::vector<BezierCurve>* curves_out = nullptr) {
  if (count < 1) {
    throw ConfigError("build_augmented_domains: need at least 1 domain, got " +
                      std::to_string(count));
  }
  src.validate("build_augmented_domains");
  std::vector<DomainDataset> out;
  out.reserve(count);
  if (curves_out) curves_out->clear();
  for (int a = 0; a < count; ++a) {
    const BezierCurve curve = sample_curve(rng, sampler);
    DomainDataset d;
    d.domain_id = src.domain_id + 1 + a;
    d.name = src.name + "+aug" + std::to_string(a + 1);
    d.images = apply_bezier(src.images, curve);
    d.masks = src.masks;
    d.num_classes = src.num_classes;
    if (curves_out) curves_out->push_back(curve);
    out.push_back(std::move(d));
  }
  return out;
}

// Applies an already-sampled curve to another split of the same source (for
// example the validation images), producing the matching re-styled dataset.
inline DomainDataset restyle_dataset(const DomainDataset& src,
                                     const BezierCurve& curve, int domain_id,
                                     const std::string& name) {
  src.validate("restyle_dataset");
  DomainDataset d;
  d.domain_id = domain_id;
  d.name = name;
  d.images = apply_bezier(src.images, curve);
  d.masks = src.masks;
  d.num_classes = src.num_classes;
  return d;
}

}  // namespace metastyle

#endif  // METASTYLE_AUGMENTATION_HPP_
