// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef METASTYLE_METRICS_HPP_
#define METASTYLE_METRICS_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "metastyle/common.hpp"
#include "metastyle/tensor.hpp"

namespace metastyle {

// Single binary mask, laid out [h][w]; nonzero = foreground.
struct BinaryMask {
  int h = 0, w = 0;
  std::vector<std::uint8_t> v;

  BinaryMask() = default;
  BinaryMask(int h_, int w_) : h(h_), w(w_) {
    if (h_ <= 0 || w_ <= 0) {
      throw DimensionError("BinaryMask: dimensions must be positive");
    }
    v.assign(static_cast<std::size_t>(h_) * w_, 0);
  }

  std::uint8_t at(int y, int x) const {
    return v[static_cast<std::size_t>(y) * w + x];
  }
  void set(int y, int x, std::uint8_t val) {
    v[static_cast<std::size_t>(y) * w + x] = val;
  }
};

inline void check_same_shape(const BinaryMask& a, const BinaryMask& b,
                             const char* what) {
  if (a.h != b.h || a.w != b.w) {
    throw DimensionError(std::string(what) + ": mask shapes differ ([" +
                         std::to_string(a.h) + "," + std::to_string(a.w) +
                         "] vs [" + std::to_string(b.h) + "," +
                         std::to_string(b.w) + "])");
  }
}

// Dice overlap 2|P∩G| / (|P| + |G|). Two empty masks count as a perfect
// match (1.0).
inline double dice_coefficient(const BinaryMask& pred, const BinaryMask& gt) {
  check_same_shape(pred, gt, "dice_coefficient");
  std::size_t p = 0, g = 0, both = 0;
  for (std::size_t i = 0; i < pred.v.size(); ++i) {
    const bool a = pred.v[i] != 0;
    const bool b = gt.v[i] != 0;
    p += a;
    g += b;
    both += a && b;
  }
  if (p + g == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(p + g);
}

// Foreground pixels with at least one 4-neighbor that is background; pixels
// on the image border count their out-of-image side as background.
inline std::vector<std::pair<int, int>> boundary_pixels(
    const BinaryMask& mask) {
  std::vector<std::pair<int, int>> out;
  for (int y = 0; y < mask.h; ++y) {
    for (int x = 0; x < mask.w; ++x) {
      if (!mask.at(y, x)) continue;
      const bool edge =
          y == 0 || y == mask.h - 1 || x == 0 || x == mask.w - 1 ||
          !mask.at(y - 1, x) || !mask.at(y + 1, x) || !mask.at(y, x - 1) ||
          !mask.at(y, x + 1);
      if (edge) out.emplace_back(y, x);
    }
  }
  return out;
}

namespace internal {

// 1D squared Euclidean distance transform (lower envelope of parabolas).
// Inputs and outputs are exact integers stored in doubles, so the transform
// reproduces brute-force nearest-point searches bit for bit on pixel grids.
inline void edt_1d(const std::vector<double>& f, std::vector<double>* d,
                   std::vector<int>* v_buf, std::vector<double>* z_buf) {
  const int n = static_cast<int>(f.size());
  std::vector<int>& v = *v_buf;
  std::vector<double>& z = *z_buf;
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    if (f[q] == std::numeric_limits<double>::infinity()) continue;
    double s;
    while (true) {
      const int p = v[k];
      if (f[p] == std::numeric_limits<double>::infinity()) {
        // Everything so far was unreachable; replace the envelope head.
        --k;
        if (k < 0) break;
        continue;
      }
      s = ((f[q] + static_cast<double>(q) * q) -
           (f[p] + static_cast<double>(p) * p)) /
          (2.0 * (q - p));
      if (s <= z[k]) {
        --k;
        if (k < 0) break;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = k == 0 ? -std::numeric_limits<double>::infinity() : s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  d->assign(n, std::numeric_limits<double>::infinity());
  if (f[v[0]] == std::numeric_limits<double>::infinity()) return;
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < static_cast<double>(q)) ++j;
    const int p = v[j];
    const double dsq = static_cast<double>(q - p) * (q - p) + f[p];
    (*d)[q] = dsq;
  }
}

// 2D squared EDT of a point set: dist_sq(y, x) = min over sources of the
// squared Euclidean distance. Cells with no reachable source stay infinite.
inline std::vector<double> edt_2d(
    int h, int w, const std::vector<std::pair<int, int>>& sources) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> grid(static_cast<std::size_t>(h) * w, kInf);
  for (const auto& [y, x] : sources) {
    grid[static_cast<std::size_t>(y) * w + x] = 0.0;
  }
  std::vector<double> col(h), out_col(h), row(w), out_row(w);
  std::vector<int> v_buf;
  std::vector<double> z_buf;
  // Transform columns, then rows.
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) col[y] = grid[static_cast<std::size_t>(y) * w + x];
    edt_1d(col, &out_col, &v_buf, &z_buf);
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = out_col[y];
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) row[x] = grid[static_cast<std::size_t>(y) * w + x];
    edt_1d(row, &out_row, &v_buf, &z_buf);
    for (int x = 0; x < w; ++x) grid[static_cast<std::size_t>(y) * w + x] = out_row[x];
  }
  return grid;
}

}  // namespace internal

// Symmetric Hausdorff distance between the boundary point sets of two masks,
// in pixels. Conventions for degenerate inputs: both masks empty -> 0; one
// empty -> the image diagonal (worst possible separation).
inline double hausdorff_distance(const BinaryMask& a, const BinaryMask& b) {
  check_same_shape(a, b, "hausdorff_distance");
  const auto ba = boundary_pixels(a);
  const auto bb = boundary_pixels(b);
  if (ba.empty() && bb.empty()) return 0.0;
  if (ba.empty() || bb.empty()) {
    return std::sqrt(static_cast<double>(a.h) * a.h +
                     static_cast<double>(a.w) * a.w);
  }
  const auto dist_to_b = internal::edt_2d(a.h, a.w, bb);
  const auto dist_to_a = internal::edt_2d(a.h, a.w, ba);
  double worst_sq = 0.0;
  for (const auto& [y, x] : ba) {
    worst_sq = std::max(worst_sq, dist_to_b[static_cast<std::size_t>(y) * a.w + x]);
  }
  for (const auto& [y, x] : bb) {
    worst_sq = std::max(worst_sq, dist_to_a[static_cast<std::size_t>(y) * a.w + x]);
  }
  return std::sqrt(worst_sq);
}

// Extracts the binary mask of one class from a label mask.
inline BinaryMask class_mask(const MaskBatch& batch, int instance, int cls) {
  BinaryMask m(batch.h, batch.w);
  const std::uint8_t* src = batch.instance(instance);
  for (std::size_t i = 0; i < m.v.size(); ++i) {
    m.v[i] = src[i] == cls ? 1 : 0;
  }
  return m;
}

}  // namespace metastyle

#endif  // METASTYLE_METRICS_HPP_
