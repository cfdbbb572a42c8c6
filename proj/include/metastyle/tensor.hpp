// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef METASTYLE_TENSOR_HPP_
#define METASTYLE_TENSOR_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "metastyle/common.hpp"

namespace metastyle {

// Dense batch-major float tensor, laid out [n][c][h][w], contiguous doubles.
// This is the only array type the library computes on; images, feature maps
// and per-pixel class probabilities all use it.
class Tensor4 {
 public:
  Tensor4() = default;

  Tensor4(int n, int c, int h, int w) : n_(n), c_(c), h_(h), w_(w) {
    if (n <= 0 || c <= 0 || h <= 0 || w <= 0) {
      throw DimensionError("Tensor4: all dimensions must be positive, got " +
                           shape_string(n, c, h, w));
    }
    data_.assign(static_cast<std::size_t>(n) * c * h * w, 0.0);
  }

  int n() const { return n_; }
  int c() const { return c_; }
  int h() const { return h_; }
  int w() const { return w_; }
  std::size_t size() const { return data_.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(h_) * w_; }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  // Pointer to the start of channel c of instance n.
  double* channel(int n, int c) {
    return data_.data() + (static_cast<std::size_t>(n) * c_ + c) * plane();
  }
  const double* channel(int n, int c) const {
    return data_.data() + (static_cast<std::size_t>(n) * c_ + c) * plane();
  }

  double* instance(int n) { return channel(n, 0); }
  const double* instance(int n) const { return channel(n, 0); }

  double& at(int n, int c, int y, int x) {
    return data_[((static_cast<std::size_t>(n) * c_ + c) * h_ + y) * w_ + x];
  }
  double at(int n, int c, int y, int x) const {
    return data_[((static_cast<std::size_t>(n) * c_ + c) * h_ + y) * w_ + x];
  }

  bool same_shape(const Tensor4& o) const {
    return n_ == o.n_ && c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
  }

  std::string shape_string() const { return shape_string(n_, c_, h_, w_); }

  static std::string shape_string(int n, int c, int h, int w) {
    return "[" + std::to_string(n) + "," + std::to_string(c) + "," +
           std::to_string(h) + "," + std::to_string(w) + "]";
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool is_finite() const { return all_finite(data_.data(), data_.size()); }

  void require_finite(const char* what) const {
    if (!is_finite()) {
      throw NumericError(std::string(what) + ": tensor " + shape_string() +
                         " contains NaN or Inf");
    }
  }

  // Copies instance src_n of src into instance dst_n of *this.
  void copy_instance_from(const Tensor4& src, int src_n, int dst_n) {
    if (src.c_ != c_ || src.h_ != h_ || src.w_ != w_) {
      throw DimensionError("copy_instance_from: shape mismatch " +
                           shape_string() + " vs " + src.shape_string());
    }
    std::size_t len = static_cast<std::size_t>(c_) * plane();
    std::copy(src.instance(src_n), src.instance(src_n) + len,
              instance(dst_n));
  }

 private:
  int n_ = 0, c_ = 0, h_ = 0, w_ = 0;
  std::vector<double> data_;
};

// Batch of integer label masks, laid out [n][h][w]. Labels are small class
// ids (0 = background).
struct MaskBatch {
  int n = 0, h = 0, w = 0;
  std::vector<std::uint8_t> labels;

  MaskBatch() = default;
  MaskBatch(int n_, int h_, int w_) : n(n_), h(h_), w(w_) {
    if (n_ <= 0 || h_ <= 0 || w_ <= 0) {
      throw DimensionError("MaskBatch: all dimensions must be positive");
    }
    labels.assign(static_cast<std::size_t>(n_) * h_ * w_, 0);
  }

  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }

  std::uint8_t* instance(int i) { return labels.data() + i * plane(); }
  const std::uint8_t* instance(int i) const {
    return labels.data() + i * plane();
  }

  std::uint8_t& at(int i, int y, int x) {
    return labels[(static_cast<std::size_t>(i) * h + y) * w + x];
  }
  std::uint8_t at(int i, int y, int x) const {
    return labels[(static_cast<std::size_t>(i) * h + y) * w + x];
  }

  // Highest label value present plus one (0 for an empty batch).
  int max_label_plus_one() const {
    int m = -1;
    for (std::uint8_t v : labels) m = std::max<int>(m, v);
    return m + 1;
  }
};

}  // namespace metastyle

#endif  // METASTYLE_TENSOR_HPP_
