// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef METASTYLE_DATASET_HPP_
#define METASTYLE_DATASET_HPP_

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "metastyle/common.hpp"
#include "metastyle/tensor.hpp"

namespace metastyle {

// A set of single-channel images with integer label masks, all sharing one
// style domain. Images are N x 1 x H x W in [0, 1]; masks are N x H x W with
// labels in [0, num_classes).
struct DomainDataset {
  int domain_id = 0;
  std::string name;
  Tensor4 images;
  MaskBatch masks;
  int num_classes = 2;

  int size() const { return images.n(); }

  void validate(const char* what) const {
    if (images.empty()) {
      throw DataError(std::string(what) + ": dataset '" + name + "' is empty");
    }
    if (images.c() != 1) {
      throw DataError(std::string(what) + ": images must be single-channel");
    }
    if (masks.n != images.n() || masks.h != images.h() ||
        masks.w != images.w()) {
      throw DataError(std::string(what) + ": image/mask shapes disagree in '" +
                      name + "'");
    }
    const double* p = images.data();
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (!(p[i] >= 0.0 && p[i] <= 1.0)) {
        throw DataError(std::string(what) + ": intensity outside [0,1] in '" +
                        name + "'");
      }
    }
    for (std::uint8_t l : masks.labels) {
      if (static_cast<int>(l) >= num_classes) {
        throw DataError(std::string(what) + ": label " + std::to_string(l) +
                        " >= num_classes " + std::to_string(num_classes) +
                        " in '" + name + "'");
      }
    }
  }

  // Copies the listed instances into a new dataset (order preserved).
  DomainDataset take(const std::vector<std::size_t>& indices) const {
    if (indices.empty()) {
      throw ValueError("DomainDataset::take: empty index list");
    }
    DomainDataset out;
    out.domain_id = domain_id;
    out.name = name;
    out.num_classes = num_classes;
    out.images = Tensor4(static_cast<int>(indices.size()), 1, images.h(),
                         images.w());
    out.masks = MaskBatch(static_cast<int>(indices.size()), masks.h, masks.w);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const std::size_t src = indices[i];
      if (src >= static_cast<std::size_t>(images.n())) {
        throw ValueError("DomainDataset::take: index out of range");
      }
      out.images.copy_instance_from(images, static_cast<int>(src),
                                    static_cast<int>(i));
      std::copy(masks.instance(static_cast<int>(src)),
                masks.instance(static_cast<int>(src)) + masks.plane(),
                out.masks.instance(static_cast<int>(i)));
    }
    return out;
  }
};

struct SplitSpec {
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
};

// Seed-deterministic disjoint, exhaustive train/val split with
// |train| = round(train_fraction * n).
inline std::pair<DomainDataset, DomainDataset> split(const DomainDataset& ds,
                                                     const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ConfigError("split: train_fraction must lie in (0, 1), got " +
                      std::to_string(spec.train_fraction));
  }
  const int n = ds.size();
  if (n < 2) {
    throw ConfigError("split: need at least 2 instances, got " +
                      std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  for (int i = 0; i < n; ++i) order[i] = static_cast<std::size_t>(i);
  Rng rng(derive_seed(spec.seed, Stream::kSplit));
  rng.shuffle(order);
  int n_train = static_cast<int>(std::llround(spec.train_fraction * n));
  // Both sides must stay nonempty.
  n_train = std::max(1, std::min(n - 1, n_train));
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + n_train);
  std::vector<std::size_t> val_idx(order.begin() + n_train, order.end());
  return {ds.take(train_idx), ds.take(val_idx)};
}

}  // namespace metastyle

#endif  // METASTYLE_DATASET_HPP_
