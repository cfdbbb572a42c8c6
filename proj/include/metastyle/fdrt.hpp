// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef METASTYLE_FDRT_HPP_
#define METASTYLE_FDRT_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "metastyle/backbone.hpp"
#include "metastyle/common.hpp"
#include "metastyle/dataset.hpp"
#include "metastyle/losses.hpp"
#include "metastyle/metrics.hpp"
#include "metastyle/optim.hpp"
#include "metastyle/tensor.hpp"

namespace metastyle {

// Per-domain validation score and the sampling proportion derived from it.
struct DomainScore {
  int domain_id = 0;
  double dice = 0.0;        // mean validation Dice, in [0, 1]
  double proportion = 0.0;  // sampling proportion, in [0, 1)
};

// Which logarithm the gap formula uses. Base 10 composes the natural
// exponential with a base-10 log (1 - exp(log10 m)); base e collapses the
// formula to 1 - m.
enum class GapLogBase { kTen, kE };

struct FDRTConfig {
  double eta = 0.01;  // retraining learning rate
  int epochs = 100;
  int batch_size = 8;
  int max_rounds = 3;
  double plateau_tol = 0.002;
  double lr_decay_factor = 0.5;
  int lr_decay_every = 20;
  GapLogBase log_base = GapLogBase::kTen;
  OptimizerKind optimizer = OptimizerKind::kAdam;

  void validate() const {
    if (!(eta > 0.0)) throw ConfigError("FDRTConfig: eta must be > 0");
    if (epochs < 1) throw ConfigError("FDRTConfig: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("FDRTConfig: batch_size must be >= 1");
    if (max_rounds < 1) throw ConfigError("FDRTConfig: max_rounds must be >= 1");
    if (!(plateau_tol >= 0.0)) {
      throw ConfigError("FDRTConfig: plateau_tol must be >= 0");
    }
  }
};

// ---------------------------------------------------------------------------
// Scoring.
// ---------------------------------------------------------------------------

// Argmax class per pixel.
inline MaskBatch predict_labels(const Tensor4& probs) {
  MaskBatch out(probs.n(), probs.h(), probs.w());
  const std::size_t hw = probs.plane();
  for (int n = 0; n < probs.n(); ++n) {
    std::uint8_t* dst = out.instance(n);
    for (std::size_t i = 0; i < hw; ++i) {
      int best = 0;
      double bv = probs.channel(n, 0)[i];
      for (int c = 1; c < probs.c(); ++c) {
        const double v = probs.channel(n, c)[i];
        if (v > bv) {
          bv = v;
          best = c;
        }
      }
      dst[i] = static_cast<std::uint8_t>(best);
    }
  }
  return out;
}

// Mean over instances of the foreground-class-mean Dice between predicted
// and reference label masks.
inline double mean_dice(const MaskBatch& pred, const MaskBatch& gt,
                        int num_classes) {
  if (pred.n != gt.n || pred.h != gt.h || pred.w != gt.w) {
    throw DimensionError("mean_dice: mask batch shapes differ");
  }
  if (num_classes < 2) throw ValueError("mean_dice: need at least 2 classes");
  double total = 0.0;
  for (int i = 0; i < pred.n; ++i) {
    double per_image = 0.0;
    for (int k = 1; k < num_classes; ++k) {
      per_image += dice_coefficient(class_mask(pred, i, k),
                                    class_mask(gt, i, k));
    }
    total += per_image / static_cast<double>(num_classes - 1);
  }
  return total / static_cast<double>(pred.n);
}

// Runs the model over a dataset in evaluation batches and returns the mean
// Dice of the argmax predictions.
inline double evaluate_dataset(const SegModel& model, const DomainDataset& ds,
                               int batch_size = 8) {
  ds.validate("evaluate_dataset");
  double total = 0.0;
  int done = 0;
  while (done < ds.size()) {
    const int take = std::min(batch_size, ds.size() - done);
    std::vector<std::size_t> idx(take);
    for (int i = 0; i < take; ++i) idx[i] = static_cast<std::size_t>(done + i);
    DomainDataset chunk = ds.take(idx);
    const ForwardResult fwd = model.forward(chunk.images);
    const MaskBatch pred = predict_labels(fwd.probs);
    total += mean_dice(pred, chunk.masks, ds.num_classes) * take;
    done += take;
  }
  return total / static_cast<double>(ds.size());
}

// Per-domain mean validation Dice (proportions left at 0; calculate_gap
// fills them).
inline std::vector<DomainScore> evaluate_domains(
    const SegModel& model, const std::vector<DomainDataset>& validation_sets,
    int batch_size = 8) {
  if (validation_sets.empty()) {
    throw ConfigError("evaluate_domains: no validation sets");
  }
  std::vector<DomainScore> scores;
  scores.reserve(validation_sets.size());
  for (const auto& ds : validation_sets) {
    DomainScore s;
    s.domain_id = ds.domain_id;
    s.dice = evaluate_dataset(model, ds, batch_size);
    scores.push_back(s);
  }
  return scores;
}

// ---------------------------------------------------------------------------
// Gap / sampling proportion:  proportion = 1 - exp(lg(clamp(m, 1e-3, 1)))
// with lg = log10 (default) or ln (which collapses to 1 - m). Monotone
// decreasing in m; exactly 0 at m = 1.
// ---------------------------------------------------------------------------

inline double gap_from_dice(double dice, GapLogBase base = GapLogBase::kTen) {
  ensure_finite(dice, "gap_from_dice: dice");
  const double m = std::min(1.0, std::max(1e-3, dice));
  const double lg = base == GapLogBase::kTen ? std::log10(m) : std::log(m);
  return -std::expm1(lg);
}

// Fills and returns the proportions for a score list.
inline std::vector<double> calculate_gap(std::vector<DomainScore>* scores,
                                         GapLogBase base = GapLogBase::kTen) {
  std::vector<double> gaps;
  gaps.reserve(scores->size());
  for (auto& s : *scores) {
    s.proportion = gap_from_dice(s.dice, base);
    gaps.push_back(s.proportion);
  }
  return gaps;
}

// ---------------------------------------------------------------------------
// Weighted retraining: every epoch draws ceil(G[t] * |D[t]|) samples without
// replacement from each domain, shuffles the union into batches, and trains
// with the segmentation loss at eta under the step-decay schedule.
// ---------------------------------------------------------------------------

struct RetrainStats {
  // Samples drawn per domain per epoch.
  std::vector<int> quota;
  int total_per_epoch = 0;
};

inline int retrain_quota(double proportion, int domain_size) {
  if (!(proportion >= 0.0 && proportion < 1.0)) {
    throw ValueError("retrain_quota: proportion must lie in [0, 1)");
  }
  const int q = static_cast<int>(
      std::ceil(proportion * static_cast<double>(domain_size)));
  return std::min(q, domain_size);
}

inline SegModel fdrt_retrain(const SegModel& model,
                             const std::vector<DomainDataset>& datasets,
                             const std::vector<double>& proportions,
                             const FDRTConfig& cfg, std::uint64_t seed,
                             RetrainStats* stats = nullptr) {
  cfg.validate();
  if (datasets.size() != proportions.size()) {
    throw ConfigError("fdrt_retrain: " + std::to_string(datasets.size()) +
                      " datasets but " + std::to_string(proportions.size()) +
                      " proportions");
  }
  RetrainStats local;
  local.quota.resize(datasets.size());
  for (std::size_t t = 0; t < datasets.size(); ++t) {
    local.quota[t] = retrain_quota(proportions[t], datasets[t].size());
    local.total_per_epoch += local.quota[t];
  }
  if (stats) *stats = local;
  if (local.total_per_epoch == 0) {
    return model;  // nothing to retrain on
  }

  SegModel out = model;
  Adam adam;
  Rng rng(derive_seed(seed, Stream::kFdrt));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr =
        decayed_lr(cfg.eta, epoch, cfg.lr_decay_factor, cfg.lr_decay_every);
    // Fresh per-epoch draw from every domain, then one shuffled union.
    std::vector<std::pair<int, std::size_t>> pool;  // (domain, index)
    for (std::size_t t = 0; t < datasets.size(); ++t) {
      if (local.quota[t] == 0) continue;
      const auto picks = rng.sample_without_replacement(
          static_cast<std::size_t>(datasets[t].size()),
          static_cast<std::size_t>(local.quota[t]));
      for (std::size_t p : picks) pool.emplace_back(static_cast<int>(t), p);
    }
    rng.shuffle(pool);
    std::size_t done = 0;
    while (done < pool.size()) {
      const std::size_t take =
          std::min<std::size_t>(cfg.batch_size, pool.size() - done);
      // Assemble a mixed-domain batch.
      const auto& d0 = datasets[pool[done].first];
      Tensor4 images(static_cast<int>(take), 1, d0.images.h(), d0.images.w());
      MaskBatch masks(static_cast<int>(take), d0.masks.h, d0.masks.w);
      for (std::size_t i = 0; i < take; ++i) {
        const auto& [dom, idx] = pool[done + i];
        images.copy_instance_from(datasets[dom].images,
                                  static_cast<int>(idx),
                                  static_cast<int>(i));
        std::copy(datasets[dom].masks.instance(static_cast<int>(idx)),
                  datasets[dom].masks.instance(static_cast<int>(idx)) +
                      datasets[dom].masks.plane(),
                  masks.instance(static_cast<int>(i)));
      }
      done += take;

      BackboneTrace trace;
      out.forward(images, std::nullopt, &trace);
      Tensor4 d_probs = dice_loss_backward(trace.probs, masks);
      Gradients grads;
      grads.init_like(out.params());
      out.backward(trace, d_probs, nullptr, nullptr, &grads);
      if (!grads.is_finite()) {
        throw NumericError("fdrt_retrain: non-finite gradients");
      }
      if (cfg.optimizer == OptimizerKind::kAdam) {
        adam.step(&out, grads, lr);
      } else {
        out = out.param_update(grads, lr);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full feedback loop: evaluate -> gaps -> weighted retrain, alternating with
// optional meta-learning phases, stopping on a mean-Dice plateau or the round
// cap, and returning the best-validation parameters seen (never worse than
// the input model on mean validation Dice).
// ---------------------------------------------------------------------------

struct FdrtRoundRecord {
  int round = 0;
  std::vector<DomainScore> scores;  // pre-retrain scores with proportions
  std::vector<int> samples;         // per-domain per-epoch draw
  double mean_dice_before = 0.0;
  double mean_dice_after = 0.0;
};

inline double mean_score(const std::vector<DomainScore>& scores) {
  double s = 0.0;
  for (const auto& x : scores) s += x.dice;
  return s / static_cast<double>(scores.size());
}

inline SegModel run_fdrt(
    const SegModel& model, const std::vector<DomainDataset>& train_sets,
    const std::vector<DomainDataset>& val_sets, const FDRTConfig& cfg,
    std::uint64_t seed,
    const std::function<void(SegModel*)>& meta_phase = nullptr,
    std::vector<FdrtRoundRecord>* records = nullptr) {
  cfg.validate();
  if (train_sets.empty() || val_sets.empty()) {
    throw ConfigError("run_fdrt: empty dataset lists");
  }
  if (train_sets.size() != val_sets.size()) {
    throw ConfigError("run_fdrt: train/validation domain counts differ");
  }

  SegModel current = model;
  SegModel best = model;
  auto initial_scores = evaluate_domains(current, val_sets, cfg.batch_size);
  double best_dice = mean_score(initial_scores);
  double prev_dice = best_dice;

  for (int round = 1; round <= cfg.max_rounds; ++round) {
    // Alternate with a meta-learning phase between retraining rounds.
    if (round > 1 && meta_phase) {
      meta_phase(&current);
    }
    auto scores = round == 1 ? initial_scores
                             : evaluate_domains(current, val_sets,
                                                cfg.batch_size);
    const double before = mean_score(scores);
    if (before > best_dice) {
      best_dice = before;
      best = current;
    }
    calculate_gap(&scores, cfg.log_base);

    FdrtRoundRecord rec;
    rec.round = round;
    rec.mean_dice_before = before;

    bool all_zero = true;
    std::vector<double> proportions;
    proportions.reserve(scores.size());
    for (const auto& s : scores) {
      proportions.push_back(s.proportion);
      if (s.proportion > 0.0) all_zero = false;
    }
    rec.scores = scores;
    if (all_zero) {
      // Perfect-validation model: nothing to feed back.
      rec.mean_dice_after = before;
      rec.samples.assign(scores.size(), 0);
      if (records) records->push_back(std::move(rec));
      break;
    }

    RetrainStats stats;
    current = fdrt_retrain(current, train_sets, proportions, cfg,
                           derive_seed(seed, Stream::kFdrt,
                                       static_cast<std::uint64_t>(round)),
                           &stats);
    rec.samples = stats.quota;

    const auto post = evaluate_domains(current, val_sets, cfg.batch_size);
    const double after = mean_score(post);
    rec.mean_dice_after = after;
    if (records) records->push_back(std::move(rec));

    if (after > best_dice) {
      best_dice = after;
      best = current;
    }
    if (after - prev_dice < cfg.plateau_tol) {
      break;  // plateau
    }
    prev_dice = after;
  }
  return best;
}

}  // namespace metastyle

#endif  // METASTYLE_FDRT_HPP_
