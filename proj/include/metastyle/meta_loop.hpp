// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef METASTYLE_META_LOOP_HPP_
#define METASTYLE_META_LOOP_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metastyle/backbone.hpp"
#include "metastyle/common.hpp"
#include "metastyle/dataset.hpp"
#include "metastyle/losses.hpp"
#include "metastyle/optim.hpp"
#include "metastyle/style_bank.hpp"
#include "metastyle/style_stats.hpp"
#include "metastyle/tensor.hpp"

namespace metastyle {

// How the query-phase (meta-test) update combines with the support-phase
// result:
//   kCarryForward: single parameter timeline - the beta update continues from
//     the support-updated parameters (theta <- theta' - beta * grad(theta')).
//   kLiteral: first-order outer update - query gradients are evaluated at the
//     support-updated parameters but applied to the parameters the domain
//     visit started from.
enum class MetaUpdateMode { kCarryForward, kLiteral };

// Where style statistics are measured: the shallow feature layer (hook), or
// the raw input images.
enum class StyleSource { kFeature, kInput };

struct MetaConfig {
  double gamma = 0.01;        // meta-train (support) learning rate
  double beta = 0.005;        // meta-test (query) learning rate
  int epochs = 200;
  int batch_size = 8;
  double lr_decay_factor = 0.5;
  int lr_decay_every = 20;
  StyleRecallConfig recall;   // alpha and epsilon for style mixing/injection
  double lambda = 0.5;        // auxiliary-vs-dice tradeoff
  double margin = 1.0;        // alignment margin
  double sensitivity = 10.0;  // style-shift sensitivity
  bool use_style_recall = true;  // bank recall + injection (off = no mixing)
  bool use_align = true;
  bool use_cons = true;
  MetaUpdateMode update_mode = MetaUpdateMode::kCarryForward;
  StyleSource style_source = StyleSource::kFeature;
  // Cap on episodes per domain per epoch; 0 means every batch.
  int steps_per_domain = 0;

  void validate() const {
    if (!(gamma >= 0.0) || !(beta >= 0.0)) {
      throw ConfigError("MetaConfig: learning rates must be non-negative");
    }
    if (epochs < 1) throw ConfigError("MetaConfig: epochs must be >= 1");
    if (batch_size < 1) {
      throw ConfigError("MetaConfig: batch_size must be >= 1");
    }
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
      throw ConfigError("MetaConfig: lambda must lie in [0, 1]");
    }
    if (!(margin > 0.0)) throw ConfigError("MetaConfig: margin must be > 0");
    if (!(sensitivity > 0.0)) {
      throw ConfigError("MetaConfig: sensitivity must be > 0");
    }
    if (!(recall.alpha >= 0.0 && recall.alpha <= 1.0)) {
      throw ConfigError("MetaConfig: alpha must lie in [0, 1]");
    }
    if (!(recall.epsilon > 0.0)) {
      throw ConfigError("MetaConfig: epsilon must be > 0");
    }
    if (steps_per_domain < 0) {
      throw ConfigError("MetaConfig: steps_per_domain must be >= 0");
    }
  }
};

// One support/query episode: a support batch from domain t, the source-domain
// batch with the same sample indices (the Eq.-pairing counterpart), a query
// batch from the next domain, and the recalled style (when the bank had one).
struct Episode {
  Tensor4 support_images;
  MaskBatch support_masks;
  Tensor4 source_images;
  MaskBatch source_masks;
  Tensor4 query_images;
  MaskBatch query_masks;
  int t = 0;
  std::optional<StyleStats> recalled;
  // True when the support batch IS the source batch (t = 0), letting the
  // step reuse one forward pass.
  bool support_is_source = false;
};

// Loss values of one meta-train step (pre-update model).
struct StepRecord {
  double l_total = 0.0;
  double l_dice = 0.0;
  double l_align = 0.0;
  double l_cons = 0.0;
  double w = 0.0;
  double delta_style = 0.0;
};

namespace internal {

// Builds the Eq.-style pair batch between source and support embeddings:
// same-index pairs are positive, all cross-index pairs negative.
inline PairBatch make_pairs(const EmbeddingBatch& src,
                            const EmbeddingBatch& sup) {
  PairBatch pairs;
  const int b = static_cast<int>(src.v.size());
  for (int i = 0; i < b; ++i) {
    for (int j = 0; j < b; ++j) {
      pairs.a.push_back(src.v[i]);
      pairs.b.push_back(sup.v[j]);
      pairs.label.push_back(i == j ? 1 : 0);
    }
  }
  return pairs;
}

// Scatters pair-batch gradients back onto per-instance embedding gradients.
inline void scatter_pair_grads(const std::vector<std::vector<double>>& d_a,
                               const std::vector<std::vector<double>>& d_b,
                               int batch, int dim,
                               std::vector<std::vector<double>>* d_src,
                               std::vector<std::vector<double>>* d_sup) {
  d_src->assign(batch, std::vector<double>(dim, 0.0));
  d_sup->assign(batch, std::vector<double>(dim, 0.0));
  std::size_t k = 0;
  for (int i = 0; i < batch; ++i) {
    for (int j = 0; j < batch; ++j, ++k) {
      for (int c = 0; c < dim; ++c) {
        (*d_src)[i][c] += d_a[k][c];
        (*d_sup)[j][c] += d_b[k][c];
      }
    }
  }
}

}  // namespace internal

// ---------------------------------------------------------------------------
// Meta-train step (support phase). Runs the source batch and its
// augmented-domain counterpart through the model, injects recalled style into
// the support pass when available, assembles
//   L_total = lambda * ((1-w) L_cons + w L_align) + (1-lambda) * L_dice
// and returns theta' = theta - gamma * grad. The dynamic weight w and the
// mixed statistics are treated as constants of the step (no gradient flows
// through them). When `support_stats_out` is given it receives the raw
// support style statistics (what the bank should remember for this domain).
// ---------------------------------------------------------------------------
inline SegModel meta_train_step(const SegModel& model, const Episode& ep,
                                const MetaConfig& cfg, double lr,
                                StepRecord* record = nullptr,
                                StyleStats* support_stats_out = nullptr) {
  cfg.validate();
  const bool input_style = cfg.style_source == StyleSource::kInput;

  // --- Source pass (never injected) ---
  BackboneTrace trace_src;
  const ForwardResult src = model.forward(ep.source_images, std::nullopt,
                                          &trace_src);
  const StyleStats stats_src =
      input_style ? compute_style_stats(ep.source_images)
                  : compute_style_stats(trace_src.enc_out[0]);

  // --- Support pass (style-injected when a recall is available) ---
  StyleStats stats_cur;
  BackboneTrace trace_sup_storage;
  BackboneTrace* trace_sup = &trace_sup_storage;
  const Tensor4* support_input = &ep.support_images;
  Tensor4 transformed_input;
  const bool want_injection = cfg.use_style_recall && ep.recalled.has_value();

  if (ep.support_is_source && !want_injection) {
    trace_sup = &trace_src;
    stats_cur = stats_src;
  } else if (input_style) {
    stats_cur = compute_style_stats(ep.support_images);
    if (want_injection) {
      // Input-level recall: re-style the images themselves; downstream the
      // pass is a plain forward (the transform has no upstream parameters).
      const StyleStats mixed =
          mix_styles(stats_cur, *ep.recalled, cfg.recall.alpha);
      transformed_input =
          recall_normalize(ep.support_images, mixed, cfg.recall);
      // Network inputs live in [0,1]; recall output may exceed the range
      // slightly, which the convolutions tolerate.
      support_input = &transformed_input;
    }
    (void)model.forward(*support_input, std::nullopt, trace_sup);
  } else {
    SegModel::OverrideProvider provider =
        [&](const Tensor4& raw_hook) -> std::optional<StyleOverride> {
      stats_cur = compute_style_stats(raw_hook);
      if (!want_injection) return std::nullopt;
      StyleOverride ov;
      ov.stats = mix_styles(stats_cur, *ep.recalled, cfg.recall.alpha);
      ov.cfg = cfg.recall;
      return ov;
    };
    (void)model.forward(ep.support_images, provider, trace_sup);
  }
  if (support_stats_out) *support_stats_out = stats_cur;

  const bool single_pass = trace_sup == &trace_src;
  const Tensor4& probs_src = trace_src.probs;
  const Tensor4& probs_sup = trace_sup->probs;

  // --- Style shift and dynamic weight (constants for this step) ---
  StyleStats stats_aug;
  if (trace_sup->injected) {
    stats_aug = compute_style_stats(trace_sup->hook_post);
  } else if (input_style && want_injection) {
    stats_aug = compute_style_stats(*support_input);
  } else {
    stats_aug = stats_cur;
  }
  const double delta = style_delta(stats_src, stats_aug, cfg.sensitivity);
  const double w = dynamic_weight(delta);

  // --- Losses ---
  double l_dice = 0.0, l_cons = 0.0, l_align = 0.0;
  Tensor4 d_probs_src(probs_src.n(), probs_src.c(), probs_src.h(),
                      probs_src.w());
  Tensor4 d_probs_sup(probs_sup.n(), probs_sup.c(), probs_sup.h(),
                      probs_sup.w());

  const double dice_share = single_pass ? 1.0 : 0.5;
  const double dice_coeff = (1.0 - cfg.lambda) * dice_share;
  {
    l_dice = dice_loss(probs_src, ep.source_masks) * dice_share;
    Tensor4 g = dice_loss_backward(probs_src, ep.source_masks);
    double* dst = d_probs_src.data();
    const double* s = g.data();
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += dice_coeff * s[i];
  }
  if (!single_pass) {
    l_dice += dice_loss(probs_sup, ep.support_masks) * dice_share;
    Tensor4 g = dice_loss_backward(probs_sup, ep.support_masks);
    double* dst = d_probs_sup.data();
    const double* s = g.data();
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += dice_coeff * s[i];
  }

  if (cfg.use_cons) {
    l_cons = single_pass ? 0.0 : consistency_loss(probs_src, probs_sup);
    if (!single_pass) {
      Tensor4 gp, gq;
      consistency_loss_backward(probs_src, probs_sup, &gp, &gq);
      const double coeff = cfg.lambda * (1.0 - w);
      double* a = d_probs_src.data();
      double* b = d_probs_sup.data();
      for (std::size_t i = 0; i < gp.size(); ++i) {
        a[i] += coeff * gp.data()[i];
        b[i] += coeff * gq.data()[i];
      }
    }
  }

  Tensor4 d_hook_src, d_hook_sup;
  if (cfg.use_align) {
    const EmbeddingBatch emb_src = feature_embed(trace_src.enc_out[0]);
    const EmbeddingBatch emb_sup = feature_embed(trace_sup->enc_out[0]);
    const PairBatch pairs = internal::make_pairs(emb_src, emb_sup);
    l_align = align_loss(pairs, cfg.margin);
    const double coeff = cfg.lambda * w;
    if (coeff > 0.0) {
      std::vector<std::vector<double>> d_a, d_b, d_emb_src, d_emb_sup;
      align_loss_backward(pairs, cfg.margin, &d_a, &d_b);
      internal::scatter_pair_grads(d_a, d_b,
                                   static_cast<int>(emb_src.v.size()),
                                   emb_src.dim, &d_emb_src, &d_emb_sup);
      for (auto& row : d_emb_src) {
        for (double& v : row) v *= coeff;
      }
      for (auto& row : d_emb_sup) {
        for (double& v : row) v *= coeff;
      }
      d_hook_src = feature_embed_backward(trace_src.enc_out[0], emb_src,
                                          d_emb_src);
      d_hook_sup = feature_embed_backward(trace_sup->enc_out[0], emb_sup,
                                          d_emb_sup);
    }
  }

  const double l_aux =
      aux_loss(cfg.use_cons ? l_cons : 0.0, cfg.use_align ? l_align : 0.0, w);
  const double l_total = total_loss(l_aux, l_dice, cfg.lambda);

  if (record) {
    record->l_total = l_total;
    record->l_dice = l_dice;
    record->l_align = l_align;
    record->l_cons = l_cons;
    record->w = w;
    record->delta_style = delta;
  }

  // --- Backward ---
  Gradients grads;
  grads.init_like(model.params());
  if (single_pass) {
    // One trace carries both roles; sum the probability gradients.
    double* a = d_probs_src.data();
    const double* b = d_probs_sup.data();
    for (std::size_t i = 0; i < d_probs_src.size(); ++i) a[i] += b[i];
    Tensor4 d_hook;
    if (!d_hook_src.empty()) {
      d_hook = d_hook_src;
      if (!d_hook_sup.empty()) {
        double* x = d_hook.data();
        const double* y = d_hook_sup.data();
        for (std::size_t i = 0; i < d_hook.size(); ++i) x[i] += y[i];
      }
    } else if (!d_hook_sup.empty()) {
      d_hook = d_hook_sup;
    }
    model.backward(trace_src, d_probs_src, nullptr,
                   d_hook.empty() ? nullptr : &d_hook, &grads);
  } else {
    model.backward(trace_src, d_probs_src, nullptr,
                   d_hook_src.empty() ? nullptr : &d_hook_src, &grads);
    model.backward(*trace_sup, d_probs_sup, nullptr,
                   d_hook_sup.empty() ? nullptr : &d_hook_sup, &grads);
  }
  if (!grads.is_finite()) {
    throw NumericError("meta_train_step: non-finite gradients");
  }
  return model.param_update(grads, lr);
}

// ---------------------------------------------------------------------------
// Meta-test step (query phase): segmentation loss on the query batch at the
// support-updated parameters. In carry-forward mode the beta update continues
// from model_prime; in literal mode it is applied to `visit_start` (the
// parameters the domain visit began with).
// ---------------------------------------------------------------------------
inline SegModel meta_test_step(const SegModel& model_prime,
                               const SegModel* visit_start, const Episode& ep,
                               const MetaConfig& cfg, double lr,
                               double* query_loss = nullptr) {
  BackboneTrace trace;
  model_prime.forward(ep.query_images, std::nullopt, &trace);
  const double l = dice_loss(trace.probs, ep.query_masks);
  if (query_loss) *query_loss = l;
  Tensor4 d_probs = dice_loss_backward(trace.probs, ep.query_masks);
  Gradients grads;
  grads.init_like(model_prime.params());
  model_prime.backward(trace, d_probs, nullptr, nullptr, &grads);
  if (!grads.is_finite()) {
    throw NumericError("meta_test_step: non-finite gradients");
  }
  if (cfg.update_mode == MetaUpdateMode::kLiteral && visit_start != nullptr) {
    return visit_start->param_update(grads, lr);
  }
  return model_prime.param_update(grads, lr);
}

// Per-domain aggregated records of one epoch.
struct DomainEpochRecord {
  int domain = 0;
  StepRecord mean;       // means over the domain's support steps
  double query_loss = 0.0;
  int steps = 0;
};

struct EpochRecord {
  int epoch = 0;
  double gamma_lr = 0.0;
  double beta_lr = 0.0;
  std::vector<DomainEpochRecord> domains;
};

// ---------------------------------------------------------------------------
// One episodic epoch over domains [D0 ... DT] (source first). For each t:
// support episodes train on D[t] (with style recalled from domain t-1 when
// the bank has it), current-domain statistics are saved into the bank under
// t, then query episodes test on D[(t+1) mod (T+1)].
// ---------------------------------------------------------------------------
inline EpochRecord run_metastyle_epoch(SegModel* model,
                                       const std::vector<DomainDataset>& domains,
                                       StyleBank* bank, const MetaConfig& cfg,
                                       int epoch, std::uint64_t run_seed) {
  cfg.validate();
  if (domains.empty()) {
    throw ConfigError("run_metastyle_epoch: empty domain list");
  }
  const int n = domains[0].size();
  for (const auto& d : domains) {
    if (d.size() != n) {
      throw ConfigError(
          "run_metastyle_epoch: domains must have equal sizes (source has " +
          std::to_string(n) + ", '" + d.name + "' has " +
          std::to_string(d.size()) + ")");
    }
    if (d.images.h() != domains[0].images.h() ||
        d.images.w() != domains[0].images.w()) {
      throw ConfigError("run_metastyle_epoch: domain image shapes differ");
    }
  }

  const double gamma_lr =
      decayed_lr(cfg.gamma, epoch, cfg.lr_decay_factor, cfg.lr_decay_every);
  const double beta_lr =
      decayed_lr(cfg.beta, epoch, cfg.lr_decay_factor, cfg.lr_decay_every);

  // One shared shuffled order: source and augmented batches stay aligned
  // index-for-index (same anatomy), which the pair labeling relies on.
  std::vector<std::size_t> order(n);
  for (int i = 0; i < n; ++i) order[i] = static_cast<std::size_t>(i);
  Rng shuffle_rng(derive_seed(run_seed, Stream::kShuffle,
                              static_cast<std::uint64_t>(epoch)));
  shuffle_rng.shuffle(order);

  const int batch = std::min(cfg.batch_size, n);
  int steps = n / batch;
  if (steps == 0) steps = 1;
  if (cfg.steps_per_domain > 0) steps = std::min(steps, cfg.steps_per_domain);

  auto slice = [&](const DomainDataset& d, int step) {
    const int lo = step * batch;
    std::vector<std::size_t> idx(order.begin() + lo,
                                 order.begin() + lo + batch);
    return d.take(idx);
  };

  EpochRecord rec;
  rec.epoch = epoch;
  rec.gamma_lr = gamma_lr;
  rec.beta_lr = beta_lr;

  const int total = static_cast<int>(domains.size());
  for (int t = 0; t < total; ++t) {
    DomainEpochRecord drec;
    drec.domain = domains[t].domain_id;
    const SegModel visit_start = *model;

    std::optional<StyleStats> recalled;
    if (cfg.use_style_recall && t > 0) {
      recalled = bank->recall(domains[t - 1].domain_id);
    }

    // Support phase.
    for (int s = 0; s < steps; ++s) {
      Episode ep;
      ep.t = t;
      ep.recalled = recalled;
      DomainDataset sup = slice(domains[t], s);
      DomainDataset src = t == 0 ? sup : slice(domains[0], s);
      ep.support_images = std::move(sup.images);
      ep.support_masks = std::move(sup.masks);
      ep.source_images = std::move(src.images);
      ep.source_masks = std::move(src.masks);
      ep.support_is_source = t == 0;
      StepRecord sr;
      StyleStats stats_cur;
      *model = meta_train_step(*model, ep, cfg, gamma_lr, &sr, &stats_cur);
      bank->save(domains[t].domain_id, stats_cur);
      drec.mean.l_total += sr.l_total;
      drec.mean.l_dice += sr.l_dice;
      drec.mean.l_align += sr.l_align;
      drec.mean.l_cons += sr.l_cons;
      drec.mean.w += sr.w;
      drec.mean.delta_style += sr.delta_style;
      ++drec.steps;
    }

    // Query phase on the next domain (wrapping), evaluated at theta'. In
    // literal mode every query gradient is taken at the post-support
    // parameters and applied to the visit-start parameters.
    const int q = (t + 1) % total;
    double qloss_sum = 0.0;
    const bool literal = cfg.update_mode == MetaUpdateMode::kLiteral;
    const SegModel theta_prime = literal ? *model : SegModel();
    SegModel base = literal ? visit_start : SegModel();
    for (int s = 0; s < steps; ++s) {
      Episode ep;
      ep.t = t;
      DomainDataset qry = slice(domains[q], s);
      ep.query_images = std::move(qry.images);
      ep.query_masks = std::move(qry.masks);
      double ql = 0.0;
      if (literal) {
        base = meta_test_step(theta_prime, &base, ep, cfg, beta_lr, &ql);
      } else {
        *model = meta_test_step(*model, nullptr, ep, cfg, beta_lr, &ql);
      }
      qloss_sum += ql;
    }
    if (literal) *model = base;
    drec.query_loss = qloss_sum / static_cast<double>(steps);

    if (drec.steps > 0) {
      const double inv = 1.0 / static_cast<double>(drec.steps);
      drec.mean.l_total *= inv;
      drec.mean.l_dice *= inv;
      drec.mean.l_align *= inv;
      drec.mean.l_cons *= inv;
      drec.mean.w *= inv;
      drec.mean.delta_style *= inv;
    }
    rec.domains.push_back(std::move(drec));
  }
  return rec;
}

}  // namespace metastyle

#endif  // METASTYLE_META_LOOP_HPP_
