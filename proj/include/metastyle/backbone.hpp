// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef METASTYLE_BACKBONE_HPP_
#define METASTYLE_BACKBONE_HPP_

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "metastyle/common.hpp"
#include "metastyle/nn.hpp"
#include "metastyle/style_stats.hpp"
#include "metastyle/tensor.hpp"

namespace metastyle {

// One named parameter array (convolution weights or biases).
struct ParamArray {
  std::string name;
  std::vector<int> shape;
  std::vector<double> v;

  std::size_t size() const { return v.size(); }
};

// Gradients aligned index-for-index with SegModel::params.
struct Gradients {
  std::vector<std::vector<double>> g;

  void init_like(const std::vector<ParamArray>& params) {
    g.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      g[i].assign(params[i].size(), 0.0);
    }
  }

  void zero() {
    for (auto& a : g) std::fill(a.begin(), a.end(), 0.0);
  }

  void add(const Gradients& o) {
    if (o.g.size() != g.size()) {
      throw DimensionError("Gradients::add: layout mismatch");
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < g[i].size(); ++j) g[i][j] += o.g[i][j];
    }
  }

  void scale(double s) {
    for (auto& a : g) {
      for (double& x : a) x *= s;
    }
  }

  bool is_finite() const {
    for (const auto& a : g) {
      if (!all_finite(a.data(), a.size())) return false;
    }
    return true;
  }
};

// Style injection request for a forward pass: the hook-layer activations are
// re-expressed with these statistics before continuing downstream.
struct StyleOverride {
  StyleStats stats;
  StyleRecallConfig cfg;
};

// Everything the backward pass needs from a forward pass.
struct BackboneTrace {
  Tensor4 input;
  // Encoder block activations: mid = after first conv+relu, out = block
  // output. enc_out[0] is the style hook layer (pre-injection).
  std::vector<Tensor4> enc_mid, enc_out;
  // Hook activations after style recall (equals enc_out[0] when no override).
  Tensor4 hook_post;
  bool injected = false;
  StyleOverride override;
  nn::RecallTrace recall;
  // Pooling results and argmax indices, one per encoder transition.
  std::vector<Tensor4> pooled;
  std::vector<std::vector<std::int32_t>> pool_idx;
  // Decoder: upsampled input, concatenated input, block activations.
  // Index 0 is the deepest decoder block.
  std::vector<Tensor4> up, cat, dec_mid, dec_out;
  Tensor4 probs;
};

struct ForwardResult {
  // Hook-layer activations as they continued downstream (post-injection when
  // an override was supplied).
  Tensor4 shallow;
  // Per-pixel class probabilities, same spatial shape as the input.
  Tensor4 probs;
};

// Small U-Net: `depth` encoder blocks (each two 3x3 conv + ReLU) with 2x max
// pooling between them, mirrored decoder with nearest upsampling and skip
// concatenations, 1x1 classification head, per-pixel softmax. The output of
// the first encoder block is the style hook layer.
class SegModel {
 public:
  SegModel() = default;

  SegModel(int depth, int base_channels, int num_classes, int in_channels = 1)
      : depth_(depth),
        base_(base_channels),
        classes_(num_classes),
        in_ch_(in_channels) {
    if (depth < 2 || depth > 6) {
      throw ConfigError("SegModel: depth must lie in [2, 6], got " +
                        std::to_string(depth));
    }
    if (base_channels < 1 || base_channels > 512) {
      throw ConfigError("SegModel: base_channels must lie in [1, 512]");
    }
    if (num_classes < 2 || num_classes > 255) {
      throw ConfigError("SegModel: num_classes must lie in [2, 255]");
    }
    build_params();
  }

  int depth() const { return depth_; }
  int base_channels() const { return base_; }
  int num_classes() const { return classes_; }
  int in_channels() const { return in_ch_; }
  int hook_channels() const { return base_; }

  std::vector<ParamArray>& params() { return params_; }
  const std::vector<ParamArray>& params() const { return params_; }

  std::size_t parameter_count() const {
    std::size_t total = 0;
    for (const auto& p : params_) total += p.size();
    return total;
  }

  // He-style normal initialization, deterministic in the seed.
  void init_params(std::uint64_t seed) {
    Rng rng(derive_seed(seed, Stream::kModelInit));
    for (auto& p : params_) {
      if (p.shape.size() == 1) {
        std::fill(p.v.begin(), p.v.end(), 0.0);  // biases
        continue;
      }
      // fan_in = in_channels * kernel_area.
      std::size_t fan_in = 1;
      for (std::size_t d = 1; d < p.shape.size(); ++d) {
        fan_in *= static_cast<std::size_t>(p.shape[d]);
      }
      const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
      for (double& x : p.v) x = rng.normal(0.0, stddev);
    }
  }

  // Pure SGD step: returns a model with parameters theta - lr * g.
  SegModel param_update(const Gradients& grads, double lr) const {
    check_grads(grads);
    ensure_finite(lr, "param_update: lr");
    SegModel out = *this;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      double* p = out.params_[i].v.data();
      const double* g = grads.g[i].data();
      for (std::size_t j = 0; j < params_[i].size(); ++j) {
        p[j] -= lr * g[j];
      }
    }
    return out;
  }

  void check_grads(const Gradients& grads) const {
    if (grads.g.size() != params_.size()) {
      throw DimensionError("param_update: gradient layout mismatch (" +
                           std::to_string(grads.g.size()) + " arrays vs " +
                           std::to_string(params_.size()) + ")");
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (grads.g[i].size() != params_[i].size()) {
        throw DimensionError("param_update: gradient size mismatch at '" +
                             params_[i].name + "'");
      }
    }
  }

  // Computes a style override from the raw hook-layer activations mid-pass,
  // letting callers mix current statistics with recalled ones in a single
  // forward. Returning nullopt skips injection.
  using OverrideProvider =
      std::function<std::optional<StyleOverride>(const Tensor4& raw_hook)>;

  // ---------------------------------------------------------------------
  // Forward pass. When `override_opt` is given, hook-layer activations are
  // re-styled via recall_normalize before continuing downstream. A trace is
  // filled only when requested (training); evaluation passes skip it.
  // ---------------------------------------------------------------------
  ForwardResult forward(const Tensor4& images,
                        const std::optional<StyleOverride>& override_opt =
                            std::nullopt,
                        BackboneTrace* trace = nullptr) const {
    return forward(
        images,
        [&override_opt](const Tensor4&) { return override_opt; },
        trace);
  }

  ForwardResult forward(const Tensor4& images,
                        const OverrideProvider& provider,
                        BackboneTrace* trace = nullptr) const {
    if (images.c() != in_ch_) {
      throw DimensionError("forward: expected " + std::to_string(in_ch_) +
                           " input channels, got " +
                           std::to_string(images.c()));
    }
    const int div = 1 << (depth_ - 1);
    if (images.h() % div != 0 || images.w() % div != 0) {
      throw DimensionError("forward: spatial size " +
                           std::to_string(images.h()) + "x" +
                           std::to_string(images.w()) +
                           " not divisible by " + std::to_string(div));
    }
    images.require_finite("forward: images");

    BackboneTrace local;
    BackboneTrace& t = trace ? *trace : local;
    t = BackboneTrace{};
    t.input = images;

    std::vector<double> scratch, scratch2;

    // --- Encoder ---
    t.enc_mid.resize(depth_);
    t.enc_out.resize(depth_);
    t.pooled.resize(depth_ - 1);
    t.pool_idx.resize(depth_ - 1);
    const Tensor4* cur = &t.input;
    for (int i = 0; i < depth_; ++i) {
      run_block(*cur, enc_idx(i), &t.enc_mid[i], &t.enc_out[i], &scratch);
      if (i == 0) {
        const std::optional<StyleOverride> override_opt =
            provider(t.enc_out[0]);
        if (override_opt) {
          t.injected = true;
          t.override = *override_opt;
          t.hook_post = nn::recall_forward(t.enc_out[0], override_opt->stats,
                                           override_opt->cfg, &t.recall);
        } else {
          t.hook_post = t.enc_out[0];
        }
        cur = &t.hook_post;
      } else {
        cur = &t.enc_out[i];
      }
      if (i < depth_ - 1) {
        t.pooled[i] = Tensor4(cur->n(), cur->c(), cur->h() / 2, cur->w() / 2);
        nn::maxpool2_forward(*cur, &t.pooled[i], &t.pool_idx[i]);
        cur = &t.pooled[i];
      }
    }

    // --- Decoder (deepest block first) ---
    const int dec_blocks = depth_ - 1;
    t.up.resize(dec_blocks);
    t.cat.resize(dec_blocks);
    t.dec_mid.resize(dec_blocks);
    t.dec_out.resize(dec_blocks);
    const Tensor4* below = &t.enc_out[depth_ - 1];
    for (int j = 0; j < dec_blocks; ++j) {
      // Decoder block j consumes the skip from encoder level (depth-2-j).
      const int level = depth_ - 2 - j;
      const Tensor4& skip = level == 0 ? t.hook_post : t.enc_out[level];
      t.up[j] = Tensor4(below->n(), below->c(), below->h() * 2,
                        below->w() * 2);
      nn::upsample2_forward(*below, &t.up[j]);
      t.cat[j] = Tensor4(skip.n(), t.up[j].c() + skip.c(), skip.h(), skip.w());
      nn::concat_forward(t.up[j], skip, &t.cat[j]);
      run_block(t.cat[j], dec_idx(j), &t.dec_mid[j], &t.dec_out[j], &scratch);
      below = &t.dec_out[j];
    }

    // --- Head ---
    Tensor4 logits(below->n(), classes_, below->h(), below->w());
    nn::conv1_forward(*below, params_[head_idx()].v, params_[head_idx() + 1].v,
                      &logits);
    t.probs = Tensor4(logits.n(), classes_, logits.h(), logits.w());
    nn::softmax_forward(logits, &t.probs);
    t.probs.require_finite("forward: probabilities");

    ForwardResult out;
    out.shallow = t.hook_post;
    out.probs = t.probs;
    return out;
  }

  // ---------------------------------------------------------------------
  // Backward pass. Seeds:
  //   d_probs     gradient at the probability output (may be empty),
  //   d_hook_post gradient injected at the hook layer after style recall,
  //   d_hook_raw  gradient injected at the hook layer before style recall
  //               (used by losses on the raw shallow features).
  // Parameter gradients are accumulated into `grads`.
  // ---------------------------------------------------------------------
  void backward(const BackboneTrace& t, const Tensor4& d_probs,
                const Tensor4* d_hook_post, const Tensor4* d_hook_raw,
                Gradients* grads) const {
    if (grads->g.empty()) grads->init_like(params_);

    std::vector<double> scratch, scratch2;
    const int dec_blocks = depth_ - 1;

    // Head and softmax.
    Tensor4 dlogits(t.probs.n(), t.probs.c(), t.probs.h(), t.probs.w());
    nn::softmax_backward(t.probs, d_probs, &dlogits);
    const Tensor4& head_in =
        dec_blocks > 0 ? t.dec_out[dec_blocks - 1] : t.hook_post;
    Tensor4 d_below(head_in.n(), head_in.c(), head_in.h(), head_in.w());
    nn::conv1_backward(head_in, params_[head_idx()].v, dlogits,
                       &grads->g[head_idx()], &grads->g[head_idx() + 1],
                       &d_below);

    // Decoder, shallowest block first; skip gradients accumulate per level.
    std::vector<Tensor4> d_level(depth_);
    for (int j = dec_blocks - 1; j >= 0; --j) {
      const int level = depth_ - 2 - j;
      const Tensor4& skip = level == 0 ? t.hook_post : t.enc_out[level];
      Tensor4 d_cat(t.cat[j].n(), t.cat[j].c(), t.cat[j].h(), t.cat[j].w());
      block_backward(t.cat[j], dec_idx(j), t.dec_mid[j], t.dec_out[j],
                     d_below, &d_cat, grads, &scratch, &scratch2);
      Tensor4 d_up(t.up[j].n(), t.up[j].c(), t.up[j].h(), t.up[j].w());
      Tensor4 d_skip(skip.n(), skip.c(), skip.h(), skip.w());
      nn::concat_backward(d_cat, &d_up, &d_skip);
      accumulate(&d_level[level], d_skip);
      // Downsample the upsample gradient onto whatever produced `below`.
      const Tensor4& below_src =
          j == 0 ? t.enc_out[depth_ - 1] : t.dec_out[j - 1];
      d_below = Tensor4(below_src.n(), below_src.c(), below_src.h(),
                        below_src.w());
      nn::upsample2_backward(d_up, &d_below);
    }
    accumulate(&d_level[depth_ - 1], d_below);

    // Encoder, deepest block first.
    for (int i = depth_ - 1; i >= 1; --i) {
      const Tensor4& block_in = t.pooled[i - 1];
      Tensor4 d_in(block_in.n(), block_in.c(), block_in.h(), block_in.w());
      block_backward(block_in, enc_idx(i), t.enc_mid[i], t.enc_out[i],
                     d_level[i], &d_in, grads, &scratch, &scratch2);
      // Through the pooling onto the level below.
      const Tensor4& pool_in = i - 1 == 0 ? t.hook_post : t.enc_out[i - 1];
      Tensor4 d_pool(pool_in.n(), pool_in.c(), pool_in.h(), pool_in.w());
      nn::maxpool2_backward(d_in, t.pool_idx[i - 1], &d_pool);
      accumulate(&d_level[i - 1], d_pool);
    }

    // Hook layer: external post-recall gradient, then back through recall,
    // then external raw gradient, then the first encoder block.
    if (d_hook_post) accumulate(&d_level[0], *d_hook_post);
    Tensor4 d_raw;
    if (t.injected) {
      if (d_level[0].empty()) {
        d_level[0] = Tensor4(t.hook_post.n(), t.hook_post.c(),
                             t.hook_post.h(), t.hook_post.w());
      }
      d_raw = nn::recall_backward(t.enc_out[0], t.override.stats,
                                  t.override.cfg, t.recall, d_level[0]);
    } else {
      d_raw = std::move(d_level[0]);
    }
    if (d_hook_raw) accumulate(&d_raw, *d_hook_raw);
    if (d_raw.empty()) {
      d_raw = Tensor4(t.enc_out[0].n(), t.enc_out[0].c(), t.enc_out[0].h(),
                      t.enc_out[0].w());
    }
    block_backward(t.input, enc_idx(0), t.enc_mid[0], t.enc_out[0], d_raw,
                   nullptr, grads, &scratch, &scratch2);
  }

  // ---------------------------------------------------------------------
  // Checkpoint I/O. Little-endian container:
  //   magic "MSCP" | u32 version | i32 depth, base, classes, in_ch |
  //   u64 config snapshot length | snapshot bytes |
  //   u32 param count | per param: u32 name len | name | u32 ndims |
  //     i32 dims... | f64 data...
  // ---------------------------------------------------------------------
  void save_checkpoint(const std::string& path,
                       const std::string& config_snapshot = "") const {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp(target.string() + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) {
        throw DataError("save_checkpoint: cannot open '" + tmp.string() +
                        "'");
      }
      out.write("MSCP", 4);
      write_u32(out, 1);
      write_i32(out, depth_);
      write_i32(out, base_);
      write_i32(out, classes_);
      write_i32(out, in_ch_);
      write_u64(out, config_snapshot.size());
      out.write(config_snapshot.data(),
                static_cast<std::streamsize>(config_snapshot.size()));
      write_u32(out, static_cast<std::uint32_t>(params_.size()));
      for (const auto& p : params_) {
        write_u32(out, static_cast<std::uint32_t>(p.name.size()));
        out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        write_u32(out, static_cast<std::uint32_t>(p.shape.size()));
        for (int d : p.shape) write_i32(out, d);
        for (double v : p.v) write_f64(out, v);
      }
      if (!out.good()) {
        throw DataError("save_checkpoint: write failed at '" + tmp.string() +
                        "'");
      }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
      fs::remove(tmp);
      throw DataError("save_checkpoint: cannot move checkpoint into place: " +
                      ec.message());
    }
  }

  static SegModel load_checkpoint(const std::string& path,
                                  std::string* config_snapshot = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_checkpoint: cannot open '" + path + "'");
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "MSCP") {
      throw DataError("load_checkpoint: '" + path +
                      "' is not a checkpoint file");
    }
    const std::uint32_t version = read_u32(in, path);
    if (version != 1) {
      throw DataError("load_checkpoint: unsupported version " +
                      std::to_string(version));
    }
    const int depth = read_i32(in, path);
    const int base = read_i32(in, path);
    const int classes = read_i32(in, path);
    const int in_ch = read_i32(in, path);
    SegModel model(depth, base, classes, in_ch);
    const std::uint64_t snap_len = read_u64(in, path);
    std::string snapshot(snap_len, '\0');
    in.read(snapshot.data(), static_cast<std::streamsize>(snap_len));
    if (!in) throw DataError("load_checkpoint: '" + path + "' is truncated");
    if (config_snapshot) *config_snapshot = snapshot;
    const std::uint32_t count = read_u32(in, path);
    if (count != model.params_.size()) {
      throw DataError("load_checkpoint: '" + path + "' holds " +
                      std::to_string(count) + " arrays, architecture needs " +
                      std::to_string(model.params_.size()));
    }
    for (auto& p : model.params_) {
      const std::uint32_t name_len = read_u32(in, path);
      std::string name(name_len, '\0');
      in.read(name.data(), name_len);
      const std::uint32_t ndims = read_u32(in, path);
      std::vector<int> dims(ndims);
      for (auto& d : dims) d = read_i32(in, path);
      if (!in || name != p.name || dims != p.shape) {
        throw DataError("load_checkpoint: '" + path +
                        "' parameter layout mismatch at '" + p.name + "'");
      }
      for (double& v : p.v) v = read_f64(in, path);
      if (!all_finite(p.v.data(), p.v.size())) {
        throw DataError("load_checkpoint: non-finite values in '" + p.name +
                        "'");
      }
    }
    return model;
  }

 private:
  // Parameter layout: enc blocks shallow->deep, dec blocks deep->shallow,
  // head. Each block holds conv1.w, conv1.b, conv2.w, conv2.b.
  int enc_idx(int i) const { return i * 4; }
  int dec_idx(int j) const { return (depth_ + j) * 4; }
  int head_idx() const { return (depth_ + depth_ - 1) * 4; }

  int enc_channels(int i) const { return base_ << i; }

  void build_params() {
    auto add_conv3 = [this](const std::string& name, int cin, int cout) {
      ParamArray w{name + ".w", {cout, cin, 3, 3},
                   std::vector<double>(static_cast<std::size_t>(cout) * cin * 9,
                                       0.0)};
      ParamArray b{name + ".b", {cout}, std::vector<double>(cout, 0.0)};
      params_.push_back(std::move(w));
      params_.push_back(std::move(b));
    };
    for (int i = 0; i < depth_; ++i) {
      const int cin = i == 0 ? in_ch_ : enc_channels(i - 1);
      const int cout = enc_channels(i);
      add_conv3("enc" + std::to_string(i) + ".conv1", cin, cout);
      add_conv3("enc" + std::to_string(i) + ".conv2", cout, cout);
    }
    for (int j = 0; j < depth_ - 1; ++j) {
      const int level = depth_ - 2 - j;
      const int below_ch =
          j == 0 ? enc_channels(depth_ - 1) : enc_channels(level + 1);
      const int cin = below_ch + enc_channels(level);
      const int cout = enc_channels(level);
      add_conv3("dec" + std::to_string(level) + ".conv1", cin, cout);
      add_conv3("dec" + std::to_string(level) + ".conv2", cout, cout);
    }
    ParamArray hw{"head.w", {classes_, enc_channels(0)},
                  std::vector<double>(
                      static_cast<std::size_t>(classes_) * enc_channels(0),
                      0.0)};
    ParamArray hb{"head.b", {classes_}, std::vector<double>(classes_, 0.0)};
    params_.push_back(std::move(hw));
    params_.push_back(std::move(hb));
  }

  // Two 3x3 conv + ReLU stages. `mid` is the post-ReLU intermediate.
  void run_block(const Tensor4& in, int pidx, Tensor4* mid, Tensor4* out,
                 std::vector<double>* scratch) const {
    const int cout = params_[pidx].shape[0];
    *mid = Tensor4(in.n(), cout, in.h(), in.w());
    nn::conv3_forward(in, params_[pidx].v, params_[pidx + 1].v, mid, scratch);
    nn::relu_forward(mid);
    *out = Tensor4(in.n(), cout, in.h(), in.w());
    nn::conv3_forward(*mid, params_[pidx + 2].v, params_[pidx + 3].v, out,
                      scratch);
    nn::relu_forward(out);
  }

  void block_backward(const Tensor4& in, int pidx, const Tensor4& mid,
                      const Tensor4& out, const Tensor4& d_out, Tensor4* d_in,
                      Gradients* grads, std::vector<double>* scratch,
                      std::vector<double>* scratch2) const {
    Tensor4 d_a2 = d_out;
    nn::relu_backward(out, &d_a2);
    Tensor4 d_mid(mid.n(), mid.c(), mid.h(), mid.w());
    nn::conv3_backward(mid, params_[pidx + 2].v, d_a2, &grads->g[pidx + 2],
                       &grads->g[pidx + 3], &d_mid, scratch, scratch2);
    nn::relu_backward(mid, &d_mid);
    nn::conv3_backward(in, params_[pidx].v, d_mid, &grads->g[pidx],
                       &grads->g[pidx + 1], d_in, scratch, scratch2);
  }

  static void accumulate(Tensor4* acc, const Tensor4& g) {
    if (acc->empty()) {
      *acc = g;
      return;
    }
    if (!acc->same_shape(g)) {
      throw DimensionError("backward: gradient shape mismatch");
    }
    double* a = acc->data();
    const double* b = g.data();
    for (std::size_t i = 0; i < acc->size(); ++i) a[i] += b[i];
  }

  static void write_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
  }
  static void write_i32(std::ofstream& out, std::int32_t v) {
    write_u32(out, static_cast<std::uint32_t>(v));
  }
  static void write_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
  }
  static void write_f64(std::ofstream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(out, bits);
  }
  static std::uint32_t read_u32(std::ifstream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw DataError("load_checkpoint: '" + path + "' is truncated");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  static std::int32_t read_i32(std::ifstream& in, const std::string& path) {
    return static_cast<std::int32_t>(read_u32(in, path));
  }
  static std::uint64_t read_u64(std::ifstream& in, const std::string& path) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw DataError("load_checkpoint: '" + path + "' is truncated");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  static double read_f64(std::ifstream& in, const std::string& path) {
    const std::uint64_t bits = read_u64(in, path);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  int depth_ = 3;
  int base_ = 16;
  int classes_ = 2;
  int in_ch_ = 1;
  std::vector<ParamArray> params_;
};

}  // namespace metastyle

#endif  // METASTYLE_BACKBONE_HPP_
