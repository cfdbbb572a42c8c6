// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef METASTYLE_CONFIG_HPP_
#define METASTYLE_CONFIG_HPP_

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "metastyle/common.hpp"
#include "metastyle/fdrt.hpp"
#include "metastyle/meta_loop.hpp"
#include "metastyle/optim.hpp"

namespace metastyle {

// Every tunable in one flat structure. Loaded from a key=value file, then
// patched by --set overrides (CLI wins over file wins over defaults); all
// range checks run in validate() so a bad file and a bad override fail the
// same way.
struct TrainConfig {
  // Data / scenario.
  std::string scenario = "brats-like";
  int train_count = 200;
  int val_count = 50;
  int test_count = 50;
  int image_size = 64;
  double train_fraction = 0.7;  // used when a loaded domain has no val split

  // Model.
  int depth = 3;
  int base_channels = 16;

  // Augmented-domain construction.
  int num_aug_domains = 3;
  double aug_strength = 0.9;
  double aug_invert_prob = 0.5;

  // Episodic meta-learning.
  double gamma = 0.01;  // meta-train rate
  double beta = 0.005;  // meta-test rate
  int epochs_meta = 200;
  int batch_size = 8;
  double alpha = 0.5;    // style mixing coefficient
  double epsilon = 1e-5;  // recall normalization floor
  double lambda = 0.5;   // aux-vs-dice weight
  double sensitivity = 10.0;
  double margin = 1.0;
  double lr_decay_factor = 0.5;
  int lr_decay_every = 20;
  int steps_per_domain = 0;  // 0 = one full pass per domain visit
  std::string meta_update_mode = "carry_forward";  // or "literal"
  std::string style_source = "feature";            // or "input"

  // Feedback-driven retraining.
  double eta = 0.01;
  int epochs_fdrt = 100;
  int max_rounds = 3;
  double plateau_tol = 0.002;
  std::string gap_log_base = "10";  // or "e"
  std::string fdrt_optimizer = "adam";

  // Module toggles. All five off = the Meta-Base baseline.
  bool mka = true;        // style alignment losses + dynamic weighting
  bool metastyle = true;  // style-bank recall during meta-training
  bool fdrt = true;       // feedback retraining phase
  bool l_align = true;    // alignment term inside MKA
  bool l_cons = true;     // consistency term inside MKA

  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

  void validate() const;
  MetaConfig to_meta_config() const;
  FDRTConfig to_fdrt_config() const;
  std::string resolved() const;
};

// ---------------------------------------------------------------------------
// Key registry: one row per key keeps parsing, the resolved snapshot, and
// unknown-key rejection in lockstep.
// ---------------------------------------------------------------------------

namespace internal {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline double parse_config_double(const std::string& key,
                                  const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" +
                      value + "'");
  }
}

inline int parse_config_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" +
                      value + "'");
  }
}

inline bool parse_config_bool(const std::string& key,
                              const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" +
                    value + "'");
}

inline std::vector<std::uint64_t> parse_config_seeds(const std::string& key,
                                                     const std::string& value) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      out.push_back(std::stoull(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': bad seed '" + item + "'");
    }
  }
  if (out.empty()) {
    throw ConfigError("config key '" + key + "': empty seed list");
  }
  return out;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace internal

struct ConfigKey {
  const char* name;
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, const std::string&)> set;
};

inline const std::vector<ConfigKey>& config_keys() {
  using internal::format_double;
  using internal::parse_config_bool;
  using internal::parse_config_double;
  using internal::parse_config_int;
  using internal::parse_config_seeds;
  auto d = [](double TrainConfig::*f, const char* name) {
    return ConfigKey{
        name, [f](const TrainConfig& c) { return format_double(c.*f); },
        [f, name](TrainConfig& c, const std::string& v) {
          c.*f = parse_config_double(name, v);
        }};
  };
  auto i = [](int TrainConfig::*f, const char* name) {
    return ConfigKey{
        name, [f](const TrainConfig& c) { return std::to_string(c.*f); },
        [f, name](TrainConfig& c, const std::string& v) {
          c.*f = parse_config_int(name, v);
        }};
  };
  auto b = [](bool TrainConfig::*f, const char* name) {
    return ConfigKey{
        name,
        [f](const TrainConfig& c) { return c.*f ? "true" : "false"; },
        [f, name](TrainConfig& c, const std::string& v) {
          c.*f = parse_config_bool(name, v);
        }};
  };
  auto s = [](std::string TrainConfig::*f, const char* name) {
    return ConfigKey{name, [f](const TrainConfig& c) { return c.*f; },
                     [f](TrainConfig& c, const std::string& v) { c.*f = v; }};
  };
  static const std::vector<ConfigKey> keys = {
      s(&TrainConfig::scenario, "scenario"),
      i(&TrainConfig::train_count, "train_count"),
      i(&TrainConfig::val_count, "val_count"),
      i(&TrainConfig::test_count, "test_count"),
      i(&TrainConfig::image_size, "image_size"),
      d(&TrainConfig::train_fraction, "train_fraction"),
      i(&TrainConfig::depth, "depth"),
      i(&TrainConfig::base_channels, "base_channels"),
      i(&TrainConfig::num_aug_domains, "num_aug_domains"),
      d(&TrainConfig::aug_strength, "aug_strength"),
      d(&TrainConfig::aug_invert_prob, "aug_invert_prob"),
      d(&TrainConfig::gamma, "gamma"),
      d(&TrainConfig::beta, "beta"),
      i(&TrainConfig::epochs_meta, "epochs_meta"),
      i(&TrainConfig::batch_size, "batch_size"),
      d(&TrainConfig::alpha, "alpha"),
      d(&TrainConfig::epsilon, "epsilon"),
      d(&TrainConfig::lambda, "lambda"),
      d(&TrainConfig::sensitivity, "sensitivity"),
      d(&TrainConfig::margin, "margin"),
      d(&TrainConfig::lr_decay_factor, "lr_decay_factor"),
      i(&TrainConfig::lr_decay_every, "lr_decay_every"),
      i(&TrainConfig::steps_per_domain, "steps_per_domain"),
      s(&TrainConfig::meta_update_mode, "meta_update_mode"),
      s(&TrainConfig::style_source, "style_source"),
      d(&TrainConfig::eta, "eta"),
      i(&TrainConfig::epochs_fdrt, "epochs_fdrt"),
      i(&TrainConfig::max_rounds, "max_rounds"),
      d(&TrainConfig::plateau_tol, "plateau_tol"),
      s(&TrainConfig::gap_log_base, "gap_log_base"),
      s(&TrainConfig::fdrt_optimizer, "fdrt_optimizer"),
      b(&TrainConfig::mka, "mka"),
      b(&TrainConfig::metastyle, "metastyle"),
      b(&TrainConfig::fdrt, "fdrt"),
      b(&TrainConfig::l_align, "l_align"),
      b(&TrainConfig::l_cons, "l_cons"),
      ConfigKey{"seeds",
                [](const TrainConfig& c) {
                  std::string out;
                  for (std::size_t k = 0; k < c.seeds.size(); ++k) {
                    if (k) out += ",";
                    out += std::to_string(c.seeds[k]);
                  }
                  return out;
                },
                [](TrainConfig& c, const std::string& v) {
                  c.seeds = parse_config_seeds("seeds", v);
                }},
  };
  return keys;
}

// Applies one "key=value" assignment; unknown keys are rejected.
inline void apply_config_entry(TrainConfig* cfg, const std::string& key,
                               const std::string& value) {
  for (const auto& k : config_keys()) {
    if (key == k.name) {
      k.set(*cfg, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

// Parses a single "key=value" token (as given to --set).
inline void apply_config_override(TrainConfig* cfg, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + text + "' is not of the form key=value");
  }
  const std::string key = internal::trim(text.substr(0, eq));
  const std::string value = internal::trim(text.substr(eq + 1));
  if (key.empty()) {
    throw ConfigError("override '" + text + "' has an empty key");
  }
  apply_config_entry(cfg, key, value);
}

// Reads a flat key=value file ('#' comments, blank lines allowed) on top of
// the given defaults.
inline void load_config_file(TrainConfig* cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = internal::trim(line);
    if (line.empty()) continue;
    try {
      apply_config_override(cfg, line);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

// ---------------------------------------------------------------------------

inline MetaUpdateMode parse_update_mode(const std::string& v) {
  if (v == "carry_forward") return MetaUpdateMode::kCarryForward;
  if (v == "literal") return MetaUpdateMode::kLiteral;
  throw ConfigError("meta_update_mode must be carry_forward or literal, got '" +
                    v + "'");
}

inline StyleSource parse_style_source(const std::string& v) {
  if (v == "feature") return StyleSource::kFeature;
  if (v == "input") return StyleSource::kInput;
  throw ConfigError("style_source must be feature or input, got '" + v + "'");
}

inline GapLogBase parse_gap_log_base(const std::string& v) {
  if (v == "10") return GapLogBase::kTen;
  if (v == "e") return GapLogBase::kE;
  throw ConfigError("gap_log_base must be 10 or e, got '" + v + "'");
}

inline void TrainConfig::validate() const {
  if (train_count < 2 || val_count < 1 || test_count < 1) {
    throw ConfigError("config: split sizes too small");
  }
  if (depth < 2 || depth > 6) {
    throw ConfigError("config: depth must lie in [2, 6]");
  }
  if (base_channels < 1 || base_channels > 512) {
    throw ConfigError("config: base_channels must lie in [1, 512]");
  }
  const int div = 1 << (depth - 1);
  if (image_size < 2 * div || image_size % div != 0) {
    throw ConfigError("config: image_size must be a multiple of " +
                      std::to_string(div) + " and at least " +
                      std::to_string(2 * div));
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("config: train_fraction must lie in (0, 1)");
  }
  if (num_aug_domains < 1) {
    throw ConfigError("config: num_aug_domains must be >= 1");
  }
  if (!(aug_strength >= 0.0 && aug_strength <= 1.0)) {
    throw ConfigError("config: aug_strength must lie in [0, 1]");
  }
  if (!(aug_invert_prob >= 0.0 && aug_invert_prob <= 1.0)) {
    throw ConfigError("config: aug_invert_prob must lie in [0, 1]");
  }
  if (seeds.empty()) throw ConfigError("config: seeds must be nonempty");
  // Enum-like strings and the sub-config ranges.
  (void)parse_update_mode(meta_update_mode);
  (void)parse_style_source(style_source);
  (void)parse_gap_log_base(gap_log_base);
  (void)parse_optimizer(fdrt_optimizer);
  to_meta_config().validate();
  to_fdrt_config().validate();
}

inline MetaConfig TrainConfig::to_meta_config() const {
  MetaConfig m;
  m.gamma = gamma;
  m.beta = beta;
  m.epochs = epochs_meta;
  m.batch_size = batch_size;
  m.lr_decay_factor = lr_decay_factor;
  m.lr_decay_every = lr_decay_every;
  m.recall.alpha = alpha;
  m.recall.epsilon = epsilon;
  m.lambda = lambda;
  m.margin = margin;
  m.sensitivity = sensitivity;
  m.use_style_recall = metastyle;
  m.use_align = mka && l_align;
  m.use_cons = mka && l_cons;
  m.update_mode = parse_update_mode(meta_update_mode);
  m.style_source = parse_style_source(style_source);
  m.steps_per_domain = steps_per_domain;
  return m;
}

inline FDRTConfig TrainConfig::to_fdrt_config() const {
  FDRTConfig f;
  f.eta = eta;
  f.epochs = epochs_fdrt;
  f.batch_size = batch_size;
  f.max_rounds = max_rounds;
  f.plateau_tol = plateau_tol;
  f.lr_decay_factor = lr_decay_factor;
  f.lr_decay_every = lr_decay_every;
  f.log_base = parse_gap_log_base(gap_log_base);
  f.optimizer = parse_optimizer(fdrt_optimizer);
  return f;
}

// Canonical snapshot: every key in registry order, one per line. Feeding the
// snapshot back through load_config_file reproduces the configuration.
inline std::string TrainConfig::resolved() const {
  std::string out;
  for (const auto& k : config_keys()) {
    out += k.name;
    out += " = ";
    out += k.get(*this);
    out += "\n";
  }
  return out;
}

inline void write_resolved_config(const TrainConfig& cfg,
                                  const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write config snapshot '" + path + "'");
  out << cfg.resolved();
  if (!out.flush()) {
    throw DataError("failed writing config snapshot '" + path + "'");
  }
}

}  // namespace metastyle

#endif  // METASTYLE_CONFIG_HPP_
