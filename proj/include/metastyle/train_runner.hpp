// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef METASTYLE_TRAIN_RUNNER_HPP_
#define METASTYLE_TRAIN_RUNNER_HPP_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "metastyle/augmentation.hpp"
#include "metastyle/backbone.hpp"
#include "metastyle/common.hpp"
#include "metastyle/config.hpp"
#include "metastyle/data.hpp"
#include "metastyle/dataset.hpp"
#include "metastyle/fdrt.hpp"
#include "metastyle/logging.hpp"
#include "metastyle/meta_loop.hpp"
#include "metastyle/metrics.hpp"
#include "metastyle/style_bank.hpp"

namespace metastyle {

// ---------------------------------------------------------------------------
// Scenario directories. Layout:
//   <data_dir>/scenario.meta                  (scenario, num_classes, domains)
//   <data_dir>/<domain>/{train,val,test}/     (dataset dirs)
// domains in scenario.meta are ordered, source first.
// ---------------------------------------------------------------------------

inline void write_scenario_dir(const Scenario& sc, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw DataError("write_scenario_dir: cannot create '" + dir +
                    "': " + ec.message());
  }
  for (const auto& dom : sc.domains) {
    const fs::path base = fs::path(dir) / dom.name;
    const auto write = [&](const DomainDataset& ds, const char* split) {
      write_dataset_dir(ds, (base / split).string(),
                        {{"scenario", sc.name}, {"split", split}});
    };
    write(dom.train, "train");
    write(dom.val, "val");
    write(dom.test, "test");
  }
  const fs::path meta = fs::path(dir) / "scenario.meta";
  std::ofstream out(meta, std::ios::trunc);
  if (!out) {
    throw DataError("write_scenario_dir: cannot write '" + meta.string() +
                    "'");
  }
  out << "scenario=" << sc.name << "\n";
  out << "num_classes=" << sc.num_classes << "\n";
  out << "image_size=" << sc.image_size << "\n";
  out << "domains=";
  for (std::size_t i = 0; i < sc.domains.size(); ++i) {
    if (i) out << ",";
    out << sc.domains[i].name;
  }
  out << "\n";
  if (!out.flush()) {
    throw DataError("write_scenario_dir: failed writing '" + meta.string() +
                    "'");
  }
}

// A scenario read back from disk; vectors are aligned by domain, index 0 is
// the source domain.
struct LoadedScenario {
  std::string scenario;
  int num_classes = 2;
  std::vector<std::string> names;
  std::vector<DomainDataset> train, val, test;
};

inline LoadedScenario load_scenario_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path meta = fs::path(dir) / "scenario.meta";
  if (!fs::exists(meta)) {
    throw DataError("load_scenario_dir: no scenario.meta in '" + dir + "'");
  }
  const auto kv = read_meta_file(meta.string());
  LoadedScenario out;
  if (auto it = kv.find("scenario"); it != kv.end()) out.scenario = it->second;
  if (auto it = kv.find("num_classes"); it != kv.end()) {
    out.num_classes = std::stoi(it->second);
  }
  const auto it = kv.find("domains");
  if (it == kv.end()) {
    throw DataError("load_scenario_dir: scenario.meta in '" + dir +
                    "' lists no domains");
  }
  std::stringstream names(it->second);
  std::string name;
  while (std::getline(names, name, ',')) {
    if (!name.empty()) out.names.push_back(name);
  }
  if (out.names.empty()) {
    throw DataError("load_scenario_dir: empty domain list in '" + dir + "'");
  }
  for (const auto& dom : out.names) {
    const fs::path base = fs::path(dir) / dom;
    out.train.push_back(load_dataset_dir((base / "train").string()));
    out.val.push_back(load_dataset_dir((base / "val").string()));
    out.test.push_back(load_dataset_dir((base / "test").string()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run directory layout and CSV schemas.
// ---------------------------------------------------------------------------

struct RunPaths {
  std::string out_dir;
  std::string config_snapshot() const { return out_dir + "/config.resolved"; }
  std::string checkpoint() const { return out_dir + "/checkpoint.mscp"; }
  std::string style_bank() const { return out_dir + "/style_bank.msbk"; }
  std::string train_log() const { return out_dir + "/train_log.csv"; }
  std::string fdrt_log() const { return out_dir + "/fdrt_log.csv"; }
  std::string eval_csv() const { return out_dir + "/eval.csv"; }
  std::string eval_table() const { return out_dir + "/eval.txt"; }
};

inline std::vector<std::string> train_log_header() {
  return {"epoch", "domain",  "gamma_lr", "beta_lr",     "l_total",
          "l_dice", "l_align", "l_cons",   "w",           "delta_style",
          "query_loss", "steps"};
}

inline std::vector<std::string> fdrt_log_header() {
  return {"round", "domain", "dice", "gap", "samples", "mean_dice_before",
          "mean_dice_after"};
}

inline void append_epoch_rows(CsvWriter* csv, const EpochRecord& rec) {
  for (const auto& d : rec.domains) {
    csv->row({CsvWriter::num(rec.epoch), CsvWriter::num(d.domain),
              CsvWriter::num(rec.gamma_lr), CsvWriter::num(rec.beta_lr),
              CsvWriter::num(d.mean.l_total), CsvWriter::num(d.mean.l_dice),
              CsvWriter::num(d.mean.l_align), CsvWriter::num(d.mean.l_cons),
              CsvWriter::num(d.mean.w), CsvWriter::num(d.mean.delta_style),
              CsvWriter::num(d.query_loss), CsvWriter::num(d.steps)});
  }
}

inline void append_fdrt_rows(CsvWriter* csv,
                             const std::vector<FdrtRoundRecord>& records) {
  for (const auto& r : records) {
    for (std::size_t t = 0; t < r.scores.size(); ++t) {
      csv->row({CsvWriter::num(r.round),
                CsvWriter::num(r.scores[t].domain_id),
                CsvWriter::num(r.scores[t].dice),
                CsvWriter::num(r.scores[t].proportion),
                CsvWriter::num(t < r.samples.size() ? r.samples[t] : 0),
                CsvWriter::num(r.mean_dice_before),
                CsvWriter::num(r.mean_dice_after)});
    }
  }
}

// ---------------------------------------------------------------------------
// Single-seed training: augmented-domain construction, episodic epochs,
// optional feedback retraining, artifact writes. `out_dir` empty = in-memory
// only (used by tests).
// ---------------------------------------------------------------------------

struct RunArtifacts {
  std::uint64_t seed = 0;
  SegModel model;
  StyleBank bank;
  std::vector<EpochRecord> epochs;
  std::vector<FdrtRoundRecord> fdrt_rounds;
  double val_dice_before_fdrt = 0.0;  // mean over meta-domain val splits
  double val_dice_after_fdrt = 0.0;
};

// Builds the meta-training domain list (source + A augmented copies) and the
// style-matched validation list. The curve draw depends only on the run seed.
inline void build_meta_domains(const TrainConfig& cfg,
                               const LoadedScenario& data, std::uint64_t seed,
                               std::vector<DomainDataset>* meta_train,
                               std::vector<DomainDataset>* meta_val) {
  const DomainDataset& src_train = data.train.front();
  const DomainDataset& src_val = data.val.front();
  Rng rng(derive_seed(seed, Stream::kAugCurves));
  CurveSampler sampler;
  sampler.strength = cfg.aug_strength;
  sampler.invert_prob = cfg.aug_invert_prob;
  std::vector<BezierCurve> curves;
  auto aug = build_augmented_domains(src_train, cfg.num_aug_domains, rng,
                                     sampler, &curves);
  meta_train->clear();
  meta_val->clear();
  meta_train->push_back(src_train);
  meta_val->push_back(src_val);
  for (std::size_t a = 0; a < aug.size(); ++a) {
    meta_val->push_back(restyle_dataset(src_val, curves[a],
                                        aug[a].domain_id,
                                        aug[a].name + "-val"));
    meta_train->push_back(std::move(aug[a]));
  }
}

inline RunArtifacts run_training(const TrainConfig& cfg,
                                 const LoadedScenario& data,
                                 std::uint64_t seed,
                                 const std::string& out_dir = "") {
  cfg.validate();
  if (data.train.empty()) {
    throw ConfigError("run_training: scenario has no domains");
  }

  std::optional<RunPaths> paths;
  std::unique_ptr<CsvWriter> train_csv, fdrt_csv;
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
      throw DataError("run_training: cannot create '" + out_dir +
                      "': " + ec.message());
    }
    paths = RunPaths{out_dir};
    write_resolved_config(cfg, paths->config_snapshot());
    train_csv = std::make_unique<CsvWriter>(paths->train_log(),
                                            train_log_header());
    fdrt_csv = std::make_unique<CsvWriter>(paths->fdrt_log(),
                                           fdrt_log_header());
  }

  RunArtifacts art;
  art.seed = seed;

  std::vector<DomainDataset> meta_train, meta_val;
  build_meta_domains(cfg, data, seed, &meta_train, &meta_val);

  art.model = SegModel(cfg.depth, cfg.base_channels, data.num_classes, 1);
  art.model.init_params(seed);

  const MetaConfig mcfg = cfg.to_meta_config();
  int epoch_counter = 0;
  const auto one_epoch = [&](SegModel* model) {
    const EpochRecord rec = run_metastyle_epoch(model, meta_train, &art.bank,
                                                mcfg, epoch_counter++, seed);
    for (const auto& d : rec.domains) {
      if (!std::isfinite(d.mean.l_total) || !std::isfinite(d.query_loss)) {
        throw NumericError("run_training: non-finite loss at epoch " +
                           std::to_string(rec.epoch));
      }
    }
    if (train_csv) append_epoch_rows(train_csv.get(), rec);
    if (paths) art.bank.save_file(paths->style_bank());
    art.epochs.push_back(rec);
  };

  for (int e = 0; e < cfg.epochs_meta; ++e) {
    one_epoch(&art.model);
  }

  art.val_dice_before_fdrt =
      mean_score(evaluate_domains(art.model, meta_val, cfg.batch_size));
  art.val_dice_after_fdrt = art.val_dice_before_fdrt;

  if (cfg.fdrt) {
    const FDRTConfig fcfg = cfg.to_fdrt_config();
    art.model = run_fdrt(art.model, meta_train, meta_val, fcfg, seed,
                         one_epoch, &art.fdrt_rounds);
    art.val_dice_after_fdrt =
        mean_score(evaluate_domains(art.model, meta_val, cfg.batch_size));
    if (fdrt_csv) append_fdrt_rows(fdrt_csv.get(), art.fdrt_rounds);
  }

  if (paths) {
    art.model.save_checkpoint(paths->checkpoint(), cfg.resolved());
    art.bank.save_file(paths->style_bank());
  }
  return art;
}

// ---------------------------------------------------------------------------
// Held-out evaluation: per-domain Dice and Hausdorff distance over test
// splits, plus an aligned text table with an average row.
// ---------------------------------------------------------------------------

struct EvalRow {
  int domain_id = 0;
  std::string name;
  double dice = 0.0;
  double hausdorff = 0.0;
  int images = 0;
};

// Per-image foreground-class means of Dice and Hausdorff distance between
// the argmax prediction and the reference mask, averaged over the dataset.
inline EvalRow evaluate_test_set(const SegModel& model,
                                 const DomainDataset& ds,
                                 int batch_size = 8) {
  ds.validate("evaluate_test_set");
  EvalRow row;
  row.domain_id = ds.domain_id;
  row.name = ds.name;
  row.images = ds.size();
  int done = 0;
  while (done < ds.size()) {
    const int take = std::min(batch_size, ds.size() - done);
    std::vector<std::size_t> idx(take);
    for (int i = 0; i < take; ++i) idx[i] = static_cast<std::size_t>(done + i);
    DomainDataset chunk = ds.take(idx);
    const ForwardResult fwd = model.forward(chunk.images);
    const MaskBatch pred = predict_labels(fwd.probs);
    for (int i = 0; i < take; ++i) {
      double dice = 0.0, hd = 0.0;
      for (int k = 1; k < ds.num_classes; ++k) {
        const BinaryMask p = class_mask(pred, i, k);
        const BinaryMask g = class_mask(chunk.masks, i, k);
        dice += dice_coefficient(p, g);
        hd += hausdorff_distance(p, g);
      }
      const double fg = static_cast<double>(ds.num_classes - 1);
      row.dice += dice / fg;
      row.hausdorff += hd / fg;
    }
    done += take;
  }
  row.dice /= static_cast<double>(ds.size());
  row.hausdorff /= static_cast<double>(ds.size());
  return row;
}

inline std::vector<EvalRow> evaluate_test_sets(
    const SegModel& model, const std::vector<DomainDataset>& sets,
    int batch_size = 8) {
  if (sets.empty()) throw ConfigError("evaluate_test_sets: no datasets");
  std::vector<EvalRow> rows;
  rows.reserve(sets.size() + 1);
  for (const auto& ds : sets) {
    rows.push_back(evaluate_test_set(model, ds, batch_size));
  }
  EvalRow avg;
  avg.domain_id = -1;
  avg.name = "average";
  for (const auto& r : rows) {
    avg.dice += r.dice;
    avg.hausdorff += r.hausdorff;
    avg.images += r.images;
  }
  avg.dice /= static_cast<double>(rows.size());
  avg.hausdorff /= static_cast<double>(rows.size());
  rows.push_back(avg);
  return rows;
}

inline void write_eval_csv(const std::vector<EvalRow>& rows,
                           const std::string& path) {
  CsvWriter csv(path, {"domain", "name", "dice", "hausdorff", "images"});
  for (const auto& r : rows) {
    csv.row({CsvWriter::num(r.domain_id), r.name, CsvWriter::num(r.dice),
             CsvWriter::num(r.hausdorff), CsvWriter::num(r.images)});
  }
}

// Aligned text table; one row per domain plus the average row.
inline std::string format_eval_table(const std::vector<EvalRow>& rows) {
  std::size_t name_w = 6;
  for (const auto& r : rows) name_w = std::max(name_w, r.name.size());
  char buf[160];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%-*s  %10s  %12s  %7s\n",
                static_cast<int>(name_w), "domain", "dice", "hausdorff",
                "images");
  out += buf;
  out += std::string(name_w + 2 + 10 + 2 + 12 + 2 + 7, '-') + "\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-*s  %10.4f  %12.4f  %7d\n",
                  static_cast<int>(name_w), r.name.c_str(), r.dice,
                  r.hausdorff, r.images);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Multi-seed summary (per-seed rows plus mean and stddev rows; stddev is the
// population standard deviation over seeds).
// ---------------------------------------------------------------------------

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::vector<EvalRow> test_rows;  // includes the trailing average row
};

inline void write_seed_summary(const std::vector<SeedOutcome>& outcomes,
                               const std::string& path) {
  if (outcomes.empty()) throw ConfigError("write_seed_summary: no runs");
  const std::size_t cols = outcomes.front().test_rows.size();
  for (const auto& o : outcomes) {
    if (o.test_rows.size() != cols) {
      throw ConfigError("write_seed_summary: runs report different domains");
    }
  }
  std::vector<std::string> header{"seed"};
  for (const auto& r : outcomes.front().test_rows) {
    header.push_back("dice_" + r.name);
  }
  CsvWriter csv(path, header);
  std::vector<double> sum(cols, 0.0), sumsq(cols, 0.0);
  for (const auto& o : outcomes) {
    std::vector<std::string> row{std::to_string(o.seed)};
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = o.test_rows[c].dice;
      sum[c] += v;
      sumsq[c] += v * v;
      row.push_back(CsvWriter::num(v));
    }
    csv.row(row);
  }
  const double n = static_cast<double>(outcomes.size());
  std::vector<std::string> mean_row{"mean"}, std_row{"stddev"};
  for (std::size_t c = 0; c < cols; ++c) {
    const double m = sum[c] / n;
    const double var = std::max(0.0, sumsq[c] / n - m * m);
    mean_row.push_back(CsvWriter::num(m));
    std_row.push_back(CsvWriter::num(std::sqrt(var)));
  }
  csv.row(mean_row);
  csv.row(std_row);
}

}  // namespace metastyle

#endif  // METASTYLE_TRAIN_RUNNER_HPP_
