// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver. Subcommands:
//   generate-data   materialize a synthetic benchmark scenario on disk
//   train           augmented-domain episodic training + feedback retraining
//   eval            score a checkpoint on held-out test splits (Dice / HD)
//   ablate          toggle-combination study on one scenario
//   report          render plots from the CSV logs of a run
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 numeric failure (non-finite loss or gradients).

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metastyle/metastyle.hpp"

namespace {

namespace fs = std::filesystem;
using namespace metastyle;

// Shared --config/--set handling: defaults, then file, then overrides.
struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> overrides;

  TrainConfig resolve() const {
    TrainConfig cfg;
    if (!config_path.empty()) load_config_file(&cfg, config_path);
    for (const auto& o : overrides) apply_config_override(&cfg, o);
    cfg.validate();
    return cfg;
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path,
                    "flat key=value configuration file");
    cmd->add_option("--set", overrides,
                    "override one key, e.g. --set epochs_meta=30 "
                    "(repeatable; applied after --config)");
  }
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  return internal::parse_config_seeds("--seeds", text);
}

// ---------------------------------------------------------------------------

int cmd_generate_data(const ConfigArgs& cargs, const std::string& data_dir,
                      const std::string& scenario_flag, std::uint64_t seed,
                      bool force) {
  TrainConfig cfg = cargs.resolve();
  if (!scenario_flag.empty()) cfg.scenario = scenario_flag;
  (void)scenario_styles(cfg.scenario);  // reject unknown scenario names early

  if (fs::exists(data_dir) && !fs::is_empty(data_dir) && !force) {
    throw DataError("output directory '" + data_dir +
                    "' exists and is not empty (use --force to overwrite)");
  }
  ScenarioCounts counts;
  counts.n_train = cfg.train_count;
  counts.n_val = cfg.val_count;
  counts.n_test = cfg.test_count;
  const Scenario sc =
      generate_scenario(cfg.scenario, seed, counts, cfg.image_size);
  write_scenario_dir(sc, data_dir);
  {
    std::ofstream meta(fs::path(data_dir) / "scenario.meta", std::ios::app);
    meta << "master_seed=" << seed << "\n";
  }
  std::cout << "wrote scenario '" << sc.name << "' (" << sc.domains.size()
            << " domains, " << counts.n_train << "/" << counts.n_val << "/"
            << counts.n_test << " per split) to " << data_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

// Trains every seed sequentially; each seed gets its own subdirectory.
// For parallel multi-seed runs launch independent processes with disjoint
// --out-dir values and one seed each.
int cmd_train(const ConfigArgs& cargs, const std::string& data_dir,
              const std::string& out_dir, const std::string& seeds_flag,
              const std::string& checkpoint_flag,
              const std::string& bank_flag) {
  TrainConfig cfg = cargs.resolve();
  if (!seeds_flag.empty()) cfg.seeds = parse_seed_list(seeds_flag);
  if (cfg.seeds.size() > 1 &&
      (!checkpoint_flag.empty() || !bank_flag.empty())) {
    throw ConfigError(
        "--checkpoint/--style-bank require a single seed (got " +
        std::to_string(cfg.seeds.size()) + ")");
  }

  const LoadedScenario data = load_scenario_dir(data_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw DataError("cannot create '" + out_dir + "': " + ec.message());
  }
  write_resolved_config(cfg, out_dir + "/config.resolved");

  std::vector<SeedOutcome> outcomes;
  for (const std::uint64_t seed : cfg.seeds) {
    const std::string seed_dir = out_dir + "/seed-" + std::to_string(seed);
    std::cout << "seed " << seed << ": training (meta epochs "
              << cfg.epochs_meta << ", feedback " << (cfg.fdrt ? "on" : "off")
              << ") -> " << seed_dir << "\n";
    RunArtifacts art = run_training(cfg, data, seed, seed_dir);

    const RunPaths paths{seed_dir};
    const auto rows = evaluate_test_sets(art.model, data.test, cfg.batch_size);
    write_eval_csv(rows, paths.eval_csv());
    std::ofstream table(paths.eval_table(), std::ios::trunc);
    table << format_eval_table(rows);
    outcomes.push_back({seed, rows});
    std::cout << format_eval_table(rows);
    if (!checkpoint_flag.empty()) {
      art.model.save_checkpoint(checkpoint_flag, cfg.resolved());
    }
    if (!bank_flag.empty()) art.bank.save_file(bank_flag);
  }
  write_seed_summary(outcomes, out_dir + "/summary.csv");
  std::cout << "summary written to " << out_dir << "/summary.csv\n";
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_eval(const ConfigArgs& cargs, const std::string& data_dir,
             const std::string& checkpoint, const std::string& out_dir) {
  TrainConfig cfg = cargs.resolve();
  const LoadedScenario data = load_scenario_dir(data_dir);
  const SegModel model = SegModel::load_checkpoint(checkpoint);
  if (model.num_classes() != data.num_classes) {
    throw ConfigError("checkpoint predicts " +
                      std::to_string(model.num_classes()) +
                      " classes but the scenario has " +
                      std::to_string(data.num_classes));
  }
  const auto rows = evaluate_test_sets(model, data.test, cfg.batch_size);
  std::cout << format_eval_table(rows);
  if (!out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
      throw DataError("cannot create '" + out_dir + "': " + ec.message());
    }
    write_eval_csv(rows, out_dir + "/eval.csv");
    std::ofstream table(out_dir + "/eval.txt", std::ios::trunc);
    table << format_eval_table(rows);
    std::cout << "written to " << out_dir << "/eval.{csv,txt}\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct AblationRow {
  std::string label;
  bool mka, metastyle, fdrt, l_align, l_cons;
};

// Held-out mean Dice over the target domains (every domain after the source).
double target_mean_dice(const SegModel& model, const LoadedScenario& data,
                        int batch_size) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t d = 1; d < data.test.size(); ++d) {
    sum += evaluate_dataset(model, data.test[d], batch_size);
    ++n;
  }
  if (n == 0) throw ConfigError("ablate: scenario has no target domains");
  return sum / n;
}

int cmd_ablate(const ConfigArgs& cargs, const std::string& data_dir,
               const std::string& out_dir, const std::string& seeds_flag) {
  TrainConfig base = cargs.resolve();
  if (!seeds_flag.empty()) base.seeds = parse_seed_list(seeds_flag);
  const std::uint64_t seed = base.seeds.front();
  const LoadedScenario data = load_scenario_dir(data_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw DataError("cannot create '" + out_dir + "': " + ec.message());
  }
  write_resolved_config(base, out_dir + "/config.resolved");

  // Module study: all 8 on/off combinations of the three components, from
  // the all-off baseline ("Meta-Base") to the full system ("FGML-DG").
  std::vector<AblationRow> rows;
  for (int bits = 0; bits < 8; ++bits) {
    const bool mka = bits & 1, ms = bits & 2, fd = bits & 4;
    std::string label;
    if (bits == 0) {
      label = "Meta-Base";
    } else if (bits == 7) {
      label = "FGML-DG";
    } else {
      if (mka) label += "+MKA";
      if (ms) label += "+MetaStyle";
      if (fd) label += "+FDRT";
    }
    rows.push_back({label, mka, ms, fd, true, true});
  }
  // Loss study inside the full system: drop the alignment and consistency
  // terms one at a time, then both.
  rows.push_back({"FGML-DG (losses: both)", true, true, true, true, true});
  rows.push_back({"w/o L_align", true, true, true, false, true});
  rows.push_back({"w/o L_cons", true, true, true, true, false});
  rows.push_back({"w/o L_align & L_cons", true, true, true, false, false});

  CsvWriter csv(out_dir + "/ablation.csv",
                {"label", "mka", "metastyle", "fdrt", "l_align", "l_cons",
                 "target_dice"});
  std::string table;
  table += "configuration                 target Dice\n";
  table += "------------------------------------------\n";
  for (const auto& row : rows) {
    TrainConfig cfg = base;
    cfg.mka = row.mka;
    cfg.metastyle = row.metastyle;
    cfg.fdrt = row.fdrt;
    cfg.l_align = row.l_align;
    cfg.l_cons = row.l_cons;
    cfg.seeds = {seed};
    std::cout << "ablate: running '" << row.label << "'\n";
    const RunArtifacts art = run_training(cfg, data, seed, "");
    const double dice = target_mean_dice(art.model, data, cfg.batch_size);
    csv.row({row.label, row.mka ? "1" : "0", row.metastyle ? "1" : "0",
             row.fdrt ? "1" : "0", row.l_align ? "1" : "0",
             row.l_cons ? "1" : "0", CsvWriter::num(dice)});
    char line[96];
    std::snprintf(line, sizeof(line), "%-28s  %10.4f\n", row.label.c_str(),
                  dice);
    table += line;
  }
  std::ofstream out(out_dir + "/ablation.txt", std::ios::trunc);
  out << table;
  std::cout << table << "report written to " << out_dir
            << "/ablation.{csv,txt}\n";
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_report(const std::string& train_log, const std::string& fdrt_log,
               const std::string& eval_csv, const std::string& out_dir) {
  const auto files = write_report_plots(train_log, fdrt_log, eval_csv,
                                        out_dir);
  for (const auto& f : files) std::cout << "wrote " << f << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "metastyle: style-aware episodic training for single-source "
      "domain-generalized segmentation"};
  app.require_subcommand(1);

  // generate-data
  auto* gen = app.add_subcommand("generate-data",
                                 "materialize a synthetic scenario");
  ConfigArgs gen_cfg;
  gen_cfg.attach(gen);
  std::string gen_dir, gen_scenario;
  std::uint64_t gen_seed = 1;
  bool gen_force = false;
  gen->add_option("--data-dir", gen_dir, "output directory")->required();
  gen->add_option("--scenario", gen_scenario,
                  "brats-like or abdominal-like (overrides config)");
  gen->add_option("--seed", gen_seed, "master data seed (default 1)");
  gen->add_flag("--force", gen_force, "overwrite a non-empty directory");

  // train
  auto* train = app.add_subcommand("train", "train on a generated scenario");
  ConfigArgs train_cfg;
  train_cfg.attach(train);
  std::string train_data, train_out, train_seeds, train_ckpt, train_bank;
  train->add_option("--data-dir", train_data, "scenario directory")
      ->required();
  train->add_option("--out-dir", train_out, "run output directory")
      ->required();
  train->add_option("--seeds", train_seeds,
                    "comma-separated seed list (overrides config)");
  train->add_option("--checkpoint", train_ckpt,
                    "extra checkpoint output path (single seed only)");
  train->add_option("--style-bank", train_bank,
                    "extra style-bank output path (single seed only)");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  ConfigArgs ev_cfg;
  ev_cfg.attach(ev);
  std::string ev_data, ev_ckpt, ev_out;
  ev->add_option("--data-dir", ev_data, "scenario directory")->required();
  ev->add_option("--checkpoint", ev_ckpt, "checkpoint file")->required();
  ev->add_option("--out-dir", ev_out, "where to write eval.{csv,txt}");

  // ablate
  auto* ab = app.add_subcommand("ablate", "component/loss toggle study");
  ConfigArgs ab_cfg;
  ab_cfg.attach(ab);
  std::string ab_data, ab_out, ab_seeds;
  ab->add_option("--data-dir", ab_data, "scenario directory")->required();
  ab->add_option("--out-dir", ab_out, "report output directory")->required();
  ab->add_option("--seeds", ab_seeds, "seed list; the first seed is used");

  // report
  auto* rep = app.add_subcommand("report", "render plots from CSV logs");
  std::string rep_train, rep_fdrt, rep_eval, rep_out;
  rep->add_option("--train-log", rep_train, "train_log.csv path")->required();
  rep->add_option("--fdrt-log", rep_fdrt, "fdrt_log.csv path (optional)");
  rep->add_option("--eval-csv", rep_eval, "eval.csv path (optional)");
  rep->add_option("--out-dir", rep_out, "plot output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      return cmd_generate_data(gen_cfg, gen_dir, gen_scenario, gen_seed,
                               gen_force);
    }
    if (train->parsed()) {
      return cmd_train(train_cfg, train_data, train_out, train_seeds,
                       train_ckpt, train_bank);
    }
    if (ev->parsed()) return cmd_eval(ev_cfg, ev_data, ev_ckpt, ev_out);
    if (ab->parsed()) return cmd_ablate(ab_cfg, ab_data, ab_out, ab_seeds);
    if (rep->parsed()) {
      return cmd_report(rep_train, rep_fdrt, rep_eval, rep_out);
    }
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
