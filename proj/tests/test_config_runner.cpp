// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "metastyle/config.hpp"
#include "metastyle/plot.hpp"
#include "metastyle/train_runner.hpp"
#include "temp_dir.hpp"

using namespace metastyle;
using testutil::TempDir;

namespace {

bool params_equal(const SegModel& a, const SegModel& b) {
  if (a.params().size() != b.params().size()) return false;
  for (std::size_t i = 0; i < a.params().size(); ++i) {
    if (a.params()[i].v != b.params()[i].v) return false;
  }
  return true;
}

double max_pixel_gap(const Tensor4& a, const Tensor4& b) {
  REQUIRE(a.same_shape(b));
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  }
  return m;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  REQUIRE(out.good());
  out << text;
}

// A scenario small enough that a full training run takes well under a
// second, mirroring how the command-line driver feeds run_training.
LoadedScenario tiny_scenario(std::uint64_t seed) {
  ScenarioCounts counts;
  counts.n_train = 6;
  counts.n_val = 2;
  counts.n_test = 2;
  const Scenario sc = generate_scenario("brats-like", seed, counts, 16);
  LoadedScenario out;
  out.scenario = sc.name;
  out.num_classes = sc.num_classes;
  for (const auto& d : sc.domains) {
    out.names.push_back(d.name);
    out.train.push_back(d.train);
    out.val.push_back(d.val);
    out.test.push_back(d.test);
  }
  return out;
}

TrainConfig tiny_train_config() {
  TrainConfig cfg;
  cfg.train_count = 6;
  cfg.val_count = 2;
  cfg.test_count = 2;
  cfg.image_size = 16;
  cfg.depth = 2;
  cfg.base_channels = 4;
  cfg.num_aug_domains = 1;
  cfg.epochs_meta = 2;
  cfg.batch_size = 4;
  cfg.epochs_fdrt = 1;
  cfg.max_rounds = 1;
  cfg.seeds = {1};
  return cfg;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration: registry, file loading, overrides, validation.
// ---------------------------------------------------------------------------

TEST_CASE("default TrainConfig validates and snapshots cleanly", "[config]") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  const std::string text = cfg.resolved();
  CHECK(text.find("gamma = 0.01") != std::string::npos);
  CHECK(text.find("beta = 0.005") != std::string::npos);
  CHECK(text.find("scenario = brats-like") != std::string::npos);
  CHECK(text.find("seeds = 1,2,3,4,5") != std::string::npos);
  CHECK(text.find("mka = true") != std::string::npos);
  // Exactly one line per registered key.
  CHECK(static_cast<std::size_t>(
            std::count(text.begin(), text.end(), '\n')) ==
        config_keys().size());
}

TEST_CASE("resolved snapshot round-trips through the file loader",
          "[config]") {
  TempDir tmp;
  TrainConfig cfg;
  apply_config_override(&cfg, "gamma=0.02");
  apply_config_override(&cfg, "seeds=7,8");
  apply_config_override(&cfg, "mka=false");
  apply_config_override(&cfg, "scenario=abdominal-like");
  apply_config_override(&cfg, "meta_update_mode=literal");
  apply_config_override(&cfg, "plateau_tol=0.004");

  const std::string snapshot = tmp.file("config.resolved");
  write_resolved_config(cfg, snapshot);

  TrainConfig reloaded;
  load_config_file(&reloaded, snapshot);
  CHECK(reloaded.resolved() == cfg.resolved());
  CHECK(reloaded.gamma == 0.02);
  CHECK(reloaded.seeds == std::vector<std::uint64_t>{7, 8});
  CHECK_FALSE(reloaded.mka);
}

TEST_CASE("overrides win over the file, which wins over defaults",
          "[config]") {
  TempDir tmp;
  const std::string path = tmp.file("run.cfg");
  write_text(path,
             "# comment line\n"
             "gamma = 0.02   # trailing comment\n"
             "\n"
             "depth = 2\r\n"
             "fdrt = off\n");

  TrainConfig cfg;
  load_config_file(&cfg, path);
  CHECK(cfg.gamma == 0.02);
  CHECK(cfg.depth == 2);
  CHECK_FALSE(cfg.fdrt);
  CHECK(cfg.beta == 0.005);  // untouched default

  apply_config_override(&cfg, "gamma=0.03");
  CHECK(cfg.gamma == 0.03);
  CHECK(cfg.depth == 2);
}

TEST_CASE("config parsing rejects malformed input", "[config]") {
  TrainConfig cfg;
  SECTION("unknown key") {
    CHECK_THROWS_AS(apply_config_override(&cfg, "warp_factor=9"),
                    ConfigError);
  }
  SECTION("missing equals sign") {
    CHECK_THROWS_AS(apply_config_override(&cfg, "gamma"), ConfigError);
  }
  SECTION("empty key") {
    CHECK_THROWS_AS(apply_config_override(&cfg, "=0.5"), ConfigError);
  }
  SECTION("non-numeric double") {
    CHECK_THROWS_AS(apply_config_override(&cfg, "gamma=fast"), ConfigError);
  }
  SECTION("fractional integer") {
    CHECK_THROWS_AS(apply_config_override(&cfg, "epochs_meta=1.5"),
                    ConfigError);
  }
  SECTION("unparsable bool") {
    CHECK_THROWS_AS(apply_config_override(&cfg, "mka=maybe"), ConfigError);
  }
  SECTION("empty seed list") {
    CHECK_THROWS_AS(apply_config_override(&cfg, "seeds=,"), ConfigError);
  }
  SECTION("bad seed entry") {
    CHECK_THROWS_AS(apply_config_override(&cfg, "seeds=1,x"), ConfigError);
  }
  SECTION("missing file") {
    CHECK_THROWS_AS(load_config_file(&cfg, "/nonexistent/nowhere.cfg"),
                    ConfigError);
  }
  SECTION("bad line reports file and line number") {
    TempDir tmp;
    const std::string path = tmp.file("bad.cfg");
    write_text(path, "gamma = 0.01\nnot_a_key = 3\n");
    try {
      load_config_file(&cfg, path);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
  }
}

TEST_CASE("TrainConfig::validate enforces its ranges", "[config]") {
  const auto expect_reject = [](const char* assignment) {
    TrainConfig cfg;
    apply_config_override(&cfg, assignment);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  };
  expect_reject("depth=7");
  expect_reject("depth=1");
  expect_reject("base_channels=0");
  expect_reject("image_size=63");      // not a multiple of 2^(depth-1)
  expect_reject("train_fraction=1.0");
  expect_reject("num_aug_domains=0");
  expect_reject("aug_strength=1.5");
  expect_reject("aug_invert_prob=-0.1");
  // Zero rates are allowed (a zero query rate is a documented edge case);
  // negative ones are not.
  expect_reject("gamma=-0.01");
  expect_reject("lambda=1.5");
  expect_reject("meta_update_mode=bogus");
  expect_reject("style_source=bogus");
  expect_reject("gap_log_base=2");
  expect_reject("fdrt_optimizer=rmsprop");
  expect_reject("eta=-0.5");
  expect_reject("max_rounds=0");
  expect_reject("train_count=1");

  TrainConfig cfg;
  cfg.seeds.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("TrainConfig maps onto the loop and feedback configs", "[config]") {
  TrainConfig cfg;
  apply_config_override(&cfg, "mka=false");
  apply_config_override(&cfg, "metastyle=false");
  apply_config_override(&cfg, "steps_per_domain=3");
  apply_config_override(&cfg, "meta_update_mode=literal");
  apply_config_override(&cfg, "style_source=input");
  apply_config_override(&cfg, "gap_log_base=e");
  apply_config_override(&cfg, "fdrt_optimizer=sgd");
  apply_config_override(&cfg, "plateau_tol=0.01");

  const MetaConfig m = cfg.to_meta_config();
  CHECK_FALSE(m.use_align);  // mka gates both loss terms
  CHECK_FALSE(m.use_cons);
  CHECK_FALSE(m.use_style_recall);
  CHECK(m.steps_per_domain == 3);
  CHECK(m.update_mode == MetaUpdateMode::kLiteral);
  CHECK(m.style_source == StyleSource::kInput);
  CHECK(m.gamma == cfg.gamma);
  CHECK(m.beta == cfg.beta);
  CHECK(m.lambda == cfg.lambda);
  CHECK(m.recall.alpha == cfg.alpha);
  CHECK(m.recall.epsilon == cfg.epsilon);

  const FDRTConfig f = cfg.to_fdrt_config();
  CHECK(f.log_base == GapLogBase::kE);
  CHECK(f.optimizer == OptimizerKind::kSgd);
  CHECK(f.eta == cfg.eta);
  CHECK(f.epochs == cfg.epochs_fdrt);
  CHECK(f.max_rounds == cfg.max_rounds);
  CHECK(f.plateau_tol == 0.01);

  // With mka on but a single term disabled, only that term goes dark.
  TrainConfig partial;
  apply_config_override(&partial, "l_align=false");
  CHECK_FALSE(partial.to_meta_config().use_align);
  CHECK(partial.to_meta_config().use_cons);
}

// ---------------------------------------------------------------------------
// Scenario directories.
// ---------------------------------------------------------------------------

TEST_CASE("scenario directories round-trip through disk", "[runner]") {
  TempDir tmp;
  ScenarioCounts counts;
  counts.n_train = 3;
  counts.n_val = 2;
  counts.n_test = 2;
  const Scenario sc = generate_scenario("brats-like", 42, counts, 16);
  const std::string dir = tmp.file("scenario");
  write_scenario_dir(sc, dir);

  const LoadedScenario got = load_scenario_dir(dir);
  CHECK(got.scenario == "brats-like");
  CHECK(got.num_classes == 2);
  REQUIRE(got.names.size() == sc.domains.size());
  for (std::size_t i = 0; i < sc.domains.size(); ++i) {
    CHECK(got.names[i] == sc.domains[i].name);
    CHECK(got.train[i].domain_id == sc.domains[i].train.domain_id);
    CHECK(got.train[i].size() == 3);
    CHECK(got.val[i].size() == 2);
    CHECK(got.test[i].size() == 2);
    CHECK(got.train[i].masks.labels == sc.domains[i].train.masks.labels);
    CHECK(got.test[i].masks.labels == sc.domains[i].test.masks.labels);
    // 16-bit PNG quantization bounds the image round-trip error.
    CHECK(max_pixel_gap(got.train[i].images, sc.domains[i].train.images) <
          8e-6);
    CHECK(max_pixel_gap(got.val[i].images, sc.domains[i].val.images) < 8e-6);
  }
}

TEST_CASE("load_scenario_dir rejects broken layouts", "[runner]") {
  TempDir tmp;
  SECTION("missing scenario.meta") {
    CHECK_THROWS_AS(load_scenario_dir(tmp.path.string()), DataError);
  }
  SECTION("meta without a domain list") {
    write_text(tmp.file("scenario.meta"), "scenario=x\nnum_classes=2\n");
    CHECK_THROWS_AS(load_scenario_dir(tmp.path.string()), DataError);
  }
  SECTION("meta with an empty domain list") {
    write_text(tmp.file("scenario.meta"),
               "scenario=x\nnum_classes=2\ndomains=\n");
    CHECK_THROWS_AS(load_scenario_dir(tmp.path.string()), DataError);
  }
}

// ---------------------------------------------------------------------------
// Meta-domain construction.
// ---------------------------------------------------------------------------

TEST_CASE("build_meta_domains pairs train and val styles", "[runner]") {
  const LoadedScenario data = tiny_scenario(7);
  const TrainConfig cfg = tiny_train_config();

  std::vector<DomainDataset> train, val;
  build_meta_domains(cfg, data, 11, &train, &val);
  REQUIRE(train.size() == 1 + static_cast<std::size_t>(cfg.num_aug_domains));
  REQUIRE(val.size() == train.size());
  // Slot 0 is the untouched source pair.
  CHECK(train[0].domain_id == data.train[0].domain_id);
  CHECK(max_pixel_gap(train[0].images, data.train[0].images) == 0.0);
  CHECK(max_pixel_gap(val[0].images, data.val[0].images) == 0.0);
  for (std::size_t k = 1; k < train.size(); ++k) {
    CHECK(train[k].domain_id == val[k].domain_id);
    CHECK(val[k].name == train[k].name + "-val");
    CHECK(train[k].size() == data.train[0].size());
    CHECK(val[k].size() == data.val[0].size());
    // Same geometry, different style: masks carry over, images move.
    CHECK(train[k].masks.labels == data.train[0].masks.labels);
    CHECK(max_pixel_gap(train[k].images, data.train[0].images) > 0.0);
  }

  // The curve draw is a pure function of the run seed.
  std::vector<DomainDataset> train2, val2;
  build_meta_domains(cfg, data, 11, &train2, &val2);
  CHECK(max_pixel_gap(train[1].images, train2[1].images) == 0.0);
  std::vector<DomainDataset> train3, val3;
  build_meta_domains(cfg, data, 12, &train3, &val3);
  CHECK(max_pixel_gap(train[1].images, train3[1].images) > 0.0);
}

// ---------------------------------------------------------------------------
// run_training.
// ---------------------------------------------------------------------------

TEST_CASE("run_training produces a deterministic in-memory run", "[runner]") {
  const LoadedScenario data = tiny_scenario(21);
  const TrainConfig cfg = tiny_train_config();

  const RunArtifacts a = run_training(cfg, data, 3);
  const RunArtifacts b = run_training(cfg, data, 3);

  CHECK(a.seed == 3);
  CHECK(params_equal(a.model, b.model));
  REQUIRE(a.epochs.size() >= static_cast<std::size_t>(cfg.epochs_meta));
  REQUIRE(a.epochs.size() == b.epochs.size());
  for (std::size_t e = 0; e < a.epochs.size(); ++e) {
    REQUIRE(a.epochs[e].domains.size() == 2);  // source + 1 augmented
    for (std::size_t d = 0; d < 2; ++d) {
      CHECK(a.epochs[e].domains[d].mean.l_total ==
            b.epochs[e].domains[d].mean.l_total);
      CHECK(a.epochs[e].domains[d].query_loss ==
            b.epochs[e].domains[d].query_loss);
    }
  }
  CHECK(a.val_dice_before_fdrt >= 0.0);
  CHECK(a.val_dice_before_fdrt <= 1.0);
  // Feedback retraining returns the best checkpoint, never a worse one.
  CHECK(a.val_dice_after_fdrt >= a.val_dice_before_fdrt - 1e-12);
  CHECK(!a.fdrt_rounds.empty());
  CHECK(a.bank.size() >= 1);
}

TEST_CASE("run_training with the feedback phase off leaves scores untouched",
          "[runner]") {
  const LoadedScenario data = tiny_scenario(22);
  TrainConfig cfg = tiny_train_config();
  cfg.fdrt = false;

  const RunArtifacts art = run_training(cfg, data, 4);
  CHECK(art.fdrt_rounds.empty());
  CHECK(art.val_dice_after_fdrt == art.val_dice_before_fdrt);
  CHECK(art.epochs.size() == static_cast<std::size_t>(cfg.epochs_meta));
}

TEST_CASE("run_training writes the documented artifact set", "[runner]") {
  namespace fs = std::filesystem;
  TempDir tmp;
  const LoadedScenario data = tiny_scenario(23);
  const TrainConfig cfg = tiny_train_config();
  const std::string out_dir = tmp.file("run");

  const RunArtifacts art = run_training(cfg, data, 5, out_dir);
  const RunPaths paths{out_dir};

  REQUIRE(fs::exists(paths.config_snapshot()));
  REQUIRE(fs::exists(paths.checkpoint()));
  REQUIRE(fs::exists(paths.style_bank()));
  REQUIRE(fs::exists(paths.train_log()));
  REQUIRE(fs::exists(paths.fdrt_log()));

  // The snapshot reproduces the configuration verbatim.
  std::ifstream snap(paths.config_snapshot());
  std::stringstream buf;
  buf << snap.rdbuf();
  CHECK(buf.str() == cfg.resolved());

  // Training log: one row per (epoch, domain) under the documented header.
  const CsvTable train = read_csv(paths.train_log());
  CHECK(train.header == train_log_header());
  std::size_t expected_rows = 0;
  for (const auto& e : art.epochs) expected_rows += e.domains.size();
  CHECK(train.rows.size() == expected_rows);

  // Feedback log: one row per (round, domain).
  const CsvTable fdrt = read_csv(paths.fdrt_log());
  CHECK(fdrt.header == fdrt_log_header());
  std::size_t fdrt_rows = 0;
  for (const auto& r : art.fdrt_rounds) fdrt_rows += r.scores.size();
  CHECK(fdrt.rows.size() == fdrt_rows);

  // Checkpoint and style bank reload to the in-memory artifacts.
  std::string snapshot;
  const SegModel ck = SegModel::load_checkpoint(paths.checkpoint(), &snapshot);
  CHECK(params_equal(ck, art.model));
  CHECK(snapshot == cfg.resolved());
  const StyleBank bank = StyleBank::load_file(paths.style_bank());
  CHECK(bank == art.bank);
}

TEST_CASE("run_training rejects an empty scenario", "[runner]") {
  const TrainConfig cfg = tiny_train_config();
  CHECK_THROWS_AS(run_training(cfg, LoadedScenario{}, 1), ConfigError);
}

// ---------------------------------------------------------------------------
// Held-out evaluation tables.
// ---------------------------------------------------------------------------

TEST_CASE("evaluate_test_sets appends a correct average row", "[runner]") {
  const LoadedScenario data = tiny_scenario(31);
  SegModel model(2, 4, data.num_classes, 1);
  model.init_params(32);

  std::vector<DomainDataset> sets{data.test[0], data.test[1]};
  const auto rows = evaluate_test_sets(model, sets, 4);
  REQUIRE(rows.size() == 3);
  // Rows carry the dataset's own name (the generator suffixes the split).
  CHECK(rows[0].name == data.names[0] + "-test");
  CHECK(rows[2].name == "average");
  CHECK(rows[2].domain_id == -1);
  CHECK(rows[2].images == rows[0].images + rows[1].images);
  CHECK(rows[2].dice ==
        Catch::Approx((rows[0].dice + rows[1].dice) / 2.0).margin(1e-12));
  CHECK(rows[2].hausdorff ==
        Catch::Approx((rows[0].hausdorff + rows[1].hausdorff) / 2.0)
            .margin(1e-12));
  for (const auto& r : rows) {
    CHECK(r.dice >= 0.0);
    CHECK(r.dice <= 1.0);
    CHECK(r.hausdorff >= 0.0);
  }
  CHECK_THROWS_AS(evaluate_test_sets(model, {}, 4), ConfigError);
}

TEST_CASE("a model evaluated against its own predictions scores perfectly",
          "[runner]") {
  const LoadedScenario data = tiny_scenario(33);
  SegModel model(2, 4, data.num_classes, 1);
  model.init_params(34);

  DomainDataset ds = data.test[0];
  ds.masks = predict_labels(model.forward(ds.images).probs);
  const EvalRow row = evaluate_test_set(model, ds, 4);
  CHECK(row.dice == 1.0);
  CHECK(row.hausdorff == 0.0);
}

TEST_CASE("eval tables render and serialize consistently", "[runner]") {
  TempDir tmp;
  std::vector<EvalRow> rows(3);
  rows[0] = {0, "source", 0.91, 2.5, 10};
  rows[1] = {1, "shifted", 0.72, 6.25, 10};
  rows[2] = {-1, "average", 0.815, 4.375, 20};

  const std::string csv_path = tmp.file("eval.csv");
  write_eval_csv(rows, csv_path);
  const CsvTable table = read_csv(csv_path);
  REQUIRE(table.header ==
          std::vector<std::string>{"domain", "name", "dice", "hausdorff",
                                   "images"});
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0][1] == "source");
  CHECK(table.rows[2][1] == "average");
  CHECK(csv_to_double(table, 1, 2, csv_path) == 0.72);

  const std::string text = format_eval_table(rows);
  // Header, separator, one line per row.
  CHECK(static_cast<std::size_t>(
            std::count(text.begin(), text.end(), '\n')) == 2 + rows.size());
  CHECK(text.find("average") != std::string::npos);
  CHECK(text.find("0.9100") != std::string::npos);
}

TEST_CASE("write_seed_summary reports mean and population stddev",
          "[runner]") {
  TempDir tmp;
  SeedOutcome a, b;
  a.seed = 1;
  b.seed = 2;
  EvalRow r;
  r.name = "source";
  r.dice = 0.2;
  a.test_rows.push_back(r);
  r.dice = 0.4;
  b.test_rows.push_back(r);

  const std::string path = tmp.file("summary.csv");
  write_seed_summary({a, b}, path);
  const CsvTable table = read_csv(path);
  REQUIRE(table.header == std::vector<std::string>{"seed", "dice_source"});
  REQUIRE(table.rows.size() == 4);  // two seeds + mean + stddev
  CHECK(table.rows[0][0] == "1");
  CHECK(table.rows[2][0] == "mean");
  CHECK(table.rows[3][0] == "stddev");
  CHECK(csv_to_double(table, 2, 1, path) == Catch::Approx(0.3).margin(1e-15));
  CHECK(csv_to_double(table, 3, 1, path) == Catch::Approx(0.1).margin(1e-12));

  SECTION("mismatched domain lists are rejected") {
    SeedOutcome c = b;
    c.test_rows.push_back(r);
    CHECK_THROWS_AS(write_seed_summary({a, c}, tmp.file("bad.csv")),
                    ConfigError);
  }
  SECTION("no runs at all") {
    CHECK_THROWS_AS(write_seed_summary({}, tmp.file("none.csv")),
                    ConfigError);
  }
}

// ---------------------------------------------------------------------------
// Report plots.
// ---------------------------------------------------------------------------

TEST_CASE("write_report_plots renders the standard chart set", "[plot]") {
  namespace fs = std::filesystem;
  TempDir tmp;
  const LoadedScenario data = tiny_scenario(41);
  const TrainConfig cfg = tiny_train_config();
  const std::string out_dir = tmp.file("run");
  const RunArtifacts art = run_training(cfg, data, 6, out_dir);
  const RunPaths paths{out_dir};

  std::vector<DomainDataset> sets{data.test[0], data.test[1]};
  write_eval_csv(evaluate_test_sets(art.model, sets, 4), paths.eval_csv());

  const auto written =
      write_report_plots(paths.train_log(), paths.fdrt_log(),
                         paths.eval_csv(), tmp.file("plots"));
  REQUIRE(written.size() == 3);
  CHECK(fs::path(written[0]).filename() == "loss_curves.png");
  CHECK(fs::path(written[1]).filename() == "weight_trajectory.png");
  CHECK(fs::path(written[2]).filename() == "dice_bars.png");
  for (const auto& p : written) {
    REQUIRE(fs::exists(p));
    CHECK(fs::file_size(p) > 0);
  }
}

TEST_CASE("write_report_plots falls back when only the train log exists",
          "[plot]") {
  namespace fs = std::filesystem;
  TempDir tmp;
  const LoadedScenario data = tiny_scenario(42);
  TrainConfig cfg = tiny_train_config();
  cfg.fdrt = false;
  const std::string out_dir = tmp.file("run");
  run_training(cfg, data, 7, out_dir);
  const RunPaths paths{out_dir};

  const auto written = write_report_plots(paths.train_log(), "", "",
                                          tmp.file("plots"));
  REQUIRE(written.size() == 3);
  for (const auto& p : written) CHECK(fs::file_size(p) > 0);
}

TEST_CASE("write_report_plots rejects an empty training log", "[plot]") {
  TempDir tmp;
  const std::string log = tmp.file("train_log.csv");
  { CsvWriter csv(log, train_log_header()); }  // header only, no rows
  CHECK_THROWS_AS(write_report_plots(log, "", "", tmp.file("plots")),
                  DataError);
}

TEST_CASE("chart renderers handle degenerate and bad input", "[plot]") {
  SECTION("constant series renders as a flat line") {
    Series s;
    s.label = "flat";
    s.x = {0, 1, 2};
    s.y = {0.5, 0.5, 0.5};
    const cv::Mat img = render_line_chart("t", "x", "y", {s});
    CHECK(img.rows == 600);
    CHECK(img.cols == 900);
  }
  SECTION("single-point series renders as a dot") {
    Series s;
    s.label = "dot";
    s.x = {3};
    s.y = {0.25};
    CHECK_NOTHROW(render_line_chart("t", "x", "y", {s}));
  }
  SECTION("no series") {
    CHECK_THROWS_AS(render_line_chart("t", "x", "y", {}), ValueError);
  }
  SECTION("mismatched x/y") {
    Series s;
    s.label = "bad";
    s.x = {0, 1};
    s.y = {0.5};
    CHECK_THROWS_AS(render_line_chart("t", "x", "y", {s}), DimensionError);
  }
  SECTION("non-finite values") {
    Series s;
    s.label = "nan";
    s.x = {0, 1};
    s.y = {0.5, std::nan("")};
    CHECK_THROWS_AS(render_line_chart("t", "x", "y", {s}), NumericError);
  }
  SECTION("bar chart with negative values") {
    CHECK_NOTHROW(render_bar_chart("t", {"a", "b"}, {-0.5, 0.75}));
  }
  SECTION("bar chart label mismatch") {
    CHECK_THROWS_AS(render_bar_chart("t", {"a"}, {1.0, 2.0}),
                    DimensionError);
  }
  SECTION("bar chart with no bars") {
    CHECK_THROWS_AS(render_bar_chart("t", {}, {}), ValueError);
  }
}
