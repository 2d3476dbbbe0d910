// Copyright 2026 The sarahnc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sarah/errors.hpp"
#include "sarah/harness/config.hpp"
#include "sarah/harness/experiment.hpp"
#include "sarah/harness/trace.hpp"

namespace sarah::harness {
namespace {

namespace fs = std::filesystem;

std::vector<CellConfig> cells_of(const std::string& text) { return resolve_cells(parse_config(text)); }

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sarah_test_harness" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kComparison = R"(
# quadratic, every algorithm
problem = quadratic
passes = 4
seed = 3
[sarah]
algo = sarah
eta = 0.05
m = 0.5n
[sarah+]
algo = sarah+
eta = 0.05
[svrg]
algo = svrg
eta = 0.05
b = 2
[sgd]
algo = sgd
eta = 0.01
[sgd-m]
algo = sgd-m
eta = 0.01
beta = 0.5
[adagrad]
algo = adagrad
eta = 0.1
b = 5
)";

TEST(Config, UnknownKeyIsNamed) {
  try {
    parse_config("eta = 0.1\nlearning_rate = 0.2\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "learning_rate");
    EXPECT_NE(std::string(e.what()).find("learning_rate"), std::string::npos);
  }
  EXPECT_THROW(parse_config("eta = 0.1\neta = 0.2\n"), ConfigError);
  EXPECT_THROW(parse_config("eta\n"), ConfigError);
  EXPECT_THROW(parse_config("[a]\n[a]\n"), ConfigError);
  EXPECT_THROW(parse_config("[a\n"), ConfigError);
  EXPECT_THROW(parse_config("eta =\n"), ConfigError);
}

TEST(Config, SectionsInheritDefaults) {
  const auto cells = cells_of("eta = 0.1  # default\nb = 4\n\n[x]\neta = 0.3\n[y]\nalgo = svrg\n");
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[0].name(), "x");
  EXPECT_EQ(cells[0].get_double("eta", 0.0), 0.3);
  EXPECT_EQ(cells[0].get_uint("b", 0), 4u);
  EXPECT_EQ(cells[1].get_double("eta", 0.0), 0.1);
  EXPECT_EQ(cells[1].get_string("algo", ""), "svrg");
  const auto single = cells_of("algo = sgd-m\n");
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].name(), "sgd-m");
}

TEST(Config, SizesRelativeToN) {
  EXPECT_EQ(CellConfig::resolve_size("m", "0.1n", 5000), 500u);
  EXPECT_EQ(CellConfig::resolve_size("m", "n", 5000), 5000u);
  EXPECT_EQ(CellConfig::resolve_size("m", "0.4n", 5000), 2000u);
  EXPECT_EQ(CellConfig::resolve_size("m", "37", 5000), 37u);
  EXPECT_THROW(CellConfig::resolve_size("m", "0.0001n", 50), ConfigError);
  EXPECT_THROW(CellConfig::resolve_size("m", "abc", 50), ConfigError);
  EXPECT_THROW(CellConfig::resolve_size("b", "-3", 50), ConfigError);
}

TEST(Config, SeedsAndHash) {
  const auto cells = cells_of("seeds = 1, 2, 5\n");
  EXPECT_EQ(cell_seeds(cells[0]), (std::vector<std::uint64_t>{1, 2, 5}));
  EXPECT_THROW(cell_seeds(cells_of("seed = 1\nseeds = 2\n")[0]), ConfigError);
  EXPECT_EQ(cells_of("seed = 1\neta = 0.1\n")[0].hash(), cells_of("seed = 9\neta = 0.1\n")[0].hash());
  EXPECT_NE(cells_of("eta = 0.1\n")[0].hash(), cells_of("eta = 0.2\n")[0].hash());
}

TEST(OptimizerConfig, DefaultsAndErrors) {
  const auto cfg = optimizer_config(cells_of("algo = sarah+\n")[0], 100, 4);
  EXPECT_EQ(cfg.gamma, 0.7);
  EXPECT_EQ(cfg.m, 100u);
  EXPECT_EQ(cfg.b, 1u);
  EXPECT_EQ(cfg.seed, 4u);
  EXPECT_EQ(cfg.output_mode, OutputMode::kRandomIterate);
  try {
    optimizer_config(cells_of("algo = nag\n")[0], 10, 1);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "algo");
  }
  try {
    optimizer_config(cells_of("output_mode = best\n")[0], 10, 1);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "output_mode");
  }
  EXPECT_THROW(optimizer_config(cells_of("b = 11\n")[0], 10, 1), ConfigError);
  EXPECT_THROW(optimizer_config(cells_of("eta = 0.1, 0.2\n")[0], 10, 1), ConfigError);
}

TEST(RunExperiment, TraceInvariantsAndSharedCheckpointGrid) {
  const auto traces = run_experiment(cells_of(kComparison));
  ASSERT_EQ(traces.size(), 6u);
  for (const auto& t : traces) {
    SCOPED_TRACE(t.cell);
    EXPECT_FALSE(t.diverged) << t.failure;
    EXPECT_EQ(t.n, 50u);
    ASSERT_EQ(t.records.size(), 5u);
    EXPECT_EQ(t.records.front().ifo, 0);
    for (std::size_t k = 0; k < t.records.size(); ++k) {
      const auto& r = t.records[k];
      EXPECT_EQ(r.checkpoint, k);
      EXPECT_EQ(r.effective_passes, static_cast<double>(r.ifo) / 50.0);
      EXPECT_GE(r.ifo, static_cast<std::int64_t>(50 * k));
      if (k > 0) {
        EXPECT_GT(r.ifo, t.records[k - 1].ifo);
      }
    }
    EXPECT_LT(t.records.back().train_loss, t.records.front().train_loss);
  }
  // single-loop methods hit the grid exactly when b divides n
  EXPECT_EQ(traces[3].records.back().ifo, 200);
  EXPECT_EQ(traces[5].records.back().ifo, 200);
}

TEST(RunExperiment, EqualRunsGiveIdenticalBytes) {
  const auto a = fresh_dir("same-a"), b = fresh_dir("same-b");
  run_experiment(cells_of(kComparison), {a, 1});
  run_experiment(cells_of(kComparison), {b, 1});
  for (const char* f : {"merged.csv", "sarah.csv", "sarahplus.csv", "summary.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const std::string merged = slurp(a / "merged.csv");
  EXPECT_EQ(merged.substr(0, merged.find('\n')), kCsvHeader);
  EXPECT_FALSE(fs::exists(a / "merged.csv.tmp"));
}

TEST(RunExperiment, WorkerCountDoesNotChangeOutput) {
  const auto one = run_experiment(cells_of(kComparison), {std::nullopt, 1});
  const auto four = run_experiment(cells_of(kComparison), {std::nullopt, 4});
  EXPECT_EQ(to_csv(one), to_csv(four));
}

TEST(RunExperiment, SeedsProduceSeparateTraces) {
  const auto traces = run_experiment(cells_of("algo = sgd\neta = 0.01\npasses = 2\nseeds = 1, 2\n"));
  ASSERT_EQ(traces.size(), 2u);
  EXPECT_EQ(traces[0].seed, 1u);
  EXPECT_EQ(traces[1].seed, 2u);
  EXPECT_NE(traces[0].records.back().train_loss, traces[1].records.back().train_loss);
}

TEST(RunExperiment, DivergedCellIsFlaggedAndOthersContinue) {
  const auto dir = fresh_dir("diverge");
  const auto traces = run_experiment(cells_of("passes = 5\n[bad]\neta = 50\n[good]\neta = 0.05\n"), {dir, 1});
  ASSERT_EQ(traces.size(), 2u);
  EXPECT_TRUE(traces[0].diverged);
  EXPECT_FALSE(traces[0].failure.empty());
  EXPECT_FALSE(traces[1].diverged);
  EXPECT_EQ(traces[1].records.size(), 6u);
  const std::string bad = slurp(dir / "bad.csv");
  EXPECT_NE(bad.find(",1\n"), std::string::npos);
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_TRUE(summary[0]["diverged"].get<bool>());
}

TEST(RunExperiment, EpsilonReport) {
  const auto dir = fresh_dir("epsilon");
  run_experiment(cells_of("eta = 0.05\npasses = 3\n[inf]\nepsilon = inf\n[tight]\nepsilon = 1e-300\n"), {dir, 1});
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(summary[0]["epsilon_checkpoint"], 0);
  EXPECT_TRUE(summary[1]["epsilon_checkpoint"].is_null());
  RunTrace t;
  t.records = {{0, 0, 0.0, 1.0, 4.0, {}, 0}, {1, 50, 1.0, 0.5, 0.5, {}, 0}};
  EXPECT_EQ(t.first_below(HUGE_VAL), 0u);
  EXPECT_EQ(t.first_below(1.0), 1u);
  EXPECT_FALSE(t.first_below(0.1));
}

TEST(RunExperiment, ConfigErrorsSurfaceBeforeRunning) {
  EXPECT_THROW(run_experiment(cells_of("problem = lasso\n")), ConfigError);
  EXPECT_THROW(run_experiment(cells_of("passes = 0\n")), ConfigError);
  EXPECT_THROW(run_experiment(fs::path("/nonexistent/config.cfg")), ConfigError);
  try {
    run_experiment(cells_of("problem = mlp\ndata = idx\ndata_dir = /nonexistent\ntrain_images = a\ntrain_labels = b\n"));
    FAIL();
  } catch (const FormatError&) {
  }
}

TEST(RunExperiment, MlpOnIdxFixture) {
  const std::string cfg = std::string("problem = mlp\ndata = idx\ndata_dir = ") + SARAH_TEST_DATA_DIR +
                          "\ntrain_images = tiny-images-idx3-ubyte\ntrain_labels = tiny-labels-idx1-ubyte\n"
                          "test_images = tiny-images-idx3-ubyte\ntest_labels = tiny-labels-idx1-ubyte\n"
                          "hidden = 4\nalgo = sarah\neta = 0.5\nb = 1\npasses = 10\noutput_mode = last-iterate\n";
  const auto traces = run_experiment(cells_of(cfg));
  ASSERT_EQ(traces.size(), 1u);
  ASSERT_TRUE(traces[0].records.front().test_error.has_value());
  EXPECT_LT(traces[0].records.back().train_loss, traces[0].records.front().train_loss);
}

TEST(GridSearch, DivergentStepSizeRanksLast) {
  const auto dir = fresh_dir("grid");
  const auto report = grid_search(parse_config("passes = 3\neta = 50, 0.05\n"), {dir, 1});
  ASSERT_EQ(report.entries.size(), 2u);
  ASSERT_EQ(report.best.size(), 1u);
  EXPECT_EQ(report.best[0].params, (std::vector<std::pair<std::string, std::string>>{{"eta", "0.05"}}));
  EXPECT_EQ(report.entries[0].diverged_runs, 1u);
  EXPECT_TRUE(std::isinf(report.entries[0].score));
  EXPECT_TRUE(fs::exists(dir / "grid.csv"));
}

TEST(GridSearch, SingletonEqualsRun) {
  const std::string text = "algo = svrg\neta = 0.05\npasses = 3\nseed = 2\n";
  const auto report = grid_search(parse_config(text));
  const auto traces = run_experiment(cells_of(text));
  ASSERT_EQ(report.entries.size(), 1u);
  EXPECT_EQ(report.best[0].score, traces[0].records.back().train_loss);
}

TEST(GridSearch, TiesGoToSmallestParameters) {
  // identical runs: b only changes nothing for gd
  const auto report = grid_search(parse_config("algo = gd\neta = 0.05\npasses = 2\nb = 3, 1, 2\n"));
  EXPECT_EQ(report.best[0].params, (std::vector<std::pair<std::string, std::string>>{{"b", "1"}}));
}

TEST(GridSearch, BudgetAndListValidation) {
  try {
    grid_search(parse_config("eta = 0.1, 0.2, 0.3\nm = 5, 10, 20\nseeds = 1, 2, 3, 4, 5, 6, 7, 8\n"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("72"), std::string::npos) << e.what();
  }
  EXPECT_THROW(grid_search(parse_config("passes = 1, 2\n")), ConfigError);
  const auto ok = grid_search(parse_config("grid_budget = 2\npasses = 1\neta = 0.01, 0.02\n"));
  EXPECT_EQ(ok.entries.size(), 2u);
}

TEST(Trace, CsvFormatting) {
  RunTrace t;
  t.algo = "sarah";
  t.seed = 7;
  t.records = {{0, 0, 0.0, 0.1, 2.5, {}, 12}, {1, 120, 1.2, 0.05, 1e-20, 0.25, 99}};
  EXPECT_EQ(to_csv(t), std::string(kCsvHeader) +
                           "\nsarah,7,0,0,0,0.10000000000000001,2.5,,0\n"
                           "sarah,7,1,120,1.2,0.050000000000000003,9.9999999999999995e-21,0.25,0\n");
}

}  // namespace
}  // namespace sarah::harness
