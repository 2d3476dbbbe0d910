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


// Command-line front end: run experiments, grid searches and verification suites.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sarah/errors.hpp"
#include "sarah/harness/config.hpp"
#include "sarah/harness/experiment.hpp"
#include "sarah/verify_suites.hpp"

namespace {

namespace fs = std::filesystem;
using sarah::harness::CellConfig;

std::size_t resolve_workers(const sarah::harness::ConfigDocument& doc, std::optional<std::size_t> flag) {
  if (flag) return *flag;
  const auto it = doc.defaults.find("workers");
  return it == doc.defaults.end() ? 1 : CellConfig::to_uint("workers", it->second);
}

int cmd_run(const fs::path& config, const std::optional<fs::path>& out, std::optional<std::size_t> workers) {
  const auto doc = sarah::harness::load_config(config);
  const auto cells = sarah::harness::resolve_cells(doc);
  sarah::harness::ExperimentOptions opt;
  opt.out_dir = out;
  opt.workers = resolve_workers(doc, workers);
  const auto traces = sarah::harness::run_experiment(cells, opt);
  for (const auto& t : traces) {
    std::optional<double> eps;
    for (const auto& c : cells)
      if (c.name() == t.cell && c.has("epsilon")) eps = c.get_double("epsilon", 0.0);
    std::cout << sarah::harness::trace_summary(t, eps).dump() << "\n";
  }
  if (!out) std::cout << sarah::harness::to_csv(traces);
  return 0;
}

int cmd_grid(const fs::path& config, const std::optional<fs::path>& out, std::optional<std::size_t> workers) {
  const auto doc = sarah::harness::load_config(config);
  sarah::harness::ExperimentOptions opt;
  opt.out_dir = out;
  opt.workers = resolve_workers(doc, workers);
  const auto report = sarah::harness::grid_search(doc, opt);
  auto entry_json = [](const sarah::harness::GridEntry& e) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : e.params) params[k] = v;
    return nlohmann::json{{"cell", e.cell}, {"params", params},
                          {"mean_final_train_loss", std::isinf(e.score) ? nlohmann::json("inf") : nlohmann::json(e.score)},
                          {"diverged_runs", e.diverged_runs}};
  };
  for (const auto& e : report.entries) std::cout << entry_json(e).dump() << "\n";
  for (const auto& b : report.best) {
    auto j = entry_json(b);
    j["best"] = true;
    std::cout << j.dump() << "\n";
  }
  return 0;
}

int cmd_verify(const std::string& suite) {
  bool all_pass = true;
  const auto names = suite == "all" ? sarah::suites::suite_names() : std::vector<std::string>{suite};
  for (const auto& name : names)
    for (const auto& r : sarah::suites::run_suite(name)) {
      all_pass = all_pass && r.pass;
      std::cout << r.to_json().dump() << std::endl;
    }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic recursive gradient experiments"};
  app.require_subcommand(1);

  fs::path config;
  std::optional<fs::path> out;
  std::optional<std::size_t> workers;
  std::string suite;

  auto* run = app.add_subcommand("run", "Run every (cell, seed) of a config file");
  run->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory for CSV and summary files");
  run->add_option("--workers", workers, "Concurrent cells")->check(CLI::PositiveNumber);

  auto* grid = app.add_subcommand("grid", "Grid search over list-valued parameters");
  grid->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  grid->add_option("--out", out, "Output directory for grid.csv");
  grid->add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "Run a verification suite, one JSON line per check");
  std::vector<std::string> choices = sarah::suites::suite_names();
  choices.push_back("all");
  verify->add_option("--suite", suite, "Suite name")->required()->check(CLI::IsMember(choices));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, out, workers);
    if (*grid) return cmd_grid(config, out, workers);
    if (*verify) return cmd_verify(suite);
  } catch (const sarah::ConfigError& e) {
    std::cerr << "config error: " << e.what();
    if (!e.key().empty()) std::cerr << " [key: " << e.key() << "]";
    std::cerr << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
