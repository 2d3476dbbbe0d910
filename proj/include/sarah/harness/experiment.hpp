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

// Experiment orchestration: workloads from config cells, checkpointed runs,
// output files and grid search.
//
// Every algorithm is checkpointed on the same grid of effective passes:
// checkpoint k is taken at the first step whose cumulative IFO count reaches
// k * checkpoint_every * n. Checkpoint 0 is the initial point at zero IFOs.
// A run stops at the first step reaching `passes` effective passes.

#ifndef SARAH_HARNESS_EXPERIMENT_HPP
#define SARAH_HARNESS_EXPERIMENT_HPP

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sarah/data.hpp"
#include "sarah/errors.hpp"
#include "sarah/harness/config.hpp"
#include "sarah/harness/trace.hpp"
#include "sarah/linalg.hpp"
#include "sarah/mlp.hpp"
#include "sarah/optim/baselines.hpp"
#include "sarah/problem.hpp"
#include "sarah/problems.hpp"
#include "sarah/rng.hpp"

namespace sarah::harness {

inline constexpr const char* kDataDirEnv = "SARAH_DATA_DIR";
inline constexpr std::uint64_t kDefaultGridBudget = 64;

/// A problem instance plus how to start and score a run on it.
struct Workload {
  std::shared_ptr<const FiniteSumProblem> problem;
  std::function<Vector(std::uint64_t seed)> initial_point;
  std::function<double(const Vector&)> test_error;  ///< empty without a test set
};

/// Keys that determine the workload; cells agreeing on these share one instance.
inline const std::vector<std::string>& problem_keys() {
  static const std::vector<std::string> keys = {
      "problem", "n", "d", "quad_min", "quad_max", "curvature_spread", "linear_spread", "problem_seed",
      "init", "init_scale", "data", "data_seed", "data_dir", "lambda", "hidden", "activation",
      "train_images", "train_labels", "test_images", "test_labels", "train_subset", "test_subset",
      "subset_seed"};
  return keys;
}

inline std::string workload_signature(const CellConfig& cell) {
  std::string sig;
  for (const auto& k : problem_keys()) sig += k + "=" + cell.get_string(k, "") + "\n";
  return sig;
}

inline std::filesystem::path data_directory(const CellConfig& cell) {
  if (cell.has("data_dir")) return cell.get_string("data_dir", "");
  if (const char* env = std::getenv(kDataDirEnv); env && *env) return env;
  return "data";
}

namespace detail {

inline std::filesystem::path resolve_data_path(const CellConfig& cell, const std::string& key,
                                               const std::string& fallback) {
  std::filesystem::path p = cell.get_string(key, fallback);
  if (p.empty()) throw ConfigError("cell [" + cell.name() + "] needs '" + key + "'", key);
  return p.is_absolute() ? p : data_directory(cell) / p;
}

// Training (and optional test) data for the classification problems.
inline std::pair<Dataset, std::optional<Dataset>> load_cell_data(const CellConfig& cell) {
  const std::string kind = cell.get_string("data", "synthetic");
  Dataset train;
  std::optional<Dataset> test;
  if (kind == "synthetic") {
    train = make_synthetic(cell.get_uint("n", 200), cell.get_uint("d", 10), cell.get_uint("data_seed", 1));
  } else if (kind == "idx" || kind == "mnist") {
    const bool mnist = kind == "mnist";
    train = load_idx(resolve_data_path(cell, "train_images", mnist ? "train-images-idx3-ubyte" : ""),
                     resolve_data_path(cell, "train_labels", mnist ? "train-labels-idx1-ubyte" : ""));
    if (cell.has("test_images") || mnist) {
      const auto img = resolve_data_path(cell, "test_images", "t10k-images-idx3-ubyte");
      const auto lab = resolve_data_path(cell, "test_labels", "t10k-labels-idx1-ubyte");
      if (cell.has("test_images") || (std::filesystem::exists(img) && std::filesystem::exists(lab)))
        test = load_idx(img, lab);
    }
  } else {
    throw ConfigError("unknown data source '" + kind + "'", "data");
  }
  const std::uint64_t subset_seed = cell.get_uint("subset_seed", 1);
  if (cell.has("train_subset")) train = subset(train, cell.get_uint("train_subset", 0), subset_seed);
  if (test && cell.has("test_subset")) test = subset(*test, cell.get_uint("test_subset", 0), subset_seed + 1);
  return {std::move(train), std::move(test)};
}

inline std::function<Vector(std::uint64_t)> make_initializer(const CellConfig& cell, std::size_t dim,
                                                             const std::string& fallback,
                                                             std::optional<MlpSpec> spec) {
  const std::string init = cell.get_string("init", fallback);
  const double scale = cell.get_double("init_scale", 1.0);
  const auto d = static_cast<Eigen::Index>(dim);
  if (init == "zeros") return [d](std::uint64_t) { return Vector(Vector::Zero(d)); };
  if (init == "ones") return [d, scale](std::uint64_t) { return Vector(Vector::Constant(d, scale)); };
  if (init == "normal")
    return [d, scale](std::uint64_t seed) {
      RngStream rng(seed, {0, 0, StreamPurpose::kInit});
      Vector w(d);
      for (Eigen::Index k = 0; k < d; ++k) w[k] = scale * rng.normal();
      return w;
    };
  if (init == "normalized") {
    if (!spec) throw ConfigError("init 'normalized' applies to the mlp problem only", "init");
    return [s = *spec](std::uint64_t seed) { return init_normalized(s, seed); };
  }
  throw ConfigError("unknown init '" + init + "'", "init");
}

}  // namespace detail

/// Builds the problem named by the cell's `problem` key.
inline Workload build_workload(const CellConfig& cell) {
  const std::string kind = cell.get_string("problem", "quadratic");
  Workload wl;
  if (kind == "quadratic") {
    const std::size_t n = cell.get_uint("n", 50);
    const std::size_t d = cell.get_uint("d", 10);
    wl.problem = std::make_shared<QuadraticProblem>(make_spread_quadratic(
        n, d, cell.get_double("quad_min", 1.0), cell.get_double("quad_max", 10.0),
        cell.get_double("curvature_spread", 0.5), cell.get_double("linear_spread", 1.0),
        cell.get_uint("problem_seed", 1)));
    wl.initial_point = detail::make_initializer(cell, d, "ones", std::nullopt);
  } else if (kind == "logistic" || kind == "sigmoid") {
    auto [train, test] = detail::load_cell_data(cell);
    if (train.num_classes != 2) throw ConfigError(kind + " problem needs binary labels", "data");
    if (kind == "logistic")
      wl.problem = std::make_shared<LogisticProblem>(train.features, signed_labels(train), cell.get_double("lambda", 1e-3));
    else
      wl.problem = std::make_shared<SigmoidLossProblem>(train.features, signed_labels(train));
    wl.initial_point = detail::make_initializer(cell, train.dim(), "zeros", std::nullopt);
    if (test) {
      auto ds = std::make_shared<const Dataset>(std::move(*test));
      wl.test_error = [ds](const Vector& w) {
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < ds->size(); ++i) {
          const double margin = ds->features.row(static_cast<Eigen::Index>(i)).dot(w);
          if ((margin > 0.0 ? 1 : 0) != ds->labels[i]) ++wrong;
        }
        return static_cast<double>(wrong) / static_cast<double>(ds->size());
      };
    }
  } else if (kind == "mlp") {
    auto [train, test] = detail::load_cell_data(cell);
    MlpSpec spec;
    spec.d_in = train.dim();
    spec.n_hidden = cell.get_uint("hidden", 300);
    spec.n_out = static_cast<std::size_t>(std::max({train.num_classes, test ? test->num_classes : 0, 2}));
    spec.lambda = cell.get_double("lambda", 1e-4);
    spec.activation = parse_activation(cell.get_string("activation", "sigmoid"));
    auto ds = std::make_shared<const Dataset>(std::move(train));
    wl.problem = std::make_shared<MlpProblem>(spec, ds);
    wl.initial_point = detail::make_initializer(cell, spec.num_params(), "normalized", spec);
    if (test) {
      auto tds = std::make_shared<const Dataset>(std::move(*test));
      if (tds->dim() != spec.d_in) throw ConfigError("test set feature count differs from training set", "test_images");
      wl.test_error = [spec, tds](const Vector& w) { return sarah::test_error(spec, w, *tds); };
    }
  } else {
    throw ConfigError("unknown problem '" + kind + "'", "problem");
  }
  return wl;
}

/// Optimizer settings of a cell for a problem of size n. List values are rejected.
inline OptimizerConfig optimizer_config(const CellConfig& cell, std::size_t n, std::uint64_t seed) {
  for (const auto& [k, v] : cell.values())
    if (k != "seeds" && v.find(',') != std::string::npos)
      throw ConfigError("key '" + k + "' holds a list; lists are only allowed in grid searches", k);
  OptimizerConfig cfg;
  try {
    cfg.algo = parse_algorithm(cell.get_string("algo", "sarah"));
  } catch (const ContractError& e) {
    throw ConfigError(e.what(), "algo");
  }
  try {
    cfg.output_mode = parse_output_mode(cell.get_string("output_mode", "random-iterate"));
  } catch (const ContractError& e) {
    throw ConfigError(e.what(), "output_mode");
  }
  cfg.eta = cell.get_double("eta", 0.1);
  cfg.m = cell.get_size("m", n, n);
  cfg.b = cell.get_size("b", 1, n);
  cfg.s = cell.get_uint("s", 0);
  cfg.steps = cell.get_uint("steps", 0);
  cfg.gamma = cell.get_double("gamma", 0.7);
  cfg.beta = cell.get_double("beta", 0.0);
  cfg.delta = cell.get_double("delta", 0.01);
  cfg.divergence_limit = cell.get_double("divergence_limit", 1e100);
  cfg.seed = seed;
  try {
    cfg.validate(n);
  } catch (const ContractError& e) {
    throw ConfigError("cell [" + cell.name() + "]: " + e.what());
  }
  return cfg;
}

struct RunSettings {
  double passes = 10.0;
  double checkpoint_every = 1.0;  ///< effective passes between checkpoints
};

inline RunSettings run_settings(const CellConfig& cell) {
  RunSettings rs;
  rs.passes = cell.get_double("passes", 10.0);
  rs.checkpoint_every = cell.get_double("checkpoint_every", 1.0);
  if (!(rs.passes > 0.0) || !std::isfinite(rs.passes)) throw ConfigError("passes must be positive", "passes");
  if (!(rs.checkpoint_every > 0.0)) throw ConfigError("checkpoint_every must be positive", "checkpoint_every");
  return rs;
}

/// Runs one (cell, seed) pair on a prepared workload.
inline RunTrace run_cell(const Workload& wl, const CellConfig& cell, std::uint64_t seed) {
  const FiniteSumProblem& p = *wl.problem;
  const std::size_t n = p.size();
  const OptimizerConfig cfg = optimizer_config(cell, n, seed);
  const RunSettings rs = run_settings(cell);

  RunTrace trace;
  trace.algo = to_string(cfg.algo);
  trace.cell = cell.name();
  trace.config_hash = cell.hash();
  trace.output_mode = to_string(cfg.output_mode);
  trace.seed = seed;
  trace.n = n;

  const auto start = std::chrono::steady_clock::now();
  const double unit = rs.checkpoint_every * static_cast<double>(n);
  const double budget = rs.passes * static_cast<double>(n);
  auto record = [&](std::size_t k, std::int64_t ifo, const Vector& w) {
    TraceRecord r;
    r.checkpoint = k;
    r.ifo = ifo;
    r.effective_passes = static_cast<double>(ifo) / static_cast<double>(n);
    r.train_loss = full_loss(p, w);
    r.grad_norm_sq = squared_norm(full_gradient(p, w));
    if (wl.test_error) r.test_error = wl.test_error(w);
    r.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    trace.records.push_back(r);
  };

  const Vector w0 = wl.initial_point(seed);
  record(0, 0, w0);
  std::size_t next_k = 1;
  auto hook = [&](const StepEvent& ev) {
    const double ifo = static_cast<double>(ev.ifo);
    if (ifo >= static_cast<double>(next_k) * unit) {
      const auto k = static_cast<std::size_t>(std::floor(ifo / unit));
      record(k, ev.ifo, ev.w);
      next_k = k + 1;
    }
    return ifo < budget;
  };

  try {
    const OptimizeResult res = optimize(p, w0, cfg, hook);
    if (res.ifo > trace.records.back().ifo) record(trace.records.back().checkpoint + 1, res.ifo, res.w);
  } catch (const DivergenceError& e) {
    trace.diverged = true;
    trace.failure = e.what();
  } catch (const NumericError& e) {
    trace.diverged = true;
    trace.failure = e.what();
  }
  return trace;
}

namespace detail {

// Runs jobs 0..count-1 on up to `workers` threads; rethrows the lowest-numbered failure.
inline void run_parallel(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::string file_stem(const std::string& cell) {
  std::string out;
  for (char ch : cell) {
    if (ch == '+') out += "plus";  // keeps "sarah+" apart from "sarah"
    else out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' ? ch : '_';
  }
  return out;
}

}  // namespace detail

struct ExperimentOptions {
  std::optional<std::filesystem::path> out_dir;  ///< write CSV and summary files here
  std::size_t workers = 1;
};

/// Summary of one trace as JSON, including the epsilon report when requested.
inline nlohmann::json trace_summary(const RunTrace& t, std::optional<double> epsilon) {
  nlohmann::json j;
  j["cell"] = t.cell;
  j["algo"] = t.algo;
  j["seed"] = t.seed;
  j["config_hash"] = t.config_hash;
  j["output_mode"] = t.output_mode;
  j["diverged"] = t.diverged;
  if (t.diverged) j["failure"] = t.failure;
  if (!t.records.empty()) {
    j["final_ifo"] = t.records.back().ifo;
    j["final_train_loss"] = t.records.back().train_loss;
    j["final_grad_norm_sq"] = t.records.back().grad_norm_sq;
  }
  if (epsilon) {
    const auto k = t.first_below(*epsilon);
    j["epsilon"] = std::isinf(*epsilon) ? nlohmann::json("inf") : nlohmann::json(*epsilon);
    j["epsilon_checkpoint"] = k ? nlohmann::json(*k) : nlohmann::json(nullptr);
  }
  return j;
}

/// Runs every (cell, seed) pair. Traces come back in cell order, then seed order,
/// regardless of the worker count.
inline std::vector<RunTrace> run_experiment(const std::vector<CellConfig>& cells, const ExperimentOptions& opt = {}) {
  std::map<std::string, std::shared_ptr<const Workload>> workloads;
  struct Job {
    std::size_t cell;
    std::uint64_t seed;
    std::shared_ptr<const Workload> workload;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& wl = workloads[workload_signature(cells[c])];
    if (!wl) wl = std::make_shared<const Workload>(build_workload(cells[c]));
    optimizer_config(cells[c], wl->problem->size(), 0);  // surface config errors before running
    run_settings(cells[c]);
    for (std::uint64_t seed : cell_seeds(cells[c])) jobs.push_back({c, seed, wl});
  }

  std::vector<RunTrace> traces(jobs.size());
  detail::run_parallel(jobs.size(), opt.workers, [&](std::size_t i) {
    traces[i] = run_cell(*jobs[i].workload, cells[jobs[i].cell], jobs[i].seed);
  });

  if (opt.out_dir) {
    std::filesystem::create_directories(*opt.out_dir);
    nlohmann::json summary = nlohmann::json::array();
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::vector<RunTrace> mine;
      for (std::size_t i = 0; i < jobs.size(); ++i)
        if (jobs[i].cell == c) mine.push_back(traces[i]);
      write_file_atomic(*opt.out_dir / (detail::file_stem(cells[c].name()) + ".csv"), to_csv(mine));
      std::optional<double> eps;
      if (cells[c].has("epsilon")) eps = cells[c].get_double("epsilon", 0.0);
      for (const auto& t : mine) summary.push_back(trace_summary(t, eps));
    }
    write_file_atomic(*opt.out_dir / "merged.csv", to_csv(traces));
    write_file_atomic(*opt.out_dir / "summary.json", summary.dump(2) + "\n");
  }
  return traces;
}

inline std::vector<RunTrace> run_experiment(const std::filesystem::path& config_path, const ExperimentOptions& opt = {}) {
  return run_experiment(resolve_cells(load_config(config_path)), opt);
}

/// One grid point of one cell.
struct GridEntry {
  std::string cell;
  std::vector<std::pair<std::string, std::string>> params;  ///< grid keys in name order
  double score = 0.0;  ///< mean final train loss over seeds; +inf if any seed diverged
  std::size_t diverged_runs = 0;
};

struct GridReport {
  std::vector<GridEntry> entries;  ///< cell order, then grid order
  std::vector<GridEntry> best;     ///< one per cell
};

namespace detail {

inline bool params_less(const GridEntry& a, const GridEntry& b) {
  for (std::size_t k = 0; k < a.params.size() && k < b.params.size(); ++k) {
    const auto& [ka, va] = a.params[k];
    const auto& [kb, vb] = b.params[k];
    if (ka != kb) return ka < kb;
    double da = 0.0, db = 0.0;
    const bool na = std::from_chars(va.data(), va.data() + va.size(), da).ec == std::errc();
    const bool nb = std::from_chars(vb.data(), vb.data() + vb.size(), db).ec == std::errc();
    if (na && nb && da != db) return da < db;
    if (!(na && nb) && va != vb) return va < vb;
  }
  return a.params.size() < b.params.size();
}

}  // namespace detail

/// Expands list-valued grid keys of each cell into their cross product.
inline std::vector<std::vector<CellConfig>> expand_grid(const std::vector<CellConfig>& cells) {
  std::vector<std::vector<CellConfig>> out;
  for (const auto& cell : cells) {
    std::vector<CellConfig> points{cell};
    for (const auto& [k, v] : cell.values()) {
      if (k == "seeds" || v.find(',') == std::string::npos) continue;
      if (!grid_keys().contains(k)) throw ConfigError("key '" + k + "' cannot take a list of values", k);
      std::vector<CellConfig> next;
      for (const auto& pt : points)
        for (const auto& item : split_list(v)) {
          CellConfig c = pt;
          c.set(k, item);
          next.push_back(std::move(c));
        }
      points = std::move(next);
    }
    out.push_back(std::move(points));
  }
  return out;
}

/// Runs the cross product of every cell and picks, per cell, the grid point with the
/// lowest mean final training loss. Diverged points rank last; ties go to the
/// lexicographically smallest parameter tuple.
inline GridReport grid_search(const ConfigDocument& doc, const ExperimentOptions& opt = {}) {
  const auto cells = resolve_cells(doc);
  const auto grid = expand_grid(cells);
  std::uint64_t runs = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) runs += grid[c].size() * cell_seeds(cells[c]).size();
  const std::uint64_t budget = cells.front().get_uint("grid_budget", kDefaultGridBudget);
  if (runs > budget)
    throw ConfigError("grid of " + std::to_string(runs) + " runs exceeds grid_budget = " + std::to_string(budget),
                      "grid_budget");

  std::vector<CellConfig> flat;
  for (const auto& g : grid) flat.insert(flat.end(), g.begin(), g.end());
  ExperimentOptions inner = opt;
  inner.out_dir.reset();
  const auto traces = run_experiment(flat, inner);

  GridReport report;
  std::size_t t = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::optional<GridEntry> best;
    for (const auto& pt : grid[c]) {
      GridEntry e;
      e.cell = cells[c].name();
      for (const auto& [k, v] : cells[c].values())
        if (grid_keys().contains(k) && v.find(',') != std::string::npos) e.params.emplace_back(k, pt.get_string(k, ""));
      const std::size_t seeds = cell_seeds(pt).size();
      double sum = 0.0;
      for (std::size_t s = 0; s < seeds; ++s, ++t) {
        const RunTrace& tr = traces[t];
        if (tr.diverged || !std::isfinite(tr.records.back().train_loss)) ++e.diverged_runs;
        else sum += tr.records.back().train_loss;
      }
      e.score = e.diverged_runs ? std::numeric_limits<double>::infinity() : sum / static_cast<double>(seeds);
      if (!best || e.score < best->score || (e.score == best->score && detail::params_less(e, *best))) best = e;
      report.entries.push_back(std::move(e));
    }
    report.best.push_back(*best);
  }

  if (opt.out_dir) {
    std::filesystem::create_directories(*opt.out_dir);
    std::string csv = "cell,params,mean_final_train_loss,diverged_runs,best\n";
    for (const auto& e : report.entries) {
      std::string params;
      for (const auto& [k, v] : e.params) params += (params.empty() ? "" : ";") + k + "=" + v;
      bool is_best = false;
      for (const auto& b : report.best) is_best = is_best || (b.cell == e.cell && b.params == e.params);
      csv += e.cell + "," + params + "," + format_real(e.score) + "," + std::to_string(e.diverged_runs) + "," +
             (is_best ? "1" : "0") + "\n";
    }
    write_file_atomic(*opt.out_dir / "grid.csv", csv);
  }
  return report;
}

}  // namespace sarah::harness

#endif  // SARAH_HARNESS_EXPERIMENT_HPP
