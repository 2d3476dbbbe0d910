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

#ifndef SARAH_OPTIM_CONFIG_HPP
#define SARAH_OPTIM_CONFIG_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "sarah/errors.hpp"
#include "sarah/linalg.hpp"

namespace sarah {

enum class Algorithm { kSarah, kSarahPlus, kSvrg, kSgd, kSgdMomentum, kAdagrad, kGd };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kSarah: return "sarah";
    case Algorithm::kSarahPlus: return "sarah+";
    case Algorithm::kSvrg: return "svrg";
    case Algorithm::kSgd: return "sgd";
    case Algorithm::kSgdMomentum: return "sgd-m";
    case Algorithm::kAdagrad: return "adagrad";
    case Algorithm::kGd: return "gd";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  for (Algorithm a : {Algorithm::kSarah, Algorithm::kSarahPlus, Algorithm::kSvrg, Algorithm::kSgd,
                      Algorithm::kSgdMomentum, Algorithm::kAdagrad, Algorithm::kGd})
    if (to_string(a) == s) return a;
  throw ContractError("unknown algorithm '" + s + "'");
}

/// Two-loop methods: a full gradient at the start of every outer iteration.
inline bool is_two_loop(Algorithm a) {
  return a == Algorithm::kSarah || a == Algorithm::kSarahPlus || a == Algorithm::kSvrg;
}

/// Which iterate an inner loop returns.
enum class OutputMode {
  kRandomIterate,  ///< uniform over the iterates the loop computed
  kLastIterate,
};

inline std::string to_string(OutputMode m) {
  return m == OutputMode::kRandomIterate ? "random-iterate" : "last-iterate";
}

inline OutputMode parse_output_mode(const std::string& s) {
  if (s == "random-iterate") return OutputMode::kRandomIterate;
  if (s == "last-iterate") return OutputMode::kLastIterate;
  throw ContractError("unknown output mode '" + s + "'");
}

struct OptimizerConfig {
  Algorithm algo = Algorithm::kSarah;
  double eta = 0.1;
  std::size_t m = 1;            ///< inner loop size (maximum size for sarah+)
  std::size_t b = 1;            ///< mini-batch size
  std::size_t s = 1;            ///< outer iterations; 0 = until the step hook stops the run
  std::size_t steps = 0;        ///< single-loop iterations; 0 = until the step hook stops the run
  double gamma = 0.7;           ///< sarah+ stopping ratio
  double beta = 0.0;            ///< momentum coefficient
  double delta = 0.01;          ///< initial adagrad accumulator
  std::uint64_t seed = 0;
  OutputMode output_mode = OutputMode::kRandomIterate;
  bool track_full_gradient = false;  ///< record ||grad P(w_t)||^2 for every iterate (costs full passes)
  double divergence_limit = 1e100;

  /// Throws ContractError naming the first invalid field.
  void validate(std::size_t n) const {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ContractError("config: eta must be positive");
    if (b < 1) throw ContractError("config: b must be positive");
    if (b > n && algo != Algorithm::kGd)
      throw ContractError("config: b=" + std::to_string(b) + " exceeds n=" + std::to_string(n));
    if (is_two_loop(algo) && m < 1) throw ContractError("config: m must be positive");
    if (algo == Algorithm::kSarahPlus && !(gamma > 0.0 && gamma <= 1.0))
      throw ContractError("config: gamma must lie in (0, 1]");
    if (algo == Algorithm::kSgdMomentum && !(beta >= 0.0 && beta < 1.0))
      throw ContractError("config: beta must lie in [0, 1)");
    if (algo == Algorithm::kAdagrad && !(delta > 0.0))
      throw ContractError("config: delta must be positive");
  }
};

/// Passed to the step hook after every IFO-consuming step.
struct StepEvent {
  const Vector& w;      ///< current iterate
  std::int64_t ifo;     ///< cumulative IFO count of the run
  std::size_t outer;    ///< outer iteration (0 for single-loop methods)
  std::size_t inner;    ///< inner step / iteration counter
};

/// Returns false to stop the run after the current step.
using StepHook = std::function<bool(const StepEvent&)>;

}  // namespace sarah

#endif  // SARAH_OPTIM_CONFIG_HPP
