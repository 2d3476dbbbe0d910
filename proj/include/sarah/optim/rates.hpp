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

// Step-size rule and convergence-rate quantities of the recursive gradient method.

#ifndef SARAH_OPTIM_RATES_HPP
#define SARAH_OPTIM_RATES_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>

#include "sarah/errors.hpp"
#include "sarah/optim/config.hpp"
#include "sarah/problem.hpp"

namespace sarah {

/// (n - b) / (n - 1): the without-replacement variance factor. Defined as 0 for n = 1.
inline double batch_variance_factor(std::size_t n, std::size_t b) {
  if (n < 1 || b < 1 || b > n) throw ContractError("batch_variance_factor: need 1 <= b <= n");
  if (n == 1) return 0.0;
  return static_cast<double>(n - b) / static_cast<double>(n - 1);
}

/// Largest admissible constant step size of an inner loop of length m:
///   2 / (L (sqrt(1 + (4m/b)(n-b)/(n-1)) + 1)).
/// It is the positive root of (1/b)((n-b)/(n-1)) L^2 eta^2 m = 1 - L eta.
inline double step_size_bound(std::size_t m, std::size_t b, std::size_t n, double L) {
  if (!(L > 0.0)) throw ContractError("step_size_bound: L must be positive");
  if (m < 1) throw ContractError("step_size_bound: m must be positive");
  const double factor = batch_variance_factor(n, b);
  const double inner = 1.0 + 4.0 * static_cast<double>(m) / static_cast<double>(b) * factor;
  return 2.0 / (L * (std::sqrt(inner) + 1.0));
}

/// Expected squared gradient norm bound of one inner loop with a uniformly
/// selected output: 2 (P(w0) - P(w*)) / (eta (m + 1)).
inline double inner_loop_gradient_bound(double eta, std::size_t m, double optimality_gap) {
  return 2.0 * optimality_gap / (eta * static_cast<double>(m + 1));
}

/// Per-outer-iteration contraction 2 tau / (eta (m + 1)).
inline double contraction_factor(double tau, double eta, std::size_t m) {
  return 2.0 * tau / (eta * static_cast<double>(m + 1));
}

/// IFO cost of one outer iteration that takes `inner_steps` stochastic steps.
inline std::int64_t outer_iteration_ifo(std::size_t n, std::size_t b, std::size_t inner_steps) {
  return static_cast<std::int64_t>(n) + 2 * static_cast<std::int64_t>(b) * static_cast<std::int64_t>(inner_steps);
}

/// Smallest inner-loop length whose contraction factor, at the largest admissible
/// step size, is at most `target`. Throws ContractError if none is found below max_m.
inline std::size_t smallest_inner_length(double tau, double L, std::size_t n, std::size_t b, double target,
                                         std::size_t max_m = 10000000) {
  if (!(tau > 0.0) || !(target > 0.0)) throw ContractError("smallest_inner_length: tau and target must be positive");
  for (std::size_t m = 1; m <= max_m; ++m)
    if (contraction_factor(tau, step_size_bound(m, b, n, L), m) <= target) return m;
  throw ContractError("smallest_inner_length: no inner length reaches the target");
}

struct RateReport {
  std::optional<double> eta_max;  ///< step_size_bound, when L is known
  double gamma_bar = 0.0;         ///< 2 tau / (eta (m + 1))
  bool tau_condition_met = false; ///< gamma_bar < 1
};

/// Advisory linear-rate report for a run; nullopt when the problem does not
/// certify a gradient-domination constant.
inline std::optional<RateReport> rate_report(const ProblemConstants& c, double eta, std::size_t m,
                                             std::size_t b, std::size_t n) {
  if (!c.tau) return std::nullopt;
  if (!(eta > 0.0)) throw ContractError("rate_report: eta must be positive");
  RateReport r;
  if (c.L) r.eta_max = step_size_bound(m, b, n, *c.L);
  r.gamma_bar = contraction_factor(*c.tau, eta, m);
  r.tau_condition_met = r.gamma_bar < 1.0;
  return r;
}

inline std::optional<RateReport> rate_report(const FiniteSumProblem& p, const OptimizerConfig& cfg) {
  return rate_report(p.constants(), cfg.eta, cfg.m, cfg.b, p.size());
}

}  // namespace sarah

#endif  // SARAH_OPTIM_RATES_HPP
