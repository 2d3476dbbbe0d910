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

// Single-loop comparison methods: SGD, momentum SGD, AdaGrad and full gradient descent.
// Stochastic variants draw their b indices with replacement, one stream per step.

#ifndef SARAH_OPTIM_BASELINES_HPP
#define SARAH_OPTIM_BASELINES_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>

#include "sarah/errors.hpp"
#include "sarah/linalg.hpp"
#include "sarah/optim/config.hpp"
#include "sarah/optim/recursive.hpp"
#include "sarah/problem.hpp"
#include "sarah/rng.hpp"
#include "sarah/sampling.hpp"

namespace sarah {

struct SingleLoopState {
  Vector w;
  Vector velocity;     ///< momentum buffer
  Vector accumulator;  ///< adagrad sum of squared gradients, starts at delta
  std::size_t step = 0;
  std::int64_t ifo = 0;
};

inline SingleLoopState init_single_loop(const FiniteSumProblem& p, const Vector& w0,
                                        const OptimizerConfig& cfg) {
  p.check_point(w0);
  SingleLoopState st;
  st.w = w0;
  st.velocity = Vector::Zero(w0.size());
  st.accumulator = Vector::Constant(w0.size(), cfg.delta);
  return st;
}

/// Mean gradient over b indices drawn with replacement from the step's stream.
inline Vector sampled_gradient(const FiniteSumProblem& p, const Vector& w, const OptimizerConfig& cfg,
                               std::size_t step) {
  RngStream rng(cfg.seed, {0, step, StreamPurpose::kSgdIndex});
  const auto idx = sample_with_replacement(rng, p.size(), cfg.b);
  Vector g = Vector::Zero(w.size());
  p.add_batch_gradient(idx, w, g);
  return g / static_cast<double>(cfg.b);
}

namespace detail {

inline SingleLoopState finish_step(SingleLoopState st, const Vector& direction, std::int64_t ifo,
                                   const OptimizerConfig& cfg) {
  ++st.step;
  st.ifo += ifo;
  check_divergence(st.w, direction, st.step, cfg.divergence_limit);
  return st;
}

}  // namespace detail

inline SingleLoopState sgd_step(const FiniteSumProblem& p, SingleLoopState st, const OptimizerConfig& cfg) {
  const Vector g = sampled_gradient(p, st.w, cfg, st.step);
  st.w -= cfg.eta * g;
  return detail::finish_step(std::move(st), g, static_cast<std::int64_t>(cfg.b), cfg);
}

/// u <- beta u + g;  w <- w - eta u.
inline SingleLoopState sgdm_step(const FiniteSumProblem& p, SingleLoopState st, const OptimizerConfig& cfg) {
  const Vector g = sampled_gradient(p, st.w, cfg, st.step);
  st.velocity = cfg.beta * st.velocity + g;
  st.w -= cfg.eta * st.velocity;
  Vector u = st.velocity;
  return detail::finish_step(std::move(st), u, static_cast<std::int64_t>(cfg.b), cfg);
}

/// acc <- acc + g^2;  w <- w - eta g / sqrt(acc), coordinatewise.
inline SingleLoopState adagrad_step(const FiniteSumProblem& p, SingleLoopState st, const OptimizerConfig& cfg) {
  const Vector g = sampled_gradient(p, st.w, cfg, st.step);
  st.accumulator += g.cwiseProduct(g);
  st.w -= cfg.eta * g.cwiseQuotient(st.accumulator.cwiseSqrt());
  return detail::finish_step(std::move(st), g, static_cast<std::int64_t>(cfg.b), cfg);
}

/// Full gradient descent step (n IFOs).
inline SingleLoopState gd_step(const FiniteSumProblem& p, SingleLoopState st, const OptimizerConfig& cfg) {
  const Vector g = full_gradient(p, st.w);
  st.w -= cfg.eta * g;
  return detail::finish_step(std::move(st), g, static_cast<std::int64_t>(p.size()), cfg);
}

struct SingleLoopResult {
  Vector w;
  std::int64_t ifo = 0;
  std::size_t steps = 0;
  bool stopped = false;
};

/// Runs cfg.steps iterations of a single-loop method, or until the hook stops it when cfg.steps = 0.
inline SingleLoopResult run_single_loop(const FiniteSumProblem& p, const Vector& w0,
                                        const OptimizerConfig& cfg, const StepHook& hook = {}) {
  cfg.validate(p.size());
  if (is_two_loop(cfg.algo)) throw ContractError("run_single_loop: " + to_string(cfg.algo) + " is two-loop");
  if (cfg.steps == 0 && !hook) throw ContractError("run_single_loop: steps = 0 needs a step hook to terminate");

  SingleLoopState st = init_single_loop(p, w0, cfg);
  SingleLoopResult out;
  bool keep_going = !hook || hook(StepEvent{st.w, 0, 0, 0});
  while (keep_going && (cfg.steps == 0 || st.step < cfg.steps)) {
    switch (cfg.algo) {
      case Algorithm::kSgd: st = sgd_step(p, std::move(st), cfg); break;
      case Algorithm::kSgdMomentum: st = sgdm_step(p, std::move(st), cfg); break;
      case Algorithm::kAdagrad: st = adagrad_step(p, std::move(st), cfg); break;
      case Algorithm::kGd: st = gd_step(p, std::move(st), cfg); break;
      default: throw ContractError("run_single_loop: unsupported algorithm");
    }
    keep_going = !hook || hook(StepEvent{st.w, st.ifo, 0, st.step});
  }
  out.w = std::move(st.w);
  out.ifo = st.ifo;
  out.steps = st.step;
  out.stopped = !keep_going;
  return out;
}

/// Result of any configured algorithm.
struct OptimizeResult {
  Vector w;
  std::int64_t ifo = 0;
  bool stopped = false;
  std::optional<TwoLoopResult> two_loop;  ///< stage details for two-loop methods
};

/// Dispatches on cfg.algo. The hook sees every IFO-consuming step.
inline OptimizeResult optimize(const FiniteSumProblem& p, const Vector& w0, const OptimizerConfig& cfg,
                               const StepHook& hook = {}) {
  OptimizeResult out;
  if (is_two_loop(cfg.algo)) {
    TwoLoopResult r = run_two_loop(p, w0, cfg, hook);
    out.w = r.w;
    out.ifo = r.ifo;
    out.stopped = r.stopped;
    out.two_loop = std::move(r);
  } else {
    SingleLoopResult r = run_single_loop(p, w0, cfg, hook);
    out.w = std::move(r.w);
    out.ifo = r.ifo;
    out.stopped = r.stopped;
  }
  return out;
}

}  // namespace sarah

#endif  // SARAH_OPTIM_BASELINES_HPP
