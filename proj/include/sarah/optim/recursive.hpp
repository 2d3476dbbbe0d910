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

// Stochastic recursive gradient method.
//
// One inner loop started at w0:
//
//   v_0     = grad P(w0)                                   (n IFOs)
//   w_1     = w_0 - eta v_0
//   for t = 1 .. m-1:
//     I_t   = uniform size-b subset of [n], without replacement
//     v_t   = (1/b) sum_{i in I_t} [grad f_i(w_t) - grad f_i(w_{t-1})] + v_{t-1}   (2b IFOs)
//     w_t+1 = w_t - eta v_t
//   output w_t for t uniform on {0, ..., m}, or w_m
//
// The adaptive variant additionally leaves the loop as soon as
// ||v_{t-1}||^2 <= gamma ||v_0||^2, testing before each stochastic step.
// Its random-iterate output is uniform over the iterates actually computed.
//
// The outer method chains inner loops, each starting from the previous output.

#ifndef SARAH_OPTIM_RECURSIVE_HPP
#define SARAH_OPTIM_RECURSIVE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sarah/errors.hpp"
#include "sarah/linalg.hpp"
#include "sarah/optim/config.hpp"
#include "sarah/problem.hpp"
#include "sarah/rng.hpp"
#include "sarah/sampling.hpp"

namespace sarah {

/// (w_{t-1}, w_t, v_{t-1}, t): everything the next recursive step reads.
struct RecursiveState {
  Vector w_prev;
  Vector w_curr;
  Vector v;
  std::size_t t = 0;
  double v0_norm_sq = 0.0;
};

namespace detail {

inline void check_divergence(const Vector& w, const Vector& v, std::size_t t, double limit) {
  if (out_of_range(w, limit) || out_of_range(v, limit)) {
    const double vn = std::sqrt(squared_norm(v));
    throw DivergenceError("iterate diverged at inner step " + std::to_string(t) +
                              " (||v|| = " + std::to_string(vn) + ")",
                          static_cast<long>(t), vn);
  }
}

// In-place recursive step: v <- (1/b) sum diff + v; (w_prev, w_curr) <- (w_curr, w_curr - eta v).
inline void advance_recursive(RecursiveState& st, const MiniBatch& batch, const FiniteSumProblem& p,
                              double eta, double divergence_limit) {
  Vector diff = Vector::Zero(st.v.size());
  p.add_batch_gradient_difference(batch.indices(), st.w_curr, st.w_prev, diff);
  st.v += diff / static_cast<double>(batch.size());
  std::swap(st.w_prev, st.w_curr);
  st.w_curr = st.w_prev - eta * st.v;
  ++st.t;
  check_divergence(st.w_curr, st.v, st.t, divergence_limit);
}

}  // namespace detail

/// One recursive step from `state` on `batch`. Returns the shifted state
/// (w_t, w_t - eta v_t, v_t, t + 1). Adds 2b to *ifo when given.
inline RecursiveState recursive_update(const RecursiveState& state, const MiniBatch& batch,
                                       const FiniteSumProblem& p, double eta,
                                       std::int64_t* ifo = nullptr,
                                       double divergence_limit = 1e100) {
  p.check_point(state.w_curr);
  p.check_point(state.w_prev);
  if (state.v.size() != state.w_curr.size()) throw ContractError("recursive_update: v has wrong size");
  if (batch.size() == 0 || batch.indices().back() >= p.size())
    throw ContractError("recursive_update: batch does not fit the problem");
  RecursiveState next = state;
  detail::advance_recursive(next, batch, p, eta, divergence_limit);
  if (ifo) *ifo += 2 * static_cast<std::int64_t>(batch.size());
  return next;
}

/// What one inner loop produced.
struct InnerLoopResult {
  Vector w_tilde;
  std::size_t selected_t = 0;  ///< index of the returned iterate
  std::size_t last_t = 0;      ///< the loop computed w_0 .. w_{last_t}
  std::int64_t ifo = 0;        ///< IFOs spent inside this loop
  bool stopped = false;        ///< the step hook ended the run inside this loop
  std::vector<double> v_norm_sq;     ///< ||v_t||^2 for t = 0 .. last_t-1
  std::vector<double> grad_norm_sq;  ///< ||grad P(w_t)||^2 for t = 0 .. last_t (tracked runs only)
};

namespace detail {

enum class Estimator { kRecursive, kAnchored };

// Shared two-loop inner loop. `adaptive` enables the ratio test; the anchored
// estimator is the SVRG correction (1/b) sum [grad f_i(w_t) - grad f_i(w_0)] + v_0.
inline InnerLoopResult run_inner_loop(const FiniteSumProblem& p, const Vector& w0,
                                      const OptimizerConfig& cfg, std::size_t outer,
                                      Estimator estimator, bool adaptive,
                                      std::int64_t ifo_base, const StepHook& hook) {
  const std::size_t n = p.size();
  InnerLoopResult res;

  RecursiveState st;
  st.w_prev = w0;
  st.v = full_gradient(p, w0);
  st.v0_norm_sq = squared_norm(st.v);
  res.ifo += static_cast<std::int64_t>(n);
  res.v_norm_sq.push_back(st.v0_norm_sq);
  if (cfg.track_full_gradient) res.grad_norm_sq.push_back(st.v0_norm_sq);

  ReservoirPick pick(RngStream(cfg.seed, {outer, 0, StreamPurpose::kOutputSelect}));
  std::optional<Vector> picked;
  auto offer = [&](const Vector& w) {
    if (cfg.output_mode == OutputMode::kRandomIterate && pick.offer()) picked = w;
  };
  auto notify = [&](const Vector& w, std::size_t t) {
    return !hook || hook(StepEvent{w, ifo_base + res.ifo, outer, t});
  };

  offer(st.w_prev);
  bool keep_going = notify(st.w_prev, 0);

  st.w_curr = st.w_prev - cfg.eta * st.v;
  st.t = 1;
  check_divergence(st.w_curr, st.v, st.t, cfg.divergence_limit);
  offer(st.w_curr);
  if (cfg.track_full_gradient) res.grad_norm_sq.push_back(squared_norm(full_gradient(p, st.w_curr)));

  const Vector v0 = st.v;
  while (keep_going && st.t < cfg.m) {
    if (adaptive && !(squared_norm(st.v) > cfg.gamma * st.v0_norm_sq)) break;
    RngStream stream(cfg.seed, {outer, st.t, StreamPurpose::kBatch});
    const MiniBatch batch = sample_batch(stream, n, cfg.b);
    if (estimator == Estimator::kRecursive) {
      advance_recursive(st, batch, p, cfg.eta, cfg.divergence_limit);
    } else {
      Vector diff = Vector::Zero(st.v.size());
      p.add_batch_gradient_difference(batch.indices(), st.w_curr, w0, diff);
      st.v = diff / static_cast<double>(batch.size()) + v0;
      std::swap(st.w_prev, st.w_curr);
      st.w_curr = st.w_prev - cfg.eta * st.v;
      ++st.t;
      check_divergence(st.w_curr, st.v, st.t, cfg.divergence_limit);
    }
    res.ifo += 2 * static_cast<std::int64_t>(cfg.b);
    res.v_norm_sq.push_back(squared_norm(st.v));
    offer(st.w_curr);
    if (cfg.track_full_gradient) res.grad_norm_sq.push_back(squared_norm(full_gradient(p, st.w_curr)));
    keep_going = notify(st.w_curr, st.t);
  }
  res.last_t = st.t;
  res.stopped = !keep_going;
  if (res.stopped || cfg.output_mode == OutputMode::kLastIterate) {
    res.w_tilde = std::move(st.w_curr);
    res.selected_t = res.last_t;
  } else {
    res.w_tilde = std::move(*picked);
    res.selected_t = pick.picked();
  }
  return res;
}

}  // namespace detail

/// One inner loop of the recursive method (m - 1 stochastic steps after the
/// full-gradient step). `outer` labels the random streams.
inline InnerLoopResult sarah_in(const FiniteSumProblem& p, const Vector& w0, const OptimizerConfig& cfg,
                                std::size_t outer = 0, const StepHook& hook = {},
                                std::int64_t ifo_base = 0) {
  p.check_point(w0);
  cfg.validate(p.size());
  return detail::run_inner_loop(p, w0, cfg, outer, detail::Estimator::kRecursive, false, ifo_base, hook);
}

/// Adaptive inner loop: leaves once ||v_{t-1}||^2 <= gamma ||v_0||^2 or t = m.
inline InnerLoopResult sarah_plus_in(const FiniteSumProblem& p, const Vector& w0,
                                     const OptimizerConfig& cfg, std::size_t outer = 0,
                                     const StepHook& hook = {}, std::int64_t ifo_base = 0) {
  p.check_point(w0);
  OptimizerConfig c = cfg;
  c.algo = Algorithm::kSarahPlus;
  c.validate(p.size());
  return detail::run_inner_loop(p, w0, c, outer, detail::Estimator::kRecursive, true, ifo_base, hook);
}

/// SVRG inner loop with the same step structure and IFO accounting.
inline InnerLoopResult svrg_in(const FiniteSumProblem& p, const Vector& w0, const OptimizerConfig& cfg,
                               std::size_t outer = 0, const StepHook& hook = {},
                               std::int64_t ifo_base = 0) {
  p.check_point(w0);
  cfg.validate(p.size());
  return detail::run_inner_loop(p, w0, cfg, outer, detail::Estimator::kAnchored, false, ifo_base, hook);
}

/// Summary of one outer iteration.
struct StageRecord {
  std::size_t selected_t = 0;
  std::size_t last_t = 0;
  std::int64_t ifo_end = 0;  ///< cumulative IFOs after the stage
  std::optional<double> output_grad_norm_sq;  ///< ||grad P(w~_s)||^2 (tracked runs only)
  std::vector<double> v_norm_sq;
  std::vector<double> grad_norm_sq;
};

struct TwoLoopResult {
  Vector w;
  std::int64_t ifo = 0;
  bool stopped = false;
  std::optional<double> initial_grad_norm_sq;  ///< ||grad P(w~_0)||^2 (tracked runs only)
  std::vector<StageRecord> stages;
};

/// Chains inner loops of the configured two-loop algorithm (sarah, sarah+ or svrg):
/// w~_s = inner(w~_{s-1}). Runs cfg.s stages, or until the hook stops it when cfg.s = 0.
inline TwoLoopResult run_two_loop(const FiniteSumProblem& p, const Vector& w0, const OptimizerConfig& cfg,
                                  const StepHook& hook = {}) {
  p.check_point(w0);
  cfg.validate(p.size());
  if (!is_two_loop(cfg.algo)) throw ContractError("run_two_loop: " + to_string(cfg.algo) + " is single-loop");
  if (cfg.s == 0 && !hook) throw ContractError("run_two_loop: s = 0 needs a step hook to terminate");

  const bool adaptive = cfg.algo == Algorithm::kSarahPlus;
  const auto estimator = cfg.algo == Algorithm::kSvrg ? detail::Estimator::kAnchored : detail::Estimator::kRecursive;
  TwoLoopResult out;
  out.w = w0;
  if (cfg.track_full_gradient) out.initial_grad_norm_sq = squared_norm(full_gradient(p, w0));
  for (std::size_t s = 1; cfg.s == 0 || s <= cfg.s; ++s) {
    InnerLoopResult r = detail::run_inner_loop(p, out.w, cfg, s, estimator, adaptive, out.ifo, hook);
    out.ifo += r.ifo;
    out.w = std::move(r.w_tilde);
    StageRecord rec;
    rec.selected_t = r.selected_t;
    rec.last_t = r.last_t;
    rec.ifo_end = out.ifo;
    if (cfg.track_full_gradient) rec.output_grad_norm_sq = r.grad_norm_sq.at(r.selected_t);
    rec.v_norm_sq = std::move(r.v_norm_sq);
    rec.grad_norm_sq = std::move(r.grad_norm_sq);
    out.stages.push_back(std::move(rec));
    if (r.stopped) {
      out.stopped = true;
      break;
    }
  }
  return out;
}

/// Outer recursive method: s chained inner loops.
inline TwoLoopResult sarah(const FiniteSumProblem& p, const Vector& w0, OptimizerConfig cfg,
                           const StepHook& hook = {}) {
  cfg.algo = Algorithm::kSarah;
  return run_two_loop(p, w0, cfg, hook);
}

/// Outer method with adaptive inner loops.
inline TwoLoopResult sarah_plus(const FiniteSumProblem& p, const Vector& w0, OptimizerConfig cfg,
                                const StepHook& hook = {}) {
  cfg.algo = Algorithm::kSarahPlus;
  return run_two_loop(p, w0, cfg, hook);
}

inline TwoLoopResult svrg(const FiniteSumProblem& p, const Vector& w0, OptimizerConfig cfg,
                          const StepHook& hook = {}) {
  cfg.algo = Algorithm::kSvrg;
  return run_two_loop(p, w0, cfg, hook);
}

}  // namespace sarah

#endif  // SARAH_OPTIM_RECURSIVE_HPP
