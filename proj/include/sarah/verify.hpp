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

// Exact expectations of the recursive estimator by exhaustive enumeration.
//
// Expectations over mini-batches are computed by visiting every size-b subset
// (probability 1/C(n,b) each); expectations over a whole inner loop by visiting
// every batch sequence (I_1, ..., I_t) and replaying the recursion along it.
// No sampling is involved, so identities that hold in expectation can be
// checked to round-off.

#ifndef SARAH_VERIFY_HPP
#define SARAH_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sarah/errors.hpp"
#include "sarah/linalg.hpp"
#include "sarah/optim/config.hpp"
#include "sarah/optim/rates.hpp"
#include "sarah/optim/recursive.hpp"
#include "sarah/problem.hpp"
#include "sarah/sampling.hpp"

namespace sarah {

inline constexpr double kEnumerationBudget = 1e5;

/// Absolute round-off floor used by the inequality checks, so that 0 <= 0 is
/// not failed by terms of order 1e-32.
inline constexpr double kBoundRoundoffFloor = 1e-24;

struct EnumerationReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_err = 0.0;  ///< |lhs - rhs|
  std::size_t n = 0, b = 0, m = 0;
  std::string problem;
  std::uint64_t seed = 0;
  double cases = 0.0;  ///< subsets or paths enumerated
};

namespace detail {

inline void check_budget(double count, const char* who) {
  if (count > kEnumerationBudget)
    throw EnumerationBudgetError(std::string(who) + ": " + std::to_string(static_cast<long long>(count)) +
                                     " cases exceed the enumeration budget",
                                 count);
}

inline EnumerationReport make_report(double lhs, double rhs, const FiniteSumProblem& p, std::size_t b,
                                     std::size_t m, double cases) {
  EnumerationReport r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.abs_err = std::abs(lhs - rhs);
  r.n = p.size();
  r.b = b;
  r.m = m;
  r.problem = p.name();
  r.cases = cases;
  return r;
}

}  // namespace detail

/// Mini-batch variance of gradient differences xi_i = grad f_i(w_curr) - grad f_i(w_prev):
///   lhs = E_I ||(1/b) sum_{i in I} xi_i||^2 - ||mean xi||^2   (all subsets)
///   rhs = (1/(b n)) ((n-b)/(n-1)) [sum ||xi_i||^2 - n ||mean xi||^2]
inline EnumerationReport check_batch_variance_identity(const FiniteSumProblem& p, const Vector& w_prev,
                                                       const Vector& w_curr, std::size_t b) {
  const std::size_t n = p.size();
  if (n < 2) throw ContractError("check_batch_variance_identity: need n >= 2");
  if (b < 1 || b > n) throw ContractError("check_batch_variance_identity: need 1 <= b <= n");
  const double count = binomial(n, b);
  detail::check_budget(count, "check_batch_variance_identity");

  std::vector<Vector> xi(n);
  Vector mean = Vector::Zero(static_cast<Eigen::Index>(p.dim()));
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xi[i] = p.component_gradient(i, w_curr) - p.component_gradient(i, w_prev);
    mean += xi[i];
    sum_sq += squared_norm(xi[i]);
  }
  mean /= static_cast<double>(n);
  const double mean_sq = squared_norm(mean);

  double acc = 0.0;
  for_each_subset(n, b, [&](std::span<const std::size_t> subset) {
    Vector s = Vector::Zero(mean.size());
    for (std::size_t i : subset) s += xi[i];
    acc += squared_norm(s / static_cast<double>(b));
  });
  const double lhs = acc / count - mean_sq;
  const double rhs = batch_variance_factor(n, b) / (static_cast<double>(b) * static_cast<double>(n)) *
                     (sum_sq - static_cast<double>(n) * mean_sq);
  return detail::make_report(lhs, rhs, p, b, 0, count);
}

/// Conditional unbiasedness of one recursive step: the exact average of v_new
/// over all C(n,b) batches against grad P(w_curr) - grad P(w_prev) + v.
/// lhs and rhs are the Euclidean norms of the two vectors; abs_err is the
/// max-norm of their difference.
inline EnumerationReport check_unbiasedness(const FiniteSumProblem& p, const RecursiveState& state,
                                            std::size_t b, double eta) {
  const std::size_t n = p.size();
  const double count = binomial(n, b);
  detail::check_budget(count, "check_unbiasedness");
  Vector mean = Vector::Zero(state.v.size());
  for_each_subset(n, b, [&](std::span<const std::size_t> subset) {
    const MiniBatch batch(std::vector<std::size_t>(subset.begin(), subset.end()), n);
    mean += recursive_update(state, batch, p, eta).v;
  });
  mean /= count;
  const Vector expected = full_gradient(p, state.w_curr) - full_gradient(p, state.w_prev) + state.v;
  EnumerationReport r = detail::make_report(std::sqrt(squared_norm(mean)), std::sqrt(squared_norm(expected)),
                                            p, b, 0, count);
  r.abs_err = (mean - expected).cwiseAbs().maxCoeff();
  return r;
}

/// Exact per-step expectations of one inner loop, up to t = m - 1.
struct PathExpectations {
  std::size_t t = 0;                   ///< last index with a formed v_t
  double paths = 0.0;                  ///< number of batch sequences
  double probability_mass = 0.0;       ///< sum of path probabilities
  double estimator_error = 0.0;        ///< E ||grad P(w_t) - v_t||^2
  std::vector<double> step_sq;         ///< [j] = E ||v_j - v_{j-1}||^2, j = 1..t (index 0 unused)
  std::vector<double> grad_step_sq;    ///< [j] = E ||grad P(w_j) - grad P(w_{j-1})||^2
  std::vector<double> v_norm_sq;       ///< [j] = E ||v_j||^2, j = 0..t
  double max_decomposition_residual = 0.0;  ///< max over prefixes of the conditional one-step residual
};

namespace detail {

struct PathWalker {
  const FiniteSumProblem& p;
  double eta;
  std::size_t b;
  std::size_t t_final;
  double subsets;
  std::vector<std::vector<std::size_t>> all_subsets;
  PathExpectations out;

  // Node: state holds (w_{j-1}, w_j, v_{j-1}); grad_prev = grad P(w_{j-1}), grad_curr = grad P(w_j).
  void visit(const RecursiveState& st, const Vector& grad_prev, const Vector& grad_curr, double prob) {
    const std::size_t j = st.t;
    if (j > t_final) {
      out.probability_mass += prob;
      return;
    }
    const double child_prob = prob / subsets;
    const double err_prev = squared_norm(grad_prev - st.v);
    double residual = 0.0;
    for (const auto& idx : all_subsets) {
      const MiniBatch batch(idx, p.size());
      const RecursiveState next = recursive_update(st, batch, p, eta);
      // next = (w_j, w_{j+1}, v_j)
      const Vector grad_next = full_gradient(p, next.w_curr);
      const double dv = squared_norm(next.v - st.v);
      const double dg = squared_norm(grad_curr - grad_prev);
      const double err = squared_norm(grad_curr - next.v);
      out.step_sq[j] += child_prob * dv;
      out.grad_step_sq[j] += child_prob * dg;
      out.v_norm_sq[j] += child_prob * squared_norm(next.v);
      if (j == t_final) out.estimator_error += child_prob * err;
      residual += err - err_prev + dg - dv;
      visit(next, grad_curr, grad_next, child_prob);
    }
    out.max_decomposition_residual = std::max(out.max_decomposition_residual, std::abs(residual / subsets));
  }
};

}  // namespace detail

/// Enumerates every batch sequence of an inner loop of length m started at w0.
inline PathExpectations enumerate_inner_loop(const FiniteSumProblem& p, const Vector& w0, double eta,
                                             std::size_t b, std::size_t m) {
  const std::size_t n = p.size();
  if (m < 1) throw ContractError("enumerate_inner_loop: m must be positive");
  if (b < 1 || b > n) throw ContractError("enumerate_inner_loop: need 1 <= b <= n");
  const double subsets = binomial(n, b);
  const double paths = std::pow(subsets, static_cast<double>(m - 1));
  detail::check_budget(paths, "enumerate_inner_loop");

  detail::PathWalker walker{p, eta, b, m - 1, subsets, {}, {}};
  for_each_subset(n, b, [&](std::span<const std::size_t> s) { walker.all_subsets.emplace_back(s.begin(), s.end()); });
  walker.out.t = m - 1;
  walker.out.paths = paths;
  walker.out.step_sq.assign(m, 0.0);
  walker.out.grad_step_sq.assign(m, 0.0);
  walker.out.v_norm_sq.assign(m, 0.0);

  RecursiveState st;
  st.w_prev = w0;
  st.v = full_gradient(p, w0);
  st.v0_norm_sq = squared_norm(st.v);
  st.w_curr = w0 - eta * st.v;
  st.t = 1;
  walker.out.v_norm_sq[0] = st.v0_norm_sq;
  if (m == 1) {
    walker.out.probability_mass = 1.0;
    walker.out.estimator_error = 0.0;  // v_0 is the full gradient at w_0
    return walker.out;
  }
  walker.visit(st, st.v, full_gradient(p, st.w_curr), 1.0);
  return walker.out;
}

/// E||grad P(w_t) - v_t||^2 against sum_j E||v_j - v_{j-1}||^2 - sum_j E||grad P(w_j) - grad P(w_{j-1})||^2
/// at t = m - 1, by full path enumeration.
inline EnumerationReport check_lemma2_identity(const FiniteSumProblem& p, const Vector& w0, double eta,
                                               std::size_t b, std::size_t m) {
  const PathExpectations e = enumerate_inner_loop(p, w0, eta, b, m);
  double rhs = 0.0;
  for (std::size_t j = 1; j <= e.t; ++j) rhs += e.step_sq[j] - e.grad_step_sq[j];
  return detail::make_report(e.estimator_error, rhs, p, b, m, e.paths);
}

/// Inequality report: lhs = E||grad P(w_t) - v_t||^2 (exact), rhs =
/// (1/b)((n-b)/(n-1)) L^2 eta^2 sum_{j=1..t} E||v_{j-1}||^2 with the problem's L.
struct BoundReport : EnumerationReport {
  bool holds = false;  ///< lhs <= rhs (1 + 1e-10) + round-off floor
};

inline BoundReport check_lemma3_bound(const FiniteSumProblem& p, const Vector& w0, double eta, std::size_t b,
                                      std::size_t m) {
  const auto L = p.constants().L;
  if (!L) throw ContractError("check_lemma3_bound: problem has no known L");
  const PathExpectations e = enumerate_inner_loop(p, w0, eta, b, m);
  double sum_v = 0.0;
  for (std::size_t j = 1; j <= e.t; ++j) sum_v += e.v_norm_sq[j - 1];
  const double rhs = batch_variance_factor(p.size(), b) / static_cast<double>(b) * (*L) * (*L) * eta * eta * sum_v;
  BoundReport r;
  static_cast<EnumerationReport&>(r) = detail::make_report(e.estimator_error, rhs, p, b, m, e.paths);
  r.holds = r.lhs <= r.rhs * (1.0 + 1e-10) + kBoundRoundoffFloor;
  return r;
}

/// Monte-Carlo estimate of the inner-loop gradient bound:
///   mean over seeds of (1/(m+1)) sum_{t=0..m} ||grad P(w_t)||^2
/// against 2 (P(w0) - P(w*)) / (eta (m+1)).
struct MonteCarloBoundReport {
  double estimate = 0.0;
  double bound = 0.0;
  double slack = 1.05;
  std::size_t seeds = 0;
  bool holds = false;
};

inline MonteCarloBoundReport check_inner_loop_bound(const FiniteSumProblem& p, const Vector& w0,
                                                    OptimizerConfig cfg, std::size_t seeds,
                                                    std::uint64_t first_seed = 1, double slack = 1.05) {
  const auto opt = p.constants().opt_value;
  if (!opt) throw ContractError("check_inner_loop_bound: problem has no known optimal value");
  cfg.track_full_gradient = true;
  cfg.algo = Algorithm::kSarah;
  MonteCarloBoundReport r;
  r.seeds = seeds;
  r.slack = slack;
  double acc = 0.0;
  for (std::size_t k = 0; k < seeds; ++k) {
    cfg.seed = first_seed + k;
    const InnerLoopResult res = sarah_in(p, w0, cfg);
    double sum = 0.0;
    for (double g : res.grad_norm_sq) sum += g;
    acc += sum / static_cast<double>(res.grad_norm_sq.size());
  }
  r.estimate = acc / static_cast<double>(seeds);
  r.bound = inner_loop_gradient_bound(cfg.eta, cfg.m, full_loss(p, w0) - *opt);
  r.holds = r.estimate <= r.bound * slack;
  return r;
}

/// Monte-Carlo check of the per-stage linear rate of the outer method in
/// random-iterate mode: E||grad P(w~_s)||^2 / E||grad P(w~_{s-1})||^2 <= gamma_bar * slack.
struct LinearRateReport {
  double gamma_bar = 0.0;
  double slack = 1.05;
  std::size_t seeds = 0;
  std::vector<double> mean_grad_norm_sq;  ///< [s] = mean ||grad P(w~_s)||^2, s = 0..S
  std::vector<double> ratios;             ///< [s-1] = mean[s] / mean[s-1]
  bool holds = false;
};

inline LinearRateReport check_linear_rate(const FiniteSumProblem& p, const Vector& w0, OptimizerConfig cfg,
                                          std::size_t seeds, std::uint64_t first_seed = 1,
                                          double slack = 1.05) {
  const auto tau = p.constants().tau;
  if (!tau) throw ContractError("check_linear_rate: problem has no known tau");
  if (cfg.s < 1) throw ContractError("check_linear_rate: need s >= 1");
  cfg.algo = Algorithm::kSarah;
  cfg.track_full_gradient = true;
  cfg.output_mode = OutputMode::kRandomIterate;
  LinearRateReport r;
  r.gamma_bar = contraction_factor(*tau, cfg.eta, cfg.m);
  r.slack = slack;
  r.seeds = seeds;
  r.mean_grad_norm_sq.assign(cfg.s + 1, 0.0);
  for (std::size_t k = 0; k < seeds; ++k) {
    cfg.seed = first_seed + k;
    const TwoLoopResult res = run_two_loop(p, w0, cfg);
    r.mean_grad_norm_sq[0] += *res.initial_grad_norm_sq;
    for (std::size_t s = 0; s < res.stages.size(); ++s)
      r.mean_grad_norm_sq[s + 1] += *res.stages[s].output_grad_norm_sq;
  }
  for (double& v : r.mean_grad_norm_sq) v /= static_cast<double>(seeds);
  r.holds = true;
  for (std::size_t s = 1; s < r.mean_grad_norm_sq.size(); ++s) {
    r.ratios.push_back(r.mean_grad_norm_sq[s] / r.mean_grad_norm_sq[s - 1]);
    if (!(r.ratios.back() <= r.gamma_bar * slack)) r.holds = false;
  }
  return r;
}

}  // namespace sarah

#endif  // SARAH_VERIFY_HPP
