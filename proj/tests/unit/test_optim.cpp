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

#include <array>
#include <cmath>
#include <vector>

#include "sarah/data.hpp"
#include "sarah/errors.hpp"
#include "sarah/optim/baselines.hpp"
#include "sarah/optim/rates.hpp"
#include "sarah/optim/recursive.hpp"
#include "sarah/problems.hpp"

namespace sarah {
namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

// P(w) = 1/2 ||w||^2 split into n identical components.
QuadraticProblem identity_quadratic(std::size_t n, std::size_t d) {
  return make_quadratic(Vector::Ones(static_cast<Eigen::Index>(d)), Vector::Zero(static_cast<Eigen::Index>(d)), n);
}

LogisticProblem small_logistic(std::size_t n) {
  const Dataset ds = make_synthetic(n, 3, 11);
  return make_logistic(ds.features, signed_labels(ds), 0.1);
}

OptimizerConfig base_config(Algorithm algo, double eta, std::size_t m, std::size_t b) {
  OptimizerConfig c;
  c.algo = algo;
  c.eta = eta;
  c.m = m;
  c.b = b;
  c.seed = 5;
  return c;
}

TEST(StepSizeBound, FullBatchGivesInverseL) {
  for (std::size_t m : {1u, 2u, 10u, 1000u}) EXPECT_EQ(step_size_bound(m, 7, 7, 4.0), 0.25);
  EXPECT_EQ(step_size_bound(5, 1, 1, 2.0), 0.5);
}

TEST(StepSizeBound, HandEvaluatedCases) {
  // m=2, b=1, n=3: 1 + 8 = 9, bound = 2 / (L (3 + 1))
  EXPECT_DOUBLE_EQ(step_size_bound(2, 1, 3, 3.0), 1.0 / 6.0);
  // m = n - 1, n=4, b=1: 2 / (L (sqrt(13) + 1))
  EXPECT_DOUBLE_EQ(step_size_bound(3, 1, 4, 1.5), 2.0 / (1.5 * (std::sqrt(13.0) + 1.0)));
  EXPECT_THROW(step_size_bound(3, 1, 4, 0.0), ContractError);
  EXPECT_THROW(step_size_bound(3, 5, 4, 1.0), ContractError);
}

TEST(StepSizeBound, MonotoneInInnerLengthAndBatch) {
  const std::size_t n = 50;
  for (std::size_t b = 1; b <= n; b += 7) {
    for (std::size_t m = 1; m < 200; ++m) EXPECT_GE(step_size_bound(m, b, n, 1.0), step_size_bound(m + 1, b, n, 1.0));
    if (b + 7 <= n) {
      EXPECT_LE(step_size_bound(30, b, n, 1.0), step_size_bound(30, b + 7, n, 1.0));
    }
  }
}

TEST(RateReport, ContractionFactorCases) {
  ProblemConstants c;
  c.tau = 0.5;
  auto r = rate_report(c, 0.25, 7, 1, 10);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->gamma_bar, 0.5);
  EXPECT_TRUE(r->tau_condition_met);
  EXPECT_FALSE(r->eta_max);

  c.tau = 1.0;
  c.L = 2.0;
  r = rate_report(c, 0.25, 7, 1, 10);
  EXPECT_EQ(r->gamma_bar, 1.0);
  EXPECT_FALSE(r->tau_condition_met);
  EXPECT_DOUBLE_EQ(*r->eta_max, step_size_bound(7, 1, 10, 2.0));

  double prev = 1e300;
  for (std::size_t m = 1; m < 1000000; m *= 10) {
    const double g = rate_report(c, 0.25, m, 1, 10)->gamma_bar;
    EXPECT_LT(g, prev);
    prev = g;
  }
  EXPECT_LT(prev, 1e-4);
  EXPECT_FALSE(rate_report(ProblemConstants{}, 0.25, 7, 1, 10));
}

TEST(RecursiveUpdate, UnchangedIterateKeepsEstimate) {
  const auto p = small_logistic(6);
  RecursiveState st;
  st.w_prev = st.w_curr = vec({0.3, -0.2, 0.1});
  st.v = vec({1.0, 2.0, 3.0});
  std::int64_t ifo = 0;
  const auto next = recursive_update(st, MiniBatch({1, 4}, 6), p, 0.1, &ifo);
  EXPECT_TRUE(next.v == st.v);
  EXPECT_EQ(next.t, 1u);
  EXPECT_EQ(ifo, 4);
  EXPECT_TRUE(next.w_prev == st.w_curr);
  EXPECT_TRUE(next.w_curr == st.w_curr - 0.1 * st.v);
}

TEST(RecursiveUpdate, SingleComponentTelescopes) {
  // f(w) = 1/2 w' diag(1, 2) w - (1, -1)' w, all values dyadic
  const auto p = make_quadratic(vec({1.0, 2.0}), vec({1.0, -1.0}), 1);
  RecursiveState st;
  st.w_prev = vec({0.5, 0.25});
  st.w_curr = vec({-1.5, 3.0});
  st.v = p.component_gradient(0, st.w_prev);
  const auto next = recursive_update(st, MiniBatch::full(1), p, 0.5);
  EXPECT_TRUE(next.v == p.component_gradient(0, st.w_curr));
}

TEST(RecursiveUpdate, BatchAverageIsConditionallyUnbiased) {
  const auto p = small_logistic(6);
  RecursiveState st;
  st.w_prev = vec({0.4, -0.7, 0.2});
  st.w_curr = vec({0.1, 0.3, -0.5});
  st.v = vec({0.05, -0.02, 0.3});
  Vector mean = Vector::Zero(3);
  int count = 0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i + 1; j < 6; ++j) {
      mean += recursive_update(st, MiniBatch({i, j}, 6), p, 0.1).v;
      ++count;
    }
  ASSERT_EQ(count, 15);
  mean /= 15.0;
  const Vector expected = full_gradient(p, st.w_curr) - full_gradient(p, st.w_prev) + st.v;
  EXPECT_LT((mean - expected).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(RecursiveUpdate, ContractAndDivergenceErrors) {
  const auto p = small_logistic(6);
  RecursiveState st;
  st.w_prev = st.w_curr = Vector::Zero(3);
  st.v = Vector::Zero(2);
  EXPECT_THROW(recursive_update(st, MiniBatch({0}, 6), p, 0.1), ContractError);
  st.v = Vector::Zero(3);
  EXPECT_THROW(recursive_update(st, MiniBatch({7}, 8), p, 0.1), ContractError);
  st.v = Vector::Constant(3, 1e200);
  try {
    recursive_update(st, MiniBatch({0}, 6), p, 0.1);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.step(), 1);
    EXPECT_GT(e.estimator_norm(), 1e100);
  }
}

TEST(SarahIn, IdentityQuadraticClosedForm) {
  const auto p = identity_quadratic(1, 3);
  const Vector w0 = vec({1.0, -2.0, 0.75});
  for (std::size_t m : {1u, 2u, 5u, 9u}) {
    auto cfg = base_config(Algorithm::kSarah, 0.5, m, 1);
    cfg.output_mode = OutputMode::kLastIterate;
    const auto r = sarah_in(p, w0, cfg);
    EXPECT_EQ(r.last_t, m);
    EXPECT_TRUE(r.w_tilde == std::pow(0.5, static_cast<double>(m)) * w0);
    EXPECT_EQ(r.ifo, outer_iteration_ifo(1, 1, m - 1));
  }
}

TEST(SarahIn, SingleStepLoopReturnsFirstOrSecondIterate) {
  const auto p = small_logistic(8);
  const Vector w0 = vec({0.2, 0.2, -0.1});
  const Vector w1 = w0 - 0.3 * full_gradient(p, w0);
  int saw0 = 0, saw1 = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto cfg = base_config(Algorithm::kSarah, 0.3, 1, 2);
    cfg.seed = seed;
    const auto r = sarah_in(p, w0, cfg);
    EXPECT_EQ(r.last_t, 1u);
    EXPECT_EQ(r.ifo, 8);
    if (r.selected_t == 0) {
      EXPECT_TRUE(r.w_tilde == w0);
      ++saw0;
    } else {
      EXPECT_TRUE(r.w_tilde == w1);
      ++saw1;
    }
  }
  EXPECT_GT(saw0, 0);
  EXPECT_GT(saw1, 0);
}

TEST(SarahIn, FullBatchEstimatesAreFullGradients) {
  const auto p = small_logistic(7);
  for (Algorithm algo : {Algorithm::kSarah, Algorithm::kSvrg}) {
    auto cfg = base_config(algo, 0.5, 12, 7);
    cfg.track_full_gradient = true;
    const auto r = algo == Algorithm::kSarah ? sarah_in(p, vec({1.0, -1.0, 0.5}), cfg)
                                             : svrg_in(p, vec({1.0, -1.0, 0.5}), cfg);
    ASSERT_EQ(r.v_norm_sq.size(), 12u);
    for (std::size_t t = 0; t < r.v_norm_sq.size(); ++t)
      EXPECT_NEAR(r.v_norm_sq[t], r.grad_norm_sq[t], 1e-12 * (1.0 + r.grad_norm_sq[t])) << to_string(algo) << " t=" << t;
  }
}

TEST(SarahIn, FullBatchChainMatchesGradientDescent) {
  const auto p = small_logistic(5);
  const Vector w0 = vec({0.5, 0.5, -0.5});
  auto cfg = base_config(Algorithm::kSarah, 0.4, 5, 5);
  cfg.s = 3;
  cfg.output_mode = OutputMode::kLastIterate;
  const auto chain = run_two_loop(p, w0, cfg);
  auto gd = base_config(Algorithm::kGd, 0.4, 1, 1);
  gd.steps = 15;
  const auto ref = run_single_loop(p, w0, gd);
  EXPECT_LT((chain.w - ref.w).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SarahIn, RandomIterateSelectionIsUniform) {
  const auto p = small_logistic(6);
  const Vector w0 = vec({0.1, 0.2, 0.3});
  const std::size_t m = 4, runs = 10000;
  std::array<int, 5> counts{};
  for (std::uint64_t seed = 0; seed < runs; ++seed) {
    auto cfg = base_config(Algorithm::kSarah, 0.1, m, 2);
    cfg.seed = seed;
    ++counts.at(sarah_in(p, w0, cfg).selected_t);
  }
  for (int c : counts) EXPECT_NEAR(c / static_cast<double>(runs), 1.0 / (m + 1), 0.02);
}

TEST(SarahPlus, ExitsAtSecondStepOnIdentityQuadratic) {
  const auto p = identity_quadratic(4, 2);
  auto cfg = base_config(Algorithm::kSarahPlus, 0.5, 50, 4);
  cfg.gamma = 0.7;
  const auto r = sarah_plus_in(p, vec({1.0, 3.0}), cfg);
  EXPECT_EQ(r.last_t, 2u);
  ASSERT_EQ(r.v_norm_sq.size(), 2u);
  EXPECT_EQ(r.v_norm_sq[1], 0.25 * r.v_norm_sq[0]);
  EXPECT_LE(r.selected_t, 2u);
}

TEST(SarahPlus, GammaOneStopsAfterGradientStep) {
  const auto p = small_logistic(6);
  auto cfg = base_config(Algorithm::kSarahPlus, 0.1, 20, 1);
  cfg.gamma = 1.0;
  const auto r = sarah_plus_in(p, vec({0.3, 0.3, 0.3}), cfg);
  EXPECT_EQ(r.last_t, 1u);
  EXPECT_EQ(r.ifo, 6);
}

TEST(SarahPlus, TinyGammaMatchesPlainInnerLoop) {
  const auto p = small_logistic(9);
  auto cfg = base_config(Algorithm::kSarahPlus, 0.2, 15, 2);
  cfg.gamma = 1e-300;
  const auto plus = sarah_plus_in(p, vec({0.3, -0.3, 0.3}), cfg);
  cfg.algo = Algorithm::kSarah;
  const auto plain = sarah_in(p, vec({0.3, -0.3, 0.3}), cfg);
  EXPECT_EQ(plus.last_t, 15u);
  EXPECT_TRUE(plus.w_tilde == plain.w_tilde);
  EXPECT_EQ(plus.selected_t, plain.selected_t);
  EXPECT_EQ(plus.v_norm_sq, plain.v_norm_sq);
}

TEST(TwoLoop, OneStageEqualsOneInnerLoop) {
  const auto p = small_logistic(10);
  auto cfg = base_config(Algorithm::kSarah, 0.2, 8, 3);
  cfg.s = 1;
  const auto chain = run_two_loop(p, vec({0.1, 0.0, -0.1}), cfg);
  const auto inner = sarah_in(p, vec({0.1, 0.0, -0.1}), cfg, 1);
  EXPECT_TRUE(chain.w == inner.w_tilde);
  EXPECT_EQ(chain.ifo, inner.ifo);
  EXPECT_EQ(chain.stages.at(0).v_norm_sq, inner.v_norm_sq);
}

TEST(TwoLoop, IfoAccounting) {
  const auto p = small_logistic(10);
  for (Algorithm algo : {Algorithm::kSarah, Algorithm::kSvrg}) {
    auto cfg = base_config(algo, 0.2, 8, 3);
    cfg.s = 4;
    const auto r = run_two_loop(p, Vector::Zero(3), cfg);
    EXPECT_EQ(r.ifo, 4 * (10 + 2 * 3 * 7));
    EXPECT_EQ(r.stages.back().ifo_end, r.ifo);
  }
  auto plus = base_config(Algorithm::kSarahPlus, 0.2, 8, 3);
  plus.s = 3;
  const auto r = run_two_loop(p, Vector::Zero(3), plus);
  std::int64_t expected = 0;
  for (const auto& st : r.stages) expected += outer_iteration_ifo(10, 3, st.last_t - 1);
  EXPECT_EQ(r.ifo, expected);
}

TEST(TwoLoop, HookStopsTheRun) {
  const auto p = small_logistic(10);
  auto cfg = base_config(Algorithm::kSarah, 0.2, 8, 2);
  cfg.s = 0;
  EXPECT_THROW(run_two_loop(p, Vector::Zero(3), cfg), ContractError);
  std::int64_t last = -1;
  const auto r = run_two_loop(p, Vector::Zero(3), cfg, [&](const StepEvent& e) {
    EXPECT_GT(e.ifo, last);
    last = e.ifo;
    return e.ifo < 50;
  });
  EXPECT_TRUE(r.stopped);
  EXPECT_GE(r.ifo, 50);
  EXPECT_EQ(r.ifo, last);
}

TEST(TwoLoop, DivergentStepSizeThrows) {
  const auto p = make_spread_quadratic(20, 4, 1.0, 10.0, 0.5, 1.0, 3);
  auto cfg = base_config(Algorithm::kSarah, 5.0, 20, 1);
  cfg.s = 200;
  EXPECT_THROW(run_two_loop(p, Vector::Ones(4), cfg), DivergenceError);
}

TEST(TwoLoop, ConfigValidation) {
  const auto p = small_logistic(4);
  auto cfg = base_config(Algorithm::kSarah, 0.1, 3, 5);
  EXPECT_THROW(run_two_loop(p, Vector::Zero(3), cfg), ContractError);
  cfg.b = 1;
  cfg.eta = 0.0;
  EXPECT_THROW(run_two_loop(p, Vector::Zero(3), cfg), ContractError);
  cfg.eta = 0.1;
  cfg.algo = Algorithm::kSarahPlus;
  cfg.gamma = 1.5;
  EXPECT_THROW(run_two_loop(p, Vector::Zero(3), cfg), ContractError);
  cfg.algo = Algorithm::kSgd;
  EXPECT_THROW(run_two_loop(p, Vector::Zero(3), cfg), ContractError);
  EXPECT_THROW(parse_algorithm("lbfgs"), ContractError);
  EXPECT_EQ(parse_algorithm("sarah+"), Algorithm::kSarahPlus);
}

TEST(Baselines, AdagradFirstStep) {
  // f(w) = 1/2 w^2 at w = 0.3 has gradient 0.3
  const auto p = make_quadratic(vec({1.0}), vec({0.0}), 1);
  auto cfg = base_config(Algorithm::kAdagrad, 0.1, 1, 1);
  cfg.delta = 0.01;
  cfg.steps = 1;
  const auto r = run_single_loop(p, vec({0.3}), cfg);
  EXPECT_NEAR(r.w[0] - 0.3, -0.0948683, 1e-7);
  EXPECT_NEAR(r.w[0] - 0.3, -0.1 * 0.3 / std::sqrt(0.1), 1e-15);
}

TEST(Baselines, ZeroMomentumIsPlainSgd) {
  const auto p = small_logistic(12);
  auto cfg = base_config(Algorithm::kSgdMomentum, 0.3, 1, 3);
  cfg.beta = 0.0;
  cfg.steps = 25;
  const auto m = run_single_loop(p, vec({0.2, -0.4, 0.6}), cfg);
  cfg.algo = Algorithm::kSgd;
  const auto s = run_single_loop(p, vec({0.2, -0.4, 0.6}), cfg);
  EXPECT_TRUE(m.w == s.w);
  EXPECT_EQ(m.ifo, 25 * 3);
}

TEST(Baselines, MomentumRecursion) {
  const auto p = identity_quadratic(1, 1);
  auto cfg = base_config(Algorithm::kSgdMomentum, 0.5, 1, 1);
  cfg.beta = 0.5;
  cfg.steps = 2;
  // u1 = 1, w1 = 0.5;  u2 = 0.5 + 0.5 = 1, w2 = 0
  EXPECT_EQ(run_single_loop(p, vec({1.0}), cfg).w[0], 0.0);
}

TEST(Baselines, IfoAccounting) {
  const auto p = small_logistic(9);
  for (Algorithm algo : {Algorithm::kSgd, Algorithm::kSgdMomentum, Algorithm::kAdagrad}) {
    auto cfg = base_config(algo, 0.05, 1, 4);
    cfg.beta = 0.5;
    cfg.steps = 11;
    EXPECT_EQ(run_single_loop(p, Vector::Zero(3), cfg).ifo, 44);
  }
  auto gd = base_config(Algorithm::kGd, 0.05, 1, 1);
  gd.steps = 3;
  EXPECT_EQ(run_single_loop(p, Vector::Zero(3), gd).ifo, 27);
}

TEST(Baselines, DivergentSgdThrows) {
  const auto p = make_spread_quadratic(20, 4, 1.0, 10.0, 0.5, 1.0, 3);
  auto cfg = base_config(Algorithm::kSgd, 3.0, 1, 1);
  cfg.steps = 5000;
  EXPECT_THROW(run_single_loop(p, Vector::Ones(4), cfg), DivergenceError);
}

TEST(Optimize, DispatchesAndIsDeterministic) {
  const auto p = small_logistic(10);
  for (Algorithm algo : {Algorithm::kSarah, Algorithm::kSarahPlus, Algorithm::kSvrg, Algorithm::kSgd,
                         Algorithm::kSgdMomentum, Algorithm::kAdagrad, Algorithm::kGd}) {
    auto cfg = base_config(algo, 0.1, 5, 2);
    cfg.s = 2;
    cfg.steps = 7;
    cfg.beta = 0.5;
    const auto a = optimize(p, vec({0.1, 0.1, 0.1}), cfg);
    const auto b = optimize(p, vec({0.1, 0.1, 0.1}), cfg);
    EXPECT_TRUE(a.w == b.w) << to_string(algo);
    EXPECT_EQ(a.two_loop.has_value(), is_two_loop(algo));
  }
}

}  // namespace
}  // namespace sarah
