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

// Named verification suites over fixed instances. Each check yields one
// result with the measured value, the threshold it is held to and a verdict.

#ifndef SARAH_VERIFY_SUITES_HPP
#define SARAH_VERIFY_SUITES_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sarah/data.hpp"
#include "sarah/errors.hpp"
#include "sarah/linalg.hpp"
#include "sarah/optim/baselines.hpp"
#include "sarah/optim/rates.hpp"
#include "sarah/optim/recursive.hpp"
#include "sarah/problems.hpp"
#include "sarah/rng.hpp"
#include "sarah/verify.hpp"

namespace sarah::suites {

struct CheckResult {
  std::string suite;
  std::string name;
  double value = 0.0;      ///< measured quantity (an error or an estimate)
  double threshold = 0.0;  ///< pass iff value <= threshold (strictly below for tolerances)
  bool pass = false;
  nlohmann::json detail = nlohmann::json::object();

  nlohmann::json to_json() const {
    return {{"suite", suite}, {"check", name}, {"value", value}, {"threshold", threshold},
            {"pass", pass}, {"detail", detail}};
  }
};

inline constexpr std::uint64_t kInstanceSeed = 11;
inline constexpr std::uint64_t kQuadraticSeed = 2017;
inline constexpr std::size_t kInstanceDim = 3;
inline constexpr double kInstanceLambda = 0.1;

/// Small binary classification instance: "logistic" or "sigmoid", n examples in 3 dimensions.
inline std::shared_ptr<FiniteSumProblem> small_instance(const std::string& kind, std::size_t n) {
  const Dataset ds = make_synthetic(n, kInstanceDim, kInstanceSeed);
  if (kind == "logistic") return std::make_shared<LogisticProblem>(ds.features, signed_labels(ds), kInstanceLambda);
  if (kind == "sigmoid") return std::make_shared<SigmoidLossProblem>(ds.features, signed_labels(ds));
  throw ContractError("small_instance: unknown kind '" + kind + "'");
}

/// Standard normal point of dimension d from stream `k` of `seed`.
inline Vector random_point(std::size_t d, std::uint64_t seed, std::size_t k) {
  RngStream rng(seed, {k, 0, StreamPurpose::kGeneric});
  Vector w(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.normal();
  return w;
}

/// Gradient-dominated quadratic with d = 10, n = 50, curvatures on [1, 10].
inline QuadraticProblem reference_quadratic() {
  return make_spread_quadratic(50, 10, 1.0, 10.0, 0.5, 1.0, kQuadraticSeed);
}

inline Vector reference_start() { return Vector::Ones(10); }

namespace detail {

inline std::string instance_label(const FiniteSumProblem& p, std::size_t b, std::size_t m = 0) {
  std::string s = p.name() + " n=" + std::to_string(p.size()) + " b=" + std::to_string(b);
  if (m) s += " m=" + std::to_string(m);
  return s;
}

inline CheckResult tolerance_check(const std::string& suite, const std::string& name, const EnumerationReport& r,
                                   double tol) {
  CheckResult c{suite, name, r.abs_err, tol, r.abs_err < tol, {}};
  c.detail = {{"lhs", r.lhs}, {"rhs", r.rhs}, {"cases", r.cases}};
  return c;
}

// f_i(w) = 1/2 a'(w.w) - c_i'w with dyadic a and c_i, so every floating-point
// operation of a short run at eta = 1/2 is exact.
class DyadicQuadratic final : public FiniteSumProblem {
 public:
  DyadicQuadratic() {
    a_ = Vector(3);
    a_ << 1.0, 0.5, 0.25;
    c_ = RowMatrix(4, 3);
    c_ << 1.0, -0.5, 0.25, -0.75, 0.5, 1.0, 0.25, 0.0, -1.0, -0.5, 1.0, 0.75;
  }
  std::size_t size() const override { return 4; }
  std::size_t dim() const override { return 3; }
  std::string name() const override { return "dyadic-quadratic"; }
  double component_loss(std::size_t i, const Vector& w) const override {
    return 0.5 * a_.dot(w.cwiseProduct(w)) - c_.row(static_cast<Eigen::Index>(i)).dot(w);
  }
  void add_component_gradient(std::size_t i, const Vector& w, double scale, Vector& out) const override {
    out += scale * (a_.cwiseProduct(w) - c_.row(static_cast<Eigen::Index>(i)).transpose());
  }
  ProblemConstants constants() const override { return {1.0, std::nullopt, std::nullopt}; }

 private:
  Vector a_;
  RowMatrix c_;
};

// GD and the recursive method with b = n: iterates w_0 .. w_m of each.
inline std::pair<std::vector<Vector>, std::vector<Vector>> gd_and_full_batch_paths(
    const FiniteSumProblem& p, const Vector& w0, double eta, std::size_t m, double* max_estimator_gap) {
  std::vector<Vector> gd{w0};
  for (std::size_t t = 0; t < m; ++t) gd.push_back(gd.back() - eta * full_gradient(p, gd.back()));

  RecursiveState st;
  st.w_prev = w0;
  st.v = full_gradient(p, w0);
  st.w_curr = w0 - eta * st.v;
  st.t = 1;
  std::vector<Vector> rec{w0, st.w_curr};
  double gap = 0.0;
  const MiniBatch all = MiniBatch::full(p.size());
  for (std::size_t t = 1; t < m; ++t) {
    st = recursive_update(st, all, p, eta);
    gap = std::max(gap, std::sqrt(squared_norm(st.v - full_gradient(p, st.w_prev))));
    rec.push_back(st.w_curr);
  }
  if (max_estimator_gap) *max_estimator_gap = gap;
  return {gd, rec};
}

inline bool bitwise_equal(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index k = 0; k < a.size(); ++k)
    if (std::memcmp(&a[k], &b[k], sizeof(double)) != 0) return false;
  return true;
}

}  // namespace detail

/// Mini-batch variance identity by subset enumeration, tolerance 1e-13.
inline std::vector<CheckResult> variance_identity_suite() {
  std::vector<CheckResult> out;
  const std::pair<std::size_t, std::size_t> sizes[] = {{4, 1}, {4, 2}, {4, 3}, {6, 2}, {6, 3}};
  for (const std::string kind : {"logistic", "sigmoid"})
    for (auto [n, b] : sizes) {
      const auto p = small_instance(kind, n);
      const Vector w_prev = random_point(p->dim(), kInstanceSeed, 2 * n + b);
      const Vector w_curr = random_point(p->dim(), kInstanceSeed, 100 + 2 * n + b);
      const auto r = check_batch_variance_identity(*p, w_prev, w_curr, b);
      out.push_back(detail::tolerance_check("variance-identity", detail::instance_label(*p, b), r, 1e-13));
    }
  return out;
}

/// Exact batch average of one recursive step at 10 random states per instance (n = 6, b = 2), tolerance 1e-12.
inline std::vector<CheckResult> unbiasedness_suite() {
  std::vector<CheckResult> out;
  for (const std::string kind : {"logistic", "sigmoid"}) {
    const auto p = small_instance(kind, 6);
    for (std::size_t k = 0; k < 10; ++k) {
      RecursiveState st;
      st.w_prev = random_point(p->dim(), kInstanceSeed, 3 * k);
      st.w_curr = random_point(p->dim(), kInstanceSeed, 3 * k + 1);
      st.v = random_point(p->dim(), kInstanceSeed, 3 * k + 2);
      st.t = 1;
      const auto r = check_unbiasedness(*p, st, 2, 0.1);
      out.push_back(detail::tolerance_check("unbiasedness", detail::instance_label(*p, 2) + " state=" + std::to_string(k),
                                            r, 1e-12));
    }
  }
  return out;
}

/// Step size used by the path-enumeration suites: 1/L of the instance.
inline double enumeration_step(const FiniteSumProblem& p) { return 1.0 / *p.constants().L; }

/// Estimator error identity by full path enumeration (n = 3, b = 1, m = 2, 3), tolerance 1e-12.
inline std::vector<CheckResult> lemma2_suite() {
  std::vector<CheckResult> out;
  for (const std::string kind : {"logistic", "sigmoid"})
    for (std::size_t m : {2, 3}) {
      const auto p = small_instance(kind, 3);
      const Vector w0 = random_point(p->dim(), kInstanceSeed, 500 + m);
      const auto r = check_lemma2_identity(*p, w0, enumeration_step(*p), 1, m);
      out.push_back(detail::tolerance_check("lemma2", detail::instance_label(*p, 1, m), r, 1e-12));
    }
  return out;
}

/// Estimator error bound on the same instances: lhs <= rhs (1 + 1e-10).
inline std::vector<CheckResult> lemma3_suite() {
  std::vector<CheckResult> out;
  for (const std::string kind : {"logistic", "sigmoid"})
    for (std::size_t m : {2, 3}) {
      const auto p = small_instance(kind, 3);
      const Vector w0 = random_point(p->dim(), kInstanceSeed, 500 + m);
      const auto r = check_lemma3_bound(*p, w0, enumeration_step(*p), 1, m);
      CheckResult c{"lemma3", detail::instance_label(*p, 1, m), r.lhs, r.rhs * (1.0 + 1e-10) + kBoundRoundoffFloor,
                    r.holds, {}};
      c.detail = {{"lhs", r.lhs}, {"rhs", r.rhs}, {"paths", r.cases}};
      out.push_back(c);
    }
  return out;
}

/// Inner-loop gradient bound on the reference quadratic (m = 49, b = 1, largest admissible eta).
inline CheckResult inner_loop_bound_check(std::size_t seeds = 1000) {
  const QuadraticProblem p = reference_quadratic();
  OptimizerConfig cfg;
  cfg.m = 49;
  cfg.b = 1;
  cfg.eta = step_size_bound(cfg.m, cfg.b, p.size(), *p.constants().L);
  const auto r = check_inner_loop_bound(p, reference_start(), cfg, seeds, 1, 1.05);
  CheckResult c{"bounds", "inner-loop gradient bound (" + std::to_string(seeds) + " seeds)", r.estimate,
                r.bound * r.slack, r.holds, {}};
  c.detail = {{"estimate", r.estimate}, {"bound", r.bound}, {"eta", cfg.eta}, {"m", cfg.m}, {"seeds", r.seeds}};
  return c;
}

/// Per-stage linear rate of the outer method on the reference quadratic, with the
/// shortest inner loop whose contraction factor is at most 0.5.
inline CheckResult linear_rate_check(std::size_t seeds = 1000, std::size_t stages = 5) {
  const QuadraticProblem p = reference_quadratic();
  const auto k = p.constants();
  OptimizerConfig cfg;
  cfg.b = 1;
  cfg.m = smallest_inner_length(*k.tau, *k.L, p.size(), cfg.b, 0.5);
  cfg.eta = step_size_bound(cfg.m, cfg.b, p.size(), *k.L);
  cfg.s = stages;
  const auto r = check_linear_rate(p, reference_start(), cfg, seeds, 1, 1.05);
  double worst = 0.0;
  for (double q : r.ratios) worst = std::max(worst, q);
  const std::string name =
      "per-stage linear rate (" + std::to_string(seeds) + " seeds, " + std::to_string(stages) + " stages)";
  CheckResult c{"bounds", name, worst, r.gamma_bar * r.slack, r.holds, {}};
  c.detail = {{"gamma_bar", r.gamma_bar}, {"ratios", r.ratios}, {"mean_grad_norm_sq", r.mean_grad_norm_sq},
              {"m", cfg.m}, {"eta", cfg.eta}};
  return c;
}

inline std::vector<CheckResult> bounds_suite() { return {inner_loop_bound_check(), linear_rate_check()}; }

/// Full-batch reduction to gradient descent.
inline std::vector<CheckResult> gd_reduction_suite() {
  std::vector<CheckResult> out;
  {
    const QuadraticProblem p = reference_quadratic();
    const double L = *p.constants().L;
    const double eta = step_size_bound(20, p.size(), p.size(), L);
    CheckResult c{"gd-reduction", "step_size_bound(b=n) == 1/L", std::abs(eta - 1.0 / L), 0.0, eta == 1.0 / L, {}};
    c.detail = {{"eta", eta}, {"inv_L", 1.0 / L}};
    out.push_back(c);

    double gap = 0.0;
    detail::gd_and_full_batch_paths(p, reference_start(), eta, 20, &gap);
    CheckResult g{"gd-reduction", "max ||v_t - grad P(w_t)|| with b=n (reference quadratic, m=20)", gap, 1e-12,
                  gap <= 1e-12, {}};
    g.detail = {{"eta", eta}, {"m", 20}};
    out.push_back(g);
  }
  {
    const detail::DyadicQuadratic p;
    const Vector w0 = Vector::Constant(3, 2.0);
    const std::size_t m = 8;
    auto [gd, rec] = detail::gd_and_full_batch_paths(p, w0, 0.5, m, nullptr);
    std::size_t mismatches = 0;
    for (std::size_t t = 0; t <= m; ++t) mismatches += detail::bitwise_equal(gd[t], rec[t]) ? 0 : 1;

    // the library entry points must produce the same bits
    OptimizerConfig cfg;
    cfg.algo = Algorithm::kSarah;
    cfg.eta = 0.5;
    cfg.m = m;
    cfg.b = p.size();
    cfg.output_mode = OutputMode::kLastIterate;
    const InnerLoopResult in = sarah_in(p, w0, cfg);
    OptimizerConfig gcfg = cfg;
    gcfg.algo = Algorithm::kGd;
    gcfg.steps = m;
    const SingleLoopResult g = run_single_loop(p, w0, gcfg);
    mismatches += detail::bitwise_equal(in.w_tilde, g.w) ? 0 : 1;
    CheckResult c{"gd-reduction", "trajectory equals gradient descent bitwise (dyadic instance, m=8)",
                  static_cast<double>(mismatches), 0.0, mismatches == 0, {}};
    c.detail = {{"iterates_compared", m + 2}};
    out.push_back(c);
  }
  return out;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"unbiasedness", "variance-identity", "lemma2", "lemma3", "bounds",
                                                 "gd-reduction"};
  return names;
}

inline std::vector<CheckResult> run_suite(const std::string& name) {
  if (name == "unbiasedness") return unbiasedness_suite();
  if (name == "variance-identity") return variance_identity_suite();
  if (name == "lemma2") return lemma2_suite();
  if (name == "lemma3") return lemma3_suite();
  if (name == "bounds") return bounds_suite();
  if (name == "gd-reduction") return gd_reduction_suite();
  throw ContractError("unknown verification suite '" + name + "'");
}

}  // namespace sarah::suites

#endif  // SARAH_VERIFY_SUITES_HPP
