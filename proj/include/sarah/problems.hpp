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

// Analytic finite-sum problems with known constants.

#ifndef SARAH_PROBLEMS_HPP
#define SARAH_PROBLEMS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "sarah/errors.hpp"
#include "sarah/linalg.hpp"
#include "sarah/problem.hpp"
#include "sarah/rng.hpp"

namespace sarah {

/// log(1 + exp(t)) without overflow.
inline double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

/// 1 / (1 + exp(-t)) without overflow.
inline double logistic_sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// Zero-mean per-component perturbations of the separable quadratic.
/// Entries are drawn from U[-spread, spread] and then centered across components.
struct QuadraticPerturbation {
  double curvature_spread = 0.0;
  double linear_spread = 0.0;
  std::uint64_t seed = 0;
};

/// P(w) = 1/2 w' diag(a) w - c'w, split into
/// f_i(w) = 1/2 w' diag(a + D_i) w - (c + p_i)'w  with  sum_i D_i = 0, sum_i p_i = 0.
///
/// Individual f_i may be nonconvex when a curvature spread exceeds min(a);
/// the average stays the unperturbed quadratic.
class QuadraticProblem final : public FiniteSumProblem {
 public:
  QuadraticProblem(Vector a_diag, Vector c, std::size_t n, QuadraticPerturbation pert = {})
      : a_(std::move(a_diag)), c_(std::move(c)), n_(n) {
    if (a_.size() == 0) throw ConstructionError("quadratic: empty curvature vector");
    if (c_.size() != a_.size()) throw ConstructionError("quadratic: c and a_diag differ in length");
    if (n_ < 1) throw ConstructionError("quadratic: need at least one component");
    for (Eigen::Index k = 0; k < a_.size(); ++k)
      if (!(a_[k] > 0.0) || !std::isfinite(a_[k]))
        throw ConstructionError("quadratic: a_diag[" + std::to_string(k) + "] must be positive");
    if (pert.curvature_spread < 0.0 || pert.linear_spread < 0.0)
      throw ConstructionError("quadratic: perturbation spreads must be nonnegative");

    const auto d = a_.size();
    const auto rows = static_cast<Eigen::Index>(n_);
    curvature_ = RowMatrix::Zero(rows, d);
    linear_ = RowMatrix::Zero(rows, d);
    RngStream rng(pert.seed, {0, 0, StreamPurpose::kPerturbation});
    if (pert.curvature_spread > 0.0 && n_ > 1) fill_centered(curvature_, pert.curvature_spread, rng);
    if (pert.linear_spread > 0.0 && n_ > 1) fill_centered(linear_, pert.linear_spread, rng);

    double lip = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index k = 0; k < d; ++k) lip = std::max(lip, std::abs(a_[k] + curvature_(i, k)));
    lipschitz_ = lip;
  }

  std::size_t size() const override { return n_; }
  std::size_t dim() const override { return static_cast<std::size_t>(a_.size()); }
  std::string name() const override { return "quadratic"; }

  double component_loss(std::size_t i, const Vector& w) const override {
    const auto r = static_cast<Eigen::Index>(i);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < a_.size(); ++k)
      acc += 0.5 * (a_[k] + curvature_(r, k)) * w[k] * w[k] - (c_[k] + linear_(r, k)) * w[k];
    return acc;
  }

  void add_component_gradient(std::size_t i, const Vector& w, double scale,
                              Vector& out) const override {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index k = 0; k < a_.size(); ++k)
      out[k] += scale * ((a_[k] + curvature_(r, k)) * w[k] - (c_[k] + linear_(r, k)));
  }

  ProblemConstants constants() const override {
    return {lipschitz_, optimal_value(), 1.0 / (2.0 * a_.minCoeff())};
  }

  /// w* = c / a.
  Vector minimizer() const { return c_.cwiseQuotient(a_); }

  /// P(w*) = -1/2 sum_k c_k^2 / a_k.
  double optimal_value() const {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < a_.size(); ++k) acc += c_[k] * c_[k] / a_[k];
    return -0.5 * acc;
  }

  const Vector& curvature() const { return a_; }
  const Vector& linear() const { return c_; }

 private:
  static void fill_centered(RowMatrix& m, double spread, RngStream& rng) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = rng.uniform(-spread, spread);
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      double mean = 0.0;
      for (Eigen::Index i = 0; i < m.rows(); ++i) mean += m(i, k);
      mean /= static_cast<double>(m.rows());
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, k) -= mean;
    }
  }

  Vector a_;
  Vector c_;
  std::size_t n_;
  RowMatrix curvature_;
  RowMatrix linear_;
  double lipschitz_ = 0.0;
};

inline QuadraticProblem make_quadratic(Vector a_diag, Vector c, std::size_t n,
                                       QuadraticPerturbation pert = {}) {
  return QuadraticProblem(std::move(a_diag), std::move(c), n, pert);
}

/// Quadratic with curvatures evenly spaced on [lo, hi], c ~ N(0, 1) and the given
/// perturbation spreads, all drawn from `seed`.
inline QuadraticProblem make_spread_quadratic(std::size_t n, std::size_t d, double lo, double hi,
                                              double curvature_spread, double linear_spread, std::uint64_t seed) {
  if (d < 1) throw ConstructionError("quadratic: need d >= 1");
  Vector a(static_cast<Eigen::Index>(d));
  Vector c(static_cast<Eigen::Index>(d));
  RngStream rng(seed, {1, 0, StreamPurpose::kPerturbation});
  for (std::size_t k = 0; k < d; ++k) {
    const double frac = d == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(d - 1);
    a[static_cast<Eigen::Index>(k)] = lo + (hi - lo) * frac;
    c[static_cast<Eigen::Index>(k)] = rng.normal();
  }
  return QuadraticProblem(std::move(a), std::move(c), n, {curvature_spread, linear_spread, seed});
}

namespace detail {

inline void validate_binary_data(const RowMatrix& x, const Vector& y, const char* who) {
  if (x.rows() == 0 || x.cols() == 0) throw ConstructionError(std::string(who) + ": empty data");
  if (y.size() != x.rows())
    throw ConstructionError(std::string(who) + ": label count does not match row count");
  if (!x.allFinite()) throw ConstructionError(std::string(who) + ": non-finite feature");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] != 1.0 && y[i] != -1.0)
      throw ConstructionError(std::string(who) + ": label " + std::to_string(i) +
                              " is not in {-1, +1}");
}

inline double max_row_norm_sq(const RowMatrix& x) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) best = std::max(best, x.row(i).squaredNorm());
  return best;
}

}  // namespace detail

/// f_i(w) = log(1 + exp(-y_i x_i'w)) + (lambda/2) ||w||^2.
class LogisticProblem final : public FiniteSumProblem {
 public:
  LogisticProblem(RowMatrix x, Vector y, double lambda)
      : x_(std::move(x)), y_(std::move(y)), lambda_(lambda) {
    detail::validate_binary_data(x_, y_, "logistic");
    if (!(lambda_ >= 0.0)) throw ConstructionError("logistic: lambda must be nonnegative");
    lipschitz_ = detail::max_row_norm_sq(x_) / 4.0 + lambda_;
  }

  std::size_t size() const override { return static_cast<std::size_t>(x_.rows()); }
  std::size_t dim() const override { return static_cast<std::size_t>(x_.cols()); }
  std::string name() const override { return "logistic"; }

  double component_loss(std::size_t i, const Vector& w) const override {
    const auto r = static_cast<Eigen::Index>(i);
    const double margin = y_[r] * x_.row(r).dot(w);
    return softplus(-margin) + 0.5 * lambda_ * squared_norm(w);
  }

  void add_component_gradient(std::size_t i, const Vector& w, double scale,
                              Vector& out) const override {
    const auto r = static_cast<Eigen::Index>(i);
    const double margin = y_[r] * x_.row(r).dot(w);
    const double coef = -y_[r] * logistic_sigmoid(-margin);
    for (Eigen::Index k = 0; k < w.size(); ++k)
      out[k] += scale * (coef * x_(r, k) + lambda_ * w[k]);
  }

  ProblemConstants constants() const override { return {lipschitz_, std::nullopt, std::nullopt}; }

 private:
  RowMatrix x_;
  Vector y_;
  double lambda_;
  double lipschitz_ = 0.0;
};

inline LogisticProblem make_logistic(RowMatrix x, Vector y, double lambda) {
  return LogisticProblem(std::move(x), std::move(y), lambda);
}

/// max |sigma''| = sqrt(3)/18, attained at sigma = (3 - sqrt 3)/6.
inline constexpr double kSigmoidCurvatureBound = 0.09622504486493763;

/// Sigmoid loss f_i(w) = 1 / (1 + exp(y_i x_i'w)); smooth, bounded in (0, 1), nonconvex.
class SigmoidLossProblem final : public FiniteSumProblem {
 public:
  SigmoidLossProblem(RowMatrix x, Vector y) : x_(std::move(x)), y_(std::move(y)) {
    detail::validate_binary_data(x_, y_, "sigmoid");
    lipschitz_ = kSigmoidCurvatureBound * detail::max_row_norm_sq(x_);
  }

  std::size_t size() const override { return static_cast<std::size_t>(x_.rows()); }
  std::size_t dim() const override { return static_cast<std::size_t>(x_.cols()); }
  std::string name() const override { return "sigmoid"; }

  double component_loss(std::size_t i, const Vector& w) const override {
    const auto r = static_cast<Eigen::Index>(i);
    return logistic_sigmoid(-y_[r] * x_.row(r).dot(w));
  }

  void add_component_gradient(std::size_t i, const Vector& w, double scale,
                              Vector& out) const override {
    const auto r = static_cast<Eigen::Index>(i);
    const double s = logistic_sigmoid(-y_[r] * x_.row(r).dot(w));
    const double coef = -y_[r] * s * (1.0 - s);
    for (Eigen::Index k = 0; k < w.size(); ++k) out[k] += scale * coef * x_(r, k);
  }

  ProblemConstants constants() const override { return {lipschitz_, std::nullopt, std::nullopt}; }

 private:
  RowMatrix x_;
  Vector y_;
  double lipschitz_ = 0.0;
};

inline SigmoidLossProblem make_sigmoid_nonconvex(RowMatrix x, Vector y) {
  return SigmoidLossProblem(std::move(x), std::move(y));
}

}  // namespace sarah

#endif  // SARAH_PROBLEMS_HPP
