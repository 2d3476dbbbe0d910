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

#ifndef SARAH_PROBLEM_HPP
#define SARAH_PROBLEM_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "sarah/errors.hpp"
#include "sarah/linalg.hpp"

namespace sarah {

/// Constants a problem may certify about itself.
struct ProblemConstants {
  std::optional<double> L;          ///< Lipschitz constant of every component gradient.
  std::optional<double> opt_value;  ///< P(w*).
  std::optional<double> tau;        ///< Gradient-domination constant of P.
};

/// P(w) = (1/n) sum_i f_i(w) over d-dimensional weights.
///
/// Implementations are immutable after construction; every const member is
/// safe to call concurrently.
class FiniteSumProblem {
 public:
  virtual ~FiniteSumProblem() = default;

  virtual std::size_t size() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;

  virtual double component_loss(std::size_t i, const Vector& w) const = 0;

  /// out += scale * grad f_i(w).
  virtual void add_component_gradient(std::size_t i, const Vector& w, double scale,
                                      Vector& out) const = 0;

  /// out += sum_{i in batch} grad f_i(w), accumulated in ascending index order.
  virtual void add_batch_gradient(std::span<const std::size_t> batch, const Vector& w,
                                  Vector& out) const {
    for (std::size_t i : batch) add_component_gradient(i, w, 1.0, out);
  }

  /// out += sum_{i in batch} [grad f_i(w) - grad f_i(w_prev)].
  virtual void add_batch_gradient_difference(std::span<const std::size_t> batch, const Vector& w,
                                             const Vector& w_prev, Vector& out) const {
    Vector diff(static_cast<Eigen::Index>(dim()));
    for (std::size_t i : batch) {
      diff.setZero();
      add_component_gradient(i, w, 1.0, diff);
      add_component_gradient(i, w_prev, -1.0, diff);
      out += diff;
    }
  }

  /// sum_{i in batch} f_i(w), ascending index order.
  virtual double batch_loss_sum(std::span<const std::size_t> batch, const Vector& w) const {
    double acc = 0.0;
    for (std::size_t i : batch) acc += component_loss(i, w);
    return acc;
  }

  /// Full-set versions; overridden where a blocked evaluation is faster.
  virtual void add_full_gradient_sum(const Vector& w, Vector& out) const {
    for (std::size_t i = 0; i < size(); ++i) add_component_gradient(i, w, 1.0, out);
  }
  virtual double full_loss_sum(const Vector& w) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < size(); ++i) acc += component_loss(i, w);
    return acc;
  }

  virtual ProblemConstants constants() const { return {}; }

  Vector component_gradient(std::size_t i, const Vector& w) const {
    check_point(w);
    if (i >= size()) throw ContractError("component index out of range");
    Vector g = Vector::Zero(static_cast<Eigen::Index>(dim()));
    add_component_gradient(i, w, 1.0, g);
    return g;
  }

  void check_point(const Vector& w) const {
    if (static_cast<std::size_t>(w.size()) != dim())
      throw ContractError(name() + ": expected a " + std::to_string(dim()) +
                          "-vector, got size " + std::to_string(w.size()));
  }
};

namespace detail {

// Locates the first component whose gradient is non-finite at w.
inline std::size_t first_bad_component(const FiniteSumProblem& p, const Vector& w) {
  Vector g(static_cast<Eigen::Index>(p.dim()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    g.setZero();
    p.add_component_gradient(i, w, 1.0, g);
    if (!all_finite(g)) return i;
  }
  return p.size();
}

}  // namespace detail

/// (1/n) sum_i grad f_i(w). Throws NumericError naming the first offending component.
inline Vector full_gradient(const FiniteSumProblem& p, const Vector& w) {
  p.check_point(w);
  if (!all_finite(w)) throw NumericError("full_gradient: non-finite point", p.size());
  Vector g = Vector::Zero(static_cast<Eigen::Index>(p.dim()));
  p.add_full_gradient_sum(w, g);
  g /= static_cast<double>(p.size());
  if (!all_finite(g)) {
    const std::size_t bad = detail::first_bad_component(p, w);
    throw NumericError("full_gradient: non-finite gradient at component " + std::to_string(bad), bad);
  }
  return g;
}

/// P(w) = (1/n) sum_i f_i(w).
inline double full_loss(const FiniteSumProblem& p, const Vector& w) {
  p.check_point(w);
  return p.full_loss_sum(w) / static_cast<double>(p.size());
}

}  // namespace sarah

#endif  // SARAH_PROBLEM_HPP
