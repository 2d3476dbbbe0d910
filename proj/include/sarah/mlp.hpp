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

// One-hidden-layer classifier as a finite-sum problem.
//
// Parameter layout of the flat weight vector:
//   [ W1 (n_hidden x d_in, row-major) | b1 (n_hidden) |
//     W2 (n_out x n_hidden, row-major) | b2 (n_out) ]
//
// Per-example loss: softmax cross entropy of the output logits plus
// (lambda/2)(||W1||^2 + ||W2||^2). Biases are not decayed.

#ifndef SARAH_MLP_HPP
#define SARAH_MLP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>

#include "sarah/data.hpp"
#include "sarah/errors.hpp"
#include "sarah/linalg.hpp"
#include "sarah/problem.hpp"
#include "sarah/rng.hpp"

namespace sarah {

enum class Activation { kSigmoid, kTanh };

inline Activation parse_activation(const std::string& s) {
  if (s == "sigmoid") return Activation::kSigmoid;
  if (s == "tanh") return Activation::kTanh;
  throw ContractError("unknown activation '" + s + "'");
}

struct MlpSpec {
  std::size_t d_in = 0;
  std::size_t n_hidden = 0;
  std::size_t n_out = 0;
  double lambda = 0.0;
  Activation activation = Activation::kSigmoid;

  std::size_t w1_offset() const { return 0; }
  std::size_t b1_offset() const { return n_hidden * d_in; }
  std::size_t w2_offset() const { return b1_offset() + n_hidden; }
  std::size_t b2_offset() const { return w2_offset() + n_out * n_hidden; }
  std::size_t num_params() const { return (d_in + 1) * n_hidden + (n_hidden + 1) * n_out; }

  void validate() const {
    if (d_in == 0 || n_hidden == 0 || n_out < 2)
      throw ContractError("MlpSpec: need d_in >= 1, n_hidden >= 1, n_out >= 2");
    if (!(lambda >= 0.0)) throw ContractError("MlpSpec: lambda must be nonnegative");
  }
};

/// Uniform initialization on [-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))]
/// per weight layer; biases start at zero.
inline Vector init_normalized(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  Vector w = Vector::Zero(static_cast<Eigen::Index>(spec.num_params()));
  const double r1 = std::sqrt(6.0 / static_cast<double>(spec.d_in + spec.n_hidden));
  const double r2 = std::sqrt(6.0 / static_cast<double>(spec.n_hidden + spec.n_out));
  RngStream layer1(seed, {0, 0, StreamPurpose::kInit});
  RngStream layer2(seed, {1, 0, StreamPurpose::kInit});
  for (std::size_t k = 0; k < spec.n_hidden * spec.d_in; ++k)
    w[static_cast<Eigen::Index>(spec.w1_offset() + k)] = layer1.uniform(-r1, r1);
  for (std::size_t k = 0; k < spec.n_out * spec.n_hidden; ++k)
    w[static_cast<Eigen::Index>(spec.w2_offset() + k)] = layer2.uniform(-r2, r2);
  return w;
}

namespace detail {

using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;
using ConstVecMap = Eigen::Map<const Vector>;
using VecMap = Eigen::Map<Vector>;

struct MlpViews {
  ConstRowMap w1, w2;
  ConstVecMap b1, b2;
};

inline MlpViews views(const MlpSpec& s, const Vector& w) {
  const auto h = static_cast<Eigen::Index>(s.n_hidden);
  return {ConstRowMap(w.data() + s.w1_offset(), h, static_cast<Eigen::Index>(s.d_in)),
          ConstRowMap(w.data() + s.w2_offset(), static_cast<Eigen::Index>(s.n_out), h),
          ConstVecMap(w.data() + s.b1_offset(), h),
          ConstVecMap(w.data() + s.b2_offset(), static_cast<Eigen::Index>(s.n_out))};
}

inline void activate(Activation a, RowMatrix& z) {
  if (a == Activation::kSigmoid)
    z = z.unaryExpr([](double t) {
      if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
      const double e = std::exp(t);
      return e / (1.0 + e);
    });
  else
    z = z.array().tanh().matrix();
}

// Derivative of the activation expressed through its output h.
inline RowMatrix activation_slope(Activation a, const RowMatrix& h) {
  if (a == Activation::kSigmoid) return (h.array() * (1.0 - h.array())).matrix();
  return (1.0 - h.array().square()).matrix();
}

// Rows of z become softmax probabilities; returns per-row log-sum-exp.
inline Vector softmax_rows(RowMatrix& z) {
  Vector lse(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double top = z.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index k = 0; k < z.cols(); ++k) {
      z(i, k) = std::exp(z(i, k) - top);
      sum += z(i, k);
    }
    z.row(i) /= sum;
    lse[i] = top + std::log(sum);
  }
  return lse;
}

// Hidden activations and logits for a block of inputs.
template <class Rows>
std::pair<RowMatrix, RowMatrix> forward(const MlpSpec& s, const MlpViews& v, const Rows& x) {
  RowMatrix hidden = x * v.w1.transpose();
  hidden.rowwise() += v.b1.transpose();
  activate(s.activation, hidden);
  RowMatrix logits = hidden * v.w2.transpose();
  logits.rowwise() += v.b2.transpose();
  return {std::move(hidden), std::move(logits)};
}

// Sum of cross-entropy terms over the block (no decay). If grad is non-null,
// adds scale * (sum of per-example gradients, decay included) into it.
template <class Rows>
double evaluate_block(const MlpSpec& s, const Vector& w, const Rows& x, std::span<const int> labels,
                      Vector* grad, double scale) {
  const MlpViews v = views(s, w);
  auto [hidden, probs] = forward(s, v, x);
  Vector true_logit(probs.rows());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) true_logit[i] = probs(i, labels[static_cast<std::size_t>(i)]);
  const Vector lse = softmax_rows(probs);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) loss += lse[i] - true_logit[i];
  if (grad) {
    RowMatrix delta2 = probs;
    for (Eigen::Index i = 0; i < delta2.rows(); ++i) delta2(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
    RowMatrix delta1 = (delta2 * v.w2).cwiseProduct(activation_slope(s.activation, hidden));

    const auto h = static_cast<Eigen::Index>(s.n_hidden);
    const auto o = static_cast<Eigen::Index>(s.n_out);
    const auto din = static_cast<Eigen::Index>(s.d_in);
    const double count = static_cast<double>(x.rows());
    RowMap g_w1(grad->data() + s.w1_offset(), h, din);
    RowMap g_w2(grad->data() + s.w2_offset(), o, h);
    VecMap g_b1(grad->data() + s.b1_offset(), h);
    VecMap g_b2(grad->data() + s.b2_offset(), o);
    g_w1.noalias() += scale * (delta1.transpose() * x);
    g_w1 += (scale * count * s.lambda) * v.w1;
    g_b1 += scale * delta1.colwise().sum().transpose();
    g_w2.noalias() += scale * (delta2.transpose() * hidden);
    g_w2 += (scale * count * s.lambda) * v.w2;
    g_b2 += scale * delta2.colwise().sum().transpose();
  }
  return loss;
}

inline double decay_term(const MlpSpec& s, const Vector& w) {
  const MlpViews v = views(s, w);
  return 0.5 * s.lambda * (v.w1.squaredNorm() + v.w2.squaredNorm());
}

inline void check_weights(const MlpSpec& s, const Vector& w) {
  if (static_cast<std::size_t>(w.size()) != s.num_params())
    throw ContractError("mlp: weight vector has " + std::to_string(w.size()) +
                        " entries, spec needs " + std::to_string(s.num_params()));
}

inline void check_example(const MlpSpec& s, Eigen::Index x_size, int label) {
  if (static_cast<std::size_t>(x_size) != s.d_in)
    throw ContractError("mlp: input has " + std::to_string(x_size) + " features, spec needs " +
                        std::to_string(s.d_in));
  if (label < 0 || static_cast<std::size_t>(label) >= s.n_out)
    throw ContractError("mlp: label " + std::to_string(label) + " out of range");
}

}  // namespace detail

/// Output logits for one input.
inline Vector mlp_logits(const MlpSpec& spec, const Vector& x, const Vector& w) {
  detail::check_weights(spec, w);
  detail::check_example(spec, x.size(), 0);
  auto [hidden, logits] = detail::forward(spec, detail::views(spec, w), x.transpose());
  return logits.row(0).transpose();
}

/// Softmax with max-subtraction.
inline Vector softmax(const Vector& logits) {
  RowMatrix z = logits.transpose();
  detail::softmax_rows(z);
  return z.row(0).transpose();
}

/// Regularized per-example loss.
inline double mlp_loss(const MlpSpec& spec, const Vector& x, int label, const Vector& w) {
  detail::check_weights(spec, w);
  detail::check_example(spec, x.size(), label);
  const int labels[1] = {label};
  const RowMatrix row = x.transpose();
  return detail::evaluate_block(spec, w, row, labels, nullptr, 0.0) + detail::decay_term(spec, w);
}

/// Gradient of the regularized per-example loss by backpropagation.
inline Vector mlp_component_gradient(const MlpSpec& spec, const Vector& x, int label, const Vector& w) {
  detail::check_weights(spec, w);
  detail::check_example(spec, x.size(), label);
  Vector g = Vector::Zero(w.size());
  const int labels[1] = {label};
  const RowMatrix row = x.transpose();
  detail::evaluate_block(spec, w, row, labels, &g, 1.0);
  return g;
}

/// Index of the largest logit; ties go to the lowest class index.
inline int argmax_class(const Eigen::Ref<const Eigen::RowVectorXd>& logits) {
  int best = 0;
  for (Eigen::Index k = 1; k < logits.size(); ++k)
    if (logits[k] > logits[best]) best = static_cast<int>(k);
  return best;
}

/// Fraction of misclassified examples.
inline double test_error(const MlpSpec& spec, const Vector& w, const Dataset& data) {
  detail::check_weights(spec, w);
  if (data.size() == 0) throw ContractError("test_error: empty dataset");
  if (data.dim() != spec.d_in) throw ContractError("test_error: dataset dimension mismatch");
  const detail::MlpViews v = detail::views(spec, w);
  constexpr Eigen::Index kBlock = 512;
  std::size_t wrong = 0;
  for (Eigen::Index start = 0; start < data.features.rows(); start += kBlock) {
    const Eigen::Index len = std::min(kBlock, data.features.rows() - start);
    auto [hidden, logits] = detail::forward(spec, v, data.features.middleRows(start, len));
    for (Eigen::Index i = 0; i < len; ++i)
      if (argmax_class(logits.row(i)) != data.labels[static_cast<std::size_t>(start + i)]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(data.size());
}

/// The classifier's training objective over a dataset, one component per example.
class MlpProblem final : public FiniteSumProblem {
 public:
  MlpProblem(MlpSpec spec, std::shared_ptr<const Dataset> data)
      : spec_(spec), data_(std::move(data)) {
    spec_.validate();
    if (!data_) throw ConstructionError("mlp: null dataset");
    data_->validate();
    if (data_->dim() != spec_.d_in)
      throw ConstructionError("mlp: dataset has " + std::to_string(data_->dim()) +
                              " features, spec expects " + std::to_string(spec_.d_in));
    for (int y : data_->labels)
      if (static_cast<std::size_t>(y) >= spec_.n_out)
        throw ConstructionError("mlp: label " + std::to_string(y) + " exceeds output width");
  }

  std::size_t size() const override { return data_->size(); }
  std::size_t dim() const override { return spec_.num_params(); }
  std::string name() const override { return "mlp"; }
  const MlpSpec& spec() const { return spec_; }
  const Dataset& data() const { return *data_; }

  double component_loss(std::size_t i, const Vector& w) const override {
    const auto r = static_cast<Eigen::Index>(i);
    return detail::evaluate_block(spec_, w, data_->features.middleRows(r, 1),
                                  std::span<const int>(&data_->labels[i], 1), nullptr, 0.0) +
           detail::decay_term(spec_, w);
  }

  void add_component_gradient(std::size_t i, const Vector& w, double scale,
                              Vector& out) const override {
    const auto r = static_cast<Eigen::Index>(i);
    detail::evaluate_block(spec_, w, data_->features.middleRows(r, 1),
                           std::span<const int>(&data_->labels[i], 1), &out, scale);
  }

  void add_batch_gradient(std::span<const std::size_t> batch, const Vector& w,
                          Vector& out) const override {
    const auto [x, y] = gather(batch);
    detail::evaluate_block(spec_, w, x, y, &out, 1.0);
  }

  void add_batch_gradient_difference(std::span<const std::size_t> batch, const Vector& w,
                                     const Vector& w_prev, Vector& out) const override {
    const auto [x, y] = gather(batch);
    Vector diff = Vector::Zero(w.size());
    detail::evaluate_block(spec_, w, x, y, &diff, 1.0);
    detail::evaluate_block(spec_, w_prev, x, y, &diff, -1.0);
    out += diff;
  }

  double batch_loss_sum(std::span<const std::size_t> batch, const Vector& w) const override {
    const auto [x, y] = gather(batch);
    return detail::evaluate_block(spec_, w, x, y, nullptr, 0.0) +
           static_cast<double>(batch.size()) * detail::decay_term(spec_, w);
  }

  void add_full_gradient_sum(const Vector& w, Vector& out) const override {
    for_each_block([&](Eigen::Index start, Eigen::Index len) {
      detail::evaluate_block(spec_, w, data_->features.middleRows(start, len), labels(start, len), &out, 1.0);
    });
  }

  double full_loss_sum(const Vector& w) const override {
    double acc = 0.0;
    for_each_block([&](Eigen::Index start, Eigen::Index len) {
      acc += detail::evaluate_block(spec_, w, data_->features.middleRows(start, len), labels(start, len),
                                    nullptr, 0.0);
    });
    return acc + static_cast<double>(size()) * detail::decay_term(spec_, w);
  }

 private:
  static constexpr Eigen::Index kBlock = 256;

  template <class F>
  void for_each_block(F&& f) const {
    const Eigen::Index n = data_->features.rows();
    for (Eigen::Index start = 0; start < n; start += kBlock) f(start, std::min(kBlock, n - start));
  }

  std::span<const int> labels(Eigen::Index start, Eigen::Index len) const {
    return {data_->labels.data() + start, static_cast<std::size_t>(len)};
  }

  std::pair<RowMatrix, std::vector<int>> gather(std::span<const std::size_t> batch) const {
    RowMatrix x(static_cast<Eigen::Index>(batch.size()), data_->features.cols());
    std::vector<int> y(batch.size());
    for (std::size_t r = 0; r < batch.size(); ++r) {
      x.row(static_cast<Eigen::Index>(r)) = data_->features.row(static_cast<Eigen::Index>(batch[r]));
      y[r] = data_->labels[batch[r]];
    }
    return {std::move(x), std::move(y)};
  }

  MlpSpec spec_;
  std::shared_ptr<const Dataset> data_;
};

}  // namespace sarah

#endif  // SARAH_MLP_HPP
