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

#ifndef SARAH_LINALG_HPP
#define SARAH_LINALG_HPP

#include <Eigen/Dense>
#include <cmath>

namespace sarah {

using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Left-to-right accumulation; Eigen's squaredNorm() may reorder for vectorization.
inline double squared_norm(const Vector& x) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) acc += x[k] * x[k];
  return acc;
}

inline bool all_finite(const Vector& x) {
  for (Eigen::Index k = 0; k < x.size(); ++k)
    if (!std::isfinite(x[k])) return false;
  return true;
}

/// True if any coordinate is non-finite or exceeds `limit` in magnitude.
inline bool out_of_range(const Vector& x, double limit) {
  for (Eigen::Index k = 0; k < x.size(); ++k)
    if (!(std::abs(x[k]) <= limit)) return true;
  return false;
}

}  // namespace sarah

#endif  // SARAH_LINALG_HPP
