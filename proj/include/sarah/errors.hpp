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

#ifndef SARAH_ERRORS_HPP
#define SARAH_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sarah {

/// Violated precondition of a public operation (bad size, range, or argument).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A problem or dataset could not be constructed from the given inputs.
class ConstructionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed binary input (wrong magic, truncated payload, count mismatch).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary payload shorter (or longer) than its header declares.
class LengthError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Two inputs that must agree (e.g. image and label counts) do not.
class ConsistencyError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// A non-finite value appeared while evaluating a problem.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, std::size_t index)
      : std::runtime_error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// An optimizer iterate left the finite range.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long step, double estimator_norm)
      : std::runtime_error(what), step_(step), estimator_norm_(estimator_norm) {}
  long step() const noexcept { return step_; }
  double estimator_norm() const noexcept { return estimator_norm_; }

 private:
  long step_;
  double estimator_norm_;
};

/// Bad experiment configuration; carries the offending key when known.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::string key = {})
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// An exhaustive check would enumerate more cases than its budget allows.
class EnumerationBudgetError : public std::runtime_error {
 public:
  EnumerationBudgetError(const std::string& what, double count)
      : std::runtime_error(what), count_(count) {}
  double count() const noexcept { return count_; }

 private:
  double count_;
};

}  // namespace sarah

#endif  // SARAH_ERRORS_HPP
