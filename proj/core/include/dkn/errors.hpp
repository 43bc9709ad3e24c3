// Copyright 2026 The DKN Authors. All Rights Reserved.
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

#ifndef DKN_ERRORS_HPP_
#define DKN_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <vector>

namespace dkn {

// Base class for everything this library throws. The CLI maps
// ValidationError subclasses to exit code 2 and SolverError subclasses to 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Extents that do not line up: lengths, divisibility, orders.
class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Arguments outside the documented domain (negative ridge, delta >= 1/3...).
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Malformed files, unknown format tags, truncated blobs.
class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

// Normal equations are singular and no ridge was applied.
class RankDeficientError : public SolverError {
 public:
  using SolverError::SolverError;
};

// IRLS ran out of iterations. Carries the last iterate so callers can
// inspect or warm-start from it.
class ConvergenceError : public SolverError {
 public:
  ConvergenceError(const std::string& what, std::vector<double> last_iterate)
      : SolverError(what), last_iterate_(std::move(last_iterate)) {}

  const std::vector<double>& last_iterate() const { return last_iterate_; }

 private:
  std::vector<double> last_iterate_;
};

// Data carries no usable signal for the requested computation
// (e.g. an all-zero aggregate handed to the spectral initializer).
class DegenerateDataError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace dkn

#endif  // DKN_ERRORS_HPP_
