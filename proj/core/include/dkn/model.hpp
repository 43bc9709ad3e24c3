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

#ifndef DKN_MODEL_HPP_
#define DKN_MODEL_HPP_

#include <span>
#include <vector>

#include "dkn/glm.hpp"
#include "dkn/kron.hpp"
#include "dkn/structure.hpp"

namespace dkn {

// Fitted factors B_l^r plus normalization metadata. factors[l - 1][r - 1]
// is B_l^r. After normalize(): |B_1^r| = lambda_r, |B_l^r| = 1 for l >= 2,
// and lambda is non-increasing.
struct DknModel {
  DknStructure structure;
  std::vector<std::vector<Tensor>> factors;
  std::vector<double> kron_eigenvalues;
  // Added to every linear predictor; nonzero only when a gaussian fit
  // centered its responses.
  double intercept = 0.0;

  // Zero factors of the right shapes.
  static DknModel zeros(const DknStructure& structure);
  static DknModel from_terms(const DknStructure& structure,
                             const std::vector<FactorChain>& terms);

  std::vector<FactorChain> terms() const;
  Tensor coefficient() const;  // sum_r B_L^r (x) ... (x) B_1^r
  void validate() const;
};

// Rescales each term so |B_l^r| = 1 for l >= 2 and |B_1^r| = lambda_r,
// then orders terms by decreasing lambda (stable). The composed coefficient
// is unchanged. A term with an all-zero factor gets lambda_r = 0 and keeps
// its factors as they are. Throws DomainError for non-finite factors.
DknModel normalize(DknModel model);

enum class Side { kLeft, kRight };

// kLeft: b_(:layer)^r = vec(B_L^r (x) ... (x) B_layer^r), layer in 1..L+1.
// kRight: b_(layer:)^r = vec(B_layer^r (x) ... (x) B_1^r), layer in 0..L.
// Out-of-grid boundary slots (L+1 on the left, 0 on the right) give the
// scalar 1 for each term. Returned tensors keep their composed shapes.
std::vector<Tensor> partial_products(const DknModel& model, std::size_t layer,
                                     Side side);

// <X_i, C> + intercept for every image.
std::vector<double> linear_predictor(const DknModel& model,
                                     std::span<const Tensor> images);

// Family mean of the linear predictor.
std::vector<double> predict(const DknModel& model, std::span<const Tensor> images,
                            Family family);

// 2 * nll + R * sum_l d_l p_l q_l * log n
double bic(const DknModel& model, std::span<const Tensor> images,
           std::span<const double> y, Family family);

}  // namespace dkn

#endif  // DKN_MODEL_HPP_
