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

#ifndef DKN_DESIGN_HPP_
#define DKN_DESIGN_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "dkn/glm.hpp"
#include "dkn/structure.hpp"

namespace dkn {

// Splits every image offset into (coarse, layer, fine) positions for one
// layer: coarse indexes B_(:l+1), layer indexes B_l, fine indexes B_(l-1:).
class LayerIndex {
 public:
  LayerIndex(const DknStructure& structure, std::size_t layer);

  std::size_t layer() const { return layer_; }
  std::size_t coarse_size() const { return coarse_size_; }
  std::size_t layer_size() const { return layer_size_; }
  std::size_t fine_size() const { return fine_size_; }

  std::span<const std::uint32_t> coarse() const { return coarse_; }
  std::span<const std::uint32_t> mid() const { return mid_; }
  std::span<const std::uint32_t> fine() const { return fine_; }

 private:
  std::size_t layer_;
  std::size_t coarse_size_, layer_size_, fine_size_;
  std::vector<std::uint32_t> coarse_, mid_, fine_;
};

// Design for the layer-`layer` subproblem: row i is vec of
// [X~_i(b_(:l+1)^1, b_(l-1:)^1), ..., X~_i(b_(:l+1)^R, b_(l-1:)^R)], so that
// design * vec([b_l^1 ... b_l^R]) gives <X_i, sum_r B_L^r (x) ... (x) B_1^r>.
// `left[r]` holds b_(:l+1)^r and `right[r]` holds b_(l-1:)^r (any shape with
// the right number of entries).
DesignMatrix build_design(std::span<const Tensor> images,
                          std::span<const Tensor> left,
                          std::span<const Tensor> right,
                          const DknStructure& structure, std::size_t layer);

DesignMatrix build_design(std::span<const Tensor> images,
                          std::span<const Tensor> left,
                          std::span<const Tensor> right, const LayerIndex& index);

// X~_i(b_(:l+1), b_(l-1:)) evaluated through the block reshapes:
// R_{layer}(unvec(b_(:l+1)^T R_{coarse}(X))) b_(l-1:). Slower than the
// indexed path; kept as the reference route and for noise probing.
std::vector<double> reshaped_design_row(const Tensor& image, const Tensor& left,
                                        const Tensor& right,
                                        const DknStructure& structure,
                                        std::size_t layer);

}  // namespace dkn

#endif  // DKN_DESIGN_HPP_
