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

#ifndef DKN_STRUCTURE_HPP_
#define DKN_STRUCTURE_HPP_

#include <cstddef>
#include <vector>

#include "dkn/tensor.hpp"

namespace dkn {

// Network architecture: depth L (number of Kronecker factors), rank R
// (number of terms) and one factor shape per layer. Layers are numbered
// 1..L from the finest factor; factor_dims[0] is layer 1.
struct DknStructure {
  Shape image_dims;
  std::vector<Shape> factor_dims;
  std::size_t rank = 1;

  std::size_t depth() const { return factor_dims.size(); }

  // Depth >= 2, rank >= 1, and the factor shapes multiply to image_dims.
  void validate() const;

  std::size_t layer_size(std::size_t layer) const;  // d_l p_l q_l
  std::size_t parameters_per_term() const;          // sum_l d_l p_l q_l
  std::size_t parameter_count() const;              // R * sum_l d_l p_l q_l

  // Shape of B_L (x) ... (x) B_layer; layer in 1..L+1 (L+1 gives all ones).
  Shape coarse_dims(std::size_t layer) const;
  // Shape of B_layer (x) ... (x) B_1; layer in 0..L (0 gives all ones).
  Shape fine_dims(std::size_t layer) const;

  DknStructure with_rank(std::size_t r) const;
};

// Deepest factorization: every extent is split into its prime factors,
// twos first and remaining primes ascending, one prime per layer starting
// at layer 1. Modes with fewer primes get extent-1 factors at the coarse
// end. Throws DimensionError when the result would have depth < 2.
DknStructure deepest_structure(const Shape& image_dims, std::size_t rank);

// Smallest power-of-two extents covering `dims`.
Shape pow2_dims(const Shape& dims);
// Zero-pads `t` at the high end of every mode up to `dims`.
Tensor zero_pad(const Tensor& t, const Shape& dims);

}  // namespace dkn

#endif  // DKN_STRUCTURE_HPP_
