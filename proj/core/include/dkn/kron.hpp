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

#ifndef DKN_KRON_HPP_
#define DKN_KRON_HPP_

#include <vector>

#include "dkn/tensor.hpp"

namespace dkn {

// Factors B_1 ... B_L of one Kronecker term. factors[0] is B_1, the finest
// factor (applied first in the convolutional form); the composed tensor is
// B_L (x) ... (x) B_1.
struct FactorChain {
  std::vector<Tensor> factors;

  std::size_t depth() const { return factors.size(); }
  // Throws DimensionError unless nonempty with a common order.
  void validate() const;
  Shape composed_dims() const;
};

// Tensor Kronecker product. `outer` is the coarse factor: along each mode
// the composed zero-based index is i_inner + inner_extent * i_outer, so
// contiguous blocks shaped like `inner` are indexed by `outer`'s entries.
// With this orientation reshape_R(tkp(a, b), a.dims()) == vec(a) vec(b)^T.
Tensor tkp(const Tensor& outer, const Tensor& inner);

Tensor kron_chain(const FactorChain& chain);

// Sum of kron_chain over all terms; every term must compose to one shape.
Tensor compose_coeff(const std::vector<FactorChain>& terms);

// Block-to-row reshaping. `grid` splits the tensor into grid[m] blocks along
// mode m; row g of the result is vec of block g (g in canonical order), so
// the result is prod(grid) x prod(dims / grid).
Tensor reshape_R(const Tensor& c, const Shape& grid);

// Order-L array that may exceed the Tensor order cap.
struct FlatArray {
  Shape dims;
  std::vector<double> data;

  Tensor to_tensor() const;  // requires dims.size() <= 4
};

// Multi-level reshaping: mode l of the output enumerates the entries of a
// factor shaped factor_dims[l] (l = 0 is the finest level). For a composed
// coefficient, reshape_T(sum_r B_L^r (x) ... (x) B_1^r) equals
// sum_r vec(B_1^r) o ... o vec(B_L^r) with mode l <-> vec(B_{l+1}).
FlatArray reshape_T(const Tensor& c, const std::vector<Shape>& factor_dims);

// sum_r vec(B_1^r) o vec(B_2^r) o ... o vec(B_L^r).
FlatArray cp_outer_sum(const std::vector<FactorChain>& terms);

// Stride-equals-kernel convolution: entry g is <block_g(x), kernel>.
Tensor nonoverlap_conv(const Tensor& x, const Tensor& kernel);

// x * B_1 * B_2 * ... * B_L collapsed to a scalar.
double conv_chain_eval(const Tensor& x, const FactorChain& chain);

}  // namespace dkn

#endif  // DKN_KRON_HPP_
