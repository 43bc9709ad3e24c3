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

#ifndef DKN_TESTS_TEST_UTIL_HPP_
#define DKN_TESTS_TEST_UTIL_HPP_

#include <random>
#include <vector>

#include "dkn/kron.hpp"
#include "dkn/tensor.hpp"

namespace dkn::testing {

inline Tensor random_tensor(std::mt19937_64& gen, const Shape& dims) {
  std::normal_distribution<double> normal;
  Tensor t(dims);
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = normal(gen);
  return t;
}

inline Shape random_shape(std::mt19937_64& gen, std::size_t order, std::size_t max_extent) {
  std::uniform_int_distribution<std::size_t> extent(1, max_extent);
  Shape s(order);
  for (auto& e : s) e = extent(gen);
  return s;
}

inline FactorChain random_chain(std::mt19937_64& gen, const std::vector<Shape>& dims) {
  FactorChain c;
  for (const auto& d : dims) c.factors.push_back(random_tensor(gen, d));
  return c;
}

// Textbook Kronecker product written from scratch: the left factor selects
// the block, the right factor the offset inside it.
inline Tensor brute_kron(const Tensor& a, const Tensor& b) {
  Shape dims(a.order());
  for (std::size_t m = 0; m < dims.size(); ++m) dims[m] = a.dims()[m] * b.dims()[m];
  Tensor out(dims);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto ia = multi_index(a.dims(), i);
    for (std::size_t j = 0; j < b.size(); ++j) {
      const auto jb = multi_index(b.dims(), j);
      std::vector<std::size_t> idx(dims.size());
      for (std::size_t m = 0; m < dims.size(); ++m) idx[m] = jb[m] + b.dims()[m] * ia[m];
      out[linear_index(dims, idx)] = a[i] * b[j];
    }
  }
  return out;
}

}  // namespace dkn::testing

#endif  // DKN_TESTS_TEST_UTIL_HPP_
