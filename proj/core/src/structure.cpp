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

#include "dkn/structure.hpp"

#include <algorithm>
#include <string>

namespace dkn {

void DknStructure::validate() const {
  if (factor_dims.size() < 2) {
    throw DimensionError("network depth must be at least 2, got " +
                         std::to_string(factor_dims.size()));
  }
  if (rank < 1) throw DimensionError("network rank must be at least 1");
  Shape prod(image_dims.size(), 1);
  for (std::size_t l = 0; l < factor_dims.size(); ++l) {
    if (factor_dims[l].size() != image_dims.size()) {
      throw DimensionError("layer " + std::to_string(l + 1) + " factor shape " +
                           shape_string(factor_dims[l]) +
                           " does not match image order " +
                           std::to_string(image_dims.size()));
    }
    for (std::size_t e : factor_dims[l]) {
      if (e == 0) throw DimensionError("factor extents must be positive");
    }
    prod = shape_product(prod, factor_dims[l]);
  }
  if (prod != image_dims) {
    throw DimensionError("factor shapes multiply to " + shape_string(prod) +
                         " but images are " + shape_string(image_dims));
  }
}

std::size_t DknStructure::layer_size(std::size_t layer) const {
  return shape_size(factor_dims.at(layer - 1));
}

std::size_t DknStructure::parameters_per_term() const {
  std::size_t s = 0;
  for (const auto& fd : factor_dims) s += shape_size(fd);
  return s;
}

std::size_t DknStructure::parameter_count() const {
  return rank * parameters_per_term();
}

Shape DknStructure::coarse_dims(std::size_t layer) const {
  if (layer < 1 || layer > depth() + 1) {
    throw DimensionError("coarse product layer " + std::to_string(layer) +
                         " outside 1.." + std::to_string(depth() + 1));
  }
  Shape dims(image_dims.size(), 1);
  for (std::size_t l = layer; l <= depth(); ++l) {
    dims = shape_product(dims, factor_dims[l - 1]);
  }
  return dims;
}

Shape DknStructure::fine_dims(std::size_t layer) const {
  if (layer > depth()) {
    throw DimensionError("fine product layer " + std::to_string(layer) +
                         " outside 0.." + std::to_string(depth()));
  }
  Shape dims(image_dims.size(), 1);
  for (std::size_t l = 1; l <= layer; ++l) {
    dims = shape_product(dims, factor_dims[l - 1]);
  }
  return dims;
}

DknStructure DknStructure::with_rank(std::size_t r) const {
  DknStructure s = *this;
  s.rank = r;
  return s;
}

DknStructure deepest_structure(const Shape& image_dims, std::size_t rank) {
  if (image_dims.empty()) throw DimensionError("image shape is empty");
  std::vector<std::vector<std::size_t>> primes(image_dims.size());
  std::size_t depth = 0;
  for (std::size_t m = 0; m < image_dims.size(); ++m) {
    std::size_t e = image_dims[m];
    if (e == 0) throw DimensionError("image extents must be positive");
    for (std::size_t p = 2; p * p <= e; ++p) {
      while (e % p == 0) {
        primes[m].push_back(p);
        e /= p;
      }
    }
    if (e > 1) primes[m].push_back(e);
    depth = std::max(depth, primes[m].size());
  }
  DknStructure s;
  s.image_dims = image_dims;
  s.rank = rank;
  s.factor_dims.assign(depth, Shape(image_dims.size(), 1));
  for (std::size_t m = 0; m < image_dims.size(); ++m) {
    for (std::size_t l = 0; l < primes[m].size(); ++l) {
      s.factor_dims[l][m] = primes[m][l];
    }
  }
  s.validate();
  return s;
}

Shape pow2_dims(const Shape& dims) {
  Shape out(dims.size());
  for (std::size_t m = 0; m < dims.size(); ++m) {
    std::size_t p = 1;
    while (p < dims[m]) p <<= 1;
    out[m] = p;
  }
  return out;
}

Tensor zero_pad(const Tensor& t, const Shape& dims) {
  if (dims.size() != t.order()) {
    throw DimensionError("zero_pad: order mismatch");
  }
  for (std::size_t m = 0; m < dims.size(); ++m) {
    if (dims[m] < t.dims()[m]) {
      throw DimensionError("zero_pad: target " + shape_string(dims) +
                           " is smaller than " + shape_string(t.dims()));
    }
  }
  Tensor out(dims);
  for (std::size_t k = 0; k < t.size(); ++k) {
    out.at(multi_index(t.dims(), k)) = t[k];
  }
  return out;
}

}  // namespace dkn
