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

#include "dkn/kron.hpp"

#include <string>

namespace dkn {

void FactorChain::validate() const {
  if (factors.empty()) throw DimensionError("factor chain is empty");
  for (const auto& f : factors) {
    if (f.order() != factors.front().order()) {
      throw DimensionError("factor chain mixes tensor orders " +
                           std::to_string(factors.front().order()) + " and " +
                           std::to_string(f.order()));
    }
  }
}

Shape FactorChain::composed_dims() const {
  validate();
  Shape dims = factors.front().dims();
  for (std::size_t l = 1; l < factors.size(); ++l) {
    dims = shape_product(dims, factors[l].dims());
  }
  return dims;
}

Tensor tkp(const Tensor& outer, const Tensor& inner) {
  if (outer.order() != inner.order()) {
    throw DimensionError("tkp: order mismatch " + shape_string(outer.dims()) +
                         " vs " + shape_string(inner.dims()));
  }
  const std::size_t order = outer.order();
  const Shape& od = outer.dims();
  const Shape& id = inner.dims();
  Tensor out(shape_product(od, id));
  const Shape& cd = out.dims();

  // Strides of the composed tensor, used to place each (outer, inner) pair.
  std::vector<std::size_t> stride(order, 1);
  for (std::size_t m = 1; m < order; ++m) stride[m] = stride[m - 1] * cd[m - 1];

  for (std::size_t a = 0; a < outer.size(); ++a) {
    const auto ai = multi_index(od, a);
    std::size_t base = 0;
    for (std::size_t m = 0; m < order; ++m) base += ai[m] * id[m] * stride[m];
    const double av = outer[a];
    for (std::size_t b = 0; b < inner.size(); ++b) {
      std::size_t off = base;
      std::size_t rem = b;
      for (std::size_t m = 0; m < order; ++m) {
        off += (rem % id[m]) * stride[m];
        rem /= id[m];
      }
      out[off] = av * inner[b];
    }
  }
  return out;
}

Tensor kron_chain(const FactorChain& chain) {
  chain.validate();
  Tensor acc = chain.factors.back();
  for (std::size_t l = chain.factors.size() - 1; l-- > 0;) {
    acc = tkp(acc, chain.factors[l]);
  }
  return acc;
}

Tensor compose_coeff(const std::vector<FactorChain>& terms) {
  if (terms.empty()) throw DimensionError("compose_coeff: no terms");
  Tensor sum = kron_chain(terms.front());
  for (std::size_t r = 1; r < terms.size(); ++r) {
    const Tensor term = kron_chain(terms[r]);
    if (term.dims() != sum.dims()) {
      throw DimensionError("compose_coeff: term " + std::to_string(r + 1) +
                           " composes to " + shape_string(term.dims()) +
                           ", expected " + shape_string(sum.dims()));
    }
    sum += term;
  }
  return sum;
}

Tensor reshape_R(const Tensor& c, const Shape& grid) {
  const Shape blk = shape_quotient(c.dims(), grid);
  const std::size_t rows = shape_size(grid);
  const std::size_t cols = shape_size(blk);
  Tensor out({rows, cols});
  std::vector<std::size_t> g(c.order()), w(c.order());
  for (std::size_t k = 0; k < c.size(); ++k) {
    std::size_t rem = k;
    for (std::size_t m = 0; m < c.order(); ++m) {
      const std::size_t i = rem % c.dims()[m];
      rem /= c.dims()[m];
      g[m] = i / blk[m];
      w[m] = i % blk[m];
    }
    const std::size_t row = linear_index(grid, g);
    const std::size_t col = linear_index(blk, w);
    out[row + rows * col] = c[k];
  }
  return out;
}

Tensor FlatArray::to_tensor() const {
  if (dims.size() > kMaxOrder) {
    throw DimensionError("order-" + std::to_string(dims.size()) +
                         " array does not fit in a Tensor");
  }
  return Tensor(dims, data);
}

FlatArray reshape_T(const Tensor& c, const std::vector<Shape>& factor_dims) {
  if (factor_dims.empty()) throw DimensionError("reshape_T: no factor shapes");
  const std::size_t order = c.order();
  Shape prod(order, 1);
  for (const auto& fd : factor_dims) {
    if (fd.size() != order) {
      throw DimensionError("reshape_T: factor shape " + shape_string(fd) +
                           " has the wrong order");
    }
    prod = shape_product(prod, fd);
  }
  if (prod != c.dims()) {
    throw DimensionError("reshape_T: factor shapes compose to " +
                         shape_string(prod) + ", tensor is " +
                         shape_string(c.dims()));
  }
  const std::size_t depth = factor_dims.size();
  FlatArray out;
  out.dims.resize(depth);
  for (std::size_t l = 0; l < depth; ++l) out.dims[l] = shape_size(factor_dims[l]);
  out.data.assign(c.size(), 0.0);

  std::vector<std::size_t> mode_index(order), level(order);
  for (std::size_t k = 0; k < c.size(); ++k) {
    std::size_t rem = k;
    for (std::size_t m = 0; m < order; ++m) {
      mode_index[m] = rem % c.dims()[m];
      rem /= c.dims()[m];
    }
    // Peel each mode index into per-level digits, finest level first, and
    // place the entry at the matching output coordinate.
    std::size_t off = 0, stride = 1;
    for (std::size_t l = 0; l < depth; ++l) {
      for (std::size_t m = 0; m < order; ++m) {
        level[m] = mode_index[m] % factor_dims[l][m];
        mode_index[m] /= factor_dims[l][m];
      }
      off += linear_index(factor_dims[l], level) * stride;
      stride *= out.dims[l];
    }
    out.data[off] = c[k];
  }
  return out;
}

FlatArray cp_outer_sum(const std::vector<FactorChain>& terms) {
  if (terms.empty()) throw DimensionError("cp_outer_sum: no terms");
  FlatArray out;
  for (const auto& f : terms.front().factors) out.dims.push_back(f.size());
  out.data.assign(shape_size(out.dims), 0.0);
  for (const auto& term : terms) {
    term.validate();
    if (term.depth() != out.dims.size()) {
      throw DimensionError("cp_outer_sum: terms differ in depth");
    }
    for (std::size_t l = 0; l < term.depth(); ++l) {
      if (term.factors[l].size() != out.dims[l]) {
        throw DimensionError("cp_outer_sum: terms differ in factor sizes");
      }
    }
    for (std::size_t k = 0; k < out.data.size(); ++k) {
      std::size_t rem = k;
      double v = 1.0;
      for (std::size_t l = 0; l < term.depth(); ++l) {
        v *= term.factors[l][rem % out.dims[l]];
        rem /= out.dims[l];
      }
      out.data[k] += v;
    }
  }
  return out;
}

Tensor nonoverlap_conv(const Tensor& x, const Tensor& kernel) {
  if (x.order() != kernel.order()) {
    throw DimensionError("nonoverlap_conv: order mismatch " +
                         shape_string(x.dims()) + " vs " +
                         shape_string(kernel.dims()));
  }
  const Shape out_dims = shape_quotient(x.dims(), kernel.dims());
  Tensor out(out_dims);
  std::vector<std::size_t> g(x.order());
  for (std::size_t k = 0; k < x.size(); ++k) {
    std::size_t rem = k;
    std::size_t w = 0, wstride = 1;
    for (std::size_t m = 0; m < x.order(); ++m) {
      const std::size_t i = rem % x.dims()[m];
      rem /= x.dims()[m];
      g[m] = i / kernel.dims()[m];
      w += (i % kernel.dims()[m]) * wstride;
      wstride *= kernel.dims()[m];
    }
    out[linear_index(out_dims, g)] += x[k] * kernel[w];
  }
  return out;
}

double conv_chain_eval(const Tensor& x, const FactorChain& chain) {
  const Shape composed = chain.composed_dims();
  if (composed != x.dims()) {
    throw DimensionError("conv_chain_eval: factors compose to " +
                         shape_string(composed) + ", image is " +
                         shape_string(x.dims()));
  }
  Tensor feature = x;
  for (const auto& f : chain.factors) feature = nonoverlap_conv(feature, f);
  return feature[0];
}

}  // namespace dkn
