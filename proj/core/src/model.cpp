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

#include "dkn/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dkn {
namespace {

Tensor ones(std::size_t order) { return Tensor::filled(Shape(order, 1), 1.0); }

}  // namespace

DknModel DknModel::zeros(const DknStructure& structure) {
  structure.validate();
  DknModel m;
  m.structure = structure;
  m.factors.resize(structure.depth());
  for (std::size_t l = 0; l < structure.depth(); ++l) {
    m.factors[l].assign(structure.rank, Tensor(structure.factor_dims[l]));
  }
  m.kron_eigenvalues.assign(structure.rank, 0.0);
  return m;
}

DknModel DknModel::from_terms(const DknStructure& structure,
                              const std::vector<FactorChain>& terms) {
  DknModel m = zeros(structure.with_rank(terms.size()));
  for (std::size_t r = 0; r < terms.size(); ++r) {
    if (terms[r].depth() != structure.depth()) {
      throw DimensionError("term " + std::to_string(r + 1) + " has depth " +
                           std::to_string(terms[r].depth()) + ", structure has " +
                           std::to_string(structure.depth()));
    }
    double lambda = 1.0;
    for (std::size_t l = 0; l < structure.depth(); ++l) {
      if (terms[r].factors[l].dims() != structure.factor_dims[l]) {
        throw DimensionError("term " + std::to_string(r + 1) + " layer " +
                             std::to_string(l + 1) + " has shape " +
                             shape_string(terms[r].factors[l].dims()));
      }
      m.factors[l][r] = terms[r].factors[l];
      lambda *= fro_norm(terms[r].factors[l]);
    }
    m.kron_eigenvalues[r] = lambda;
  }
  return m;
}

std::vector<FactorChain> DknModel::terms() const {
  std::vector<FactorChain> out(structure.rank);
  for (std::size_t r = 0; r < structure.rank; ++r) {
    for (std::size_t l = 0; l < structure.depth(); ++l) {
      out[r].factors.push_back(factors[l][r]);
    }
  }
  return out;
}

Tensor DknModel::coefficient() const { return compose_coeff(terms()); }

void DknModel::validate() const {
  structure.validate();
  if (factors.size() != structure.depth()) {
    throw DimensionError("model has " + std::to_string(factors.size()) +
                         " layers, structure has " +
                         std::to_string(structure.depth()));
  }
  for (std::size_t l = 0; l < factors.size(); ++l) {
    if (factors[l].size() != structure.rank) {
      throw DimensionError("layer " + std::to_string(l + 1) + " has " +
                           std::to_string(factors[l].size()) + " terms, rank is " +
                           std::to_string(structure.rank));
    }
    for (const auto& f : factors[l]) {
      if (f.dims() != structure.factor_dims[l]) {
        throw DimensionError("layer " + std::to_string(l + 1) +
                             " factor has shape " + shape_string(f.dims()) +
                             ", expected " +
                             shape_string(structure.factor_dims[l]));
      }
    }
  }
}

DknModel normalize(DknModel model) {
  model.validate();
  const std::size_t depth = model.structure.depth();
  const std::size_t rank = model.structure.rank;
  std::vector<double> lambda(rank, 0.0);
  for (std::size_t r = 0; r < rank; ++r) {
    std::vector<double> norms(depth);
    for (std::size_t l = 0; l < depth; ++l) {
      norms[l] = fro_norm(model.factors[l][r]);
      if (!std::isfinite(norms[l])) {
        throw DomainError("layer " + std::to_string(l + 1) + " term " +
                          std::to_string(r + 1) + " has non-finite entries");
      }
    }
    if (std::any_of(norms.begin(), norms.end(), [](double n) { return n == 0.0; })) {
      lambda[r] = 0.0;
      continue;
    }
    double tail = 1.0;
    for (std::size_t l = 1; l < depth; ++l) {
      model.factors[l][r] *= 1.0 / norms[l];
      tail *= norms[l];
    }
    model.factors[0][r] *= tail;
    lambda[r] = norms[0] * tail;
  }
  std::vector<std::size_t> order(rank);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lambda[a] > lambda[b]; });
  DknModel out = model;
  for (std::size_t r = 0; r < rank; ++r) {
    for (std::size_t l = 0; l < depth; ++l) {
      out.factors[l][r] = model.factors[l][order[r]];
    }
    out.kron_eigenvalues[r] = lambda[order[r]];
  }
  return out;
}

std::vector<Tensor> partial_products(const DknModel& model, std::size_t layer,
                                     Side side) {
  model.validate();
  const std::size_t depth = model.structure.depth();
  const std::size_t order = model.structure.image_dims.size();
  std::vector<Tensor> out;
  out.reserve(model.structure.rank);
  if (side == Side::kLeft) {
    if (layer < 1 || layer > depth + 1) {
      throw DimensionError("left partial product layer " + std::to_string(layer) +
                           " outside 1.." + std::to_string(depth + 1));
    }
    for (std::size_t r = 0; r < model.structure.rank; ++r) {
      Tensor acc = ones(order);
      for (std::size_t l = depth; l >= layer; --l) acc = tkp(acc, model.factors[l - 1][r]);
      out.push_back(std::move(acc));
    }
  } else {
    if (layer > depth) {
      throw DimensionError("right partial product layer " + std::to_string(layer) +
                           " outside 0.." + std::to_string(depth));
    }
    for (std::size_t r = 0; r < model.structure.rank; ++r) {
      Tensor acc = ones(order);
      for (std::size_t l = 1; l <= layer; ++l) acc = tkp(model.factors[l - 1][r], acc);
      out.push_back(std::move(acc));
    }
  }
  return out;
}

std::vector<double> linear_predictor(const DknModel& model,
                                     std::span<const Tensor> images) {
  const Tensor c = model.coefficient();
  std::vector<double> eta(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].dims() != c.dims()) {
      throw DimensionError("image " + std::to_string(i + 1) + " has shape " +
                           shape_string(images[i].dims()) + ", model expects " +
                           shape_string(c.dims()));
    }
    eta[i] = inner(images[i], c) + model.intercept;
  }
  return eta;
}

std::vector<double> predict(const DknModel& model, std::span<const Tensor> images,
                            Family family) {
  auto eta = linear_predictor(model, images);
  for (double& e : eta) e = mean_response(family, e);
  return eta;
}

double bic(const DknModel& model, std::span<const Tensor> images,
           std::span<const double> y, Family family) {
  const auto eta = linear_predictor(model, images);
  const double n = static_cast<double>(images.size());
  return 2.0 * nll(family, eta, y) +
         static_cast<double>(model.structure.parameter_count()) * std::log(n);
}

}  // namespace dkn
