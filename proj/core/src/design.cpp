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

#include "dkn/design.hpp"

#include <limits>
#include <string>

#include "dkn/kron.hpp"

namespace dkn {

LayerIndex::LayerIndex(const DknStructure& structure, std::size_t layer)
    : layer_(layer) {
  structure.validate();
  if (layer < 1 || layer > structure.depth()) {
    throw DimensionError("layer " + std::to_string(layer) + " outside 1.." +
                         std::to_string(structure.depth()));
  }
  const Shape& image = structure.image_dims;
  const Shape fine = structure.fine_dims(layer - 1);
  const Shape& mid = structure.factor_dims[layer - 1];
  const Shape coarse = structure.coarse_dims(layer + 1);
  coarse_size_ = shape_size(coarse);
  layer_size_ = shape_size(mid);
  fine_size_ = shape_size(fine);

  const std::size_t total = shape_size(image);
  if (total > std::numeric_limits<std::uint32_t>::max()) {
    throw DimensionError("image with " + std::to_string(total) +
                         " entries is too large");
  }
  coarse_.resize(total);
  mid_.resize(total);
  fine_.resize(total);
  const std::size_t order = image.size();
  std::vector<std::size_t> ci(order), mi(order), fi(order);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rem = k;
    for (std::size_t m = 0; m < order; ++m) {
      std::size_t i = rem % image[m];
      rem /= image[m];
      fi[m] = i % fine[m];
      i /= fine[m];
      mi[m] = i % mid[m];
      ci[m] = i / mid[m];
    }
    coarse_[k] = static_cast<std::uint32_t>(linear_index(coarse, ci));
    mid_[k] = static_cast<std::uint32_t>(linear_index(mid, mi));
    fine_[k] = static_cast<std::uint32_t>(linear_index(fine, fi));
  }
}

DesignMatrix build_design(std::span<const Tensor> images,
                          std::span<const Tensor> left,
                          std::span<const Tensor> right, const LayerIndex& index) {
  if (left.size() != right.size() || left.empty()) {
    throw DimensionError("build_design: need one left and one right product per term");
  }
  const std::size_t rank = left.size();
  const std::size_t total = index.coarse().size();
  for (std::size_t r = 0; r < rank; ++r) {
    if (left[r].size() != index.coarse_size() || right[r].size() != index.fine_size()) {
      throw DimensionError(
          "build_design: term " + std::to_string(r + 1) + " products have " +
          std::to_string(left[r].size()) + " and " + std::to_string(right[r].size()) +
          " entries, layer " + std::to_string(index.layer()) + " needs " +
          std::to_string(index.coarse_size()) + " and " +
          std::to_string(index.fine_size()));
    }
  }
  // Per-term weight of each image entry: b_(:l+1)[coarse] * b_(l-1:)[fine].
  std::vector<std::vector<double>> weight(rank, std::vector<double>(total));
  const auto ci = index.coarse();
  const auto fi = index.fine();
  for (std::size_t r = 0; r < rank; ++r) {
    for (std::size_t k = 0; k < total; ++k) {
      weight[r][k] = left[r][ci[k]] * right[r][fi[k]];
    }
  }
  const std::size_t m = index.layer_size();
  DesignMatrix design(static_cast<Eigen::Index>(images.size()),
                      static_cast<Eigen::Index>(m * rank));
  const auto mi = index.mid();
  std::vector<double> row(m * rank);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Tensor& x = images[i];
    if (x.size() != total) {
      throw DimensionError("image " + std::to_string(i + 1) + " has shape " +
                           shape_string(x.dims()) + " (" + std::to_string(x.size()) +
                           " entries, expected " + std::to_string(total) + ")");
    }
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t r = 0; r < rank; ++r) {
      double* out = row.data() + r * m;
      const double* w = weight[r].data();
      for (std::size_t k = 0; k < total; ++k) out[mi[k]] += x[k] * w[k];
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
  }
  return design;
}

DesignMatrix build_design(std::span<const Tensor> images,
                          std::span<const Tensor> left,
                          std::span<const Tensor> right,
                          const DknStructure& structure, std::size_t layer) {
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].dims() != structure.image_dims) {
      throw DimensionError("image " + std::to_string(i + 1) + " has shape " +
                           shape_string(images[i].dims()) + ", structure expects " +
                           shape_string(structure.image_dims));
    }
  }
  return build_design(images, left, right, LayerIndex(structure, layer));
}

std::vector<double> reshaped_design_row(const Tensor& image, const Tensor& left,
                                        const Tensor& right,
                                        const DknStructure& structure,
                                        std::size_t layer) {
  structure.validate();
  if (image.dims() != structure.image_dims) {
    throw DimensionError("image shape " + shape_string(image.dims()) +
                         " does not match structure " +
                         shape_string(structure.image_dims));
  }
  const Shape coarse = structure.coarse_dims(layer + 1);
  const Shape upto = structure.fine_dims(layer);
  const Shape& mid = structure.factor_dims.at(layer - 1);
  if (left.size() != shape_size(coarse) ||
      right.size() != shape_size(structure.fine_dims(layer - 1))) {
    throw DimensionError("reshaped_design_row: product lengths do not match layer " +
                         std::to_string(layer));
  }
  // b_(:l+1)^T R_coarse(X): contracts the coarse blocks away.
  const Tensor rx = reshape_R(image, coarse);
  const std::size_t rows = rx.dims()[0], cols = rx.dims()[1];
  std::vector<double> contracted(cols, 0.0);
  for (std::size_t c = 0; c < cols; ++c) {
    double s = 0.0;
    for (std::size_t g = 0; g < rows; ++g) s += left[g] * rx[g + rows * c];
    contracted[c] = s;
  }
  // R_layer(vec^-1(.)) b_(l-1:): contracts the fine part away.
  const Tensor rl = reshape_R(unvec(std::move(contracted), upto), mid);
  const std::size_t m = rl.dims()[0], f = rl.dims()[1];
  std::vector<double> out(m, 0.0);
  for (std::size_t j = 0; j < f; ++j) {
    for (std::size_t h = 0; h < m; ++h) out[h] += rl[h + m * j] * right[j];
  }
  return out;
}

}  // namespace dkn
