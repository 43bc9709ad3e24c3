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

#include "dkn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dkn {
namespace {

void check_shape(const Shape& dims) {
  if (dims.empty() || dims.size() > kMaxOrder) {
    throw DimensionError("tensor order must be between 1 and 4, got " +
                         std::to_string(dims.size()));
  }
  for (std::size_t m = 0; m < dims.size(); ++m) {
    if (dims[m] == 0) {
      throw DimensionError("extent " + std::to_string(m + 1) +
                           " of shape " + shape_string(dims) + " is zero");
    }
  }
}

void check_same_dims(const Tensor& a, const Tensor& b, const char* what) {
  if (a.dims() != b.dims()) {
    throw DimensionError(std::string(what) + ": shapes " +
                         shape_string(a.dims()) + " and " +
                         shape_string(b.dims()) + " differ");
  }
}

}  // namespace

std::size_t shape_size(const Shape& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_string(const Shape& dims) {
  std::ostringstream os;
  for (std::size_t m = 0; m < dims.size(); ++m) {
    if (m) os << 'x';
    os << dims[m];
  }
  return os.str();
}

Shape shape_product(const Shape& a, const Shape& b) {
  if (a.size() != b.size()) {
    throw DimensionError("order mismatch: " + shape_string(a) + " vs " +
                         shape_string(b));
  }
  Shape out(a.size());
  for (std::size_t m = 0; m < a.size(); ++m) out[m] = a[m] * b[m];
  return out;
}

Shape shape_quotient(const Shape& num, const Shape& den) {
  if (num.size() != den.size()) {
    throw DimensionError("order mismatch: " + shape_string(num) + " vs " +
                         shape_string(den));
  }
  Shape out(num.size());
  for (std::size_t m = 0; m < num.size(); ++m) {
    if (den[m] == 0 || num[m] % den[m] != 0) {
      throw DimensionError("extent " + std::to_string(den[m]) + " does not divide " +
                           std::to_string(num[m]) + " in mode " +
                           std::to_string(m + 1));
    }
    out[m] = num[m] / den[m];
  }
  return out;
}

std::size_t linear_index(const Shape& dims, std::span<const std::size_t> index) {
  if (index.size() != dims.size()) {
    throw DimensionError("index has " + std::to_string(index.size()) +
                         " coordinates for an order-" +
                         std::to_string(dims.size()) + " tensor");
  }
  std::size_t offset = 0;
  for (std::size_t m = dims.size(); m-- > 0;) {
    if (index[m] >= dims[m]) {
      throw DimensionError("coordinate " + std::to_string(index[m] + 1) +
                           " out of range 1.." + std::to_string(dims[m]) +
                           " in mode " + std::to_string(m + 1));
    }
    offset = offset * dims[m] + index[m];
  }
  return offset;
}

std::vector<std::size_t> multi_index(const Shape& dims, std::size_t offset) {
  std::vector<std::size_t> index(dims.size());
  for (std::size_t m = 0; m < dims.size(); ++m) {
    index[m] = offset % dims[m];
    offset /= dims[m];
  }
  return index;
}

Tensor::Tensor() : dims_{1}, data_(1, 0.0) {}

Tensor::Tensor(Shape dims) : dims_(std::move(dims)) {
  check_shape(dims_);
  data_.assign(shape_size(dims_), 0.0);
}

Tensor::Tensor(Shape dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  check_shape(dims_);
  if (data_.size() != shape_size(dims_)) {
    throw DimensionError("data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string(dims_));
  }
}

Tensor Tensor::filled(Shape dims, double value) {
  Tensor t(std::move(dims));
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

double Tensor::at(std::span<const std::size_t> index) const {
  return data_[linear_index(dims_, index)];
}

double& Tensor::at(std::span<const std::size_t> index) {
  return data_[linear_index(dims_, index)];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  return at(std::span<const std::size_t>(index.begin(), index.size()));
}

double& Tensor::at(std::initializer_list<std::size_t> index) {
  return at(std::span<const std::size_t>(index.begin(), index.size()));
}

Tensor& Tensor::operator+=(const Tensor& other) {
  check_same_dims(*this, other, "tensor addition");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  check_same_dims(*this, other, "tensor subtraction");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Tensor& Tensor::operator*=(double scale) {
  for (double& x : data_) x *= scale;
  return *this;
}

Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
Tensor operator*(double scale, Tensor t) { return t *= scale; }

Tensor vec(const Tensor& t) { return Tensor({t.size()}, t.values()); }

Tensor unvec(const Tensor& v, const Shape& dims) {
  if (v.order() != 1) {
    throw DimensionError("unvec expects an order-1 tensor, got shape " +
                         shape_string(v.dims()));
  }
  return unvec(v.values(), dims);
}

Tensor unvec(std::vector<double> data, const Shape& dims) {
  if (data.size() != shape_size(dims)) {
    throw DimensionError("cannot reshape " + std::to_string(data.size()) +
                         " entries to shape " + shape_string(dims));
  }
  return Tensor(dims, std::move(data));
}

Tensor block(const Tensor& t, std::span<const std::size_t> block_index,
             const Shape& block_dims) {
  const Shape grid = shape_quotient(t.dims(), block_dims);
  if (block_index.size() != grid.size()) {
    throw DimensionError("block index order does not match tensor order");
  }
  for (std::size_t m = 0; m < grid.size(); ++m) {
    if (block_index[m] >= grid[m]) {
      throw DimensionError("block coordinate " +
                           std::to_string(block_index[m] + 1) +
                           " out of range 1.." + std::to_string(grid[m]) +
                           " in mode " + std::to_string(m + 1));
    }
  }
  Tensor out(block_dims);
  std::vector<std::size_t> global(t.order());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto local = multi_index(block_dims, k);
    for (std::size_t m = 0; m < local.size(); ++m) {
      global[m] = block_index[m] * block_dims[m] + local[m];
    }
    out[k] = t.at(global);
  }
  return out;
}

double inner(const Tensor& a, const Tensor& b) {
  check_same_dims(a, b, "inner product");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double fro_norm(const Tensor& t) {
  double s = 0.0;
  for (double x : t.data()) s += x * x;
  return std::sqrt(s);
}

double dist(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DimensionError("dist: lengths " + std::to_string(u.size()) +
                         " and " + std::to_string(v.size()) + " differ");
  }
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    uv += u[k] * v[k];
    uu += u[k] * u[k];
    vv += v[k] * v[k];
  }
  if (uu == 0.0 || vv == 0.0) {
    throw DomainError("dist is undefined for a zero-norm argument");
  }
  // |u/|u| - c v/|v||, c = cos(u, v), equals sqrt(1 - c^2) but keeps full
  // relative accuracy for nearly parallel arguments.
  const double nu = std::sqrt(uu), nv = std::sqrt(vv);
  const double c = uv / (nu * nv);
  double r2 = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double d = u[k] / nu - c * v[k] / nv;
    r2 += d * d;
  }
  return std::min(1.0, std::sqrt(r2));
}

double dist(const Tensor& u, const Tensor& v) {
  check_same_dims(u, v, "dist");
  return dist(u.data(), v.data());
}

}  // namespace dkn
