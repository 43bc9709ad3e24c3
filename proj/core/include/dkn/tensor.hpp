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

#ifndef DKN_TENSOR_HPP_
#define DKN_TENSOR_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dkn/errors.hpp"

namespace dkn {

// Extent list of a tensor. Order is the list length; trailing 1s are
// significant (a 4x4x1 tensor is order 3).
using Shape = std::vector<std::size_t>;

inline constexpr std::size_t kMaxOrder = 4;

std::size_t shape_size(const Shape& dims);
std::string shape_string(const Shape& dims);

// Elementwise product / quotient of two equal-order shapes. The quotient
// throws DimensionError unless every extent of `den` divides `num`.
Shape shape_product(const Shape& a, const Shape& b);
Shape shape_quotient(const Shape& num, const Shape& den);

// Canonical linearization: the first index varies fastest, so for dims
// (n1, n2, n3) the zero-based offset of (i1, i2, i3) is
// i1 + n1 * (i2 + n2 * i3). All reshaping in the library derives from this.
std::size_t linear_index(const Shape& dims, std::span<const std::size_t> index);
std::vector<std::size_t> multi_index(const Shape& dims, std::size_t offset);

// Dense real tensor of order 1..4. Indices in this API are zero-based;
// error messages report one-based positions.
class Tensor {
 public:
  // A single zero entry of order 1.
  Tensor();
  explicit Tensor(Shape dims);
  Tensor(Shape dims, std::vector<double> data);

  static Tensor filled(Shape dims, double value);

  const Shape& dims() const { return dims_; }
  std::size_t order() const { return dims_.size(); }
  std::size_t size() const { return data_.size(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double operator[](std::size_t offset) const { return data_[offset]; }
  double& operator[](std::size_t offset) { return data_[offset]; }

  double at(std::span<const std::size_t> index) const;
  double& at(std::span<const std::size_t> index);
  double at(std::initializer_list<std::size_t> index) const;
  double& at(std::initializer_list<std::size_t> index);

  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  Tensor& operator*=(double scale);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape dims_;
  std::vector<double> data_;
};

Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);
Tensor operator*(double scale, Tensor t);

// Order-1 view of the same data.
Tensor vec(const Tensor& t);
// Inverse of vec. Throws DimensionError when the length does not match.
Tensor unvec(const Tensor& v, const Shape& dims);
Tensor unvec(std::vector<double> data, const Shape& dims);

// Contiguous sub-tensor of extents `block_dims` at zero-based block
// coordinate `block_index`; its first entry sits at block_index * block_dims.
Tensor block(const Tensor& t, std::span<const std::size_t> block_index,
             const Shape& block_dims);

double inner(const Tensor& a, const Tensor& b);
double fro_norm(const Tensor& t);

// Sine of the angle between two tensors: sqrt(1 - <u,v>^2 / (|u|^2 |v|^2)).
// Invariant to nonzero rescaling (and sign) of either argument. Throws
// DomainError for a zero-norm argument.
double dist(const Tensor& u, const Tensor& v);
double dist(std::span<const double> u, std::span<const double> v);

}  // namespace dkn

#endif  // DKN_TENSOR_HPP_
