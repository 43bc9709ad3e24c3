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

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "dkn/errors.hpp"
#include "dkn/tensor.hpp"
#include "dkn/tensor_io.hpp"
#include "test_util.hpp"

namespace dkn {
namespace {

using testing::random_tensor;

TEST(Tensor, VecFollowsFirstIndexFastest) {
  Tensor m({2, 2});
  m.at({0, 0}) = 1;
  m.at({1, 0}) = 2;
  m.at({0, 1}) = 3;
  m.at({1, 1}) = 4;
  EXPECT_EQ(vec(m).values(), (std::vector<double>{1, 2, 3, 4}));

  Tensor v({2}, {5, 6});
  EXPECT_EQ(vec(v).values(), (std::vector<double>{5, 6}));

  Tensor t({2, 1, 2});
  t.at({0, 0, 0}) = 10;
  t.at({1, 0, 0}) = 20;
  t.at({0, 0, 1}) = 30;
  t.at({1, 0, 1}) = 40;
  EXPECT_EQ(vec(t).values(), (std::vector<double>{10, 20, 30, 40}));
  EXPECT_EQ(vec(t).dims(), Shape{4});
}

TEST(Tensor, UnvecInvertsVec) {
  const Tensor m = unvec(Tensor({4}, {1, 2, 3, 4}), {2, 2});
  EXPECT_EQ(m.at({0, 1}), 3);
  EXPECT_EQ(m.at({1, 0}), 2);
  EXPECT_EQ(unvec(Tensor({1}, {7}), {1}).values(), std::vector<double>{7});
  EXPECT_THROW(unvec(Tensor({6}, {1, 2, 3, 4, 5, 6}), {2, 2}), DimensionError);

  std::mt19937_64 gen(1);
  for (std::size_t order = 1; order <= 4; ++order) {
    for (int rep = 0; rep < 20; ++rep) {
      const Tensor t = random_tensor(gen, testing::random_shape(gen, order, 4));
      EXPECT_EQ(unvec(vec(t), t.dims()), t);
    }
  }
}

TEST(Tensor, LinearizationLaw) {
  std::mt19937_64 gen(2);
  std::uniform_int_distribution<std::size_t> pick(0, 1000);
  for (int rep = 0; rep < 50; ++rep) {
    const Tensor t = random_tensor(gen, testing::random_shape(gen, 3, 5));
    const Shape& n = t.dims();
    const std::size_t i1 = pick(gen) % n[0], i2 = pick(gen) % n[1], i3 = pick(gen) % n[2];
    EXPECT_EQ(vec(t)[i1 + n[0] * i2 + n[0] * n[1] * i3], t.at({i1, i2, i3}));
  }
}

TEST(Tensor, RejectsBadShapes) {
  EXPECT_THROW(Tensor(Shape{}), DimensionError);
  EXPECT_THROW(Tensor(Shape{2, 0}), DimensionError);
  EXPECT_THROW(Tensor(Shape{1, 1, 1, 1, 1}), DimensionError);
  EXPECT_THROW(Tensor(Shape{2}, {1, 2, 3}), DimensionError);
  Tensor t({2, 2});
  EXPECT_THROW(t.at({2, 0}), DimensionError);
}

TEST(Tensor, OrderKeepsTrailingOnes) {
  EXPECT_EQ(Tensor(Shape{4, 4, 1}).order(), 3u);
}

TEST(Tensor, Blocks) {
  Tensor m({4, 4});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) m.at({i, j}) = 10.0 * (i + 1) + (j + 1);
  const std::size_t first[] = {0, 0};
  const Tensor corner = block(m, first, {2, 2});
  EXPECT_EQ(corner.values(), (std::vector<double>{11, 21, 12, 22}));
  EXPECT_EQ(block(m, first, m.dims()), m);

  const Tensor small({2, 2}, {1, 2, 3, 4});
  const std::size_t second_row[] = {1, 0};
  EXPECT_EQ(block(small, second_row, {1, 2}).values(), (std::vector<double>{2, 4}));

  const std::size_t out_of_range[] = {2, 0};
  EXPECT_THROW(block(m, out_of_range, {2, 2}), DimensionError);
  EXPECT_THROW(block(m, first, {3, 2}), DimensionError);
}

TEST(Tensor, BlocksTile) {
  std::mt19937_64 gen(3);
  const Tensor t = random_tensor(gen, {6, 4, 2});
  const Shape bd{3, 2, 1};
  double sum = 0.0;
  for (std::size_t h = 0; h < 2; ++h)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k) {
        const std::size_t idx[] = {h, j, k};
        const double n = fro_norm(block(t, idx, bd));
        sum += n * n;
      }
  EXPECT_NEAR(sum, fro_norm(t) * fro_norm(t), 1e-12);
}

TEST(Tensor, InnerAndNorm) {
  const Tensor eye({2, 2}, {1, 0, 0, 1});
  EXPECT_EQ(inner(eye, eye), 2.0);
  EXPECT_EQ(inner(eye, Tensor({2, 2})), 0.0);
  EXPECT_EQ(inner(Tensor({3}, {1, 2, 3}), Tensor({3}, {4, 5, 6})), 32.0);
  EXPECT_THROW(inner(Tensor({3}), Tensor({2})), DimensionError);
  EXPECT_EQ(fro_norm(Tensor({3})), 0.0);
  EXPECT_EQ(fro_norm(Tensor({2}, {3, 4})), 5.0);
  std::mt19937_64 gen(4);
  const Tensor t = random_tensor(gen, {3, 3});
  EXPECT_NEAR(fro_norm(2.0 * t), 2.0 * fro_norm(t), 1e-12);
}

TEST(Tensor, Dist) {
  const Tensor e1({2}, {1, 0}), e2({2}, {0, 1}), d({2}, {1, 1});
  EXPECT_EQ(dist(e1, e1), 0.0);
  EXPECT_NEAR(dist(e1, e2), 1.0, 1e-15);
  EXPECT_NEAR(dist(e1, d), std::sqrt(0.5), 1e-15);
  EXPECT_THROW(dist(e1, Tensor({2})), DomainError);
  EXPECT_THROW(dist(e1, Tensor({3}, {1, 0, 0})), DimensionError);

  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> scale(-5.0, 5.0);
  for (int rep = 0; rep < 50; ++rep) {
    const Tensor u = random_tensor(gen, {3, 2}), v = random_tensor(gen, {3, 2});
    double c = scale(gen);
    if (c == 0.0) c = 1.0;
    EXPECT_NEAR(dist(c * u, v), dist(u, v), 1e-12);
    const double x = dist(u, v);
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
  }
}

TEST(TensorIo, RoundTripAndLayout) {
  const Tensor t({2, 1}, {1.5, -2.0});
  const auto bytes = encode_dkt(t);
  ASSERT_EQ(bytes.size(), 4u + 1u + 2u * 8u + 2u * 8u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "DKT1");
  EXPECT_EQ(bytes[4], 2);
  EXPECT_EQ(bytes[5], 2);  // first extent, little endian
  for (int k = 6; k < 13; ++k) EXPECT_EQ(bytes[k], 0);
  // 1.5 = 0x3FF8000000000000, little endian.
  EXPECT_EQ(bytes[21 + 7], 0x3F);
  EXPECT_EQ(bytes[21 + 6], 0xF8);
  EXPECT_EQ(decode_dkt(bytes), t);

  std::mt19937_64 gen(6);
  for (std::size_t order = 1; order <= 4; ++order) {
    const Tensor r = random_tensor(gen, testing::random_shape(gen, order, 3));
    std::stringstream ss;
    write_dkt(ss, r);
    EXPECT_EQ(read_dkt(ss), r);
  }
}

TEST(TensorIo, RejectsCorruptInput) {
  auto bytes = encode_dkt(Tensor({2}, {1, 2}));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_dkt(bad_magic), FormatError);
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(decode_dkt(truncated), FormatError);
  auto bad_order = bytes;
  bad_order[4] = 5;
  EXPECT_THROW(decode_dkt(bad_order), FormatError);
}

}  // namespace
}  // namespace dkn
