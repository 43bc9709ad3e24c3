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

#include "dkn/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

namespace dkn {
namespace {

constexpr char kMagic[4] = {'D', 'K', 'T', '1'};

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | bytes[at + b];
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_dkt(const Tensor& t) {
  std::vector<std::uint8_t> out;
  out.reserve(5 + 8 * t.order() + 8 * t.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(static_cast<std::uint8_t>(t.order()));
  for (std::size_t extent : t.dims()) put_u64(out, extent);
  for (double x : t.data()) put_u64(out, std::bit_cast<std::uint64_t>(x));
  return out;
}

Tensor decode_dkt(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 5 || !std::equal(std::begin(kMagic), std::end(kMagic),
                                      bytes.begin())) {
    throw FormatError("missing DKT1 magic");
  }
  const std::size_t order = bytes[4];
  if (order < 1 || order > kMaxOrder) {
    throw FormatError("DKT1 order byte " + std::to_string(order) +
                      " outside 1..4");
  }
  std::size_t at = 5;
  if (bytes.size() < at + 8 * order) throw FormatError("truncated DKT1 header");
  Shape dims(order);
  for (auto& extent : dims) {
    const std::uint64_t e = get_u64(bytes, at);
    if (e == 0 || e > (std::uint64_t{1} << 40)) {
      throw FormatError("DKT1 extent " + std::to_string(e) + " is invalid");
    }
    extent = static_cast<std::size_t>(e);
    at += 8;
  }
  const std::size_t count = shape_size(dims);
  if (bytes.size() != at + 8 * count) {
    throw FormatError("DKT1 payload has " + std::to_string(bytes.size() - at) +
                      " bytes, expected " + std::to_string(8 * count));
  }
  std::vector<double> data(count);
  for (auto& x : data) {
    x = std::bit_cast<double>(get_u64(bytes, at));
    at += 8;
  }
  return Tensor(std::move(dims), std::move(data));
}

void write_dkt(std::ostream& out, const Tensor& t) {
  const auto bytes = encode_dkt(t);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

Tensor read_dkt(std::istream& in) {
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_dkt(bytes);
}

void save_dkt(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_dkt(out, t);
  if (!out) throw Error("failed writing " + path.string());
}

Tensor load_dkt(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return read_dkt(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace dkn
