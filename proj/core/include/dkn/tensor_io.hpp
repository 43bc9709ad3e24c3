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

#ifndef DKN_TENSOR_IO_HPP_
#define DKN_TENSOR_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "dkn/tensor.hpp"

namespace dkn {

// DKT1 binary layout:
//   "DKT1" | u8 order | order x u64 LE extents | prod(extents) x f64 LE
// Data is stored in the canonical (first-index-fastest) linearization.
std::vector<std::uint8_t> encode_dkt(const Tensor& t);
Tensor decode_dkt(std::span<const std::uint8_t> bytes);

void write_dkt(std::ostream& out, const Tensor& t);
Tensor read_dkt(std::istream& in);

void save_dkt(const std::filesystem::path& path, const Tensor& t);
Tensor load_dkt(const std::filesystem::path& path);

}  // namespace dkn

#endif  // DKN_TENSOR_IO_HPP_
