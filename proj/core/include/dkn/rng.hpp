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

#ifndef DKN_RNG_HPP_
#define DKN_RNG_HPP_

#include <array>
#include <cstdint>
#include <vector>

namespace dkn {

// Philox4x32-10 block function: encrypts a 128-bit counter under a 64-bit key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Counter-based stream. The stream is fully determined by its 64-bit key;
// draws walk the counter from zero. split(id) derives an independent child
// key by encrypting (id, 0, 0, kSplitTag) under the parent key, so
// master -> repetition -> purpose chains are reproducible in any language
// implementing Philox4x32-10.
class Rng {
 public:
  static constexpr std::uint32_t kSplitTag = 0x53504c54u;  // "SPLT"

  explicit Rng(std::uint64_t key) : key_(key) {}

  std::uint64_t key() const { return key_; }
  Rng split(std::uint64_t id) const;

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // 53-bit uniform in [0, 1).
  double uniform();
  // Standard normal by Box-Muller; both outputs of a pair are used.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  bool bernoulli(double p) { return uniform() < p; }

  std::vector<double> normals(std::size_t n);
  // Uniform on the unit sphere in R^n.
  std::vector<double> unit_vector(std::size_t n);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dkn

#endif  // DKN_RNG_HPP_
