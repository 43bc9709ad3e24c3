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

#include <benchmark/benchmark.h>

#include <vector>

#include "dkn/design.hpp"
#include "dkn/fit.hpp"
#include "dkn/harness.hpp"
#include "dkn/kron.hpp"
#include "dkn/model.hpp"
#include "dkn/rng.hpp"

namespace {

using namespace dkn;

Tensor random_tensor(Rng& rng, const Shape& dims) {
  Tensor t(dims);
  for (auto& v : t.data()) v = rng.normal();
  return t;
}

// Kronecker product of two square order-2 factors of side state.range(0).
void BM_Tkp(benchmark::State& state) {
  const std::size_t side = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = random_tensor(rng, {side, side});
  const Tensor b = random_tensor(rng, {side, side});
  for (auto _ : state) benchmark::DoNotOptimize(tkp(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(side * side * side * side));
}
BENCHMARK(BM_Tkp)->Arg(4)->Arg(16)->Arg(32);

// Design for the middle layer of the deepest structure of a square image.
void BM_BuildDesign(benchmark::State& state) {
  const std::size_t side = static_cast<std::size_t>(state.range(0));
  const std::size_t n = 500;
  const DknStructure s = deepest_structure({side, side}, 1);
  Rng rng(2);
  std::vector<FactorChain> terms(1);
  for (const auto& d : s.factor_dims) terms[0].factors.push_back(random_tensor(rng, d));
  const DknModel model = DknModel::from_terms(s, terms);
  const std::size_t layer = s.depth() / 2 + 1;
  const auto left = partial_products(model, layer + 1, Side::kLeft);
  const auto right = partial_products(model, layer - 1, Side::kRight);
  const auto images = gen_images(n, s.image_dims, 3);
  const LayerIndex index(s, layer);
  for (auto _ : state) benchmark::DoNotOptimize(build_design(images, left, right, index));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * side * side));
}
BENCHMARK(BM_BuildDesign)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

// One full sweep (all layers plus recomposition) from the spectral start.
void BM_Sweep(benchmark::State& state) {
  const std::size_t side = static_cast<std::size_t>(state.range(0));
  const DknStructure s = deepest_structure({side, side}, 2);
  const auto images = gen_images(500, s.image_dims, 4);
  Rng rng(5);
  std::vector<double> y(images.size());
  for (auto& v : y) v = rng.normal();
  FitState start = FitState::from_init(s, init_spectral(images, y, s), 6);
  FitOptions opts;
  for (auto _ : state) {
    FitState st = start;
    for (std::size_t l = 1; l <= s.depth(); ++l) {
      sweep_update(st, images, y, Family::kGaussian, l, opts);
    }
    st.recompose_coarse();
    benchmark::DoNotOptimize(st.eta.data());
  }
}
BENCHMARK(BM_Sweep)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
