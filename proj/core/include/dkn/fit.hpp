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

#ifndef DKN_FIT_HPP_
#define DKN_FIT_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dkn/design.hpp"
#include "dkn/glm.hpp"
#include "dkn/model.hpp"

namespace dkn {

// Singular pairs of sum_i y_i R_(coarse l)(X_i) for l = 2..L. levels[l]
// is empty for l < 2. Signs are fixed so the largest-magnitude entry of
// each left vector is positive.
struct SpectralInit {
  struct Level {
    Eigen::MatrixXd left;    // coarse_size x k, columns are b_(:l) candidates
    Eigen::MatrixXd right;   // fine_size x k, columns are b_(l-1:) candidates
    Eigen::VectorXd singular_values;
  };
  std::vector<Level> levels;

  // Top-`rank` left vectors at `layer` reshaped to the coarse shape.
  std::vector<Tensor> coarse_start(const DknStructure& structure,
                                   std::size_t layer) const;
};

SpectralInit init_spectral(std::span<const Tensor> images,
                           std::span<const double> y,
                           const DknStructure& structure);

struct FitOptions {
  int max_sweeps = 100;
  // Stop when |obj_{t-1} - obj_t| < tolerance * |obj_{t-1}|.
  double tolerance = 1e-8;
  // Replaces the default 1e-8 * trace(D^T D) / m ridge on every subproblem.
  std::optional<double> ridge;
  std::uint64_t seed = 0;
  // Gaussian only: fit on centered images and responses, then store the
  // intercept mean(y) - <mean(X), C> on the model.
  bool center_response = false;
  // When set, the report carries dist(C^(t), truth) after every sweep.
  std::optional<Tensor> trace_truth;
  // Rank-1 truth factors; enables the per-layer distance trace.
  std::optional<DknModel> trace_factors;
};

struct LayerTraceEntry {
  int sweep = 0;       // 1-based
  std::size_t layer = 0;
  double factor_dist = 0.0;  // dist(b_l^(t+1), b_l)
  double fine_dist = 0.0;    // dist(b_(l-1:)^(t+1), b_(l-1:)), 0 at l = 1
  double coarse_dist = 0.0;  // dist(b_(:l+1)^(t), b_(:l+1)), 0 at l = L
};

struct FitReport {
  std::size_t rank = 0;
  // Gaussian: (1/2) sum (y - eta)^2 on the (centered) responses.
  // Bernoulli: sum psi(eta) - y eta. One entry per completed sweep.
  std::vector<double> objective;
  double relative_change = 0.0;
  int sweeps = 0;
  bool converged = false;
  std::vector<double> distance_trace;
  std::vector<LayerTraceEntry> layer_trace;
  // Initial dist(b_(:l)^(0), b_(:l)) for l = 2..L when trace_factors is set.
  std::vector<double> initial_coarse_dist;
  double bic = 0.0;
  int reseeds = 0;
  // Layer subproblems whose IRLS hit its iteration cap; the last iterate
  // was kept.
  int glm_nonconverged = 0;
  double wall_seconds = 0.0;
};

struct FitResult {
  DknModel model;
  FitReport report;
};

// Mutable alternating-minimization state. coarse[l] holds b_(:l)^r for
// l = 1..L+1 and fine[l] holds b_(l:)^r for l = 0..L; index 0 of coarse is
// unused. model.factors is authoritative for every layer already updated.
struct FitState {
  DknModel model;
  std::vector<std::vector<Tensor>> coarse;
  std::vector<std::vector<Tensor>> fine;
  std::vector<LayerIndex> index;  // index[l - 1] for layer l
  std::vector<double> eta;        // linear predictor after the last update
  SpectralInit init;
  std::vector<std::size_t> next_left, next_right;  // reseed cursors per level
  std::uint64_t seed = 0;
  std::uint64_t reseed_draws = 0;
  int reseeds = 0;
  int glm_nonconverged = 0;

  // State whose partial products agree with the given factors.
  static FitState from_model(const DknModel& model);
  // State at the start of a fit: coarse products from the spectral
  // initializer, factors zero.
  static FitState from_init(const DknStructure& structure, SpectralInit init,
                            std::uint64_t seed);

  // Rebuilds coarse[l] = coarse[l+1] (x) B_l for l = L..1.
  void recompose_coarse();
};

// One inner step: solve for vec([b_l^1 ... b_l^R]) with the other layers
// fixed, then refresh B_l^r and b_(l:)^r.
void sweep_update(FitState& state, std::span<const Tensor> images,
                  std::span<const double> y, Family family, std::size_t layer,
                  const FitOptions& options);

// Spectral initialization, then sweeps of layers 1..L each followed by the
// downward recomposition of the coarse products. The returned model is
// normalized and carries the intercept when responses were centered.
FitResult fit(std::span<const Tensor> images, std::span<const double> y,
              const DknStructure& structure, Family family,
              const FitOptions& options = {});

struct RankScan {
  std::size_t best_rank = 0;
  std::vector<FitResult> fits;  // one per candidate, in input order
};

// Independent fit per candidate rank; argmin BIC, ties to the smaller rank.
RankScan scan_rank(std::span<const Tensor> images, std::span<const double> y,
                   const DknStructure& base, std::span<const std::size_t> ranks,
                   Family family, const FitOptions& options = {},
                   unsigned threads = 1);

}  // namespace dkn

#endif  // DKN_FIT_HPP_
