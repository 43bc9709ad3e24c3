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

#ifndef DKN_DIAGNOSTICS_HPP_
#define DKN_DIAGNOSTICS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dkn/fit.hpp"
#include "dkn/kron.hpp"
#include "dkn/model.hpp"

namespace dkn {

double coeff_distance(const Tensor& a, const Tensor& b);
double coeff_distance(const DknModel& a, const DknModel& b);

struct RipProbe {
  // max over probes of |(1/n) sum_i <X_i, C>^2 / |C|^2 - 1|. A Monte Carlo
  // lower bound on the true constant, never an upper bound.
  double delta_hat = 0.0;
  std::vector<FactorChain> witness;  // the two terms attaining delta_hat
  std::vector<double> running_max;   // delta_hat after each probe
};

// Probe k draws gaussian factors from Rng(seed).split(k), so a longer run
// extends a shorter one and results do not depend on `threads`.
RipProbe probe_rip(std::span<const Tensor> images, const DknStructure& structure,
                   std::size_t probes, std::uint64_t seed, unsigned threads = 1);

// Lower bound on sup (1/n) |sum_i eps_i Xtilde_i(b_(:l+1), b_(l-1:))| over
// unit partial products and all layers. Each probe starts from a random unit
// coarse vector, takes the exact best fine vector, then refines both by
// `power_steps` alternating updates.
double probe_tau0(std::span<const Tensor> images, std::span<const double> eps,
                  const DknStructure& structure, std::size_t probes,
                  std::uint64_t seed, int power_steps = 5);

struct TheoryConstants {
  double delta = 0.0, mu = 0.0, tau0 = 0.0, c_norm = 1.0;
  std::size_t depth = 2;
  double tau = 0.0, nu = 0.0, eta = 1.0, kappa = 0.0, c1 = 0.0, c2 = 0.0;
  bool condition_met = false;

  // c1 kappa^t mu + c2 tau, with each product taken as 0 when its second
  // factor is 0.
  double bound(int t) const;
};

TheoryConstants theory_constants(double delta, double mu, double tau0, double c_norm,
                                 std::size_t depth);

struct DecayVerdict {
  bool applicable = false;  // condition met and kappa < 1
  bool bound_ok = true;
  bool ratio_ok = true;
  bool passed = false;
  double noise_floor = 0.0;
  std::vector<double> margins;  // bound(t) - dist^(t), t = 0, 1, ...
  std::vector<double> ratios;   // dist^(t+1) / dist^(t)
  std::vector<std::string> failures;
};

DecayVerdict verify_decay(std::span<const double> distance_trace,
                          const TheoryConstants& constants, double ratio_slack = 0.1);

// Largest K such that every K columns are independent; singular values below
// 1e-10 * sigma_max(m) count as zero. Exhaustive over column subsets.
std::size_t krank(const Tensor& m);
std::size_t matrix_rank(const Tensor& m);

struct Identifiability {
  bool sufficient_met = false;  // sum_l K(Bbar_l) >= 2R + L - 1
  bool necessary_met = false;   // min_l prod_{l' != l} rank(Bbar_l') >= R
  std::vector<std::size_t> kranks, ranks;
  std::size_t krank_sum = 0, threshold = 0, necessary_min = 0;
};

Identifiability identifiability_check(const DknModel& model);

// Per-layer inequality of the iteration bound:
// dist(b_l) <= nu (dist(b_(l-1:)) + dist(b_(:l+1))) + tau, per traced entry.
struct LayerInequality {
  std::size_t checked = 0;
  std::vector<LayerTraceEntry> violations;
};

LayerInequality check_layer_inequality(std::span<const LayerTraceEntry> trace,
                                       double nu, double tau, double slack = 1e-9);

}  // namespace dkn

#endif  // DKN_DIAGNOSTICS_HPP_
