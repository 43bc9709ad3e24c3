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

#ifndef DKN_HARNESS_HPP_
#define DKN_HARNESS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dkn/fit.hpp"
#include "dkn/glm.hpp"
#include "dkn/model.hpp"
#include "dkn/structure.hpp"

namespace dkn {

enum class SignalKind { kOneCircle, kTwoCircles, kCustomMask };
enum class Sparsity { kSparse, kQuasiSparse };

SignalKind parse_signal_kind(const std::string& name);
std::string signal_kind_name(SignalKind kind);
Sparsity parse_sparsity(const std::string& name);
std::string sparsity_name(Sparsity sparsity);

// Disk (or ball, for order-3 images) in 1-based pixel coordinates. A pixel
// belongs to it when sum_m (i_m - center_m)^2 <= radius^2.
struct Circle {
  std::vector<double> center;
  double radius = 0.0;
};

struct SignalSpec {
  SignalKind kind = SignalKind::kOneCircle;
  Sparsity sparsity = Sparsity::kSparse;
  std::vector<Circle> circles;
  Shape image_dims;
  std::optional<Tensor> mask;  // kCustomMask: nonzero entries are the region

  void validate() const;
};

// 0/1 indicator of the signal region.
Tensor signal_region(const SignalSpec& spec);

// Sparse: the region indicator. Quasi-sparse: N(1, 1) inside the region and
// N(0.1, 0.1) (variance 0.1) outside, drawn in linear pixel order.
Tensor gen_signal(const SignalSpec& spec, std::uint64_t seed);

std::vector<Tensor> gen_images(std::size_t n, const Shape& dims, std::uint64_t seed);

std::vector<double> gen_responses(std::span<const Tensor> images, const Tensor& c,
                                  Family family, double noise_sd, std::uint64_t seed);

// |chat - c| / sqrt(number of entries).
double rmse_coeff(const Tensor& chat, const Tensor& c);

struct PredictionError {
  double rmse = 0.0;
  std::optional<double> accuracy;  // bernoulli: share of (p >= 0.5) == y
};

PredictionError rmse_pred(const DknModel& model, std::span<const Tensor> images,
                          std::span<const double> y, Family family);
PredictionError rmse_pred(std::span<const double> predicted, std::span<const double> y,
                          Family family);

struct RidgeFit {
  Tensor coefficient;
  double intercept = 0.0;
  double lambda = 0.0;
  std::vector<double> lambda_grid;
  std::vector<double> cv_error;  // mean squared held-out error per lambda
};

// Ridge on vectorized images with lambda chosen by 5-fold cross-validation
// (fold of sample i is i mod 5). Solved in the n x n kernel form. An empty
// grid means mean(|X_i|^2) * 10^k for k = -3, -2.5, ..., 3.
RidgeFit baseline_ridge(std::span<const Tensor> images, std::span<const double> y,
                        std::span<const double> lambda_grid = {},
                        bool fit_intercept = true);

struct ExperimentConfig {
  Shape image_dims;
  std::size_t n_train = 0;
  std::size_t n_test = 0;  // 0 means n_train / 4
  SignalSpec signal;
  Family family = Family::kGaussian;
  double noise_sd = 1.0;
  std::optional<DknStructure> structure;  // empty: deepest structure
  std::vector<std::size_t> ranks{1, 2, 3};
  std::uint64_t seed = 0;
  std::size_t repetitions = 1;
  // Global index of the first repetition; repetition k of a run uses the
  // seeds of global index repetition_offset + k.
  std::size_t repetition_offset = 0;
  bool baseline = true;
  bool center_response = true;
  int max_sweeps = 100;
  double tolerance = 1e-8;
  unsigned threads = 1;

  std::size_t test_size() const { return n_test ? n_test : n_train / 4; }
  void validate() const;
};

struct RepetitionResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t rank = 0;
  int sweeps = 0;
  bool converged = false;
  double rmse_coeff = 0.0;
  double rmse_pred = 0.0;
  std::optional<double> accuracy;
  std::optional<double> baseline_rmse_coeff;
  std::optional<double> baseline_rmse_pred;
};

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for one value
};

Summary summarize(std::span<const double> values);

struct ExperimentReport {
  std::vector<RepetitionResult> rows;  // ordered by repetition index
  Summary dkn_coeff, dkn_pred;
  std::optional<Summary> baseline_coeff, baseline_pred;
  std::map<std::string, std::string> metadata;
};

// Seeds of one repetition. Purpose streams split from the repetition key:
// 1 signal, 2 train images, 3 train responses, 4 test images,
// 5 test responses, 6 fit reseeding.
struct RepetitionSeeds {
  std::uint64_t repetition, signal, images, responses, test_images, test_responses, fit;
};
RepetitionSeeds repetition_seeds(std::uint64_t master, std::size_t index);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

}  // namespace dkn

#endif  // DKN_HARNESS_HPP_
