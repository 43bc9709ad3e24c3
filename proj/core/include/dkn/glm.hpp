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

#ifndef DKN_GLM_HPP_
#define DKN_GLM_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace dkn {

// Exponential-family responses with canonical links.
//   gaussian:  psi(eta) = eta^2 / 2,        identity link
//   bernoulli: psi(eta) = log(1 + e^eta),  logit link, labels in {0, 1}
enum class Family { kGaussian, kBernoulli };

Family parse_family(std::string_view name);
std::string_view family_name(Family family);

// Linear predictors are clamped to [-30, 30] inside mean and variance for
// the bernoulli family.
inline constexpr double kEtaClamp = 30.0;

double cumulant(Family family, double eta);
double mean_response(Family family, double eta);
double variance_response(Family family, double eta);
double link(Family family, double mu);

// Row i of a design holds the regressors whose inner product with the
// coefficient vector gives the linear predictor of sample i.
using DesignMatrix = Eigen::MatrixXd;

// Throws DomainError for labels outside {0, 1} under bernoulli.
void check_responses(Family family, std::span<const double> y);

// sum_i psi(eta_i) - y_i eta_i
double nll(Family family, std::span<const double> eta, std::span<const double> y);

// D^T (mean(D beta) - y), the gradient of nll(D beta) in beta.
Eigen::VectorXd nll_grad(Family family, const DesignMatrix& design,
                         const Eigen::VectorXd& beta, std::span<const double> y);

struct IrlsTrace {
  std::vector<double> objective;  // penalized objective after each step
  int iterations = 0;
};

struct GlmSolveOptions {
  int max_iterations = 100;
  // Stop when max|grad| <= gradient_tolerance * (1 + |objective|).
  double gradient_tolerance = 1e-8;
  // Optional IRLS starting point; zero when empty.
  Eigen::VectorXd start;
};

// Minimizes nll(D beta) + (ridge / 2) |beta|^2.
//   gaussian:  solves (D^T D + ridge I) beta = D^T y directly
//   bernoulli: Newton / IRLS with step halving
// Throws RankDeficientError for singular normal equations at ridge == 0 and
// ConvergenceError (carrying the last iterate) when IRLS runs out of steps.
Eigen::VectorXd fit_glm(const DesignMatrix& design, std::span<const double> y,
                        Family family, double ridge,
                        const GlmSolveOptions& options = {},
                        IrlsTrace* trace = nullptr);

// 1e-8 * trace(D^T D) / cols, the ridge applied to every alternating
// subproblem unless the caller overrides it.
double default_ridge(const DesignMatrix& design);

}  // namespace dkn

#endif  // DKN_GLM_HPP_
