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

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "dkn/errors.hpp"
#include "dkn/glm.hpp"

namespace dkn {
namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& gen, int rows, int cols) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = normal(gen);
  return m;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

TEST(Glm, FamilyFunctions) {
  EXPECT_EQ(cumulant(Family::kGaussian, 3.0), 4.5);
  EXPECT_EQ(mean_response(Family::kGaussian, -2.0), -2.0);
  EXPECT_EQ(variance_response(Family::kGaussian, 7.0), 1.0);
  EXPECT_NEAR(cumulant(Family::kBernoulli, 0.0), std::log(2.0), 1e-15);
  EXPECT_EQ(mean_response(Family::kBernoulli, 0.0), 0.5);
  EXPECT_EQ(variance_response(Family::kBernoulli, 0.0), 0.25);
  EXPECT_NEAR(link(Family::kBernoulli, mean_response(Family::kBernoulli, 1.3)), 1.3, 1e-12);
  EXPECT_TRUE(std::isfinite(cumulant(Family::kBernoulli, 800.0)));
  EXPECT_EQ(parse_family("bernoulli"), Family::kBernoulli);
  EXPECT_THROW(parse_family("poisson"), ValidationError);
}

TEST(Glm, NllExamples) {
  const std::vector<double> y{1.0, -2.0, 0.5};
  EXPECT_NEAR(nll(Family::kGaussian, y, y), -0.5 * (1 + 4 + 0.25), 1e-15);
  const std::vector<double> zeros(4, 0.0), labels{0, 1, 1, 0};
  EXPECT_NEAR(nll(Family::kBernoulli, zeros, labels), 4 * std::log(2.0), 1e-14);
  EXPECT_EQ(nll(Family::kGaussian, std::vector<double>{1, 2}, std::vector<double>{0, 0}), 2.5);
  EXPECT_THROW(nll(Family::kGaussian, zeros, y), DimensionError);
  EXPECT_THROW(nll(Family::kBernoulli, std::vector<double>{0.0}, std::vector<double>{0.5}),
               DomainError);
}

TEST(Glm, GaussianNllIsLeastSquaresUpToConstant) {
  std::mt19937_64 gen(30);
  std::normal_distribution<double> normal;
  std::vector<double> eta(10), y(10);
  double ls = 0.0, yy = 0.0;
  for (int i = 0; i < 10; ++i) {
    eta[i] = normal(gen);
    y[i] = normal(gen);
    ls += 0.5 * (y[i] - eta[i]) * (y[i] - eta[i]);
    yy += 0.5 * y[i] * y[i];
  }
  EXPECT_NEAR(nll(Family::kGaussian, eta, y), ls - yy, 1e-12);
}

TEST(Glm, Convexity) {
  std::mt19937_64 gen(31);
  std::bernoulli_distribution coin;
  for (Family family : {Family::kGaussian, Family::kBernoulli}) {
    for (int rep = 0; rep < 50; ++rep) {
      const Eigen::MatrixXd d = random_matrix(gen, 12, 3);
      std::vector<double> y(12);
      for (auto& v : y) v = coin(gen) ? 1.0 : 0.0;
      const Eigen::VectorXd b1 = random_matrix(gen, 3, 1), b2 = random_matrix(gen, 3, 1);
      auto f = [&](const Eigen::VectorXd& b) { return nll(family, to_vector(d * b), y); };
      EXPECT_LE(f(0.5 * (b1 + b2)), 0.5 * (f(b1) + f(b2)) + 1e-10);
    }
  }
}

TEST(Glm, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(32);
  std::bernoulli_distribution coin;
  for (Family family : {Family::kGaussian, Family::kBernoulli}) {
    for (int rep = 0; rep < 20; ++rep) {
      const Eigen::MatrixXd d = random_matrix(gen, 15, 4);
      std::vector<double> y(15);
      for (auto& v : y) v = coin(gen) ? 1.0 : 0.0;
      const Eigen::VectorXd beta = 0.5 * random_matrix(gen, 4, 1);
      const Eigen::VectorXd g = nll_grad(family, d, beta, y);
      Eigen::VectorXd fd(4);
      const double h = 1e-5;
      for (int j = 0; j < 4; ++j) {
        Eigen::VectorXd up = beta, dn = beta;
        up[j] += h;
        dn[j] -= h;
        fd[j] = (nll(family, to_vector(d * up), y) - nll(family, to_vector(d * dn), y)) / (2 * h);
      }
      EXPECT_LE((g - fd).norm(), 1e-5 * std::max(1.0, fd.norm()));
    }
  }
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  const std::vector<double> y{1.0, 2.0, 3.0};
  EXPECT_LE(nll_grad(Family::kGaussian, eye, Eigen::Vector3d(1, 2, 3), y).norm(), 1e-15);
}

TEST(Glm, GaussianSolves) {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);
  const std::vector<double> y{1.0, -2.0, 3.0, 0.5};
  const Eigen::VectorXd beta = fit_glm(eye, y, Family::kGaussian, 0.0);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(beta[i], y[i], 1e-14);

  std::mt19937_64 gen(33);
  const Eigen::MatrixXd d = random_matrix(gen, 30, 5);
  std::vector<double> yr(30);
  std::normal_distribution<double> normal;
  for (auto& v : yr) v = normal(gen);
  const Eigen::Map<const Eigen::VectorXd> yv(yr.data(), 30);
  const Eigen::VectorXd big = fit_glm(d, yr, Family::kGaussian, 1e8);
  EXPECT_LE(big.norm(), 1e-6 * (d.transpose() * yv).norm());

  // Independent route: QR least squares on the augmented system.
  const double ridge = 0.7;
  Eigen::MatrixXd aug(35, 5);
  aug << d, std::sqrt(ridge) * Eigen::MatrixXd::Identity(5, 5);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(35);
  rhs.head(30) = yv;
  const Eigen::VectorXd oracle = aug.colPivHouseholderQr().solve(rhs);
  EXPECT_LE((fit_glm(d, yr, Family::kGaussian, ridge) - oracle).norm(), 1e-8);
}

TEST(Glm, RankDeficientWithoutRidge) {
  Eigen::MatrixXd d(4, 2);
  d << 1, 2, 2, 4, 3, 6, 4, 8;
  const std::vector<double> y{1, 2, 3, 4};
  EXPECT_THROW(fit_glm(d, y, Family::kGaussian, 0.0), RankDeficientError);
  EXPECT_NO_THROW(fit_glm(d, y, Family::kGaussian, default_ridge(d)));
  EXPECT_THROW(fit_glm(d, y, Family::kGaussian, -1.0), DomainError);
}

TEST(Glm, BernoulliSeparableMatchesGridSearch) {
  Eigen::MatrixXd d(4, 1);
  d << -2, -1, 1, 2;
  const std::vector<double> y{0, 0, 1, 1};
  const double ridge = 1e-4;
  IrlsTrace trace;
  const Eigen::VectorXd beta = fit_glm(d, y, Family::kBernoulli, ridge, {}, &trace);
  EXPECT_GT(beta[0], 0.0);
  auto penalized = [&](double b) {
    std::vector<double> eta{-2 * b, -b, b, 2 * b};
    return nll(Family::kBernoulli, eta, y) + 0.5 * ridge * b * b;
  };
  double best = -20.0, best_val = penalized(-20.0);
  for (int k = -20000; k <= 20000; ++k) {
    const double b = k * 1e-3;
    const double v = penalized(b);
    if (v < best_val) {
      best_val = v;
      best = b;
    }
  }
  EXPECT_NEAR(beta[0], best, 2e-3);
  EXPECT_LE(penalized(beta[0]), best_val + 1e-12);
  for (std::size_t k = 1; k < trace.objective.size(); ++k) {
    EXPECT_LE(trace.objective[k], trace.objective[k - 1] + 1e-12);
  }
}

TEST(Glm, IrlsMonotone) {
  std::mt19937_64 gen(34);
  std::bernoulli_distribution coin;
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd d = random_matrix(gen, 60, 6);
    std::vector<double> y(60);
    for (auto& v : y) v = coin(gen) ? 1.0 : 0.0;
    IrlsTrace trace;
    const Eigen::VectorXd beta = fit_glm(d, y, Family::kBernoulli, 1e-3, {}, &trace);
    ASSERT_FALSE(trace.objective.empty());
    for (std::size_t k = 1; k < trace.objective.size(); ++k) {
      EXPECT_LE(trace.objective[k], trace.objective[k - 1] + 1e-12);
    }
    Eigen::VectorXd g = nll_grad(Family::kBernoulli, d, beta, y) + 1e-3 * beta;
    EXPECT_LE(g.cwiseAbs().maxCoeff(), 1e-8 * (1.0 + std::abs(trace.objective.back())));
  }
}

TEST(Glm, ConvergenceErrorCarriesIterate) {
  std::mt19937_64 gen(35);
  const Eigen::MatrixXd d = random_matrix(gen, 40, 3);
  std::vector<double> y(40);
  std::bernoulli_distribution coin;
  for (auto& v : y) v = coin(gen) ? 1.0 : 0.0;
  GlmSolveOptions opts;
  opts.max_iterations = 1;
  opts.gradient_tolerance = 1e-300;
  try {
    fit_glm(d, y, Family::kBernoulli, 0.0, opts);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.last_iterate().size(), 3u);
  }
}

}  // namespace
}  // namespace dkn
