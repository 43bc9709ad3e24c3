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
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "dkn/errors.hpp"
#include "dkn/harness.hpp"

namespace dkn {
namespace {

constexpr std::size_t kFolds = 5;

}  // namespace

RidgeFit baseline_ridge(std::span<const Tensor> images, std::span<const double> y,
                        std::span<const double> lambda_grid, bool fit_intercept) {
  const std::size_t n = images.size();
  if (n < 2) throw DomainError("baseline_ridge needs at least 2 samples");
  if (y.size() != n) {
    throw DimensionError("baseline_ridge: " + std::to_string(n) + " images but " +
                         std::to_string(y.size()) + " responses");
  }
  const Shape& dims = images[0].dims();
  const auto p = static_cast<Eigen::Index>(images[0].size());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), p);
  for (std::size_t i = 0; i < n; ++i) {
    if (images[i].dims() != dims) throw DimensionError("baseline_ridge: mixed image shapes");
    const auto d = images[i].data();
    for (Eigen::Index j = 0; j < p; ++j) x(static_cast<Eigen::Index>(i), j) = d[j];
  }
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(n));
  const Eigen::MatrixXd gram = x * x.transpose();

  RidgeFit out;
  if (lambda_grid.empty()) {
    const double energy = gram.trace() / static_cast<double>(n);
    const double base = energy > 0.0 ? energy : 1.0;
    for (int k = -6; k <= 6; ++k) out.lambda_grid.push_back(base * std::pow(10.0, 0.5 * k));
  } else {
    for (double l : lambda_grid) {
      if (!(l > 0.0)) throw DomainError("ridge lambda must be positive");
      out.lambda_grid.push_back(l);
    }
  }

  // Centered kernel between samples a and b using the mean of the rows in
  // `train`: <x_a - m, x_b - m> = G_ab - g_a - g_b + gbar.
  auto centered = [&](const std::vector<Eigen::Index>& rows,
                      const std::vector<Eigen::Index>& cols,
                      const std::vector<Eigen::Index>& train) {
    Eigen::MatrixXd k(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols.size()));
    for (std::size_t a = 0; a < rows.size(); ++a) {
      for (std::size_t b = 0; b < cols.size(); ++b) k(a, b) = gram(rows[a], cols[b]);
    }
    if (!fit_intercept) return k;
    const double m = static_cast<double>(train.size());
    auto row_mean = [&](Eigen::Index a) {
      double s = 0.0;
      for (auto j : train) s += gram(a, j);
      return s / m;
    };
    double gbar = 0.0;
    for (auto j : train) gbar += row_mean(j);
    gbar /= m;
    std::vector<double> gr(rows.size()), gc(cols.size());
    for (std::size_t a = 0; a < rows.size(); ++a) gr[a] = row_mean(rows[a]);
    for (std::size_t b = 0; b < cols.size(); ++b) gc[b] = row_mean(cols[b]);
    for (std::size_t a = 0; a < rows.size(); ++a) {
      for (std::size_t b = 0; b < cols.size(); ++b) k(a, b) += gbar - gr[a] - gc[b];
    }
    return k;
  };

  const std::size_t folds = std::min(kFolds, n);
  out.cv_error.assign(out.lambda_grid.size(), 0.0);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t i = 0; i < n; ++i) {
      (i % folds == f ? test : train).push_back(static_cast<Eigen::Index>(i));
    }
    double ybar = 0.0;
    if (fit_intercept) {
      for (auto i : train) ybar += yv[i];
      ybar /= static_cast<double>(train.size());
    }
    Eigen::VectorXd yt(static_cast<Eigen::Index>(train.size()));
    for (std::size_t a = 0; a < train.size(); ++a) yt[a] = yv[train[a]] - ybar;
    const Eigen::MatrixXd ktt = centered(train, train, train);
    const Eigen::MatrixXd kst = centered(test, train, train);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ktt);
    const Eigen::VectorXd proj = eig.eigenvectors().transpose() * yt;
    const Eigen::MatrixXd kv = kst * eig.eigenvectors();
    for (std::size_t g = 0; g < out.lambda_grid.size(); ++g) {
      const Eigen::VectorXd w =
          proj.cwiseQuotient((eig.eigenvalues().array() + out.lambda_grid[g]).matrix());
      const Eigen::VectorXd pred = kv * w;
      for (std::size_t a = 0; a < test.size(); ++a) {
        const double r = yv[test[a]] - ybar - pred[static_cast<Eigen::Index>(a)];
        out.cv_error[g] += r * r;
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t g = 0; g < out.cv_error.size(); ++g) {
    out.cv_error[g] /= static_cast<double>(n);
    if (out.cv_error[g] < out.cv_error[best]) best = g;
  }
  out.lambda = out.lambda_grid[best];

  std::vector<Eigen::Index> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<Eigen::Index>(i);
  const Eigen::MatrixXd kc = centered(all, all, all);
  const double ybar = fit_intercept ? yv.mean() : 0.0;
  const Eigen::VectorXd yc = yv.array() - ybar;
  Eigen::MatrixXd reg = kc;
  reg.diagonal().array() += out.lambda;
  const Eigen::VectorXd alpha = reg.ldlt().solve(yc);
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(p);
  if (fit_intercept) mean = x.colwise().mean();
  const Eigen::VectorXd beta = (x.rowwise() - mean).transpose() * alpha;
  out.coefficient = unvec(std::vector<double>(beta.data(), beta.data() + beta.size()), dims);
  out.intercept = ybar - mean.dot(beta);
  return out;
}

}  // namespace dkn
