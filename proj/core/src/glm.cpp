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

#include "dkn/glm.hpp"

#include <algorithm>
#include <cmath>

#include "dkn/errors.hpp"

namespace dkn {
namespace {

double clamp_eta(double eta) { return std::clamp(eta, -kEtaClamp, kEtaClamp); }

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": lengths " + std::to_string(a) +
                         " and " + std::to_string(b) + " differ");
  }
}

double penalized_objective(Family family, const DesignMatrix& design,
                           const Eigen::VectorXd& beta, std::span<const double> y,
                           double ridge) {
  const Eigen::VectorXd eta = design * beta;
  return nll(family, std::span<const double>(eta.data(), eta.size()), y) +
         0.5 * ridge * beta.squaredNorm();
}

Eigen::VectorXd solve_gaussian(const DesignMatrix& design, std::span<const double> y,
                               double ridge) {
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), y.size());
  Eigen::MatrixXd gram = design.transpose() * design;
  gram.diagonal().array() += ridge;
  const Eigen::VectorXd rhs = design.transpose() * yv;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const auto d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || dmax == 0.0 ||
      d.minCoeff() <= 1e-12 * dmax) {
    throw RankDeficientError(
        "normal equations are singular (" + std::to_string(design.rows()) +
        " rows, " + std::to_string(design.cols()) +
        " columns); retry with a positive ridge");
  }
  return ldlt.solve(rhs);
}

}  // namespace

Family parse_family(std::string_view name) {
  if (name == "gaussian") return Family::kGaussian;
  if (name == "bernoulli") return Family::kBernoulli;
  throw DomainError("unknown family '" + std::string(name) +
                    "' (expected gaussian or bernoulli)");
}

std::string_view family_name(Family family) {
  return family == Family::kGaussian ? "gaussian" : "bernoulli";
}

double cumulant(Family family, double eta) {
  if (family == Family::kGaussian) return 0.5 * eta * eta;
  // log(1 + e^eta) without overflow.
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double mean_response(Family family, double eta) {
  if (family == Family::kGaussian) return eta;
  return 1.0 / (1.0 + std::exp(-clamp_eta(eta)));
}

double variance_response(Family family, double eta) {
  if (family == Family::kGaussian) return 1.0;
  const double mu = mean_response(family, eta);
  return mu * (1.0 - mu);
}

double link(Family family, double mu) {
  if (family == Family::kGaussian) return mu;
  if (mu <= 0.0 || mu >= 1.0) throw DomainError("logit link needs mu in (0, 1)");
  return std::log(mu / (1.0 - mu));
}

void check_responses(Family family, std::span<const double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) {
      throw DomainError("response " + std::to_string(i + 1) + " is not finite");
    }
    if (family == Family::kBernoulli && y[i] != 0.0 && y[i] != 1.0) {
      throw DomainError("bernoulli response " + std::to_string(i + 1) +
                        " is not 0 or 1");
    }
  }
}

double nll(Family family, std::span<const double> eta, std::span<const double> y) {
  check_lengths(eta.size(), y.size(), "nll");
  check_responses(family, y);
  double s = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    s += cumulant(family, eta[i]) - y[i] * eta[i];
  }
  return s;
}

Eigen::VectorXd nll_grad(Family family, const DesignMatrix& design,
                         const Eigen::VectorXd& beta, std::span<const double> y) {
  if (design.cols() != beta.size()) {
    throw DimensionError("nll_grad: design has " + std::to_string(design.cols()) +
                         " columns, beta has " + std::to_string(beta.size()));
  }
  check_lengths(static_cast<std::size_t>(design.rows()), y.size(), "nll_grad");
  const Eigen::VectorXd eta = design * beta;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    resid[i] = mean_response(family, eta[i]) - y[i];
  }
  return design.transpose() * resid;
}

double default_ridge(const DesignMatrix& design) {
  if (design.cols() == 0) return 0.0;
  return 1e-8 * design.squaredNorm() / static_cast<double>(design.cols());
}

Eigen::VectorXd fit_glm(const DesignMatrix& design, std::span<const double> y,
                        Family family, double ridge,
                        const GlmSolveOptions& options, IrlsTrace* trace) {
  if (design.rows() < 1 || design.cols() < 1) {
    throw DimensionError("fit_glm: empty design");
  }
  check_lengths(static_cast<std::size_t>(design.rows()), y.size(), "fit_glm");
  if (!(ridge >= 0.0)) throw DomainError("fit_glm: ridge must be nonnegative");
  check_responses(family, y);

  if (family == Family::kGaussian) {
    Eigen::VectorXd beta = solve_gaussian(design, y, ridge);
    if (trace) {
      trace->objective = {penalized_objective(family, design, beta, y, ridge)};
      trace->iterations = 1;
    }
    return beta;
  }

  const Eigen::Index m = design.cols();
  Eigen::VectorXd beta = options.start.size() == m ? options.start
                                                   : Eigen::VectorXd::Zero(m);
  double obj = penalized_objective(family, design, beta, y, ridge);
  if (trace) trace->objective = {obj};

  for (int it = 0; it < options.max_iterations; ++it) {
    const Eigen::VectorXd eta = design * beta;
    Eigen::VectorXd w(eta.size()), resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      w[i] = variance_response(family, eta[i]);
      resid[i] = mean_response(family, eta[i]) - y[i];
    }
    const Eigen::VectorXd grad = design.transpose() * resid + ridge * beta;
    if (grad.cwiseAbs().maxCoeff() <=
        options.gradient_tolerance * (1.0 + std::abs(obj))) {
      if (trace) trace->iterations = it;
      return beta;
    }
    Eigen::MatrixXd hess = design.transpose() * w.asDiagonal() * design;
    hess.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    const auto d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || dmax == 0.0 || d.minCoeff() <= 1e-14 * dmax) {
      throw RankDeficientError("IRLS Hessian is singular; retry with a positive ridge");
    }
    const Eigen::VectorXd step = ldlt.solve(grad);

    // Step halving until the penalized objective does not increase.
    double scale = 1.0;
    Eigen::VectorXd next = beta - step;
    double next_obj = penalized_objective(family, design, next, y, ridge);
    for (int h = 0; h < 40 && !(next_obj <= obj); ++h) {
      scale *= 0.5;
      next = beta - scale * step;
      next_obj = penalized_objective(family, design, next, y, ridge);
    }
    if (!(next_obj <= obj)) {
      // No descent along the Newton direction: the iterate is stationary to
      // working precision.
      if (trace) trace->iterations = it;
      return beta;
    }
    beta = std::move(next);
    obj = next_obj;
    if (trace) trace->objective.push_back(obj);
  }
  if (trace) trace->iterations = options.max_iterations;
  throw ConvergenceError(
      "IRLS did not converge in " + std::to_string(options.max_iterations) +
          " iterations",
      std::vector<double>(beta.data(), beta.data() + beta.size()));
}

}  // namespace dkn
