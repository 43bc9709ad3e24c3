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

#include "dkn/fit.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

#include <Eigen/SVD>

#include "dkn/errors.hpp"
#include "dkn/kron.hpp"
#include "dkn/rng.hpp"

namespace dkn {
namespace {

constexpr double kCollapseNorm = 1e-12;

Tensor ones(std::size_t order) { return Tensor::filled(Shape(order, 1), 1.0); }

Tensor column_tensor(const Eigen::MatrixXd& m, Eigen::Index col, const Shape& dims) {
  std::vector<double> data(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) data[static_cast<std::size_t>(i)] = m(i, col);
  return unvec(std::move(data), dims);
}

void check_inputs(std::span<const Tensor> images, std::span<const double> y,
                  const DknStructure& structure) {
  structure.validate();
  if (images.size() != y.size()) {
    throw DimensionError(std::to_string(images.size()) + " images but " +
                         std::to_string(y.size()) + " responses");
  }
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].dims() != structure.image_dims) {
      throw DimensionError("image " + std::to_string(i + 1) + " has shape " +
                           shape_string(images[i].dims()) + ", structure expects " +
                           shape_string(structure.image_dims));
    }
  }
}

double safe_dist(const Tensor& a, const Tensor& b) {
  if (fro_norm(a) == 0.0 || fro_norm(b) == 0.0) return 1.0;
  return dist(a, b);
}

double objective(Family family, std::span<const double> eta, std::span<const double> y) {
  if (family == Family::kGaussian) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - eta[i]) * (y[i] - eta[i]);
    return 0.5 * s;
  }
  return nll(family, eta, y);
}

// Rethrows a solver failure with the sweep and layer prepended.
[[noreturn]] void rethrow_with_context(const std::string& where) {
  try {
    throw;
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(where + ": " + e.what(), e.last_iterate());
  } catch (const RankDeficientError& e) {
    throw RankDeficientError(where + ": " + e.what());
  } catch (const DegenerateDataError& e) {
    throw DegenerateDataError(where + ": " + e.what());
  } catch (const SolverError& e) {
    throw SolverError(where + ": " + e.what());
  }
}

}  // namespace

std::vector<Tensor> SpectralInit::coarse_start(const DknStructure& structure,
                                               std::size_t layer) const {
  if (layer < 2 || layer > structure.depth() || layer - 2 >= levels.size()) {
    throw DimensionError("spectral start requested for layer " + std::to_string(layer));
  }
  const Level& level = levels[layer - 2];
  if (static_cast<Eigen::Index>(structure.rank) > level.left.cols()) {
    throw DimensionError("rank " + std::to_string(structure.rank) + " exceeds the " +
                         std::to_string(level.left.cols()) +
                         " singular vectors available at layer " + std::to_string(layer));
  }
  const Shape dims = structure.coarse_dims(layer);
  std::vector<Tensor> out;
  for (std::size_t r = 0; r < structure.rank; ++r) {
    out.push_back(column_tensor(level.left, static_cast<Eigen::Index>(r), dims));
  }
  return out;
}

SpectralInit init_spectral(std::span<const Tensor> images, std::span<const double> y,
                           const DknStructure& structure) {
  check_inputs(images, y, structure);
  if (images.empty()) throw DimensionError("init_spectral: no samples");
  // R is linear, so sum_i y_i R(X_i) = R(sum_i y_i X_i).
  Tensor aggregate(structure.image_dims);
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (y[i] != 0.0) aggregate += y[i] * images[i];
  }
  if (fro_norm(aggregate) == 0.0) {
    throw DegenerateDataError(
        "init_spectral: sum_i y_i X_i is zero, the spectral start is undefined; "
        "check that y is not constant zero");
  }
  SpectralInit init;
  for (std::size_t layer = 2; layer <= structure.depth(); ++layer) {
    const Tensor r = reshape_R(aggregate, structure.coarse_dims(layer));
    const auto rows = static_cast<Eigen::Index>(r.dims()[0]);
    const auto cols = static_cast<Eigen::Index>(r.dims()[1]);
    const Eigen::Map<const Eigen::MatrixXd> m(r.data().data(), rows, cols);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SpectralInit::Level level{svd.matrixU(), svd.matrixV(), svd.singularValues()};
    for (Eigen::Index k = 0; k < level.left.cols(); ++k) {
      Eigen::Index arg = 0;
      level.left.col(k).cwiseAbs().maxCoeff(&arg);
      if (level.left(arg, k) < 0.0) {
        level.left.col(k) *= -1.0;
        level.right.col(k) *= -1.0;
      }
    }
    init.levels.push_back(std::move(level));
  }
  return init;
}

FitState FitState::from_model(const DknModel& model) {
  model.validate();
  FitState s;
  s.model = model;
  const std::size_t depth = model.structure.depth();
  s.coarse.resize(depth + 2);
  s.fine.resize(depth + 1);
  for (std::size_t l = 1; l <= depth + 1; ++l) {
    s.coarse[l] = partial_products(model, l, Side::kLeft);
  }
  for (std::size_t l = 0; l <= depth; ++l) {
    s.fine[l] = partial_products(model, l, Side::kRight);
  }
  for (std::size_t l = 1; l <= depth; ++l) s.index.emplace_back(model.structure, l);
  s.next_left.assign(depth + 2, model.structure.rank);
  s.next_right.assign(depth + 2, model.structure.rank);
  return s;
}

FitState FitState::from_init(const DknStructure& structure, SpectralInit init,
                             std::uint64_t seed) {
  structure.validate();
  FitState s;
  s.model = DknModel::zeros(structure);
  const std::size_t depth = structure.depth();
  const std::size_t order = structure.image_dims.size();
  s.coarse.resize(depth + 2);
  s.fine.resize(depth + 1);
  s.coarse[depth + 1].assign(structure.rank, ones(order));
  for (std::size_t l = 2; l <= depth; ++l) s.coarse[l] = init.coarse_start(structure, l);
  s.coarse[1].assign(structure.rank, Tensor(structure.image_dims));
  s.fine[0].assign(structure.rank, ones(order));
  for (std::size_t l = 1; l <= depth; ++l) {
    s.fine[l].assign(structure.rank, Tensor(structure.fine_dims(l)));
    s.index.emplace_back(structure, l);
  }
  s.init = std::move(init);
  s.next_left.assign(depth + 2, structure.rank);
  s.next_right.assign(depth + 2, structure.rank);
  s.seed = seed;
  return s;
}

void FitState::recompose_coarse() {
  const std::size_t depth = model.structure.depth();
  for (std::size_t l = depth; l >= 1; --l) {
    for (std::size_t r = 0; r < model.structure.rank; ++r) {
      coarse[l][r] = tkp(coarse[l + 1][r], model.factors[l - 1][r]);
    }
  }
}

namespace {

// Replaces a collapsed partial product with the next unused singular vector
// of the matching level, or a seeded random direction once those run out.
Tensor reseed(FitState& s, const Shape& dims, std::size_t level, bool left) {
  ++s.reseeds;
  if (level >= 2 && level - 2 < s.init.levels.size()) {
    const auto& lv = s.init.levels[level - 2];
    const Eigen::MatrixXd& basis = left ? lv.left : lv.right;
    std::size_t& cursor = left ? s.next_left[level] : s.next_right[level];
    if (static_cast<Eigen::Index>(cursor) < basis.cols() &&
        static_cast<std::size_t>(basis.rows()) == shape_size(dims)) {
      return column_tensor(basis, static_cast<Eigen::Index>(cursor++), dims);
    }
  }
  Rng rng = Rng(s.seed).split(0x5245534545440000ull + s.reseed_draws++);
  return unvec(rng.unit_vector(shape_size(dims)), dims);
}

}  // namespace

void sweep_update(FitState& s, std::span<const Tensor> images,
                  std::span<const double> y, Family family, std::size_t layer,
                  const FitOptions& options) {
  const DknStructure& st = s.model.structure;
  const std::size_t depth = st.depth();
  if (layer < 1 || layer > depth) {
    throw DimensionError("sweep_update: layer " + std::to_string(layer) +
                         " outside 1.." + std::to_string(depth));
  }
  for (std::size_t r = 0; r < st.rank; ++r) {
    if (fro_norm(s.coarse[layer + 1][r]) < kCollapseNorm) {
      s.coarse[layer + 1][r] = reseed(s, st.coarse_dims(layer + 1), layer + 1, true);
    }
    if (fro_norm(s.fine[layer - 1][r]) < kCollapseNorm) {
      s.fine[layer - 1][r] = reseed(s, st.fine_dims(layer - 1), layer, false);
    }
  }
  const DesignMatrix design =
      build_design(images, s.coarse[layer + 1], s.fine[layer - 1], s.index[layer - 1]);
  const std::size_t m = st.layer_size(layer);

  GlmSolveOptions glm;
  if (family != Family::kGaussian) {
    glm.start.resize(static_cast<Eigen::Index>(m * st.rank));
    for (std::size_t r = 0; r < st.rank; ++r) {
      const Tensor& f = s.model.factors[layer - 1][r];
      for (std::size_t k = 0; k < m; ++k) glm.start[static_cast<Eigen::Index>(r * m + k)] = f[k];
    }
  }
  double ridge = options.ridge ? *options.ridge : default_ridge(design);
  if (ridge == 0.0 && !options.ridge) ridge = 1.0;
  auto solve = [&](double lambda) {
    try {
      return fit_glm(design, y, family, lambda, glm);
    } catch (const ConvergenceError& e) {
      // Near-separable logistic subproblems creep toward infinity; every
      // IRLS step descended, so the last iterate still lowers the objective.
      ++s.glm_nonconverged;
      const auto& last = e.last_iterate();
      return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
          last.data(), static_cast<Eigen::Index>(last.size())));
    }
  };
  Eigen::VectorXd beta;
  try {
    beta = solve(ridge);
  } catch (const RankDeficientError&) {
    if (!options.ridge || *options.ridge != 0.0) throw;
    ridge = default_ridge(design);
    beta = solve(ridge > 0.0 ? ridge : 1.0);
  }

  for (std::size_t r = 0; r < st.rank; ++r) {
    std::vector<double> seg(beta.data() + r * m, beta.data() + (r + 1) * m);
    s.model.factors[layer - 1][r] = unvec(std::move(seg), st.factor_dims[layer - 1]);
    s.fine[layer][r] = tkp(s.model.factors[layer - 1][r], s.fine[layer - 1][r]);
  }
  const Eigen::VectorXd eta = design * beta;
  s.eta.assign(eta.data(), eta.data() + eta.size());
}

FitResult fit(std::span<const Tensor> images, std::span<const double> y,
              const DknStructure& structure, Family family, const FitOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  check_inputs(images, y, structure);
  if (images.size() < 2) throw DimensionError("fit needs at least 2 samples");
  check_responses(family, y);
  if (options.max_sweeps < 1) throw DomainError("max_sweeps must be at least 1");
  if (!(options.tolerance > 0.0)) throw DomainError("tolerance must be positive");
  if (options.ridge && !(*options.ridge >= 0.0)) throw DomainError("ridge must be nonnegative");
  if (options.trace_truth && options.trace_truth->dims() != structure.image_dims) {
    throw DimensionError("trace_truth shape " + shape_string(options.trace_truth->dims()) +
                         " does not match images " + shape_string(structure.image_dims));
  }

  std::vector<double> yw(y.begin(), y.end());
  double y_mean = 0.0;
  Tensor x_mean(structure.image_dims);
  std::vector<Tensor> centered;
  std::span<const Tensor> x = images;
  if (family == Family::kGaussian && options.center_response) {
    y_mean = std::accumulate(yw.begin(), yw.end(), 0.0) / static_cast<double>(yw.size());
    for (auto& v : yw) v -= y_mean;
    for (const auto& img : images) x_mean += img;
    x_mean *= 1.0 / static_cast<double>(images.size());
    centered.reserve(images.size());
    for (const auto& img : images) centered.push_back(img - x_mean);
    x = centered;
  }

  FitState s = FitState::from_init(structure, init_spectral(x, yw, structure),
                                   options.seed);
  const std::size_t depth = structure.depth();
  FitReport report;
  report.rank = structure.rank;

  // Truth partial products for the per-layer trace (rank-1 truth only).
  std::optional<FitState> truth;
  if (options.trace_factors) {
    const DknModel& tf = *options.trace_factors;
    if (tf.structure.factor_dims != structure.factor_dims ||
        tf.structure.image_dims != structure.image_dims) {
      throw DimensionError("trace_factors structure does not match the fit");
    }
    truth = FitState::from_model(tf);
    for (std::size_t l = 2; l <= depth; ++l) {
      report.initial_coarse_dist.push_back(safe_dist(s.coarse[l][0], truth->coarse[l][0]));
    }
  }

  double floor = 0.0;
  for (double v : yw) floor += v * v;
  floor = 1e-24 * std::max(1.0, floor);

  for (int t = 1; t <= options.max_sweeps; ++t) {
    for (std::size_t l = 1; l <= depth; ++l) {
      double coarse_d = 0.0;
      if (truth && l < depth) coarse_d = safe_dist(s.coarse[l + 1][0], truth->coarse[l + 1][0]);
      try {
        sweep_update(s, x, yw, family, l, options);
      } catch (const SolverError&) {
        rethrow_with_context("sweep " + std::to_string(t) + ", layer " + std::to_string(l));
      }
      if (truth) {
        LayerTraceEntry e;
        e.sweep = t;
        e.layer = l;
        e.factor_dist = safe_dist(s.model.factors[l - 1][0], truth->model.factors[l - 1][0]);
        e.fine_dist = l > 1 ? safe_dist(s.fine[l - 1][0], truth->fine[l - 1][0]) : 0.0;
        e.coarse_dist = coarse_d;
        report.layer_trace.push_back(e);
      }
    }
    s.recompose_coarse();
    const double obj = objective(family, s.eta, yw);
    report.objective.push_back(obj);
    report.sweeps = t;
    if (options.trace_truth) {
      Tensor c(structure.image_dims);
      for (const auto& term : s.coarse[1]) c += term;
      report.distance_trace.push_back(safe_dist(c, *options.trace_truth));
    }
    if (t >= 2) {
      const double prev = report.objective[report.objective.size() - 2];
      report.relative_change = prev != 0.0 ? std::abs(prev - obj) / std::abs(prev) : 0.0;
      if (report.relative_change < options.tolerance) {
        report.converged = true;
        break;
      }
    }
    if (family == Family::kGaussian && obj <= floor) {
      report.converged = true;
      break;
    }
  }

  FitResult result{normalize(std::move(s.model)), std::move(report)};
  if (family == Family::kGaussian && options.center_response) {
    result.model.intercept = y_mean - inner(x_mean, result.model.coefficient());
  }
  result.report.reseeds = s.reseeds;
  result.report.glm_nonconverged = s.glm_nonconverged;
  result.report.bic = bic(result.model, images, y, family);
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

RankScan scan_rank(std::span<const Tensor> images, std::span<const double> y,
                   const DknStructure& base, std::span<const std::size_t> ranks,
                   Family family, const FitOptions& options, unsigned threads) {
  if (ranks.empty()) throw DomainError("scan_rank: no candidate ranks");
  std::vector<std::optional<FitResult>> slots(ranks.size());
  std::vector<std::exception_ptr> errors(ranks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < ranks.size();) {
      try {
        slots[k] = fit(images, y, base.with_rank(ranks[k]), family, options);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(ranks.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  RankScan scan;
  std::size_t best = 0;
  for (std::size_t k = 0; k < ranks.size(); ++k) {
    scan.fits.push_back(std::move(*slots[k]));
    const double b = scan.fits[k].report.bic;
    const double bb = scan.fits[best].report.bic;
    if (b < bb || (b == bb && ranks[k] < ranks[best])) best = k;
  }
  scan.best_rank = ranks[best];
  return scan;
}

}  // namespace dkn
