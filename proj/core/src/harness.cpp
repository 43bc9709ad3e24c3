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

#include "dkn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "dkn/errors.hpp"
#include "dkn/rng.hpp"

namespace dkn {

SignalKind parse_signal_kind(const std::string& name) {
  if (name == "one_circle") return SignalKind::kOneCircle;
  if (name == "two_circles") return SignalKind::kTwoCircles;
  if (name == "custom_mask") return SignalKind::kCustomMask;
  throw ValidationError("unknown signal kind '" + name +
                        "' (expected one_circle, two_circles or custom_mask)");
}

std::string signal_kind_name(SignalKind kind) {
  switch (kind) {
    case SignalKind::kOneCircle: return "one_circle";
    case SignalKind::kTwoCircles: return "two_circles";
    case SignalKind::kCustomMask: return "custom_mask";
  }
  return "?";
}

Sparsity parse_sparsity(const std::string& name) {
  if (name == "sparse") return Sparsity::kSparse;
  if (name == "quasi_sparse") return Sparsity::kQuasiSparse;
  throw ValidationError("unknown sparsity '" + name + "' (expected sparse or quasi_sparse)");
}

std::string sparsity_name(Sparsity sparsity) {
  return sparsity == Sparsity::kSparse ? "sparse" : "quasi_sparse";
}

void SignalSpec::validate() const {
  if (image_dims.empty() || shape_size(image_dims) == 0) {
    throw DimensionError("signal image_dims must be nonempty");
  }
  if (kind == SignalKind::kCustomMask) {
    if (!mask) throw ValidationError("custom_mask signal needs a mask");
    if (mask->dims() != image_dims) {
      throw DimensionError("mask shape " + shape_string(mask->dims()) +
                           " does not match image " + shape_string(image_dims));
    }
    return;
  }
  const std::size_t want = kind == SignalKind::kOneCircle ? 1 : 2;
  if (circles.size() != want) {
    throw ValidationError(signal_kind_name(kind) + " needs " + std::to_string(want) +
                          " circle(s), got " + std::to_string(circles.size()));
  }
  for (std::size_t c = 0; c < circles.size(); ++c) {
    const Circle& circle = circles[c];
    if (circle.center.size() != image_dims.size()) {
      throw DimensionError("circle " + std::to_string(c + 1) + " center has " +
                           std::to_string(circle.center.size()) + " coordinates, image has " +
                           std::to_string(image_dims.size()) + " modes");
    }
    if (!(circle.radius >= 0.0)) throw DomainError("circle radius must be nonnegative");
    for (std::size_t m = 0; m < image_dims.size(); ++m) {
      const double lo = circle.center[m] - circle.radius;
      const double hi = circle.center[m] + circle.radius;
      if (lo < 1.0 || hi > static_cast<double>(image_dims[m])) {
        throw DomainError("circle " + std::to_string(c + 1) + " leaves the image along mode " +
                          std::to_string(m + 1) + " (extent " +
                          std::to_string(image_dims[m]) + ")");
      }
    }
  }
}

Tensor signal_region(const SignalSpec& spec) {
  spec.validate();
  Tensor out(spec.image_dims);
  if (spec.kind == SignalKind::kCustomMask) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = (*spec.mask)[k] != 0.0 ? 1.0 : 0.0;
    return out;
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto idx = multi_index(spec.image_dims, k);
    for (const Circle& c : spec.circles) {
      double d2 = 0.0;
      for (std::size_t m = 0; m < idx.size(); ++m) {
        const double d = static_cast<double>(idx[m] + 1) - c.center[m];
        d2 += d * d;
      }
      if (d2 <= c.radius * c.radius) {
        out[k] = 1.0;
        break;
      }
    }
  }
  return out;
}

Tensor gen_signal(const SignalSpec& spec, std::uint64_t seed) {
  Tensor c = signal_region(spec);
  if (spec.sparsity == Sparsity::kSparse) return c;
  Rng rng(seed);
  const double outside_sd = std::sqrt(0.1);
  for (std::size_t k = 0; k < c.size(); ++k) {
    c[k] = c[k] != 0.0 ? rng.normal(1.0, 1.0) : rng.normal(0.1, outside_sd);
  }
  return c;
}

std::vector<Tensor> gen_images(std::size_t n, const Shape& dims, std::uint64_t seed) {
  if (n < 1) throw DomainError("gen_images: n must be at least 1");
  Rng rng(seed);
  std::vector<Tensor> out;
  out.reserve(n);
  const std::size_t size = shape_size(dims);
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(dims, rng.normals(size));
  return out;
}

std::vector<double> gen_responses(std::span<const Tensor> images, const Tensor& c,
                                  Family family, double noise_sd, std::uint64_t seed) {
  if (!(noise_sd >= 0.0)) throw DomainError("noise_sd must be nonnegative");
  Rng rng(seed);
  std::vector<double> y(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].dims() != c.dims()) {
      throw DimensionError("image " + std::to_string(i + 1) + " has shape " +
                           shape_string(images[i].dims()) + ", coefficient " +
                           shape_string(c.dims()));
    }
    const double eta = inner(images[i], c);
    if (family == Family::kGaussian) {
      y[i] = noise_sd == 0.0 ? eta : eta + noise_sd * rng.normal();
    } else {
      y[i] = rng.bernoulli(mean_response(family, eta)) ? 1.0 : 0.0;
    }
  }
  return y;
}

double rmse_coeff(const Tensor& chat, const Tensor& c) {
  if (chat.dims() != c.dims()) {
    throw DimensionError("rmse_coeff: shapes " + shape_string(chat.dims()) + " and " +
                         shape_string(c.dims()) + " differ");
  }
  return fro_norm(chat - c) / std::sqrt(static_cast<double>(c.size()));
}

PredictionError rmse_pred(std::span<const double> predicted, std::span<const double> y,
                          Family family) {
  if (predicted.size() != y.size() || y.empty()) {
    throw DimensionError("rmse_pred: " + std::to_string(predicted.size()) +
                         " predictions for " + std::to_string(y.size()) + " responses");
  }
  PredictionError out;
  double s = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    s += (predicted[i] - y[i]) * (predicted[i] - y[i]);
    if ((predicted[i] >= 0.5) == (y[i] >= 0.5)) ++hits;
  }
  out.rmse = std::sqrt(s / static_cast<double>(y.size()));
  if (family == Family::kBernoulli) {
    out.accuracy = static_cast<double>(hits) / static_cast<double>(y.size());
  }
  return out;
}

PredictionError rmse_pred(const DknModel& model, std::span<const Tensor> images,
                          std::span<const double> y, Family family) {
  const auto p = predict(model, images, family);
  return rmse_pred(p, y, family);
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

void ExperimentConfig::validate() const {
  if (n_train < 2) throw DomainError("n_train must be at least 2");
  if (test_size() < 1) throw DomainError("n_test must be at least 1");
  if (repetitions < 1) throw DomainError("repetitions must be at least 1");
  if (ranks.empty()) throw DomainError("ranks must be nonempty");
  if (signal.image_dims != image_dims) {
    throw DimensionError("signal image_dims " + shape_string(signal.image_dims) +
                         " differ from image_dims " + shape_string(image_dims));
  }
  signal.validate();
  if (structure && structure->image_dims != image_dims) {
    throw DimensionError("structure image_dims do not match image_dims");
  }
}

RepetitionSeeds repetition_seeds(std::uint64_t master, std::size_t index) {
  const Rng rep = Rng(master).split(index);
  return {rep.key(),
          rep.split(1).key(),
          rep.split(2).key(),
          rep.split(3).key(),
          rep.split(4).key(),
          rep.split(5).key(),
          rep.split(6).key()};
}

namespace {

RepetitionResult run_repetition(const ExperimentConfig& cfg, std::size_t index) {
  const RepetitionSeeds seeds = repetition_seeds(cfg.seed, index);
  RepetitionResult row;
  row.index = index;
  row.seed = seeds.repetition;
  const Tensor c = gen_signal(cfg.signal, seeds.signal);
  const auto images = gen_images(cfg.n_train, cfg.image_dims, seeds.images);
  const auto y = gen_responses(images, c, cfg.family, cfg.noise_sd, seeds.responses);
  const auto test_images = gen_images(cfg.test_size(), cfg.image_dims, seeds.test_images);
  const auto test_y =
      gen_responses(test_images, c, cfg.family, cfg.noise_sd, seeds.test_responses);

  const DknStructure base = cfg.structure ? *cfg.structure : deepest_structure(cfg.image_dims, 1);
  FitOptions opts;
  opts.max_sweeps = cfg.max_sweeps;
  opts.tolerance = cfg.tolerance;
  opts.seed = seeds.fit;
  opts.center_response = cfg.center_response;
  const RankScan scan = scan_rank(images, y, base, cfg.ranks, cfg.family, opts);
  const FitResult* chosen = nullptr;
  for (std::size_t k = 0; k < cfg.ranks.size(); ++k) {
    if (cfg.ranks[k] == scan.best_rank) {
      chosen = &scan.fits[k];
      break;
    }
  }
  row.rank = scan.best_rank;
  row.sweeps = chosen->report.sweeps;
  row.converged = chosen->report.converged;
  row.rmse_coeff = rmse_coeff(chosen->model.coefficient(), c);
  const PredictionError pe = rmse_pred(chosen->model, test_images, test_y, cfg.family);
  row.rmse_pred = pe.rmse;
  row.accuracy = pe.accuracy;
  if (cfg.baseline) {
    const RidgeFit ridge = baseline_ridge(images, y);
    row.baseline_rmse_coeff = rmse_coeff(ridge.coefficient, c);
    std::vector<double> pred(test_images.size());
    for (std::size_t i = 0; i < test_images.size(); ++i) {
      double eta = inner(test_images[i], ridge.coefficient) + ridge.intercept;
      pred[i] = cfg.family == Family::kGaussian ? eta : std::clamp(eta, 0.0, 1.0);
    }
    row.baseline_rmse_pred = rmse_pred(pred, test_y, cfg.family).rmse;
  }
  return row;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<RepetitionResult> rows(cfg.repetitions);
  std::vector<std::exception_ptr> errors(cfg.repetitions);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < cfg.repetitions;) {
      try {
        rows[k] = run_repetition(cfg, cfg.repetition_offset + k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned n =
      std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cfg.repetitions)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (!errors[k]) continue;
    const std::string where = "repetition " + std::to_string(cfg.repetition_offset + k);
    try {
      std::rethrow_exception(errors[k]);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    } catch (const SolverError& e) {
      throw SolverError(where + ": " + e.what());
    }
  }

  ExperimentReport report;
  report.rows = std::move(rows);
  std::vector<double> dc, dp, bc, bp;
  for (const auto& r : report.rows) {
    dc.push_back(r.rmse_coeff);
    dp.push_back(r.rmse_pred);
    if (r.baseline_rmse_coeff) bc.push_back(*r.baseline_rmse_coeff);
    if (r.baseline_rmse_pred) bp.push_back(*r.baseline_rmse_pred);
  }
  report.dkn_coeff = summarize(dc);
  report.dkn_pred = summarize(dp);
  if (cfg.baseline) {
    report.baseline_coeff = summarize(bc);
    report.baseline_pred = summarize(bp);
  }
  report.metadata = {{"rng", "philox4x32-10"},
                     {"circle_membership", "inclusive, distance^2 <= radius^2"},
                     {"quasi_sparse_outside", "normal mean 0.1 variance 0.1"},
                     {"baseline", "ridge, 5-fold cross-validation"}};
  return report;
}

}  // namespace dkn
