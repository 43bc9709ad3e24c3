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

#include "dkn/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include <Eigen/SVD>

#include "dkn/design.hpp"
#include "dkn/errors.hpp"
#include "dkn/rng.hpp"

namespace dkn {
namespace {

Tensor gaussian_tensor(Rng& rng, const Shape& dims) {
  return unvec(rng.normals(shape_size(dims)), dims);
}

Eigen::MatrixXd as_matrix(const Tensor& m) {
  if (m.order() != 2) {
    throw DimensionError("expected an order-2 tensor, got shape " + shape_string(m.dims()));
  }
  return Eigen::Map<const Eigen::MatrixXd>(m.data().data(),
                                           static_cast<Eigen::Index>(m.dims()[0]),
                                           static_cast<Eigen::Index>(m.dims()[1]));
}

std::size_t rank_with_tol(const Eigen::MatrixXd& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > tol) ++r;
  }
  return r;
}

double sigma_max(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()[0];
}

// Advances `subset` to the next k-combination of 0..n-1 in lexicographic order.
bool next_combination(std::vector<std::size_t>& subset, std::size_t n) {
  const std::size_t k = subset.size();
  for (std::size_t i = k; i-- > 0;) {
    if (subset[i] < n - k + i) {
      ++subset[i];
      for (std::size_t j = i + 1; j < k; ++j) subset[j] = subset[j - 1] + 1;
      return true;
    }
  }
  return false;
}

// Layer tensor A[c][m][f] with sum_i eps_i Xtilde_i(a, b) = sum_cf a_c b_f A[c][.][f].
struct LayerCube {
  std::size_t c, m, f;
  std::vector<double> data;  // m + M * (f + F * c)
  Eigen::MatrixXd contract_coarse(const Eigen::VectorXd& a) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                                static_cast<Eigen::Index>(f));
    for (std::size_t ci = 0; ci < c; ++ci) {
      const Eigen::Map<const Eigen::MatrixXd> slab(data.data() + m * f * ci,
                                                   static_cast<Eigen::Index>(m),
                                                   static_cast<Eigen::Index>(f));
      out += a[static_cast<Eigen::Index>(ci)] * slab;
    }
    return out;
  }
  Eigen::MatrixXd contract_fine(const Eigen::VectorXd& b) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(c));
    for (std::size_t ci = 0; ci < c; ++ci) {
      const Eigen::Map<const Eigen::MatrixXd> slab(data.data() + m * f * ci,
                                                   static_cast<Eigen::Index>(m),
                                                   static_cast<Eigen::Index>(f));
      out.col(static_cast<Eigen::Index>(ci)) = slab * b;
    }
    return out;
  }
};

}  // namespace

double coeff_distance(const Tensor& a, const Tensor& b) {
  if (a.dims() != b.dims()) {
    throw DimensionError("coeff_distance: shapes " + shape_string(a.dims()) + " and " +
                         shape_string(b.dims()) + " differ");
  }
  return dist(a, b);
}

double coeff_distance(const DknModel& a, const DknModel& b) {
  return coeff_distance(a.coefficient(), b.coefficient());
}

RipProbe probe_rip(std::span<const Tensor> images, const DknStructure& structure,
                   std::size_t probes, std::uint64_t seed, unsigned threads) {
  structure.validate();
  if (probes < 1) throw DomainError("probe_rip: need at least one probe");
  if (images.empty()) throw DimensionError("probe_rip: no images");
  for (const auto& x : images) {
    if (x.dims() != structure.image_dims) {
      throw DimensionError("probe_rip: image shape " + shape_string(x.dims()) +
                           " does not match " + shape_string(structure.image_dims));
    }
  }
  const Rng master(seed);
  std::vector<double> ratio(probes);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < probes;) {
      Rng rng = master.split(k);
      std::vector<FactorChain> terms(2);
      for (auto& term : terms) {
        for (const auto& dims : structure.factor_dims) {
          term.factors.push_back(gaussian_tensor(rng, dims));
        }
      }
      const Tensor c = compose_coeff(terms);
      double energy = 0.0;
      for (const auto& x : images) {
        const double v = inner(x, c);
        energy += v * v;
      }
      const double norm2 = inner(c, c);
      ratio[k] = energy / static_cast<double>(images.size()) / norm2;
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(probes)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  RipProbe out;
  std::size_t best = 0;
  for (std::size_t k = 0; k < probes; ++k) {
    const double d = std::abs(ratio[k] - 1.0);
    if (k == 0 || d > out.delta_hat) {
      out.delta_hat = d;
      best = k;
    }
    out.running_max.push_back(out.delta_hat);
  }
  Rng rng = master.split(best);
  out.witness.resize(2);
  for (auto& term : out.witness) {
    for (const auto& dims : structure.factor_dims) {
      term.factors.push_back(gaussian_tensor(rng, dims));
    }
  }
  return out;
}

double probe_tau0(std::span<const Tensor> images, std::span<const double> eps,
                  const DknStructure& structure, std::size_t probes,
                  std::uint64_t seed, int power_steps) {
  structure.validate();
  if (images.size() != eps.size() || images.empty()) {
    throw DimensionError("probe_tau0: need one residual per image");
  }
  if (probes < 1) throw DomainError("probe_tau0: need at least one probe");
  Tensor agg(structure.image_dims);
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].dims() != structure.image_dims) {
      throw DimensionError("probe_tau0: image shape mismatch");
    }
    agg += eps[i] * images[i];
  }
  const double n = static_cast<double>(images.size());
  const Rng master(seed);
  double best = 0.0;
  for (std::size_t layer = 1; layer <= structure.depth(); ++layer) {
    const LayerIndex index(structure, layer);
    LayerCube cube{index.coarse_size(), index.layer_size(), index.fine_size(), {}};
    cube.data.assign(cube.c * cube.m * cube.f, 0.0);
    for (std::size_t k = 0; k < agg.size(); ++k) {
      cube.data[index.mid()[k] + cube.m * (index.fine()[k] + cube.f * index.coarse()[k])] +=
          agg[k];
    }
    for (std::size_t p = 0; p < probes; ++p) {
      Rng rng = master.split((static_cast<std::uint64_t>(layer) << 32) + p);
      const auto start = rng.unit_vector(cube.c);
      Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(
          start.data(), static_cast<Eigen::Index>(start.size()));
      double value = 0.0;
      for (int step = 0; step <= power_steps; ++step) {
        Eigen::JacobiSVD<Eigen::MatrixXd> fine_svd(cube.contract_coarse(a),
                                                   Eigen::ComputeThinV);
        value = std::max(value, fine_svd.singularValues()[0]);
        const Eigen::VectorXd b = fine_svd.matrixV().col(0);
        Eigen::JacobiSVD<Eigen::MatrixXd> coarse_svd(cube.contract_fine(b),
                                                     Eigen::ComputeThinV);
        value = std::max(value, coarse_svd.singularValues()[0]);
        a = coarse_svd.matrixV().col(0);
      }
      best = std::max(best, value / n);
    }
  }
  return best;
}

double TheoryConstants::bound(int t) const {
  const double head = mu == 0.0 ? 0.0 : c1 * std::pow(kappa, t) * mu;
  const double tail = tau == 0.0 ? 0.0 : c2 * tau;
  return head + tail;
}

TheoryConstants theory_constants(double delta, double mu, double tau0, double c_norm,
                                 std::size_t depth) {
  if (!(delta >= 0.0 && delta < 1.0 / 3.0)) {
    throw DomainError("delta must lie in [0, 1/3), got " + std::to_string(delta));
  }
  if (!(mu >= 0.0 && mu <= 1.0)) throw DomainError("mu must lie in [0, 1]");
  if (!(tau0 >= 0.0) || !std::isfinite(tau0)) throw DomainError("tau0 must be nonnegative");
  if (!(c_norm > 0.0) || !std::isfinite(c_norm)) throw DomainError("c_norm must be positive");
  if (depth < 2) throw DomainError("depth must be at least 2");
  TheoryConstants k;
  k.delta = delta;
  k.mu = mu;
  k.tau0 = tau0;
  k.c_norm = c_norm;
  k.depth = depth;
  const double shrink = 1.0 - 3.0 * delta;
  const double L = static_cast<double>(depth);
  k.tau = (tau0 / c_norm) / shrink;
  k.nu = mu + 3.0 * delta / shrink;
  if (k.tau == 0.0) {
    k.eta = 1.0;
  } else if (k.nu == 0.0) {
    k.eta = 0.0;
  } else {
    k.eta = mu / (mu + k.tau * (k.nu + 1.0) / k.nu);
  }
  k.kappa = std::pow(k.nu + 1.0, L) - (2.0 * k.nu + 1.0);
  // c1 only enters the bound when mu > 0, and then kappa > 0.
  k.c1 = k.kappa > 0.0 ? (L - 1.0) * (1.0 + k.nu / k.kappa) : L - 1.0;
  k.c2 = k.nu > 0.0 && k.kappa != 1.0
             ? (1.0 + k.nu) * (1.0 + k.nu) / (k.nu * (1.0 - k.kappa)) + 1.0
             : std::numeric_limits<double>::infinity();
  k.condition_met = k.nu < std::pow(1.0 + k.eta, 1.0 / (L - 1.0)) - 1.0;
  return k;
}

DecayVerdict verify_decay(std::span<const double> trace, const TheoryConstants& k,
                          double ratio_slack) {
  DecayVerdict v;
  v.applicable = k.condition_met && k.kappa < 1.0;
  if (!v.applicable) {
    v.failures.push_back("constants outside the contraction regime (condition_met=" +
                         std::string(k.condition_met ? "true" : "false") +
                         ", kappa=" + std::to_string(k.kappa) + ")");
  }
  const double noise = k.tau == 0.0 ? 0.0 : k.c2 * k.tau;
  v.noise_floor = std::max(noise, 1e-8);
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const double margin = k.bound(static_cast<int>(t)) - trace[t];
    v.margins.push_back(margin);
    if (margin < 0.0) {
      v.bound_ok = false;
      v.failures.push_back("t=" + std::to_string(t) + ": dist " + std::to_string(trace[t]) +
                           " exceeds bound " + std::to_string(k.bound(static_cast<int>(t))));
    }
  }
  for (std::size_t t = 0; t + 1 < trace.size(); ++t) {
    const double r = trace[t] > 0.0 ? trace[t + 1] / trace[t] : 0.0;
    v.ratios.push_back(r);
    if (trace[t] > v.noise_floor && r > k.kappa + ratio_slack) {
      v.ratio_ok = false;
      v.failures.push_back("t=" + std::to_string(t) + ": ratio " + std::to_string(r) +
                           " exceeds kappa + slack");
    }
  }
  if (trace.empty()) v.failures.push_back("empty trace");
  v.passed = v.applicable && v.bound_ok && v.ratio_ok && !trace.empty();
  return v;
}

std::size_t matrix_rank(const Tensor& m) {
  const Eigen::MatrixXd a = as_matrix(m);
  return rank_with_tol(a, 1e-10 * sigma_max(a));
}

std::size_t krank(const Tensor& m) {
  const Eigen::MatrixXd a = as_matrix(m);
  const double smax = sigma_max(a);
  if (smax == 0.0) return 0;
  const double tol = 1e-10 * smax;
  const std::size_t cols = static_cast<std::size_t>(a.cols());
  const std::size_t limit = std::min(static_cast<std::size_t>(a.rows()), cols);
  std::size_t k_rank = 0;
  for (std::size_t k = 1; k <= limit; ++k) {
    std::vector<std::size_t> subset(k);
    for (std::size_t i = 0; i < k; ++i) subset[i] = i;
    bool all = true;
    do {
      Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(k));
      for (std::size_t i = 0; i < k; ++i) {
        sub.col(static_cast<Eigen::Index>(i)) = a.col(static_cast<Eigen::Index>(subset[i]));
      }
      if (rank_with_tol(sub, tol) < k) {
        all = false;
        break;
      }
    } while (next_combination(subset, cols));
    if (!all) break;
    k_rank = k;
  }
  return k_rank;
}

Identifiability identifiability_check(const DknModel& model) {
  model.validate();
  const DknStructure& s = model.structure;
  Identifiability out;
  for (std::size_t l = 0; l < s.depth(); ++l) {
    const std::size_t m = s.layer_size(l + 1);
    std::vector<double> data;
    data.reserve(m * s.rank);
    for (std::size_t r = 0; r < s.rank; ++r) {
      const auto f = model.factors[l][r].data();
      data.insert(data.end(), f.begin(), f.end());
    }
    const Tensor bar({m, s.rank}, std::move(data));
    out.kranks.push_back(krank(bar));
    out.ranks.push_back(matrix_rank(bar));
  }
  for (auto k : out.kranks) out.krank_sum += k;
  out.threshold = 2 * s.rank + s.depth() - 1;
  out.sufficient_met = out.krank_sum >= out.threshold;
  out.necessary_min = std::numeric_limits<std::size_t>::max();
  for (std::size_t l = 0; l < s.depth(); ++l) {
    std::size_t prod = 1;
    for (std::size_t j = 0; j < s.depth(); ++j) {
      if (j != l) prod *= out.ranks[j];
    }
    out.necessary_min = std::min(out.necessary_min, prod);
  }
  out.necessary_met = out.necessary_min >= s.rank;
  return out;
}

LayerInequality check_layer_inequality(std::span<const LayerTraceEntry> trace, double nu,
                                       double tau, double slack) {
  LayerInequality out;
  for (const auto& e : trace) {
    ++out.checked;
    if (e.factor_dist > nu * (e.fine_dist + e.coarse_dist) + tau + slack) {
      out.violations.push_back(e);
    }
  }
  return out;
}

}  // namespace dkn
