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

// dkn: command-line front end for simulation, fitting and diagnostics.
// Outputs are deterministic JSON/CSV; timings go to stderr only.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "CLI11.hpp"
#include "cli_io.hpp"
#include "dkn/diagnostics.hpp"
#include "dkn/errors.hpp"
#include "dkn/fit.hpp"
#include "dkn/harness.hpp"
#include "dkn/kron.hpp"
#include "dkn/model_io.hpp"
#include "dkn/rng.hpp"
#include "dkn/tensor_io.hpp"

namespace fs = std::filesystem;
using dkn::cli::json;
using dkn::cli::number;

namespace {

class Timer {
 public:
  explicit Timer(std::string label) : label_(std::move(label)), start_(Clock::now()) {}
  ~Timer() {
    const double s = std::chrono::duration<double>(Clock::now() - start_).count();
    std::fprintf(stderr, "%s: %.3f s\n", label_.c_str(), s);
  }

 private:
  using Clock = std::chrono::steady_clock;
  std::string label_;
  Clock::time_point start_;
};

void emit(const std::string& out, const json& value) {
  if (out.empty() || out == "-") {
    std::cout << value.dump(2) << '\n';
  } else {
    dkn::cli::write_json(out, value);
  }
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string config, out;
  std::size_t repetition = 0;
};

int run_simulate(const SimulateArgs& a) {
  Timer timer("simulate");
  const dkn::ExperimentConfig cfg = dkn::cli::config_from_json(dkn::cli::read_json(a.config));
  const std::size_t index = cfg.repetition_offset + a.repetition;
  const dkn::RepetitionSeeds seeds = dkn::repetition_seeds(cfg.seed, index);

  const dkn::Tensor truth = dkn::gen_signal(cfg.signal, seeds.signal);
  const auto images = dkn::gen_images(cfg.n_train, cfg.image_dims, seeds.images);
  const auto y = dkn::gen_responses(images, truth, cfg.family, cfg.noise_sd, seeds.responses);
  const auto test_images = dkn::gen_images(cfg.test_size(), cfg.image_dims, seeds.test_images);
  const auto test_y =
      dkn::gen_responses(test_images, truth, cfg.family, cfg.noise_sd, seeds.test_responses);

  const fs::path out(a.out);
  fs::create_directories(out);
  dkn::save_dkt(out / "truth.dkt", truth);
  dkn::cli::write_image_dir(out / "images", images);
  dkn::cli::write_column_csv(out / "y.csv", "y", y);
  dkn::cli::write_image_dir(out / "test" / "images", test_images);
  dkn::cli::write_column_csv(out / "test" / "y.csv", "y", test_y);

  json manifest = {{"format", "dkn-simulation"},
                   {"version", 1},
                   {"config", dkn::cli::config_to_json(cfg)},
                   {"repetition", index},
                   {"seeds",
                    {{"repetition", seeds.repetition},
                     {"signal", seeds.signal},
                     {"images", seeds.images},
                     {"responses", seeds.responses},
                     {"test_images", seeds.test_images},
                     {"test_responses", seeds.test_responses},
                     {"fit", seeds.fit}}},
                   {"n_train", images.size()},
                   {"n_test", test_images.size()}};
  dkn::cli::write_json(out / "manifest.json", manifest);
  return 0;
}

// ---- shared data loading ----------------------------------------------------

struct DataArgs {
  std::string images, y, structure = "auto", family = "gaussian";
  std::size_t rank = 1;
};

struct Data {
  std::vector<dkn::Tensor> images;
  std::vector<double> y;
  dkn::DknStructure structure;
  dkn::Family family = dkn::Family::kGaussian;
  bool padded = false;
};

// "auto": deepest factorization of the image shape. "auto-pad": zero-pad to
// power-of-two extents first. Anything else is a structure JSON file.
dkn::DknStructure resolve_structure(const std::string& spec, dkn::Shape dims, std::size_t rank,
                                    bool* padded) {
  *padded = false;
  if (spec == "auto") return dkn::deepest_structure(dims, rank);
  if (spec == "auto-pad") {
    const dkn::Shape p = dkn::pow2_dims(dims);
    *padded = p != dims;
    return dkn::deepest_structure(p, rank);
  }
  dkn::DknStructure s = dkn::structure_from_json(dkn::cli::read_json(spec).dump());
  if (s.image_dims != dims) {
    throw dkn::DimensionError("structure image_dims " + dkn::shape_string(s.image_dims) +
                              " do not match images " + dkn::shape_string(dims));
  }
  return s.with_rank(rank);
}

std::vector<dkn::Tensor> pad_all(std::vector<dkn::Tensor> images, const dkn::Shape& dims) {
  for (auto& x : images) x = dkn::zero_pad(x, dims);
  return images;
}

Data load_data(const DataArgs& a, bool need_y = true) {
  Data d;
  d.images = dkn::cli::read_image_dir(a.images);
  if (need_y) {
    d.y = dkn::cli::read_column_csv(a.y, "y");
    if (d.y.size() != d.images.size()) {
      throw dkn::DimensionError(std::to_string(d.y.size()) + " responses for " +
                                std::to_string(d.images.size()) + " images");
    }
  }
  d.family = dkn::parse_family(a.family);
  d.structure = resolve_structure(a.structure, d.images[0].dims(), a.rank, &d.padded);
  if (d.padded) d.images = pad_all(std::move(d.images), d.structure.image_dims);
  return d;
}

struct SolverArgs {
  int max_sweeps = 100;
  double tolerance = 1e-8;
  double ridge = -1.0;
  std::uint64_t seed = 0;
  bool no_center = false;
  unsigned threads = 1;

  dkn::FitOptions options(dkn::Family family) const {
    dkn::FitOptions o;
    o.max_sweeps = max_sweeps;
    o.tolerance = tolerance;
    if (ridge >= 0.0) o.ridge = ridge;
    o.seed = seed;
    o.center_response = family == dkn::Family::kGaussian && !no_center;
    return o;
  }
};

json fit_report_json(const dkn::FitReport& r) {
  json obj = json::array();
  for (double v : r.objective) obj.push_back(number(v));
  json out = {{"rank", r.rank},
              {"sweeps", r.sweeps},
              {"converged", r.converged},
              {"relative_change", number(r.relative_change)},
              {"objective", obj},
              {"bic", number(r.bic)},
              {"reseeds", r.reseeds},
              {"glm_nonconverged", r.glm_nonconverged}};
  if (!r.distance_trace.empty()) {
    json dt = json::array();
    for (double v : r.distance_trace) dt.push_back(number(v));
    out["distance_trace"] = dt;
  }
  return out;
}

// ---- fit / scan-rank --------------------------------------------------------

struct FitArgs {
  DataArgs data;
  SolverArgs solver;
  std::string out;
  std::vector<std::size_t> ranks;
};

int run_fit(const FitArgs& a) {
  Timer timer("fit");
  Data d = load_data(a.data);
  const dkn::FitOptions opts = a.solver.options(d.family);
  json report;
  dkn::FitResult best;
  if (a.ranks.empty()) {
    best = dkn::fit(d.images, d.y, d.structure, d.family, opts);
    report = fit_report_json(best.report);
  } else {
    dkn::RankScan scan = dkn::scan_rank(d.images, d.y, d.structure, a.ranks, d.family, opts,
                                        a.solver.threads);
    json table = json::array();
    for (const auto& f : scan.fits) table.push_back(fit_report_json(f.report));
    for (auto& f : scan.fits) {
      if (f.report.rank == scan.best_rank) best = std::move(f);
    }
    report = fit_report_json(best.report);
    report["scan"] = table;
  }
  report["structure"] = json::parse(dkn::structure_to_json(best.model.structure));
  report["padded"] = d.padded;
  report["family"] = std::string(dkn::family_name(d.family));
  report["intercept"] = best.model.intercept;
  const fs::path out(a.out);
  dkn::save_model(out, best.model, d.family);
  dkn::cli::write_json(out / "report.json", report);
  return 0;
}

int run_scan(const FitArgs& a, const std::string& out) {
  Timer timer("scan-rank");
  Data d = load_data(a.data);
  std::vector<std::size_t> ranks = a.ranks.empty() ? std::vector<std::size_t>{1, 2, 3} : a.ranks;
  dkn::RankScan scan = dkn::scan_rank(d.images, d.y, d.structure, ranks, d.family,
                                      a.solver.options(d.family), a.solver.threads);
  json table = json::array();
  for (const auto& f : scan.fits) table.push_back(fit_report_json(f.report));
  emit(out, {{"best_rank", scan.best_rank}, {"candidates", ranks}, {"fits", table}});
  return 0;
}

// ---- predict ----------------------------------------------------------------

int run_predict(const std::string& model_dir, const std::string& images_dir,
                const std::string& out) {
  Timer timer("predict");
  const dkn::SavedModel saved = dkn::load_model(model_dir);
  auto images = dkn::cli::read_image_dir(images_dir);
  const dkn::Shape& want = saved.model.structure.image_dims;
  if (images[0].dims() != want) {
    if (dkn::pow2_dims(images[0].dims()) != want) {
      throw dkn::DimensionError("images have shape " + dkn::shape_string(images[0].dims()) +
                                ", model expects " + dkn::shape_string(want));
    }
    images = pad_all(std::move(images), want);
  }
  dkn::cli::write_column_csv(out, "prediction", dkn::predict(saved.model, images, saved.family));
  return 0;
}

// ---- check-equivalence --------------------------------------------------------

dkn::Tensor random_tensor(dkn::Rng& rng, const dkn::Shape& dims) {
  dkn::Tensor t(dims);
  for (auto& v : t.data()) v = rng.normal();
  return t;
}

dkn::Shape random_shape(dkn::Rng& rng, std::size_t order, std::size_t max_extent) {
  dkn::Shape s(order);
  for (auto& e : s) e = 1 + static_cast<std::size_t>(rng.uniform() * max_extent);
  return s;
}

struct Suite {
  std::size_t instances = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return max_error <= tolerance; }
  json to_json() const {
    return {{"instances", instances},
            {"max_error", max_error},
            {"tolerance", tolerance},
            {"passed", passed()}};
  }
};

int run_check_equivalence(std::size_t draws, std::uint64_t seed, const std::string& out) {
  Timer timer("check-equivalence");
  dkn::Rng root(seed);

  // reshape_R(A (x) B) = vec(A) vec(B)^T
  Suite reshape{0, 0.0, 1e-12};
  {
    dkn::Rng rng = root.split(1);
    for (std::size_t k = 0; k < draws; ++k) {
      const std::size_t order = 1 + k % 3;
      const dkn::Tensor a = random_tensor(rng, random_shape(rng, order, 4));
      const dkn::Tensor b = random_tensor(rng, random_shape(rng, order, 4));
      const dkn::Tensor r = dkn::reshape_R(dkn::tkp(a, b), a.dims());
      double err = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
          err = std::max(err, std::abs(r[i + a.size() * j] - a[i] * b[j]));
        }
      }
      reshape.max_error = std::max(reshape.max_error, err);
      ++reshape.instances;
    }
  }

  // <X, B_L (x) ... (x) B_1> equals the chained non-overlapping convolution.
  Suite conv{0, 0.0, 1e-10};
  {
    dkn::Rng rng = root.split(2);
    for (std::size_t k = 0; k < draws; ++k) {
      const std::size_t depth = 2 + k % 3;
      const std::size_t order = 1 + (k / 3) % 3;
      dkn::FactorChain chain;
      for (std::size_t l = 0; l < depth; ++l) {
        chain.factors.push_back(random_tensor(rng, random_shape(rng, order, 3)));
      }
      const dkn::Tensor c = dkn::kron_chain(chain);
      const dkn::Tensor x = random_tensor(rng, c.dims());
      const double lhs = dkn::inner(x, c);
      const double rhs = dkn::conv_chain_eval(x, chain);
      conv.max_error = std::max(conv.max_error, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
      ++conv.instances;
    }
  }

  // reshape_T of a sum of Kronecker terms equals the sum of outer products.
  Suite outer{0, 0.0, 1e-12};
  {
    dkn::Rng rng = root.split(3);
    for (std::size_t k = 0; k < draws; ++k) {
      const std::size_t depth = 2 + k % 3;
      const std::size_t rank = 1 + k % 2;
      std::vector<dkn::Shape> dims;
      for (std::size_t l = 0; l < depth; ++l) dims.push_back(random_shape(rng, 2, 3));
      std::vector<dkn::FactorChain> terms(rank);
      for (auto& t : terms) {
        for (const auto& s : dims) t.factors.push_back(random_tensor(rng, s));
      }
      const dkn::FlatArray lhs = dkn::reshape_T(dkn::compose_coeff(terms), dims);
      const dkn::FlatArray rhs = dkn::cp_outer_sum(terms);
      double err = lhs.dims == rhs.dims ? 0.0 : std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; std::isfinite(err) && i < lhs.data.size(); ++i) {
        err = std::max(err, std::abs(lhs.data[i] - rhs.data[i]));
      }
      outer.max_error = std::max(outer.max_error, err);
      ++outer.instances;
    }
  }

  const bool ok = reshape.passed() && conv.passed() && outer.passed();
  emit(out, {{"seed", seed},
             {"reshape_kron", reshape.to_json()},
             {"conv_chain", conv.to_json()},
             {"reshape_sum", outer.to_json()},
             {"passed", ok}});
  return ok ? 0 : 3;
}

// ---- diagnose -------------------------------------------------------------------

struct DiagnoseArgs {
  DataArgs data;
  SolverArgs solver;
  std::string truth, out;
  std::size_t probes = 200;
  std::size_t tau_probes = 20;
  std::uint64_t probe_seed = 1;
};

// Top left singular vector of the coarse reshaping of `c` at each level.
double init_distance(const dkn::SpectralInit& init, const dkn::DknStructure& s,
                     const dkn::Tensor& c) {
  double mu = 0.0;
  for (std::size_t l = 2; l <= s.depth(); ++l) {
    const dkn::Tensor r = dkn::reshape_R(c, s.coarse_dims(l));
    Eigen::Map<const Eigen::MatrixXd> m(r.data().data(), static_cast<Eigen::Index>(r.dims()[0]),
                                        static_cast<Eigen::Index>(r.dims()[1]));
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
    const Eigen::VectorXd u = svd.matrixU().col(0);
    const auto start = init.coarse_start(s, l);
    mu = std::max(mu, dkn::dist(start[0].data(), std::span<const double>(u.data(), u.size())));
  }
  return mu;
}

int run_diagnose(const DiagnoseArgs& a) {
  Timer timer("diagnose");
  Data d = load_data(a.data);
  dkn::Tensor truth = dkn::load_dkt(a.truth);
  if (truth.dims() != d.structure.image_dims) truth = dkn::zero_pad(truth, d.structure.image_dims);

  dkn::FitOptions opts = a.solver.options(d.family);
  opts.trace_truth = truth;
  const dkn::FitResult fit = dkn::fit(d.images, d.y, d.structure, d.family, opts);

  const dkn::SpectralInit init = dkn::init_spectral(d.images, d.y, d.structure);
  const double mu = init_distance(init, d.structure, truth);

  const dkn::RipProbe rip = dkn::probe_rip(d.images, d.structure, a.probes, a.probe_seed,
                                           a.solver.threads);
  std::vector<double> eps(d.y.size());
  for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = d.y[i] - dkn::inner(d.images[i], truth);
  const double tau0 =
      dkn::probe_tau0(d.images, eps, d.structure, a.tau_probes, a.probe_seed + 1);

  json out = {{"structure", json::parse(dkn::structure_to_json(d.structure))},
              {"fit", fit_report_json(fit.report)},
              {"mu", mu},
              {"delta_hat", rip.delta_hat},
              {"rip_probes", a.probes},
              {"tau0", tau0},
              {"coeff_distance", dkn::coeff_distance(fit.model.coefficient(), truth)}};

  if (rip.delta_hat < 1.0 / 3.0 && mu < 1.0 && mu >= 0.0) {
    const dkn::TheoryConstants tc =
        dkn::theory_constants(rip.delta_hat, mu, tau0, dkn::fro_norm(truth), d.structure.depth());
    out["constants"] = {{"tau", number(tc.tau)}, {"nu", number(tc.nu)},   {"eta", number(tc.eta)},
                        {"kappa", number(tc.kappa)}, {"c1", number(tc.c1)}, {"c2", number(tc.c2)}};
    out["condition_met"] = tc.condition_met;
    const dkn::DecayVerdict v = dkn::verify_decay(fit.report.distance_trace, tc);
    json margins = json::array();
    for (double m : v.margins) margins.push_back(number(m));
    out["decay_verdict"] = {{"applicable", v.applicable}, {"bound_ok", v.bound_ok},
                    {"ratio_ok", v.ratio_ok},     {"passed", v.passed},
                    {"noise_floor", number(v.noise_floor)}, {"margins", margins},
                    {"failures", v.failures}};
  } else {
    out["constants"] = nullptr;
    out["condition_met"] = false;
    out["decay_verdict"] = nullptr;
  }

  const dkn::Identifiability id = dkn::identifiability_check(fit.model);
  out["identifiability"] = {{"sufficient_met", id.sufficient_met},
                            {"necessary_met", id.necessary_met},
                            {"kranks", id.kranks},
                            {"ranks", id.ranks},
                            {"krank_sum", id.krank_sum},
                            {"threshold", id.threshold}};
  emit(a.out, out);
  return 0;
}

// ---- experiment --------------------------------------------------------------------

int run_experiment_cmd(const std::string& config, const std::string& out, unsigned threads) {
  Timer timer("experiment");
  dkn::ExperimentConfig cfg = dkn::cli::config_from_json(dkn::cli::read_json(config));
  if (threads) cfg.threads = threads;
  json report = dkn::cli::report_to_json(dkn::run_experiment(cfg));
  report["config"] = dkn::cli::config_to_json(cfg);
  emit(out, report);
  return 0;
}

void add_data_options(CLI::App* cmd, DataArgs& d, bool need_y = true) {
  cmd->add_option("--images", d.images, "directory of .dkt images")->required();
  if (need_y) cmd->add_option("--y", d.y, "responses CSV (id,y)")->required();
  cmd->add_option("--structure", d.structure, "auto, auto-pad or a structure JSON file");
  cmd->add_option("--family", d.family, "gaussian or bernoulli");
}

void add_solver_options(CLI::App* cmd, SolverArgs& s) {
  cmd->add_option("--max-sweeps", s.max_sweeps);
  cmd->add_option("--tolerance", s.tolerance);
  cmd->add_option("--ridge", s.ridge, "fixed ridge for every layer subproblem");
  cmd->add_option("--seed", s.seed, "seed for factor reseeding");
  cmd->add_flag("--no-center", s.no_center, "do not center gaussian responses");
  cmd->add_option("--threads", s.threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep Kronecker network regression for tensor images"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic data set");
  simulate->add_option("--config", sim.config, "experiment config JSON")->required();
  simulate->add_option("--out", sim.out, "output directory")->required();
  simulate->add_option("--repetition", sim.repetition, "repetition index within the run");

  FitArgs fa;
  std::string rank_arg = "1";
  auto* fitc = app.add_subcommand("fit", "fit a model and save it");
  add_data_options(fitc, fa.data);
  add_solver_options(fitc, fa.solver);
  fitc->add_option("--rank", rank_arg, "rank, or 'scan' to pick from --ranks by BIC");
  fitc->add_option("--ranks", fa.ranks, "candidate ranks for --rank scan")->delimiter(',');
  fitc->add_option("--out", fa.out, "model directory")->required();

  FitArgs sa;
  std::string scan_out;
  auto* scan = app.add_subcommand("scan-rank", "BIC table over candidate ranks");
  add_data_options(scan, sa.data);
  add_solver_options(scan, sa.solver);
  scan->add_option("--ranks", sa.ranks, "candidate ranks (default 1,2,3)")->delimiter(',');
  scan->add_option("--out", scan_out, "report JSON (default stdout)");

  std::string model_dir, pred_images, pred_out;
  auto* pred = app.add_subcommand("predict", "predict responses for images");
  pred->add_option("--model", model_dir)->required();
  pred->add_option("--images", pred_images)->required();
  pred->add_option("--out", pred_out, "predictions CSV (id,prediction)")->required();

  std::size_t draws = 200;
  std::uint64_t eq_seed = 0;
  std::string eq_out;
  auto* eq = app.add_subcommand("check-equivalence", "verify the algebraic identities");
  eq->add_option("--draws", draws);
  eq->add_option("--seed", eq_seed);
  eq->add_option("--out", eq_out);

  DiagnoseArgs da;
  auto* diag = app.add_subcommand("diagnose", "theory constants and decay check");
  add_data_options(diag, da.data);
  add_solver_options(diag, da.solver);
  diag->add_option("--rank", da.data.rank);
  diag->add_option("--truth", da.truth, "true coefficient .dkt")->required();
  diag->add_option("--probes", da.probes, "random probes for the restricted isometry estimate");
  diag->add_option("--tau-probes", da.tau_probes);
  diag->add_option("--probe-seed", da.probe_seed);
  diag->add_option("--out", da.out);

  std::string exp_config, exp_out;
  unsigned exp_threads = 0;
  auto* exp = app.add_subcommand("experiment", "run repeated simulations and summarize");
  exp->add_option("--config", exp_config)->required();
  exp->add_option("--out", exp_out);
  exp->add_option("--threads", exp_threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*fitc) {
      if (rank_arg == "scan") {
        if (fa.ranks.empty()) fa.ranks = {1, 2, 3};
      } else {
        try {
          fa.data.rank = std::stoul(rank_arg);
        } catch (const std::exception&) {
          throw dkn::ValidationError("--rank must be a positive integer or 'scan'");
        }
        fa.ranks.clear();
      }
      return run_fit(fa);
    }
    if (*scan) return run_scan(sa, scan_out);
    if (*pred) return run_predict(model_dir, pred_images, pred_out);
    if (*eq) return run_check_equivalence(draws, eq_seed, eq_out);
    if (*diag) return run_diagnose(da);
    if (*exp) return run_experiment_cmd(exp_config, exp_out, exp_threads);
  } catch (const dkn::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const dkn::SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
