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

#include "cli_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dkn/errors.hpp"
#include "dkn/model_io.hpp"
#include "dkn/tensor_io.hpp"

namespace dkn::cli {

namespace fs = std::filesystem;

std::vector<Tensor> read_image_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ValidationError("image directory " + dir.string() + " not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".dkt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("no .dkt images in " + dir.string());
  std::vector<Tensor> images;
  images.reserve(files.size());
  for (const auto& f : files) images.push_back(load_dkt(f));
  for (std::size_t i = 1; i < images.size(); ++i) {
    if (images[i].dims() != images[0].dims()) {
      throw DimensionError(files[i].filename().string() + " has shape " +
                           shape_string(images[i].dims()) + ", expected " +
                           shape_string(images[0].dims()));
    }
  }
  return images;
}

void write_image_dir(const fs::path& dir, const std::vector<Tensor>& images) {
  fs::create_directories(dir);
  char name[32];
  for (std::size_t i = 0; i < images.size(); ++i) {
    std::snprintf(name, sizeof name, "img_%06zu.dkt", i);
    save_dkt(dir / name, images[i]);
  }
}

std::vector<double> read_column_csv(const fs::path& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "id," + column) {
    throw FormatError(path.string() + ": expected header 'id," + column + "'");
  }
  std::vector<std::pair<std::size_t, double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("missing comma");
      std::size_t used = 0;
      const unsigned long long id = std::stoull(line.substr(0, comma), &used);
      const std::string value = line.substr(comma + 1);
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing characters");
      rows.emplace_back(static_cast<std::size_t>(id), v);
    } catch (const std::exception&) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": cannot parse '" + line + "'");
    }
  }
  std::vector<double> out(rows.size());
  std::vector<bool> seen(rows.size(), false);
  for (const auto& [id, v] : rows) {
    if (id >= rows.size() || seen[id]) {
      throw FormatError(path.string() + ": ids must be 0.." + std::to_string(rows.size() - 1) +
                        " without repeats");
    }
    seen[id] = true;
    out[id] = v;
  }
  return out;
}

void write_column_csv(const fs::path& path, const std::string& column,
                      const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "id," << column << '\n';
  char buf[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", values[i]);
    out << i << ',' << buf << '\n';
  }
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& value) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << value.dump(2) << '\n';
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  try {
    ExperimentConfig cfg;
    cfg.image_dims = j.at("image_dims").get<Shape>();
    cfg.n_train = j.at("n_train").get<std::size_t>();
    cfg.n_test = get_or<std::size_t>(j, "n_test", 0);
    cfg.family = parse_family(get_or<std::string>(j, "family", "gaussian"));
    cfg.noise_sd = get_or<double>(j, "noise_sd", 1.0);
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
    cfg.repetitions = get_or<std::size_t>(j, "repetitions", 1);
    cfg.repetition_offset = get_or<std::size_t>(j, "repetition_offset", 0);
    cfg.baseline = get_or<bool>(j, "baseline", true);
    cfg.center_response = get_or<bool>(j, "center_response", true);
    cfg.max_sweeps = get_or<int>(j, "max_sweeps", 100);
    cfg.tolerance = get_or<double>(j, "tolerance", 1e-8);
    cfg.threads = get_or<unsigned>(j, "threads", 1);
    if (j.contains("ranks")) cfg.ranks = j.at("ranks").get<std::vector<std::size_t>>();
    if (j.contains("structure") && !(j.at("structure").is_string() &&
                                     j.at("structure").get<std::string>() == "deepest")) {
      cfg.structure = structure_from_json(j.at("structure").dump());
    }
    const json& sig = j.at("signal");
    SignalSpec& s = cfg.signal;
    s.image_dims = cfg.image_dims;
    s.kind = parse_signal_kind(get_or<std::string>(sig, "kind", "one_circle"));
    s.sparsity = parse_sparsity(get_or<std::string>(sig, "sparsity", "sparse"));
    if (sig.contains("circles")) {
      for (const auto& c : sig.at("circles")) {
        s.circles.push_back(Circle{c.at("center").get<std::vector<double>>(),
                                   c.at("radius").get<double>()});
      }
    }
    if (sig.contains("mask")) {
      std::vector<double> mask = sig.at("mask").get<std::vector<double>>();
      s.mask = unvec(std::move(mask), cfg.image_dims);
    }
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
}

json config_to_json(const ExperimentConfig& cfg) {
  json circles = json::array();
  for (const auto& c : cfg.signal.circles) circles.push_back({{"center", c.center}, {"radius", c.radius}});
  json signal = {{"kind", signal_kind_name(cfg.signal.kind)},
                 {"sparsity", sparsity_name(cfg.signal.sparsity)},
                 {"circles", circles}};
  if (cfg.signal.mask) signal["mask"] = cfg.signal.mask->values();
  json out = {{"image_dims", cfg.image_dims},
              {"n_train", cfg.n_train},
              {"n_test", cfg.test_size()},
              {"family", std::string(family_name(cfg.family))},
              {"noise_sd", cfg.noise_sd},
              {"seed", cfg.seed},
              {"repetitions", cfg.repetitions},
              {"repetition_offset", cfg.repetition_offset},
              {"ranks", cfg.ranks},
              {"baseline", cfg.baseline},
              {"center_response", cfg.center_response},
              {"max_sweeps", cfg.max_sweeps},
              {"tolerance", cfg.tolerance},
              {"signal", signal}};
  out["structure"] = cfg.structure ? json::parse(structure_to_json(*cfg.structure)) : json("deepest");
  return out;
}

json report_to_json(const ExperimentReport& report) {
  auto summary = [](const Summary& s) { return json{{"mean", number(s.mean)}, {"sd", number(s.sd)}}; };
  json rows = json::array();
  for (const auto& r : report.rows) {
    json row = {{"repetition", r.index},
                {"seed", r.seed},
                {"rank", r.rank},
                {"sweeps", r.sweeps},
                {"converged", r.converged},
                {"rmse_coeff", number(r.rmse_coeff)},
                {"rmse_pred", number(r.rmse_pred)}};
    if (r.accuracy) row["accuracy"] = number(*r.accuracy);
    if (r.baseline_rmse_coeff) row["baseline_rmse_coeff"] = number(*r.baseline_rmse_coeff);
    if (r.baseline_rmse_pred) row["baseline_rmse_pred"] = number(*r.baseline_rmse_pred);
    rows.push_back(row);
  }
  json out = {{"dkn", {{"rmse_coeff", summary(report.dkn_coeff)}, {"rmse_pred", summary(report.dkn_pred)}}},
              {"rows", rows},
              {"metadata", report.metadata}};
  if (report.baseline_coeff) {
    out["baseline_ridge"] = {{"rmse_coeff", summary(*report.baseline_coeff)},
                             {"rmse_pred", summary(*report.baseline_pred)}};
  }
  // Column reserved for results of external methods merged from files.
  out["external"] = json::object();
  return out;
}

}  // namespace dkn::cli
