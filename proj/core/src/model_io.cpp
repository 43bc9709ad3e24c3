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

#include "dkn/model_io.hpp"

#include <fstream>
#include <sstream>

#include "dkn/errors.hpp"
#include "dkn/tensor_io.hpp"
#include "json.hpp"

namespace dkn {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "dkn-model";
constexpr int kVersion = 1;

json structure_json(const DknStructure& s) {
  json factors = json::array();
  for (const auto& f : s.factor_dims) factors.push_back(f);
  return {{"image_dims", s.image_dims}, {"factor_dims", factors}, {"rank", s.rank}};
}

DknStructure structure_of(const json& j) {
  try {
    DknStructure s;
    s.image_dims = j.at("image_dims").get<Shape>();
    s.factor_dims = j.at("factor_dims").get<std::vector<Shape>>();
    s.rank = j.at("rank").get<std::size_t>();
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("structure: ") + e.what());
  }
}

std::string factor_name(std::size_t l, std::size_t r) {
  return "factor_l" + std::to_string(l) + "_r" + std::to_string(r) + ".dkt";
}

}  // namespace

std::string structure_to_json(const DknStructure& structure) {
  return structure_json(structure).dump(2);
}

DknStructure structure_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("structure JSON: ") + e.what());
  }
  return structure_of(j);
}

void save_model(const std::filesystem::path& dir, const DknModel& model, Family family) {
  model.validate();
  std::filesystem::create_directories(dir);
  json files = json::array();
  for (std::size_t l = 1; l <= model.structure.depth(); ++l) {
    json layer = json::array();
    for (std::size_t r = 1; r <= model.structure.rank; ++r) {
      const std::string name = factor_name(l, r);
      save_dkt(dir / name, model.factors[l - 1][r - 1]);
      layer.push_back(name);
    }
    files.push_back(layer);
  }
  json manifest = {{"format", kFormat},
                   {"version", kVersion},
                   {"structure", structure_json(model.structure)},
                   {"family", std::string(family_name(family))},
                   {"intercept", model.intercept},
                   {"kron_eigenvalues", model.kron_eigenvalues},
                   {"factors", files}};
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw FormatError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

SavedModel load_model(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json", std::ios::binary);
  if (!in) throw FormatError("cannot read " + (dir / "manifest.json").string());
  json j;
  try {
    j = json::parse(in);
    if (j.at("format").get<std::string>() != kFormat) {
      throw FormatError("manifest format is not " + std::string(kFormat));
    }
    if (j.at("version").get<int>() != kVersion) {
      throw FormatError("unsupported model version " + j.at("version").dump());
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  SavedModel saved;
  try {
    saved.family = parse_family(j.at("family").get<std::string>());
    saved.model = DknModel::zeros(structure_of(j.at("structure")));
    saved.model.intercept = j.at("intercept").get<double>();
    saved.model.kron_eigenvalues = j.at("kron_eigenvalues").get<std::vector<double>>();
    const auto files = j.at("factors").get<std::vector<std::vector<std::string>>>();
    const DknStructure& s = saved.model.structure;
    if (files.size() != s.depth()) throw FormatError("manifest lists the wrong number of layers");
    for (std::size_t l = 0; l < s.depth(); ++l) {
      if (files[l].size() != s.rank) throw FormatError("manifest lists the wrong number of terms");
      for (std::size_t r = 0; r < s.rank; ++r) {
        saved.model.factors[l][r] = load_dkt(dir / files[l][r]);
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  saved.model.validate();
  return saved;
}

}  // namespace dkn
