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

#ifndef DKN_MODEL_IO_HPP_
#define DKN_MODEL_IO_HPP_

#include <filesystem>
#include <string>

#include "dkn/glm.hpp"
#include "dkn/model.hpp"

namespace dkn {

struct SavedModel {
  DknModel model;
  Family family = Family::kGaussian;
};

// Model directory: manifest.json (structure, family, intercept, Kronecker
// eigenvalues, factor file list) plus one DKT1 blob per factor named
// factor_l<layer>_r<term>.dkt.
void save_model(const std::filesystem::path& dir, const DknModel& model,
                Family family);
SavedModel load_model(const std::filesystem::path& dir);

// Structure JSON: {"image_dims": [...], "factor_dims": [[...], ...], "rank": R}
std::string structure_to_json(const DknStructure& structure);
DknStructure structure_from_json(const std::string& text);

}  // namespace dkn

#endif  // DKN_MODEL_IO_HPP_
