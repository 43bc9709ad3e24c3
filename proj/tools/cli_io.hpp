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

#ifndef DKN_TOOLS_CLI_IO_HPP_
#define DKN_TOOLS_CLI_IO_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "dkn/harness.hpp"
#include "dkn/structure.hpp"
#include "dkn/tensor.hpp"
#include "json.hpp"

namespace dkn::cli {

using nlohmann::json;

// Images are the *.dkt files of a directory in file-name order.
std::vector<Tensor> read_image_dir(const std::filesystem::path& dir);
void write_image_dir(const std::filesystem::path& dir, const std::vector<Tensor>& images);

// CSV with header "id,<column>"; ids must be 0..n-1 in any order.
std::vector<double> read_column_csv(const std::filesystem::path& path, const std::string& column);
void write_column_csv(const std::filesystem::path& path, const std::string& column,
                      const std::vector<double>& values);

json read_json(const std::filesystem::path& path);
// Pretty-printed with a trailing newline; byte-stable for equal inputs.
void write_json(const std::filesystem::path& path, const json& value);

// Non-finite numbers become null.
json number(double v);

ExperimentConfig config_from_json(const json& j);
json config_to_json(const ExperimentConfig& cfg);
json report_to_json(const ExperimentReport& report);

}  // namespace dkn::cli

#endif  // DKN_TOOLS_CLI_IO_HPP_
