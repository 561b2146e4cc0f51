// Copyright 2026 The TCompoundE Authors.
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

#ifndef TCE_TOOLS_RUN_CONFIG_H_
#define TCE_TOOLS_RUN_CONFIG_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tce/train.h"

namespace tce::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string dataset;
  std::string out = "run";
  std::size_t runs = 1;
  TrainConfig train;
};

// Flat "key = value" lines; '#' starts a comment. Keys are the ones written
// by FormatRunConfig. Unknown keys throw ConfigError.
std::map<std::string, std::string> ParseKeyValues(const std::string& text,
                                                  const std::string& origin);
std::map<std::string, std::string> ReadKeyValueFile(const std::filesystem::path& path);

// Applies `values` on top of `config`. "profile" (desk or full) is applied
// first and needs a dataset name.
void ApplyKeyValues(const std::map<std::string, std::string>& values, RunConfig& config);

// Keys accepted by ApplyKeyValues besides "profile", in output order.
std::vector<std::string> ConfigKeys();

// Every key, one per line, in a fixed order. Reading it back reproduces `config`.
std::string FormatRunConfig(const RunConfig& config);

// The dataset's directory or cache file name without extension.
std::string DatasetName(const std::string& path);

}  // namespace tce::cli

#endif  // TCE_TOOLS_RUN_CONFIG_H_
