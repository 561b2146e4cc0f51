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

#include "run_config.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace tce::cli {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T ParseNumber(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("invalid value '" + value + "' for key '" + key + "'");
  return out;
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("invalid boolean '" + value + "' for key '" + key + "'");
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define TCE_SIZE_FIELD(name, member)                                                      \
  Field {                                                                                 \
    name, [](RunConfig& c, const std::string& v) {                                        \
      c.member = ParseNumber<std::size_t>(name, v);                                        \
    },                                                                                    \
        [](const RunConfig& c) { return std::to_string(c.member); }                       \
  }
#define TCE_DOUBLE_FIELD(name, member)                                                    \
  Field {                                                                                 \
    name, [](RunConfig& c, const std::string& v) { c.member = ParseNumber<double>(name, v); }, \
        [](const RunConfig& c) { return FormatDouble(c.member); }                         \
  }
#define TCE_BOOL_FIELD(name, member)                                                      \
  Field {                                                                                 \
    name, [](RunConfig& c, const std::string& v) { c.member = ParseBool(name, v); },      \
        [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }       \
  }

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      {"dataset", [](RunConfig& c, const std::string& v) { c.dataset = v; },
       [](const RunConfig& c) { return c.dataset; }},
      {"out", [](RunConfig& c, const std::string& v) { c.out = v; },
       [](const RunConfig& c) { return c.out; }},
      TCE_SIZE_FIELD("runs", runs),
      {"variant",
       [](RunConfig& c, const std::string& v) {
         c.train.variant = FindVariant(v).name;
       },
       [](const RunConfig& c) { return c.train.variant; }},
      {"scorer", [](RunConfig& c, const std::string& v) { c.train.score = ParseScoreKind(v); },
       [](const RunConfig& c) { return std::string(ToString(c.train.score)); }},
      {"fusion", [](RunConfig& c, const std::string& v) { c.train.fusion = ParseFusion(v); },
       [](const RunConfig& c) { return std::string(ToString(c.train.fusion)); }},
      {"precision",
       [](RunConfig& c, const std::string& v) { c.train.precision = ParsePrecision(v); },
       [](const RunConfig& c) { return std::string(ToString(c.train.precision)); }},
      TCE_SIZE_FIELD("d", train.dim),
      TCE_SIZE_FIELD("epochs", train.max_epochs),
      TCE_SIZE_FIELD("batch", train.batch_size),
      TCE_DOUBLE_FIELD("lr", train.learning_rate),
      TCE_DOUBLE_FIELD("lambda_u", train.lambda_u),
      TCE_DOUBLE_FIELD("lambda_tau", train.lambda_tau),
      TCE_SIZE_FIELD("eval_every", train.eval_every),
      TCE_SIZE_FIELD("patience", train.patience),
      {"seed",
       [](RunConfig& c, const std::string& v) { c.train.seed = ParseNumber<std::uint64_t>("seed", v); },
       [](const RunConfig& c) { return std::to_string(c.train.seed); }},
      TCE_DOUBLE_FIELD("init_scale", train.init_scale),
      TCE_BOOL_FIELD("init_scale_at_identity", train.init_scale_at_identity),
      TCE_BOOL_FIELD("smooth_translate", train.smooth_translate),
      TCE_BOOL_FIELD("smooth_scale", train.smooth_scale),
      TCE_BOOL_FIELD("smooth_rotate", train.smooth_rotate),
      TCE_SIZE_FIELD("threads", train.threads),
  };
  return fields;
}

#undef TCE_SIZE_FIELD
#undef TCE_DOUBLE_FIELD
#undef TCE_BOOL_FIELD

}  // namespace

std::map<std::string, std::string> ParseKeyValues(const std::string& text,
                                                  const std::string& origin) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
    const std::string key = Trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (out.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    out[key] = Trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> ReadKeyValueFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseKeyValues(ss.str(), path.string());
}

std::string DatasetName(const std::string& path) {
  std::filesystem::path p(path);
  while (!p.empty() && p.filename().empty()) p = p.parent_path();
  return p.stem().string();
}

void ApplyKeyValues(const std::map<std::string, std::string>& values, RunConfig& config) {
  for (const auto& [key, value] : values) {
    if (key == "profile") continue;
    bool known = false;
    for (const auto& f : Fields()) known = known || key == f.key;
    if (!known) throw ConfigError("unknown config key '" + key + "'");
  }
  if (values.count("dataset")) config.dataset = values.at("dataset");
  if (auto it = values.find("profile"); it != values.end()) {
    const std::string name = DatasetName(config.dataset);
    if (it->second != "desk" && it->second != "full")
      throw ConfigError("unknown profile '" + it->second + "' (expected desk or full)");
    try {
      config.train = it->second == "desk" ? DeskTrainConfig(name) : FullTrainConfig(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("profile '") + it->second + "': " + e.what());
    }
  }
  for (const auto& f : Fields()) {
    if (auto it = values.find(f.key); it != values.end()) {
      try {
        f.set(config, it->second);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw ConfigError(std::string("key '") + f.key + "': " + e.what());
      }
    }
  }
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const auto& f : Fields()) keys.emplace_back(f.key);
  return keys;
}

std::string FormatRunConfig(const RunConfig& config) {
  std::string out;
  for (const auto& f : Fields()) out += std::string(f.key) + " = " + f.get(config) + "\n";
  return out;
}

}  // namespace tce::cli
