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

#ifndef TCE_TOOLS_COMMANDS_H_
#define TCE_TOOLS_COMMANDS_H_

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace tce::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // runtime failure or failed check
inline constexpr int kExitUsage = 2;    // bad arguments, missing or mismatched inputs

// Entry point shared by the binary and the tests. `args` excludes argv[0].
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Existing path as given, else relative to $TCE_DATA_DIR.
std::filesystem::path ResolveDataPath(const std::string& path);

}  // namespace tce::cli

#endif  // TCE_TOOLS_COMMANDS_H_
