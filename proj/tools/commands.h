// Copyright 2026 The soundsal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOUNDSAL_TOOLS_COMMANDS_H_
#define SOUNDSAL_TOOLS_COMMANDS_H_

#include <string>
#include <vector>

namespace soundsal::cli {

inline constexpr char kToolName[] = "soundsal";
inline constexpr char kToolVersion[] = "0.1.0";

// Parses and runs one command line. Returns the process exit code; errors are
// reported on stderr as a single JSON object.
int RunCli(const std::vector<std::string>& args);

}  // namespace soundsal::cli

#endif  // SOUNDSAL_TOOLS_COMMANDS_H_
