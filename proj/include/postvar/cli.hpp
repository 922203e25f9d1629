// Copyright 2025 The postvar developers
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

#pragma once

#include <string>
#include <vector>

namespace postvar::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one subcommand (features, train, eval, budget, prune,
/// verify-bounds, repro-synth, repro-fmnist).  Args exclude the program
/// name.  Returns the process exit status: 0 on success, 2 on config
/// validation failures, 1 on any other error; failures print one
/// machine-readable JSON line on stderr.
int dispatch(const std::vector<std::string>& args);

}  // namespace postvar::cli
