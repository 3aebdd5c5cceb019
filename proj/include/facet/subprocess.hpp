// Copyright 2026 The Facet Authors
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

namespace facet {

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string output;  // interleaved stdout and stderr
};

/// Runs argv[0] (looked up on PATH) without a shell and captures its output.
/// The child is killed after `timeout_s` seconds.
ProcessResult run_process(const std::vector<std::string>& argv, double timeout_s);

/// Splits a command template on whitespace; double quotes group words.
std::vector<std::string> split_command(const std::string& command);

}  // namespace facet
