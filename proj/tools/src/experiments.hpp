// Copyright 2026 The klcontrol Authors
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

#ifndef KLC_TOOLS_EXPERIMENTS_HPP_
#define KLC_TOOLS_EXPERIMENTS_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>

namespace klc::tools {

inline constexpr std::uint64_t kDefaultSeed = 20260816ull;

/// Resolved run options: defaults, overridden by the JSON config, overridden
/// by explicitly passed command-line flags (tracked by the *_set flags).
struct RunOptions {
  std::string experiment;
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = kDefaultSeed;
  int samples = -1;  // -1: use the experiment's default
  int workers = 1;

  bool seed_set = false;
  bool samples_set = false;
  bool workers_set = false;
  bool out_set = false;
};

/// Runs the named experiment, writing its CSV to the resolved output path and
/// progress/timing notes to `log`. Returns a process exit code.
int run_experiment(const RunOptions& options, std::ostream& log);

/// Invariant self-test suite: prints one line per check with the measured
/// residual, returns 0 only if every check passes.
int run_selftest(std::ostream& log);

}  // namespace klc::tools

#endif  // KLC_TOOLS_EXPERIMENTS_HPP_
