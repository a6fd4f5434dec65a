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

#ifndef KLC_ERRORS_HPP_
#define KLC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace klc {

// Base class for runtime failures raised by this library. Construction-time
// validation uses std::invalid_argument / std::domain_error directly.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A rollout produced a non-finite state. Carries the stage at which the
// divergence was detected.
class RolloutDiverged : public Error {
 public:
  explicit RolloutDiverged(int stage)
      : Error("rollout diverged to a non-finite state at stage " +
              std::to_string(stage)),
        stage_(stage) {}
  int stage() const { return stage_; }

 private:
  int stage_;
};

// A Monte-Carlo estimate has no representable weight (every sampled path had
// a non-finite cost, or every candidate weight vanished).
class EstimationFailed : public Error {
 public:
  explicit EstimationFailed(const std::string& what, int stage = -1)
      : Error(what), stage_(stage) {}
  int stage() const { return stage_; }

 private:
  int stage_;
};

// Numerical failure inside a matrix recursion (loss of positive definiteness).
class SolverError : public Error {
 public:
  SolverError(const std::string& what, int stage)
      : Error(what + " at stage " + std::to_string(stage)), stage_(stage) {}
  int stage() const { return stage_; }

 private:
  int stage_;
};

// A finite-MDP state whose desirability vanished: no successor carries mass.
class DegenerateState : public Error {
 public:
  DegenerateState(int stage, int state)
      : Error("degenerate state " + std::to_string(state) + " at stage " +
              std::to_string(stage)),
        stage_(stage),
        state_(state) {}
  int stage() const { return stage_; }
  int state() const { return state_; }

 private:
  int stage_;
  int state_;
};

}  // namespace klc

#endif  // KLC_ERRORS_HPP_
