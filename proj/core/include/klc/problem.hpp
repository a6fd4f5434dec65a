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

#ifndef KLC_PROBLEM_HPP_
#define KLC_PROBLEM_HPP_

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace klc {

/// Final time index of a finite-horizon problem: stages run 0..N with N >= 1
/// transitions. Immutable after construction.
class Horizon {
 public:
  explicit Horizon(int final_stage);
  int final_stage() const { return final_stage_; }

 private:
  int final_stage_;
};

/// Deterministic transition map x_{k+1} = step(x_k, u_k) for a named system.
/// step_into writes into a caller-owned buffer so rollouts stay allocation
/// free; step() is the boxed convenience form.
struct DynamicsModel {
  int state_dim = 0;
  int input_dim = 0;
  std::function<void(const Eigen::VectorXd& state, const Eigen::VectorXd& input,
                     Eigen::VectorXd& next_state)>
      step_into;

  Eigen::VectorXd step(const Eigen::VectorXd& state,
                       const Eigen::VectorXd& input) const;
};

/// x_{k+1} = A x_k + B u_k.
DynamicsModel make_linear_dynamics(const Eigen::MatrixXd& A,
                                   const Eigen::MatrixXd& B);

/// Stage costs l_0..l_N: running costs for k < N, terminal cost at k = N.
/// The schedule owns the horizon so estimators know where paths end.
class CostSchedule {
 public:
  using RunningCost = std::function<double(int stage, const Eigen::VectorXd&)>;
  using TerminalCost = std::function<double(const Eigen::VectorXd&)>;

  CostSchedule(Horizon horizon, RunningCost running, TerminalCost terminal);

  const Horizon& horizon() const { return horizon_; }

  /// l_k(x); k == horizon().final_stage() evaluates the terminal cost.
  double at(int stage, const Eigen::VectorXd& x) const;

 private:
  Horizon horizon_;
  RunningCost running_;
  TerminalCost terminal_;
};

/// 0.5 x' Q_k x with one matrix per stage (Q_0..Q_N).
CostSchedule make_quadratic_cost(Horizon horizon,
                                 std::vector<Eigen::MatrixXd> stage_weights);

/// 0.5 x' Q x at every stage, terminal included.
CostSchedule make_quadratic_cost(Horizon horizon, const Eigen::MatrixXd& Q);

/// l_k == 0 for all k.
CostSchedule make_zero_cost(Horizon horizon);

/// State path x_{k0}..x_N plus the inputs that produced it. For noise-driven
/// rollouts the controls slots hold the drawn noises (they are the inputs).
struct Trajectory {
  int start_stage = 0;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> controls;

  int final_stage() const {
    return start_stage + static_cast<int>(states.size()) - 1;
  }
};

}  // namespace klc

#endif  // KLC_PROBLEM_HPP_
