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

#ifndef KLC_FINITE_MDP_HPP_
#define KLC_FINITE_MDP_HPP_

#include <Eigen/Dense>
#include <vector>

namespace klc {

/// Finite-state control problem where the control picks the transition law
/// directly and pays the KL divergence from the reference chain. transitions
/// holds one row-stochastic matrix per stage k = 0..N-1 (row x = distribution
/// of the next state from x); stage_costs holds one cost vector per stage
/// k = 0..N, entries may be +infinity to forbid states.
struct FiniteMdp {
  std::vector<Eigen::MatrixXd> transitions;
  std::vector<Eigen::VectorXd> stage_costs;

  int state_count() const {
    return static_cast<int>(stage_costs.front().size());
  }
  int final_stage() const { return static_cast<int>(transitions.size()); }
};

/// Validates row stochasticity (each row sums to 1 within 1e-12, entries
/// nonnegative) and shape consistency.
FiniteMdp make_finite_mdp(std::vector<Eigen::MatrixXd> transitions,
                          std::vector<Eigen::VectorXd> stage_costs);

/// Desirability values z_k(x) for every stage and state, stored as logs.
/// log_z[N] = -terminal cost exactly; earlier stages satisfy the linear
/// backward recursion. Entries can be -infinity only where costs are
/// infinite.
struct DesirabilityTable {
  std::vector<Eigen::VectorXd> log_z;
};

/// Backward recursion log z_k(x) = -l_k(x) + log sum_x' p0(x'|x) z_{k+1}(x'),
/// evaluated with log-sum-exp. Throws DegenerateState if every state at some
/// stage loses all mass.
DesirabilityTable solve_desirability(const FiniteMdp& mdp);

/// Optimal controlled row p*(x'|x) = p0(x'|x) z_{k+1}(x') / normalization.
/// Throws DegenerateState when the normalization vanishes.
Eigen::VectorXd optimal_transition(const FiniteMdp& mdp,
                                   const DesirabilityTable& table, int k,
                                   int state);

/// Optimal cost-to-go -log z_k(x).
double exact_value(const FiniteMdp& mdp, const DesirabilityTable& table, int k,
                   int state);

}  // namespace klc

#endif  // KLC_FINITE_MDP_HPP_
