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

#ifndef KLC_DISCRETE_CONTROL_HPP_
#define KLC_DISCRETE_CONTROL_HPP_

#include <Eigen/Dense>
#include <vector>

#include "klc/noise.hpp"
#include "klc/problem.hpp"
#include "klc/rng.hpp"

namespace klc {

/// Ordered finite input set. The order fixes the meaning of policy vectors
/// and the inverse-CDF action selection.
struct DiscreteInputSet {
  std::vector<Eigen::VectorXd> actions;
};

/// Validates: nonempty, consistent dimensions, no duplicate actions.
DiscreteInputSet make_input_set(std::vector<Eigen::VectorXd> actions);

/// Evenly spaced scalar actions from lo to hi inclusive.
DiscreteInputSet make_scalar_grid(double lo, double hi, int count);

/// Probabilities over the action list of a DiscreteInputSet at one (stage,
/// state) decision point. Always a simplex vector.
struct DiscreteActionPolicy {
  Eigen::VectorXd probabilities;
};

/// Finitely supported noise with pmf(w) proportional to exp(-|w|^2/(2
/// sigma^2)) over the given support points.
NoiseModel discretized_gaussian_pmf(const DiscreteInputSet& support,
                                    double sigma);

/// Optimal action probabilities at (k, x): proportional to
/// pmf(u) * estimated Z(k+1, f(x,u)) for actions in the noise support, zero
/// for actions outside it. The noise support must be contained in the action
/// set; atoms with pmf below 1e-300 are skipped.
///
/// All actions share one set of S rollout streams (common random numbers);
/// action a's estimate is bit-identical to
/// estimate_log_desirability(dyn, noise, costs, k+1, f(x,u_a), S, rng).
DiscreteActionPolicy optimal_action_probs(const DynamicsModel& dyn,
                                          const DiscreteInputSet& actions,
                                          const NoiseModel& noise,
                                          const CostSchedule& costs, int k,
                                          const Eigen::VectorXd& x, int S,
                                          const RngStream& rng,
                                          int workers = 1);

/// Receding-horizon closed loop over the full cost horizon, with the policy
/// vector recorded at every decision.
struct ClosedLoopResult {
  Trajectory trajectory;
  std::vector<DiscreteActionPolicy> policy_log;
};

/// From x0 at stage 0: at each stage, estimate the action probabilities at
/// the current state, draw one action by inverse CDF over the action order,
/// and step the dynamics. Stage k uses rng.substream(k); within a stage,
/// substream 0 drives the estimates and substream 1 the selection draw.
ClosedLoopResult run_closed_loop(const DynamicsModel& dyn,
                                 const DiscreteInputSet& actions,
                                 const NoiseModel& noise,
                                 const CostSchedule& costs,
                                 const Eigen::VectorXd& x0, int S,
                                 const RngStream& rng, int workers = 1);

}  // namespace klc

#endif  // KLC_DISCRETE_CONTROL_HPP_
