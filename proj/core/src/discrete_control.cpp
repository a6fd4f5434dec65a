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

#include "klc/discrete_control.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "klc/errors.hpp"
#include "klc/numeric.hpp"
#include "klc/parallel.hpp"

namespace klc {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Atoms rarer than this cannot influence a double-precision posterior.
const double kLogPmfFloor = std::log(1e-300);

bool same_action(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && a == b;
}

}  // namespace

DiscreteInputSet make_input_set(std::vector<Eigen::VectorXd> actions) {
  if (actions.empty()) {
    throw std::invalid_argument("DiscreteInputSet: empty action list");
  }
  const auto dim = actions.front().size();
  if (dim == 0) {
    throw std::invalid_argument("DiscreteInputSet: zero-dimensional actions");
  }
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i].size() != dim) {
      throw std::invalid_argument("DiscreteInputSet: action dimensions differ");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (same_action(actions[i], actions[j])) {
        throw std::invalid_argument("DiscreteInputSet: duplicate action");
      }
    }
  }
  DiscreteInputSet set;
  set.actions = std::move(actions);
  return set;
}

DiscreteInputSet make_scalar_grid(double lo, double hi, int count) {
  if (count < 2 || !(lo < hi)) {
    throw std::invalid_argument("make_scalar_grid: need lo < hi and count >= 2");
  }
  std::vector<Eigen::VectorXd> actions(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd u(1);
    u[0] = i + 1 == count ? hi : lo + i * (hi - lo) / (count - 1);
    actions[i] = u;
  }
  return make_input_set(std::move(actions));
}

NoiseModel discretized_gaussian_pmf(const DiscreteInputSet& support,
                                    double sigma) {
  if (!(sigma > 0.0)) {
    throw std::domain_error("discretized_gaussian_pmf: sigma must be positive");
  }
  const std::size_t r = support.actions.size();
  std::vector<double> log_unnormalized(r);
  for (std::size_t i = 0; i < r; ++i) {
    log_unnormalized[i] =
        -support.actions[i].squaredNorm() / (2.0 * sigma * sigma);
  }
  const double lse = log_sum_exp(log_unnormalized);
  std::vector<double> log_probs(r);
  for (std::size_t i = 0; i < r; ++i) {
    log_probs[i] = log_unnormalized[i] - lse;
  }
  return NoiseModel::discrete(support.actions, std::move(log_probs));
}

DiscreteActionPolicy optimal_action_probs(const DynamicsModel& dyn,
                                          const DiscreteInputSet& actions,
                                          const NoiseModel& noise,
                                          const CostSchedule& costs, int k,
                                          const Eigen::VectorXd& x, int S,
                                          const RngStream& rng, int workers) {
  const int N = costs.horizon().final_stage();
  if (S < 1) {
    throw std::invalid_argument("optimal_action_probs: need S >= 1");
  }
  if (k < 0 || k >= N) {
    throw std::invalid_argument("optimal_action_probs: stage outside [0, N-1]");
  }
  if (noise.kind() != NoiseModel::Kind::kDiscrete) {
    throw std::invalid_argument("optimal_action_probs: discrete noise model required");
  }

  const std::vector<Eigen::VectorXd>& atoms = noise.support();
  const std::vector<double>& log_pmf = noise.log_probabilities();
  const int action_count = static_cast<int>(actions.actions.size());

  // Every noise atom must be one of the declared actions; the policy lives
  // on the action list, with zeros off the support.
  std::vector<int> atom_slot(atoms.size(), -1);
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    for (int j = 0; j < action_count; ++j) {
      if (same_action(atoms[a], actions.actions[j])) {
        atom_slot[a] = j;
        break;
      }
    }
    if (atom_slot[a] < 0) {
      throw std::invalid_argument(
          "optimal_action_probs: noise support not contained in the action set");
    }
  }

  std::vector<int> active;
  active.reserve(atoms.size());
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    if (log_pmf[a] >= kLogPmfFloor) active.push_back(static_cast<int>(a));
  }
  const int n_active = static_cast<int>(active.size());

  std::vector<Eigen::VectorXd> successors(n_active);
  for (int a = 0; a < n_active; ++a) {
    successors[a] = dyn.step(x, atoms[active[a]]);
  }

  // Inner paths cover stages k+1..N, so they consume draws for stages
  // k+1..N-1. Sample i's draws come from rng.substream(i) and are shared by
  // every action (common random numbers): the table below is exactly what
  // estimate_log_desirability would draw path by path.
  const int steps = N - 1 - k;
  std::vector<std::uint32_t> table(static_cast<std::size_t>(S) * steps);
  parallel_for(static_cast<std::size_t>(S), workers, [&](std::size_t i) {
    RngStream path_rng = rng.substream(static_cast<std::uint64_t>(i));
    std::uint32_t* row = table.data() + i * static_cast<std::size_t>(steps);
    for (int t = 0; t < steps; ++t) {
      row[t] = static_cast<std::uint32_t>(noise.sample_index(path_rng));
    }
  });

  const std::size_t total = static_cast<std::size_t>(n_active) * S;
  std::vector<double> log_weights(total);
  parallel_for(total, workers, [&](std::size_t t) {
    thread_local Eigen::VectorXd state, next;
    const std::size_t a = t / static_cast<std::size_t>(S);
    const std::size_t i = t % static_cast<std::size_t>(S);
    state = successors[a];
    if (!state.allFinite()) {
      log_weights[t] = kNegInf;
      return;
    }
    const std::uint32_t* row = table.data() + i * static_cast<std::size_t>(steps);
    double cost = 0.0;
    for (int s = k + 1; s < N; ++s) {
      cost += costs.at(s, state);
      dyn.step_into(state, atoms[row[s - k - 1]], next);
      if (!next.allFinite()) {
        log_weights[t] = kNegInf;
        return;
      }
      state.swap(next);
    }
    cost += costs.at(N, state);
    log_weights[t] = std::isfinite(cost) ? -cost : kNegInf;
  });

  std::vector<double> atom_log_weight(n_active);
  for (int a = 0; a < n_active; ++a) {
    const std::span<const double> slice(
        log_weights.data() + static_cast<std::size_t>(a) * S,
        static_cast<std::size_t>(S));
    atom_log_weight[a] = log_pmf[active[a]] + log_mean_exp(slice);
  }

  const double lse = log_sum_exp(atom_log_weight);
  if (lse == kNegInf) {
    throw EstimationFailed("optimal_action_probs: all action weights vanished", k);
  }

  DiscreteActionPolicy policy;
  policy.probabilities = Eigen::VectorXd::Zero(action_count);
  for (int a = 0; a < n_active; ++a) {
    if (atom_log_weight[a] > kNegInf) {
      policy.probabilities[atom_slot[active[a]]] =
          std::exp(atom_log_weight[a] - lse);
    }
  }
  return policy;
}

ClosedLoopResult run_closed_loop(const DynamicsModel& dyn,
                                 const DiscreteInputSet& actions,
                                 const NoiseModel& noise,
                                 const CostSchedule& costs,
                                 const Eigen::VectorXd& x0, int S,
                                 const RngStream& rng, int workers) {
  const int N = costs.horizon().final_stage();
  if (x0.size() != dyn.state_dim || !x0.allFinite()) {
    throw std::invalid_argument("run_closed_loop: bad initial state");
  }

  ClosedLoopResult result;
  result.trajectory.start_stage = 0;
  result.trajectory.states.reserve(N + 1);
  result.trajectory.controls.reserve(N);
  result.policy_log.reserve(N);
  result.trajectory.states.push_back(x0);

  Eigen::VectorXd next(dyn.state_dim);
  for (int k = 0; k < N; ++k) {
    const RngStream stage_rng = rng.substream(static_cast<std::uint64_t>(k));
    DiscreteActionPolicy policy =
        optimal_action_probs(dyn, actions, noise, costs, k,
                             result.trajectory.states.back(), S,
                             stage_rng.substream(0), workers);

    RngStream select = stage_rng.substream(1);
    const double u = select.uniform();
    long double cum = 0.0L;
    int chosen = -1;
    for (int j = 0; j < policy.probabilities.size(); ++j) {
      const double pj = policy.probabilities[j];
      if (pj <= 0.0) continue;
      cum += static_cast<long double>(pj);
      chosen = j;
      if (static_cast<double>(cum) > u) break;
    }
    if (chosen < 0) {
      throw EstimationFailed("run_closed_loop: empty policy", k);
    }

    dyn.step_into(result.trajectory.states.back(), actions.actions[chosen], next);
    if (!next.allFinite()) throw RolloutDiverged(k + 1);
    result.trajectory.controls.push_back(actions.actions[chosen]);
    result.trajectory.states.push_back(next);
    result.policy_log.push_back(std::move(policy));
  }
  return result;
}

}  // namespace klc
