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

#include "klc/finite_mdp.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "klc/errors.hpp"
#include "klc/numeric.hpp"

namespace klc {
namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

FiniteMdp make_finite_mdp(std::vector<Eigen::MatrixXd> transitions,
                          std::vector<Eigen::VectorXd> stage_costs) {
  if (transitions.empty() || stage_costs.size() != transitions.size() + 1) {
    throw std::invalid_argument(
        "FiniteMdp: need transitions for stages 0..N-1 and costs for 0..N");
  }
  const auto n = stage_costs.front().size();
  if (n == 0) {
    throw std::invalid_argument("FiniteMdp: empty state space");
  }
  for (const auto& costs : stage_costs) {
    if (costs.size() != n) {
      throw std::invalid_argument("FiniteMdp: cost vector length mismatch");
    }
  }
  for (const auto& p : transitions) {
    if (p.rows() != n || p.cols() != n) {
      throw std::invalid_argument("FiniteMdp: transition matrix shape mismatch");
    }
    if ((p.array() < 0.0).any()) {
      throw std::invalid_argument("FiniteMdp: negative transition probability");
    }
    for (Eigen::Index x = 0; x < n; ++x) {
      if (std::abs(p.row(x).sum() - 1.0) > 1e-12) {
        throw std::invalid_argument("FiniteMdp: transition row does not sum to 1");
      }
    }
  }
  FiniteMdp mdp;
  mdp.transitions = std::move(transitions);
  mdp.stage_costs = std::move(stage_costs);
  return mdp;
}

DesirabilityTable solve_desirability(const FiniteMdp& mdp) {
  const int n = mdp.state_count();
  const int N = mdp.final_stage();

  DesirabilityTable table;
  table.log_z.resize(N + 1);
  table.log_z[N] = -mdp.stage_costs[N];

  std::vector<double> terms(static_cast<std::size_t>(n));
  for (int k = N - 1; k >= 0; --k) {
    const Eigen::MatrixXd& p = mdp.transitions[k];
    Eigen::VectorXd& log_z = table.log_z[k];
    log_z.resize(n);
    bool any_alive = false;
    for (int x = 0; x < n; ++x) {
      for (int j = 0; j < n; ++j) {
        const double pj = p(x, j);
        terms[j] = pj > 0.0 ? std::log(pj) + table.log_z[k + 1][j] : kNegInf;
      }
      const double lse = log_sum_exp(terms);
      log_z[x] = -mdp.stage_costs[k][x] + lse;
      if (log_z[x] > kNegInf) any_alive = true;
    }
    if (!any_alive) throw DegenerateState(k, 0);
  }
  return table;
}

Eigen::VectorXd optimal_transition(const FiniteMdp& mdp,
                                   const DesirabilityTable& table, int k,
                                   int state) {
  const int n = mdp.state_count();
  if (k < 0 || k >= mdp.final_stage()) {
    throw std::invalid_argument("optimal_transition: stage out of range");
  }
  if (state < 0 || state >= n) {
    throw std::invalid_argument("optimal_transition: state out of range");
  }

  const Eigen::MatrixXd& p = mdp.transitions[k];
  std::vector<double> log_weights(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double pj = p(state, j);
    log_weights[j] =
        pj > 0.0 ? std::log(pj) + table.log_z[k + 1][j] : kNegInf;
  }
  const double lse = log_sum_exp(log_weights);
  if (lse == kNegInf) throw DegenerateState(k, state);

  Eigen::VectorXd row(n);
  for (int j = 0; j < n; ++j) {
    row[j] = log_weights[j] > kNegInf ? std::exp(log_weights[j] - lse) : 0.0;
  }
  return row;
}

double exact_value(const FiniteMdp& mdp, const DesirabilityTable& table, int k,
                   int state) {
  if (k < 0 || k > mdp.final_stage()) {
    throw std::invalid_argument("exact_value: stage out of range");
  }
  if (state < 0 || state >= mdp.state_count()) {
    throw std::invalid_argument("exact_value: state out of range");
  }
  return -table.log_z[k][state];
}

}  // namespace klc
