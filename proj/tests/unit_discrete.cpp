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

#include <cmath>
#include <limits>
#include <vector>

#include <doctest.h>

#include "klc/cart_pole.hpp"
#include "klc/discrete_control.hpp"
#include "klc/errors.hpp"
#include "klc/noise.hpp"
#include "klc/numeric.hpp"
#include "klc/path_integral.hpp"
#include "klc/problem.hpp"
#include "klc/rng.hpp"
#include "klc/rollout.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

klc::DynamicsModel leaky_integrator() {
  klc::DynamicsModel dyn;
  dyn.state_dim = 1;
  dyn.input_dim = 1;
  dyn.step_into = [](const VectorXd& x, const VectorXd& u, VectorXd& next) {
    next.resize(1);
    next[0] = 0.8 * x[0] + u[0];
  };
  return dyn;
}

klc::NoiseModel three_point_noise() {
  std::vector<VectorXd> support{VectorXd::Constant(1, -1.0),
                                VectorXd::Constant(1, 0.0),
                                VectorXd::Constant(1, 1.0)};
  return klc::NoiseModel::discrete(
      support, {std::log(0.25), std::log(0.5), std::log(0.25)});
}

klc::DiscreteInputSet three_actions() {
  return klc::make_input_set({VectorXd::Constant(1, -1.0),
                              VectorXd::Constant(1, 0.0),
                              VectorXd::Constant(1, 1.0)});
}

}  // namespace

TEST_CASE("input sets validate contents and the scalar grid is exact") {
  CHECK_THROWS_AS(klc::make_input_set({}), std::invalid_argument);
  CHECK_THROWS_AS(klc::make_input_set({VectorXd::Constant(1, 1.0),
                                       VectorXd::Constant(1, 1.0)}),
                  std::invalid_argument);

  const klc::DiscreteInputSet grid = klc::make_scalar_grid(-20.0, 20.0, 21);
  CHECK(grid.actions.size() == 21);
  for (int i = 0; i < 21; ++i) {
    CHECK(grid.actions[i][0] == doctest::Approx(-20.0 + 2.0 * i).epsilon(1e-15));
  }
  CHECK(grid.actions.front()[0] == -20.0);
  CHECK(grid.actions.back()[0] == 20.0);
}

TEST_CASE("discretized gaussian pmf is symmetric, normalized, and ratio-exact") {
  const klc::DiscreteInputSet grid = klc::make_scalar_grid(-20.0, 20.0, 21);
  const klc::NoiseModel noise = klc::discretized_gaussian_pmf(grid, 5.0);
  CHECK(noise.kind() == klc::NoiseModel::Kind::kDiscrete);
  CHECK(noise.atom_count() == 21);

  const std::vector<double>& logp = noise.log_probabilities();
  double total = 0.0;
  for (double lp : logp) total += std::exp(lp);
  CHECK(std::abs(total - 1.0) <= 1e-12);

  // Symmetry: atom i and atom 20-i carry the same mass.
  for (int i = 0; i < 21; ++i) CHECK(logp[i] == logp[20 - i]);

  // pmf(0)/pmf(2) = exp((4 - 0)/(2*25)) = exp(0.08); normalization cancels.
  const double ratio = std::exp(logp[10]) / std::exp(logp[11]);
  CHECK(ratio == doctest::Approx(1.0832870676749586).epsilon(1e-13));

  CHECK_THROWS_AS(klc::discretized_gaussian_pmf(grid, 0.0), std::domain_error);
  CHECK_THROWS_AS(klc::discretized_gaussian_pmf(grid, -2.0), std::domain_error);
}

TEST_CASE("zero cost reduces the action law to the noise pmf") {
  const klc::DynamicsModel dyn = leaky_integrator();
  const klc::NoiseModel noise = three_point_noise();
  const klc::DiscreteInputSet actions = three_actions();
  const klc::CostSchedule costs = klc::make_zero_cost(klc::Horizon(6));
  const klc::RngStream g(21);

  const klc::DiscreteActionPolicy policy = klc::optimal_action_probs(
      dyn, actions, noise, costs, 1, VectorXd::Constant(1, 0.4), 3, g);
  for (int a = 0; a < 3; ++a) {
    CHECK(policy.probabilities[a] ==
          doctest::Approx(std::exp(noise.log_probabilities()[a]))
              .epsilon(1e-13));
  }
  CHECK(policy.probabilities.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("terminal-stage action law matches direct two-term normalization") {
  klc::DynamicsModel dyn;
  dyn.state_dim = 1;
  dyn.input_dim = 1;
  dyn.step_into = [](const VectorXd& x, const VectorXd& u, VectorXd& next) {
    next.resize(1);
    next[0] = x[0] + 2.0 * u[0];  // injective in u for fixed x
  };
  std::vector<VectorXd> support{VectorXd::Constant(1, -1.0),
                                VectorXd::Constant(1, 1.0)};
  const klc::NoiseModel noise = klc::NoiseModel::discrete(
      support, {std::log(0.3), std::log(0.7)});
  const klc::DiscreteInputSet actions =
      klc::make_input_set({VectorXd::Constant(1, -1.0),
                           VectorXd::Constant(1, 1.0)});
  const int N = 4;
  const klc::CostSchedule costs = klc::make_quadratic_cost(
      klc::Horizon(N), MatrixXd::Constant(1, 1, 1.0));
  const double x = 0.7;
  const klc::RngStream g(9);

  const klc::DiscreteActionPolicy policy = klc::optimal_action_probs(
      dyn, actions, noise, costs, N - 1, VectorXd::Constant(1, x), 5, g);

  const double w0 = 0.3 * std::exp(-0.5 * (x - 2.0) * (x - 2.0));
  const double w1 = 0.7 * std::exp(-0.5 * (x + 2.0) * (x + 2.0));
  CHECK(policy.probabilities[0] ==
        doctest::Approx(w0 / (w0 + w1)).epsilon(1e-12));
  CHECK(policy.probabilities[1] ==
        doctest::Approx(w1 / (w0 + w1)).epsilon(1e-12));
}

TEST_CASE("per-action estimates reuse the shared streams bit for bit") {
  const klc::DynamicsModel dyn = leaky_integrator();
  const klc::NoiseModel noise = three_point_noise();
  const klc::DiscreteInputSet actions = three_actions();
  const klc::CostSchedule costs = klc::make_quadratic_cost(
      klc::Horizon(8), MatrixXd::Constant(1, 1, 0.6));
  const VectorXd x = VectorXd::Constant(1, 1.1);
  const int k = 2;
  const int S = 400;
  const klc::RngStream g(4096);

  const klc::DiscreteActionPolicy policy =
      klc::optimal_action_probs(dyn, actions, noise, costs, k, x, S, g);

  // Reconstruct each action's weight from the public estimator, handing every
  // action the same stream (that is the common-random-numbers contract).
  std::vector<double> log_weights(actions.actions.size());
  for (std::size_t a = 0; a < actions.actions.size(); ++a) {
    const VectorXd next = dyn.step(x, actions.actions[a]);
    const klc::DesirabilityEstimate est =
        klc::estimate_log_desirability(dyn, noise, costs, k + 1, next, S, g);
    log_weights[a] = noise.log_probabilities()[a] + est.log_z;
  }
  const double lse = klc::log_sum_exp(log_weights);
  for (std::size_t a = 0; a < actions.actions.size(); ++a) {
    CHECK(policy.probabilities[a] == std::exp(log_weights[a] - lse));
  }
}

TEST_CASE("actions outside the noise support get zero probability") {
  const klc::DynamicsModel dyn = leaky_integrator();
  std::vector<VectorXd> support{VectorXd::Constant(1, 0.0),
                                VectorXd::Constant(1, 1.0)};
  const klc::NoiseModel noise = klc::NoiseModel::discrete(
      support, {std::log(0.5), std::log(0.5)});
  const klc::DiscreteInputSet actions = three_actions();  // includes -1
  const klc::CostSchedule costs = klc::make_quadratic_cost(
      klc::Horizon(5), MatrixXd::Constant(1, 1, 0.4));
  const klc::RngStream g(77);

  const klc::DiscreteActionPolicy policy = klc::optimal_action_probs(
      dyn, actions, noise, costs, 0, VectorXd::Zero(1), 50, g);
  CHECK(policy.probabilities[0] == 0.0);
  CHECK(policy.probabilities.sum() == doctest::Approx(1.0).epsilon(1e-12));

  // The noise support must be contained in the action set.
  const klc::DiscreteInputSet too_small =
      klc::make_input_set({VectorXd::Constant(1, 0.0)});
  CHECK_THROWS_AS(klc::optimal_action_probs(dyn, too_small, noise, costs, 0,
                                            VectorXd::Zero(1), 50, g),
                  std::invalid_argument);

  // Gaussian noise is rejected here; this path is discrete-only.
  const klc::NoiseModel gaussian =
      klc::NoiseModel::gaussian(MatrixXd::Identity(1, 1));
  CHECK_THROWS_AS(klc::optimal_action_probs(dyn, actions, gaussian, costs, 0,
                                            VectorXd::Zero(1), 50, g),
                  std::invalid_argument);
}

TEST_CASE("support actions stay distinct under the dynamics on the testbed") {
  // Corollary-style uniqueness premise: f(x, .) is injective on the support,
  // so the per-action construction is the unique optimal policy.
  const klc::DynamicsModel dyn = leaky_integrator();
  const klc::NoiseModel noise = three_point_noise();
  klc::RngStream g(13);
  for (int rep = 0; rep < 20; ++rep) {
    const VectorXd x = VectorXd::Constant(1, 3.0 * (g.uniform() - 0.5));
    std::vector<double> images;
    for (int a = 0; a < noise.atom_count(); ++a) {
      images.push_back(dyn.step(x, noise.support()[a])[0]);
    }
    for (std::size_t i = 0; i < images.size(); ++i) {
      for (std::size_t j = i + 1; j < images.size(); ++j) {
        CHECK(images[i] != images[j]);
      }
    }
  }
}

TEST_CASE("closed loop is deterministic and respects the dynamics") {
  const klc::CartPoleParams params;
  const klc::DynamicsModel dyn = klc::make_cart_pole_dynamics(params);
  const klc::Horizon horizon(8);
  const klc::CostSchedule costs =
      klc::make_cart_pole_cost(klc::default_cart_pole_weights(), horizon);
  const klc::DiscreteInputSet actions = klc::make_scalar_grid(-20.0, 20.0, 21);
  const klc::NoiseModel noise = klc::discretized_gaussian_pmf(actions, 5.0);
  VectorXd x0(4);
  x0 << 2.0, 0.0, 0.5, 0.0;
  const klc::RngStream g(31337);

  const klc::ClosedLoopResult a =
      klc::run_closed_loop(dyn, actions, noise, costs, x0, 150, g, 1);
  const klc::ClosedLoopResult b =
      klc::run_closed_loop(dyn, actions, noise, costs, x0, 150, g, 2);

  REQUIRE(a.trajectory.states.size() == 9);
  REQUIRE(a.trajectory.controls.size() == 8);
  REQUIRE(a.policy_log.size() == 8);
  for (int k = 0; k <= 8; ++k) {
    CHECK((a.trajectory.states[k] - b.trajectory.states[k])
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
  for (int k = 0; k < 8; ++k) {
    // The applied action is one of the grid actions and the recorded policy
    // is a simplex.
    CHECK(a.policy_log[k].probabilities.size() == 21);
    CHECK(a.policy_log[k].probabilities.minCoeff() >= 0.0);
    CHECK(a.policy_log[k].probabilities.sum() ==
          doctest::Approx(1.0).epsilon(1e-12));
    const VectorXd re = dyn.step(a.trajectory.states[k],
                                 a.trajectory.controls[k]);
    CHECK((re - a.trajectory.states[k + 1]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("zero cost makes the closed loop match the reference chain in law") {
  const klc::DynamicsModel dyn = leaky_integrator();
  const klc::NoiseModel noise = three_point_noise();
  const klc::DiscreteInputSet actions = three_actions();
  const int N = 6;
  const klc::CostSchedule costs = klc::make_zero_cost(klc::Horizon(N));
  const VectorXd x0 = VectorXd::Constant(1, 0.5);
  const klc::RngStream g(2626);

  const int n = 600;
  double sum_a = 0.0, sq_a = 0.0, sum_b = 0.0, sq_b = 0.0;
  for (int i = 0; i < n; ++i) {
    const klc::ClosedLoopResult run = klc::run_closed_loop(
        dyn, actions, noise, costs, x0, 1, g.substream(2 * i));
    const double xa = run.trajectory.states[N][0];
    sum_a += xa;
    sq_a += xa * xa;

    klc::RngStream ref_rng = g.substream(2 * i + 1);
    const klc::Trajectory ref = klc::rollout_noise_driven(
        dyn, noise, x0, 0, klc::Horizon(N), ref_rng);
    const double xb = ref.states[N][0];
    sum_b += xb;
    sq_b += xb * xb;
  }
  const double mean_a = sum_a / n, mean_b = sum_b / n;
  const double var_a = sq_a / n - mean_a * mean_a;
  const double var_b = sq_b / n - mean_b * mean_b;
  const double z =
      (mean_a - mean_b) / std::sqrt(var_a / n + var_b / n);
  CHECK(std::abs(z) < 2.5758293035489004);  // two-sided p > 0.01
}

TEST_CASE("closed loop surfaces estimation failures with the stage index") {
  const klc::DynamicsModel dyn = leaky_integrator();
  const klc::NoiseModel noise = three_point_noise();
  const klc::DiscreteInputSet actions = three_actions();
  const klc::CostSchedule costs(
      klc::Horizon(3), [](int, const VectorXd&) { return 0.0; },
      [](const VectorXd&) {
        return std::numeric_limits<double>::infinity();
      });
  const klc::RngStream g(4);
  try {
    klc::run_closed_loop(dyn, actions, noise, costs, VectorXd::Zero(1), 4, g);
    FAIL("expected EstimationFailed");
  } catch (const klc::EstimationFailed& e) {
    CHECK(e.stage() >= 0);
  }
}
