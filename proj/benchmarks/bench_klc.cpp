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

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "klc/cart_pole.hpp"
#include "klc/discrete_control.hpp"
#include "klc/lqg.hpp"
#include "klc/noise.hpp"
#include "klc/path_integral.hpp"
#include "klc/problem.hpp"
#include "klc/rng.hpp"

namespace {

klc::LqgProblem scalar_problem() {
  return klc::make_lqg_problem(Eigen::MatrixXd::Constant(1, 1, 0.85),
                               Eigen::MatrixXd::Constant(1, 1, 0.10),
                               Eigen::MatrixXd::Constant(1, 1, 3.0),
                               Eigen::MatrixXd::Constant(1, 1, 1.5), 30);
}

void BM_EstimateLogDesirability(benchmark::State& state) {
  const klc::LqgProblem prob = scalar_problem();
  const klc::DynamicsModel dyn = klc::make_linear_dynamics(prob.A, prob.B);
  const klc::NoiseModel noise = klc::NoiseModel::gaussian(prob.Sigma[0]);
  const klc::CostSchedule costs =
      klc::make_quadratic_cost(prob.horizon(), prob.Q[0]);
  const klc::RngStream rng(1);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 1.0);
  const int samples = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        klc::estimate_log_desirability(dyn, noise, costs, 0, x, samples, rng));
  }
  state.SetItemsProcessed(state.iterations() * samples);
}
BENCHMARK(BM_EstimateLogDesirability)->Arg(100)->Arg(1000)->Arg(3000);

void BM_SolveRiccati(benchmark::State& state) {
  const int n = 3;
  klc::RngStream g(2);
  Eigen::MatrixXd a(n, n), b(n, n), q(n, n), r(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a(i, j) = 0.2 * g.normal();
      b(i, j) = (i == j) ? 1.0 : 0.1 * g.normal();
      r(i, j) = g.normal();
    }
  }
  q = r * r.transpose() + Eigen::MatrixXd::Identity(n, n);
  const klc::LqgProblem prob =
      klc::make_lqg_problem(a, b, q, Eigen::MatrixXd::Identity(n, n), 30);
  for (auto _ : state) {
    benchmark::DoNotOptimize(klc::solve_riccati(prob));
  }
}
BENCHMARK(BM_SolveRiccati);

void BM_ForwardDesirability(benchmark::State& state) {
  const klc::LqgProblem prob = scalar_problem();
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(klc::log_desirability_forward(prob, 0, x));
  }
}
BENCHMARK(BM_ForwardDesirability);

void BM_CartPoleDecision(benchmark::State& state) {
  const klc::DynamicsModel dyn =
      klc::make_cart_pole_dynamics(klc::CartPoleParams{});
  const klc::CostSchedule costs = klc::make_cart_pole_cost(
      klc::default_cart_pole_weights(), klc::Horizon(60));
  const klc::DiscreteInputSet actions = klc::make_scalar_grid(-20.0, 20.0, 21);
  const klc::NoiseModel noise = klc::discretized_gaussian_pmf(actions, 5.0);
  Eigen::VectorXd x0(4);
  x0 << 2.0, 0.0, 0.5, 0.0;
  const klc::RngStream rng(3);
  const int samples = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(klc::optimal_action_probs(
        dyn, actions, noise, costs, 0, x0, samples, rng));
  }
  state.SetItemsProcessed(state.iterations() * samples * 21);
}
BENCHMARK(BM_CartPoleDecision)->Arg(100)->Arg(500);

}  // namespace

BENCHMARK_MAIN();
