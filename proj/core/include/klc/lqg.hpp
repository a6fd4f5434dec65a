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

#ifndef KLC_LQG_HPP_
#define KLC_LQG_HPP_

#include <Eigen/Dense>
#include <vector>

#include "klc/problem.hpp"

namespace klc {

/// Linear dynamics x_{k+1} = A x_k + B u_k with quadratic stage costs
/// 0.5 x' Q_k x (k = 0..N) and Gaussian input noise covariances Sigma_k
/// (k = 0..N-1). B must be square and invertible; every Q_k and Sigma_k must
/// be symmetric positive definite. Build through make_lqg_problem, which
/// checks all of that.
struct LqgProblem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  std::vector<Eigen::MatrixXd> Q;
  std::vector<Eigen::MatrixXd> Sigma;

  int dim() const { return static_cast<int>(A.rows()); }
  int final_stage() const { return static_cast<int>(Sigma.size()); }
  Horizon horizon() const { return Horizon(final_stage()); }
};

LqgProblem make_lqg_problem(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            std::vector<Eigen::MatrixXd> Q,
                            std::vector<Eigen::MatrixXd> Sigma);

/// Stationary weights: Q_k = Q for all k (terminal included), Sigma_k = Sigma.
LqgProblem make_lqg_problem(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            const Eigen::MatrixXd& Q,
                            const Eigen::MatrixXd& Sigma, int final_stage);

/// Backward products of the value recursion: the quadratic kernels P_k and
/// the log prefactors of the desirability function,
///   log_prefactor_k = -0.5 * sum_{s=k+1}^{N} log det(I + P_s B Sigma_{s-1} B').
struct RiccatiSolution {
  std::vector<Eigen::MatrixXd> P;
  std::vector<double> log_prefactor;
};

/// Gaussian optimal policy at one stage: u ~ N(-gain * x, covariance) with
///   covariance C_k = (Sigma_k^{-1} + B' P_{k+1} B)^{-1},
///   gain       K_k = C_k B' P_{k+1} A.
struct GaussianPolicyStage {
  Eigen::MatrixXd gain;
  Eigen::MatrixXd covariance;
};

/// Mean and covariance of a Gaussian control law.
struct GaussianMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Backward recursion P_k = Q_k + A'P_{k+1}A
///   - A'P_{k+1}B (Sigma_k^{-1} + B'P_{k+1}B)^{-1} B'P_{k+1}A, P_N = Q_N,
/// with symmetrization each step. Throws SolverError if a P_k loses positive
/// definiteness.
RiccatiSolution solve_riccati(const LqgProblem& prob);

/// Optimal Gaussian policy parameters at stage k in [0, N-1].
GaussianPolicyStage policy_stage(const LqgProblem& prob,
                                 const RiccatiSolution& sol, int k);

/// log Z(k,x) from the backward solution: log_prefactor_k - 0.5 x'P_k x.
double log_desirability_backward(const LqgProblem& prob,
                                 const RiccatiSolution& sol, int k,
                                 const Eigen::VectorXd& x);

/// log Z(k,x) from the forward (batch) representation: stacked powers of A,
/// the block-triangular noise-to-state map, and one dense determinant.
/// O(n^3 (N-k)^3); exists to cross-validate the backward form.
double log_desirability_forward(const LqgProblem& prob, int k,
                                const Eigen::VectorXd& x);

enum class LqrValueMode { kRiccati, kBatch };

/// Value of the deterministic LQR problem with weights (Q_k, Sigma_k^{-1}),
/// evaluated either as 0.5 x'P_k x or through the batch quadratic form. The
/// two modes agree; the KL-optimal value differs from this only by the
/// state-independent prefactor.
double lqr_value(const LqgProblem& prob, int k, const Eigen::VectorXd& x,
                 LqrValueMode mode);

/// Optimal Gaussian control law when the stage-k noise w is observed before
/// choosing u (the noncausal case): covariance C_k as in policy_stage, mean
/// -C_k (Sigma_k^{-1} w + B'P_{k+1} A x). At w = 0 this is the causal policy.
GaussianMoments noncausal_policy_stage(const LqgProblem& prob,
                                       const RiccatiSolution& sol, int k,
                                       const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& w);

}  // namespace klc

#endif  // KLC_LQG_HPP_
