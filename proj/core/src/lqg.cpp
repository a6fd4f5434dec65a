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

#include "klc/lqg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "klc/errors.hpp"

namespace klc {
namespace {

void require_spd(const Eigen::MatrixXd& m, const std::string& name) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument("LqgProblem: " + name + " must be square");
  }
  if (!m.isApprox(m.transpose(), 1e-10)) {
    throw std::invalid_argument("LqgProblem: " + name + " must be symmetric");
  }
  if (Eigen::LLT<Eigen::MatrixXd>(m).info() != Eigen::Success) {
    throw std::invalid_argument("LqgProblem: " + name +
                                " must be positive definite");
  }
}

double log_det_spd(const Eigen::MatrixXd& m, int stage, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (m + m.transpose()));
  if (llt.info() != Eigen::Success) {
    throw SolverError(std::string(what) + " lost positive definiteness", stage);
  }
  return 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

// Factored form of (Sigma_k^{-1} + B' P_{k+1} B) used by the Riccati step and
// the policy; Sigma is factored once, its inverse appears only via solves.
Eigen::LLT<Eigen::MatrixXd> input_weight_factor(const LqgProblem& prob,
                                                const Eigen::MatrixXd& P_next,
                                                int k) {
  const int n = prob.dim();
  const Eigen::LLT<Eigen::MatrixXd> sigma_llt(prob.Sigma[k]);
  Eigen::MatrixXd G =
      sigma_llt.solve(Eigen::MatrixXd::Identity(n, n)) +
      prob.B.transpose() * P_next * prob.B;
  G = 0.5 * (G + G.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) {
    throw SolverError("input weight matrix lost positive definiteness", k);
  }
  return llt;
}

// Dense pieces of the batch (forward) representation over stages k..N:
// stacked powers of A, the noise-to-state map G = L W L', and the block
// diagonal of Q_{k+1}..Q_N with its Cholesky factor and inverse.
struct BatchBlocks {
  Eigen::MatrixXd Abar;
  Eigen::MatrixXd G;
  Eigen::MatrixXd Qblk;
  Eigen::MatrixXd Qblk_chol;
  Eigen::MatrixXd Qblk_inv;
};

BatchBlocks build_batch_blocks(const LqgProblem& prob, int k) {
  const int n = prob.dim();
  const int N = prob.final_stage();
  const int m = N - k;
  const int nm = n * m;

  BatchBlocks blocks;
  blocks.Abar.resize(nm, n);
  Eigen::MatrixXd power = prob.A;
  for (int i = 0; i < m; ++i) {
    blocks.Abar.middleRows(i * n, n) = power;
    if (i + 1 < m) power = prob.A * power;
  }

  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(nm, nm);
  for (int j = 0; j < m; ++j) {
    Eigen::MatrixXd entry = prob.B;
    for (int i = j; i < m; ++i) {
      L.block(i * n, j * n, n, n) = entry;
      if (i + 1 < m) entry = prob.A * entry;
    }
  }

  // Arrival states k+1..N are driven by noises w_k..w_{N-1}, so the block
  // covariance stacks Sigma_k..Sigma_{N-1} in that order.
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(nm, nm);
  blocks.Qblk = Eigen::MatrixXd::Zero(nm, nm);
  blocks.Qblk_chol = Eigen::MatrixXd::Zero(nm, nm);
  blocks.Qblk_inv = Eigen::MatrixXd::Zero(nm, nm);
  for (int i = 0; i < m; ++i) {
    W.block(i * n, i * n, n, n) = prob.Sigma[k + i];
    const Eigen::MatrixXd& Qi = prob.Q[k + 1 + i];
    blocks.Qblk.block(i * n, i * n, n, n) = Qi;
    const Eigen::LLT<Eigen::MatrixXd> llt(Qi);
    blocks.Qblk_chol.block(i * n, i * n, n, n) = Eigen::MatrixXd(llt.matrixL());
    blocks.Qblk_inv.block(i * n, i * n, n, n) =
        llt.solve(Eigen::MatrixXd::Identity(n, n));
  }

  blocks.G = L * W * L.transpose();
  blocks.G = 0.5 * (blocks.G + blocks.G.transpose());
  return blocks;
}

// 0.5 x'(Q_k + Abar'(Qblk^{-1} + G)^{-1} Abar)x, shared by the forward
// desirability and the batch LQR value.
double batch_quadratic(const LqgProblem& prob, const BatchBlocks& blocks,
                       int k, const Eigen::VectorXd& x) {
  Eigen::MatrixXd H = blocks.Qblk_inv + blocks.G;
  H = 0.5 * (H + H.transpose());
  const Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    throw SolverError("batch representation matrix lost positive definiteness", k);
  }
  const Eigen::VectorXd stacked = blocks.Abar * x;
  return 0.5 * (x.dot(prob.Q[k] * x) + stacked.dot(llt.solve(stacked)));
}

void check_stage_state(const LqgProblem& prob, int k, int max_stage,
                       const Eigen::VectorXd& x, const char* where) {
  if (k < 0 || k > max_stage) {
    throw std::invalid_argument(std::string(where) + ": stage out of range");
  }
  if (x.size() != prob.dim()) {
    throw std::invalid_argument(std::string(where) + ": state dimension mismatch");
  }
}

}  // namespace

LqgProblem make_lqg_problem(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            std::vector<Eigen::MatrixXd> Q,
                            std::vector<Eigen::MatrixXd> Sigma) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw std::invalid_argument("LqgProblem: A must be square");
  }
  const int n = static_cast<int>(A.rows());
  if (B.rows() != n || B.cols() != n) {
    throw std::invalid_argument("LqgProblem: B must match A's shape");
  }
  if (!Eigen::FullPivLU<Eigen::MatrixXd>(B).isInvertible()) {
    throw std::invalid_argument("LqgProblem: B must be invertible");
  }
  if (Q.size() < 2 || Sigma.size() + 1 != Q.size()) {
    throw std::invalid_argument(
        "LqgProblem: need Q_0..Q_N and Sigma_0..Sigma_{N-1} with N >= 1");
  }
  for (std::size_t k = 0; k < Q.size(); ++k) {
    if (Q[k].rows() != n) {
      throw std::invalid_argument("LqgProblem: Q dimension mismatch");
    }
    require_spd(Q[k], "Q_" + std::to_string(k));
  }
  for (std::size_t k = 0; k < Sigma.size(); ++k) {
    if (Sigma[k].rows() != n) {
      throw std::invalid_argument("LqgProblem: Sigma dimension mismatch");
    }
    require_spd(Sigma[k], "Sigma_" + std::to_string(k));
  }
  LqgProblem prob;
  prob.A = A;
  prob.B = B;
  prob.Q = std::move(Q);
  prob.Sigma = std::move(Sigma);
  return prob;
}

LqgProblem make_lqg_problem(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            const Eigen::MatrixXd& Q,
                            const Eigen::MatrixXd& Sigma, int final_stage) {
  if (final_stage < 1) {
    throw std::invalid_argument("LqgProblem: horizon must be >= 1");
  }
  return make_lqg_problem(
      A, B, std::vector<Eigen::MatrixXd>(final_stage + 1, Q),
      std::vector<Eigen::MatrixXd>(final_stage, Sigma));
}

RiccatiSolution solve_riccati(const LqgProblem& prob) {
  const int n = prob.dim();
  const int N = prob.final_stage();

  RiccatiSolution sol;
  sol.P.resize(N + 1);
  sol.log_prefactor.assign(N + 1, 0.0);
  sol.P[N] = 0.5 * (prob.Q[N] + prob.Q[N].transpose());

  for (int k = N - 1; k >= 0; --k) {
    const Eigen::MatrixXd& P_next = sol.P[k + 1];
    const auto weight_llt = input_weight_factor(prob, P_next, k);

    const Eigen::MatrixXd BtPA = prob.B.transpose() * P_next * prob.A;
    Eigen::MatrixXd P = prob.Q[k] + prob.A.transpose() * P_next * prob.A -
                        BtPA.transpose() * weight_llt.solve(BtPA);
    P = 0.5 * (P + P.transpose());
    if (Eigen::LLT<Eigen::MatrixXd>(P).info() != Eigen::Success) {
      throw SolverError("Riccati recursion lost positive definiteness", k);
    }
    sol.P[k] = P;

    // det(I + P B Sigma B') = det(I + (B Ls)' P (B Ls)) with Sigma = Ls Ls',
    // which keeps the determinant argument symmetric positive definite.
    const Eigen::LLT<Eigen::MatrixXd> sigma_llt(prob.Sigma[k]);
    const Eigen::MatrixXd BLs = prob.B * Eigen::MatrixXd(sigma_llt.matrixL());
    const Eigen::MatrixXd gram =
        Eigen::MatrixXd::Identity(n, n) + BLs.transpose() * P_next * BLs;
    sol.log_prefactor[k] =
        sol.log_prefactor[k + 1] -
        0.5 * log_det_spd(gram, k, "desirability prefactor");
  }
  return sol;
}

GaussianPolicyStage policy_stage(const LqgProblem& prob,
                                 const RiccatiSolution& sol, int k) {
  if (k < 0 || k >= prob.final_stage()) {
    throw std::invalid_argument("policy_stage: stage out of range");
  }
  const int n = prob.dim();
  const auto weight_llt = input_weight_factor(prob, sol.P[k + 1], k);

  GaussianPolicyStage stage;
  stage.covariance = weight_llt.solve(Eigen::MatrixXd::Identity(n, n));
  stage.covariance = 0.5 * (stage.covariance + stage.covariance.transpose());
  stage.gain = weight_llt.solve(prob.B.transpose() * sol.P[k + 1] * prob.A);
  return stage;
}

double log_desirability_backward(const LqgProblem& prob,
                                 const RiccatiSolution& sol, int k,
                                 const Eigen::VectorXd& x) {
  check_stage_state(prob, k, prob.final_stage(), x, "log_desirability_backward");
  return sol.log_prefactor[k] - 0.5 * x.dot(sol.P[k] * x);
}

double log_desirability_forward(const LqgProblem& prob, int k,
                                const Eigen::VectorXd& x) {
  const int N = prob.final_stage();
  check_stage_state(prob, k, N, x, "log_desirability_forward");
  if (k == N) return -0.5 * x.dot(prob.Q[N] * x);

  const BatchBlocks blocks = build_batch_blocks(prob, k);
  // det(I + Qblk G) = det(I + Lq' G Lq) with Qblk = Lq Lq'.
  const int nm = static_cast<int>(blocks.G.rows());
  const Eigen::MatrixXd gram =
      Eigen::MatrixXd::Identity(nm, nm) +
      blocks.Qblk_chol.transpose() * blocks.G * blocks.Qblk_chol;
  const double log_det = log_det_spd(gram, k, "forward representation determinant");
  return -0.5 * log_det - batch_quadratic(prob, blocks, k, x);
}

double lqr_value(const LqgProblem& prob, int k, const Eigen::VectorXd& x,
                 LqrValueMode mode) {
  const int N = prob.final_stage();
  check_stage_state(prob, k, N, x, "lqr_value");
  if (mode == LqrValueMode::kRiccati) {
    const RiccatiSolution sol = solve_riccati(prob);
    return 0.5 * x.dot(sol.P[k] * x);
  }
  if (k == N) return 0.5 * x.dot(prob.Q[N] * x);
  const BatchBlocks blocks = build_batch_blocks(prob, k);
  return batch_quadratic(prob, blocks, k, x);
}

GaussianMoments noncausal_policy_stage(const LqgProblem& prob,
                                       const RiccatiSolution& sol, int k,
                                       const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& w) {
  check_stage_state(prob, k, prob.final_stage() - 1, x, "noncausal_policy_stage");
  if (w.size() != prob.dim()) {
    throw std::invalid_argument("noncausal_policy_stage: noise dimension mismatch");
  }
  const GaussianPolicyStage causal = policy_stage(prob, sol, k);
  const Eigen::LLT<Eigen::MatrixXd> sigma_llt(prob.Sigma[k]);

  GaussianMoments moments;
  moments.covariance = causal.covariance;
  moments.mean = -(causal.covariance * sigma_llt.solve(w)) - causal.gain * x;
  return moments;
}

}  // namespace klc
