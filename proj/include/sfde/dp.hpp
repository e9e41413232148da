#pragma once

#include "sfde/env.hpp"

namespace sfde {

/// Q values as an S x A matrix.
struct QTable {
  Matrix q;
  int iterations = 0;
  double residual = 0.0;

  int num_states() const { return static_cast<int>(q.rows()); }
  int num_actions() const { return static_cast<int>(q.cols()); }
};

/// psi^pi as an (S*A) x D matrix, rows indexed by TabularMdp::pair_index.
struct ExactSf {
  Matrix psi;
};

/// Bellman optimality fixed point; throws NonConvergence past max_iters.
QTable value_iteration(const TabularMdp& mdp, double tol = 1e-10, int max_iters = 100000);

/// Solves Q = R + gamma P_pi Q with a dense LU factorization.
QTable policy_evaluation_q(const TabularMdp& mdp, const Policy& policy);

/// Solves (I - gamma P_pi) psi_d = phi_d for every feature dimension.
ExactSf exact_successor_features(const TabularMdp& mdp, const Policy& policy);

/// Per-state argmax; ties go to the lowest action index.
Policy greedy_policy(const QTable& table);

/// State values V(s) = max_a Q(s,a).
Vector state_values(const QTable& table);

/// Q(s,a) = psi(s,a)^T w reshaped to S x A.
Matrix sf_to_q(const TabularMdp& mdp, const Matrix& psi, const Vector& w);

}  // namespace sfde
