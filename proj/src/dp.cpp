#include "sfde/dp.hpp"

#include <cmath>

namespace sfde {

namespace {

void check_policy(const TabularMdp& mdp, const Policy& policy) {
  require(static_cast<int>(policy.action.size()) == mdp.num_states(), ErrorKind::ShapeMismatch,
          "policy must have one action per state");
  for (int a : policy.action)
    require(a >= 0 && a < mdp.num_actions(), ErrorKind::InvalidArgument,
            "policy action out of range");
}

// Row s of the result is P(. | s, pi(s)).
Matrix policy_transition(const TabularMdp& mdp, const Policy& policy) {
  Matrix p(mdp.num_states(), mdp.num_states());
  for (int s = 0; s < mdp.num_states(); ++s) p.row(s) = mdp.transition_row(s, policy.action[s]);
  return p;
}

Matrix reshape_pairs(const TabularMdp& mdp, const Vector& values) {
  Matrix q(mdp.num_states(), mdp.num_actions());
  for (int s = 0; s < mdp.num_states(); ++s)
    for (int a = 0; a < mdp.num_actions(); ++a) q(s, a) = values(mdp.pair_index(s, a));
  return q;
}

}  // namespace

QTable value_iteration(const TabularMdp& mdp, double tol, int max_iters) {
  require(tol > 0.0, ErrorKind::InvalidArgument, "tol must be positive");
  const Vector r = mdp.rewards();
  const Matrix& p = mdp.transition();
  Vector v = Vector::Zero(mdp.num_states());
  Vector q = Vector::Zero(mdp.num_pairs());
  double residual = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    Vector next_q = r + mdp.gamma() * (p * v);
    const Matrix table = reshape_pairs(mdp, next_q);
    const Vector next_v = table.rowwise().maxCoeff();
    residual = (next_q - q).cwiseAbs().maxCoeff();
    q = std::move(next_q);
    v = next_v;
    // residual: sup-norm change of Q over the last backup.
    if (residual < tol) return {reshape_pairs(mdp, q), it, residual};
  }
  throw Error(ErrorKind::NonConvergence,
              "value iteration did not converge; residual " + std::to_string(residual));
}

QTable policy_evaluation_q(const TabularMdp& mdp, const Policy& policy) {
  check_policy(mdp, policy);
  const int n = mdp.num_states();
  const Vector r = mdp.rewards();
  Vector r_pi(n);
  for (int s = 0; s < n; ++s) r_pi(s) = r(mdp.pair_index(s, policy.action[s]));
  const Matrix system = Matrix::Identity(n, n) - mdp.gamma() * policy_transition(mdp, policy);
  const Vector v = system.partialPivLu().solve(r_pi);
  const Vector q = r + mdp.gamma() * (mdp.transition() * v);
  return {reshape_pairs(mdp, q), 0, 0.0};
}

ExactSf exact_successor_features(const TabularMdp& mdp, const Policy& policy) {
  check_policy(mdp, policy);
  const int n = mdp.num_states();
  const Matrix& phi = mdp.features().phi;
  Matrix phi_pi(n, phi.cols());
  for (int s = 0; s < n; ++s) phi_pi.row(s) = phi.row(mdp.pair_index(s, policy.action[s]));
  const Matrix system = Matrix::Identity(n, n) - mdp.gamma() * policy_transition(mdp, policy);
  const Matrix psi_v = system.partialPivLu().solve(phi_pi);
  return {phi + mdp.gamma() * (mdp.transition() * psi_v)};
}

Policy greedy_policy(const QTable& table) {
  Policy policy;
  policy.action.resize(static_cast<std::size_t>(table.num_states()));
  for (int s = 0; s < table.num_states(); ++s) {
    int best = 0;
    for (int a = 1; a < table.num_actions(); ++a)
      if (table.q(s, a) > table.q(s, best)) best = a;
    policy.action[static_cast<std::size_t>(s)] = best;
  }
  return policy;
}

Vector state_values(const QTable& table) { return table.q.rowwise().maxCoeff(); }

Matrix sf_to_q(const TabularMdp& mdp, const Matrix& psi, const Vector& w) {
  require(psi.rows() == mdp.num_pairs() && psi.cols() == w.size(), ErrorKind::ShapeMismatch,
          "psi must be (S*A) x D and match w");
  return reshape_pairs(mdp, psi * w);
}

}  // namespace sfde
