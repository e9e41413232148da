#include "sfde/bounds.hpp"

#include <cmath>
#include <numbers>

namespace sfde {

void BoundReport::add(BoundRow row) {
  row.slack = row.rhs - row.lhs;
  if (row.slack < -kSlackTolerance) ++violations;
  min_slack = std::min(min_slack, row.slack);
  rows.push_back(row);
}

namespace {

void check_same_shape(const TabularMdp& a, const TabularMdp& b) {
  require(a.num_states() == b.num_states() && a.num_actions() == b.num_actions(),
          ErrorKind::ShapeMismatch, "MDPs must share state and action spaces");
}

// Per-state maximum over actions.
Vector state_max(const Matrix& q) { return q.rowwise().maxCoeff(); }

Matrix optimal_q(const TabularMdp& mdp) { return value_iteration(mdp, 1e-12).q; }

}  // namespace

double delta_ij(const TabularMdp& mdp_i, const TabularMdp& mdp_j) {
  check_same_shape(mdp_i, mdp_j);
  return (mdp_i.rewards() - mdp_j.rewards()).cwiseAbs().maxCoeff();
}

Theorem1Report theorem1_bound(const TabularMdp& mdp_i, const TabularMdp& mdp_j) {
  check_same_shape(mdp_i, mdp_j);
  require(mdp_i.gamma() == mdp_j.gamma(), ErrorKind::InvalidArgument,
          "MDPs must share the discount factor");
  const double gamma = mdp_i.gamma();
  const Policy pi_i = greedy_policy(value_iteration(mdp_i, 1e-12));
  const Policy pi_j = greedy_policy(value_iteration(mdp_j, 1e-12));
  const Matrix q_ii = policy_evaluation_q(mdp_i, pi_i).q;
  const Matrix q_jj = policy_evaluation_q(mdp_j, pi_j).q;
  const Matrix q_ij = policy_evaluation_q(mdp_i, pi_j).q;
  const double delta = delta_ij(mdp_i, mdp_j);
  const double q_gap = (state_max(q_ii) - state_max(q_jj)).norm() +
                       (state_max(q_jj) - state_max(q_ij)).norm();

  Theorem1Report report;
  report.printed.name = "theorem1_printed";
  report.sketch.name = "theorem1_sketch";
  for (BoundReport* r : {&report.printed, &report.sketch})
    r->parameters = {{"gamma", gamma}, {"delta_ij", delta}, {"q_gap", q_gap}};
  const double reward_term = 2.0 * delta / (1.0 - gamma);
  for (int s = 0; s < mdp_i.num_states(); ++s) {
    for (int a = 0; a < mdp_i.num_actions(); ++a) {
      const double p_gap = (mdp_i.transition_row(s, a) - mdp_j.transition_row(s, a)).norm();
      const double dyn = gamma * p_gap * q_gap / (1.0 - gamma);
      const double lhs = q_ii(s, a) - q_ij(s, a);
      const double printed_dyn = dyn / (1.0 - gamma);
      report.printed.add({s, a, lhs, reward_term + printed_dyn, 0.0, reward_term, printed_dyn, 0.0});
      report.sketch.add({s, a, lhs, reward_term + dyn, 0.0, reward_term, dyn, 0.0});
    }
  }
  return report;
}

double BoundInputs::u_m() const {
  return std::numbers::pi * std::numbers::pi * static_cast<double>(m) * m / 6.0;
}

void BoundInputs::validate() const {
  require(delta > 0.0 && delta < 1.0, ErrorKind::Domain, "delta must lie in (0,1)");
  require(m >= 1, ErrorKind::Domain, "m must be at least 1");
  require(x_space_size >= 1, ErrorKind::Domain, "|X| must be at least 1");
}

double lemma1_epsilon(const BoundInputs& inputs, double sigma) {
  inputs.validate();
  require(sigma >= 0.0, ErrorKind::Domain, "sigma must be non-negative");
  const double arg = inputs.x_space_size * inputs.u_m() / inputs.delta;
  require(arg > 1.0, ErrorKind::Domain, "|X| u_m / delta must exceed 1");
  return std::sqrt(2.0 * std::log(arg)) * sigma;
}

Lemma2Result lemma2_epsilon(int m, double delta, const Lemma2Params& params, double sigma) {
  require(m > 1, ErrorKind::Domain, "m must exceed 1");
  require(delta > 0.0 && delta < 1.0, ErrorKind::Domain, "delta must lie in (0,1)");
  require(params.a > 0.0 && params.b > 0.0 && params.r > 0.0 && params.L > 0.0,
          ErrorKind::Domain, "a, b, r and L must be positive");
  require(sigma >= 0.0, ErrorKind::Domain, "sigma must be non-negative");
  const double u_m = std::numbers::pi * std::numbers::pi * static_cast<double>(m) * m / 6.0;
  const double arg_u = 2.0 * u_m / delta;
  const double arg_a = 4.0 * params.a / delta;
  require(arg_u > 1.0 && arg_a > 1.0, ErrorKind::Domain, "log arguments must exceed 1");
  const double root = std::sqrt(std::log(arg_a));
  const double arg_grid = 2.0 * m * params.b * params.r * root;
  require(arg_grid > 1.0, ErrorKind::Domain, "log arguments must exceed 1");
  Lemma2Result out;
  out.epsilon = std::sqrt(2.0 * std::log(arg_u) + 8.0 * std::log(arg_grid)) * sigma +
                1.0 / (static_cast<double>(m) * m);
  out.tau_m = 4.0 * static_cast<double>(m) * m * params.b * params.r * root;
  return out;
}

GpQEstimate estimate_q(const GpSfModel& model, const InputEncoding& encoding,
                       const TabularMdp& mdp, const Vector& w) {
  require(model.output_dim() == w.size(), ErrorKind::ShapeMismatch,
          "reward mapper does not match the GP output dimension");
  GpQEstimate out{Matrix(mdp.num_states(), mdp.num_actions()),
                  Matrix(mdp.num_states(), mdp.num_actions())};
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (int a = 0; a < mdp.num_actions(); ++a) {
      const Posterior post = model.posterior(encoding.encode(s, a));
      out.q(s, a) = post.mean.dot(w);
      out.sigma(s, a) = std::sqrt(post.variance(0));
    }
  }
  return out;
}

double lemma1_q_radius(const BoundInputs& inputs, const Matrix& sigma, const Vector& w) {
  return lemma1_epsilon(inputs, sigma.maxCoeff()) * w.lpNorm<1>();
}

CoverageResult lemma1_coverage_test(const TabularMdp& mdp, const Policy& policy,
                                    const Vector& w_true, double delta, int trials,
                                    const CoverageOptions& options, Rng& rng) {
  CoverageResult out;
  if (delta >= 0.99) {
    out.skipped = true;
    out.diagnostic = "delta >= 0.99: the radius shrinks toward zero, coverage is not meaningful";
    return out;
  }
  require(trials > 0 && options.m > 0, ErrorKind::InvalidArgument,
          "coverage needs positive trials and m");
  const ExactSf exact = exact_successor_features(mdp, policy);
  const Matrix q_true = sf_to_q(mdp, exact.psi, w_true);
  const InputEncoding encoding = InputEncoding::for_mdp(mdp);
  const int pairs = mdp.num_pairs();
  const int dim = mdp.feature_dim();
  const BoundInputs inputs{delta, options.m, pairs};
  const double label_sd =
      std::sqrt(options.label_noise_sq >= 0.0 ? options.label_noise_sq : options.noise.sigma_sq);
  const double w_l1 = w_true.lpNorm<1>();

  Matrix source_x(encoding.dim(), options.include_source ? pairs : 0);
  Matrix source_y(options.include_source ? pairs : 0, dim);
  if (options.include_source) {
    for (int sa = 0; sa < pairs; ++sa) {
      source_x.col(sa) = encoding.encode(sa / mdp.num_actions(), sa % mdp.num_actions());
      source_y.row(sa) = exact.psi.row(sa);
    }
  }
  std::uniform_int_distribution<int> pick(0, pairs - 1);
  std::normal_distribution<double> noise(0.0, 1.0);
  out.trials = trials;
  for (int trial = 0; trial < trials; ++trial) {
    Matrix target_x(encoding.dim(), options.m);
    Matrix target_y(options.m, dim);
    for (int k = 0; k < options.m; ++k) {
      const int sa = pick(rng);
      target_x.col(k) = encoding.encode(sa / mdp.num_actions(), sa % mdp.num_actions());
      for (int d = 0; d < dim; ++d) target_y(k, d) = exact.psi(sa, d) + label_sd * noise(rng);
    }
    const Kernel kernel =
        options.lengthscale > 0.0
            ? Kernel{options.lengthscale}
            : optimize_hyperparams(source_x, source_y, target_x, target_y, options.noise,
                                   default_lengthscale_grid());
    const GpSfModel model =
        GpSfModel::fit(source_x, source_y, target_x, target_y, kernel, options.noise);
    const GpQEstimate est = estimate_q(model, encoding, mdp, w_true);
    bool covered = true;
    for (int s = 0; s < mdp.num_states(); ++s) {
      for (int a = 0; a < mdp.num_actions(); ++a) {
        const double radius = lemma1_epsilon(inputs, est.sigma(s, a)) * w_l1;
        const double err = std::abs(q_true(s, a) - est.q(s, a));
        if (err > radius + kSlackTolerance) covered = false;
        if (radius > 0.0) out.max_ratio = std::max(out.max_ratio, err / radius);
      }
    }
    if (covered) ++out.covered;
  }
  out.fraction = static_cast<double>(out.covered) / trials;
  return out;
}

GpTransferEstimate gp_transfer_estimate(const TabularMdp& target, const TabularMdp& source,
                                        const Policy& pi, const Vector& w, int m,
                                        double lengthscale, double delta,
                                        const NoiseConfig& noise, Rng& rng) {
  check_same_shape(target, source);
  require(m > 0, ErrorKind::InvalidArgument, "need at least one target sample");
  const InputEncoding enc = InputEncoding::for_mdp(target);
  const Matrix psi_target = exact_successor_features(target, pi).psi;
  const Matrix psi_source = exact_successor_features(source, pi).psi;
  const int pairs = target.num_pairs();
  const int actions = target.num_actions();
  Matrix sx(enc.dim(), pairs);
  for (int sa = 0; sa < pairs; ++sa) sx.col(sa) = enc.encode(sa / actions, sa % actions);
  std::uniform_int_distribution<int> pick(0, pairs - 1);
  std::normal_distribution<double> normal(0.0, std::sqrt(noise.sigma_sq));
  Matrix tx(enc.dim(), m);
  Matrix ty(m, target.feature_dim());
  for (int k = 0; k < m; ++k) {
    const int sa = pick(rng);
    tx.col(k) = sx.col(sa);
    for (int d = 0; d < ty.cols(); ++d) ty(k, d) = psi_target(sa, d) + normal(rng);
  }
  const GpSfModel model = GpSfModel::fit(sx, psi_source, tx, ty, Kernel{lengthscale}, noise);
  GpQEstimate est = estimate_q(model, enc, target, w);
  const double eps = lemma1_q_radius({delta, m, pairs}, est.sigma, w);
  return {std::move(est.q), std::move(est.sigma), eps};
}

Policy gpi_policy(const std::vector<Matrix>& q_tilde) {
  require(!q_tilde.empty(), ErrorKind::InvalidArgument, "GPI needs at least one estimate");
  Matrix best = q_tilde.front();
  for (const auto& q : q_tilde) {
    require(q.rows() == best.rows() && q.cols() == best.cols(), ErrorKind::ShapeMismatch,
            "estimates must share shape");
    best = best.cwiseMax(q);
  }
  return greedy_policy(QTable{best});
}

BoundReport remark1_check(const TabularMdp& target, const std::vector<Policy>& policies,
                          const std::vector<Matrix>& q_tilde, double epsilon_m) {
  require(policies.size() == q_tilde.size() && !policies.empty(), ErrorKind::ShapeMismatch,
          "one estimate per policy");
  require(epsilon_m >= 0.0, ErrorKind::Domain, "epsilon must be non-negative");
  const double gamma = target.gamma();
  Matrix best_q = Matrix::Constant(target.num_states(), target.num_actions(),
                                   -std::numeric_limits<double>::infinity());
  double max_error = 0.0;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    const Matrix q = policy_evaluation_q(target, policies[i]).q;
    max_error = std::max(max_error, (q - q_tilde[i]).cwiseAbs().maxCoeff());
    best_q = best_q.cwiseMax(q);
  }
  const Matrix q_gpi = policy_evaluation_q(target, gpi_policy(q_tilde)).q;
  BoundReport report;
  report.name = "remark1";
  report.precondition_met = max_error <= epsilon_m + kSlackTolerance;
  report.parameters = {{"gamma", gamma}, {"epsilon_m", epsilon_m}, {"max_q_error", max_error}};
  const double rhs = 2.0 * epsilon_m / (1.0 - gamma);
  for (int s = 0; s < target.num_states(); ++s)
    for (int a = 0; a < target.num_actions(); ++a)
      report.add({s, a, best_q(s, a) - q_gpi(s, a), rhs, 0.0, 0.0, 0.0, rhs});
  return report;
}

BoundReport theorem2_bound(const TabularMdp& target, const TabularMdp& source_j,
                           const Policy& pi_j, const Vector& w_tilde, const Matrix& q_tilde_j,
                           double epsilon_m) {
  check_same_shape(target, source_j);
  require(target.feature_dim() == source_j.feature_dim() && w_tilde.size() == target.feature_dim(),
          ErrorKind::ShapeMismatch, "target and source must share the feature dimension");
  require(q_tilde_j.rows() == target.num_states() && q_tilde_j.cols() == target.num_actions(),
          ErrorKind::ShapeMismatch, "estimate must be S x A");
  require(epsilon_m >= 0.0, ErrorKind::Domain, "epsilon must be non-negative");
  const double gamma = target.gamma();
  const Matrix q_star = optimal_q(target);
  const Matrix q_jj = policy_evaluation_q(source_j, pi_j).q;
  const Matrix q_tj = policy_evaluation_q(target, pi_j).q;
  double phi_max = 0.0;
  for (int sa = 0; sa < target.num_pairs(); ++sa)
    phi_max = std::max(phi_max, target.features().phi.row(sa).norm());
  const double w_gap = (w_tilde - source_j.weights().w).norm();
  const double q_gap = (state_max(q_star) - state_max(q_jj)).norm() +
                       (state_max(q_jj) - state_max(q_tilde_j)).norm();
  const double term1 = 2.0 * phi_max * w_gap / (1.0 - gamma);
  const double term3 = 2.0 * epsilon_m / (1.0 - gamma);

  BoundReport report;
  report.name = "theorem2";
  report.precondition_met = (q_tj - q_tilde_j).cwiseAbs().maxCoeff() <= epsilon_m + kSlackTolerance;
  report.parameters = {{"gamma", gamma},     {"phi_max", phi_max},     {"w_gap", w_gap},
                       {"q_gap", q_gap},     {"epsilon_m", epsilon_m}};
  for (int s = 0; s < target.num_states(); ++s) {
    for (int a = 0; a < target.num_actions(); ++a) {
      const double p_gap =
          (target.transition_row(s, a) - source_j.transition_row(s, a)).norm();
      const double term2 = gamma * p_gap * q_gap / ((1.0 - gamma) * (1.0 - gamma));
      report.add({s, a, q_star(s, a) - q_tilde_j(s, a), term1 + term2 + term3, 0.0, term1, term2,
                  term3});
    }
  }
  return report;
}

}  // namespace sfde
