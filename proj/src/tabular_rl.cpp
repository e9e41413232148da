#include "sfde/tabular_rl.hpp"

#include <algorithm>
#include <cmath>

namespace sfde {

void LearningParams::validate() const {
  require(alpha >= 0.0 && std::isfinite(alpha), ErrorKind::InvalidConfig,
          "alpha must be finite and non-negative");
  require(epsilon >= 0.0 && epsilon <= 1.0, ErrorKind::InvalidConfig,
          "epsilon must lie in [0,1]");
  require(epsilon_decay > 0.0 && epsilon_decay <= 1.0, ErrorKind::InvalidConfig,
          "epsilon_decay must lie in (0,1]");
  require(max_episodes >= 0, ErrorKind::InvalidConfig, "max_episodes must be non-negative");
  require(max_steps_per_episode > 0, ErrorKind::InvalidConfig,
          "max_steps_per_episode must be positive");
  require(dataset_capacity > 0, ErrorKind::InvalidConfig, "dataset_capacity must be positive");
}

int epsilon_greedy(int greedy, int num_actions, double epsilon, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (epsilon > 0.0 && unit(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, num_actions - 1);
    return pick(rng);
  }
  return greedy;
}

namespace {

int argmax_row(const Matrix& q, int s) {
  int best = 0;
  for (int a = 1; a < q.cols(); ++a)
    if (q(s, a) > q(s, best)) best = a;
  return best;
}

int episode_start(const TabularMdp& mdp, StartMode mode, Rng& rng) {
  if (mode == StartMode::kMdpDefault) return sample_start_state(mdp, rng);
  require(std::find(mdp.terminal().begin(), mdp.terminal().end(), false) != mdp.terminal().end(),
          ErrorKind::InvalidArgument, "MDP has no non-terminal state");
  std::uniform_int_distribution<int> pick(0, mdp.num_states() - 1);
  int s = pick(rng);
  while (mdp.is_terminal(s)) s = pick(rng);
  return s;
}

double step_size(const LearningParams& params, int visits) {
  if (params.alpha_schedule == AlphaSchedule::kInverseVisits)
    return params.alpha / static_cast<double>(visits);
  return params.alpha;
}

}  // namespace

QLearningResult q_learning(const TabularMdp& mdp, const LearningParams& params, Rng& rng) {
  params.validate();
  Matrix q = Matrix::Zero(mdp.num_states(), mdp.num_actions());
  std::vector<int> visits(static_cast<std::size_t>(mdp.num_pairs()), 0);
  std::vector<EpisodeRecord> trace;
  double epsilon = params.epsilon;
  for (int episode = 0; episode < params.max_episodes; ++episode) {
    int s = episode_start(mdp, params.start_mode, rng);
    double total = 0.0;
    for (int t = 0; t < params.max_steps_per_episode && !mdp.is_terminal(s); ++t) {
      const int a = epsilon_greedy(argmax_row(q, s), mdp.num_actions(), epsilon, rng);
      const StepResult out = step(mdp, rng, s, a);
      const int count = ++visits[static_cast<std::size_t>(mdp.pair_index(s, a))];
      const double bootstrap = out.done ? 0.0 : q.row(out.next_state).maxCoeff();
      q(s, a) += step_size(params, count) * (out.reward + mdp.gamma() * bootstrap - q(s, a));
      epsilon *= params.epsilon_decay;
      total += out.reward;
      s = out.next_state;
    }
    trace.push_back({episode, total, epsilon});
  }
  QTable table{q, params.max_episodes, 0.0};
  Policy policy = greedy_policy(table);
  return {std::move(table), std::move(policy), std::move(trace)};
}

void SfDataset::append(SfRecord record) {
  require(record.psi.size() == feature_dim, ErrorKind::ShapeMismatch,
          "SF record dimension does not match the dataset");
  records.push_back(std::move(record));
}

double sf_td_update(const TabularMdp& mdp, Matrix& psi, int s, int a, int next_state,
                    int next_action, double alpha) {
  const int sa = mdp.pair_index(s, a);
  Vector target = mdp.phi(s, a).transpose();
  if (!mdp.is_terminal(next_state))
    target += mdp.gamma() * psi.row(mdp.pair_index(next_state, next_action)).transpose();
  const Vector residual = target - psi.row(sa).transpose();
  psi.row(sa) += alpha * residual.transpose();
  return residual.norm();
}

SfExtraction extract_sf(const TabularMdp& mdp, const Policy& policy, const LearningParams& params,
                        Rng& rng, int source_index) {
  params.validate();
  require(static_cast<int>(policy.action.size()) == mdp.num_states(), ErrorKind::ShapeMismatch,
          "policy must have one action per state");
  SfExtraction out;
  out.table.psi = Matrix::Zero(mdp.num_pairs(), mdp.feature_dim());
  out.table.visit_counts.assign(static_cast<std::size_t>(mdp.num_pairs()), 0);
  out.dataset.source_index = source_index;
  out.dataset.feature_dim = mdp.feature_dim();
  const std::size_t capacity = static_cast<std::size_t>(params.dataset_capacity);
  auto& records = out.dataset.records;

  double epsilon = params.epsilon;
  for (int episode = 0; episode < params.max_episodes; ++episode) {
    int s = episode_start(mdp, params.start_mode, rng);
    double residual_sum = 0.0;
    int steps = 0;
    for (int t = 0; t < params.max_steps_per_episode && !mdp.is_terminal(s); ++t) {
      const int a = epsilon_greedy(policy.action[static_cast<std::size_t>(s)],
                                   mdp.num_actions(), epsilon, rng);
      const StepResult next = step(mdp, rng, s, a);
      const int sa = mdp.pair_index(s, a);
      const int count = ++out.table.visit_counts[static_cast<std::size_t>(sa)];
      residual_sum += sf_td_update(mdp, out.table.psi, s, a, next.next_state,
                                   policy.action[static_cast<std::size_t>(next.next_state)],
                                   step_size(params, count));
      ++steps;
      out.dataset.append({s, a, out.table.psi.row(sa).transpose(), next.reward, next.next_state});
      if (records.size() >= 2 * capacity)
        records.erase(records.begin(), records.end() - static_cast<std::ptrdiff_t>(capacity));
      epsilon *= params.epsilon_decay;
      s = next.next_state;
    }
    out.residual_trace.push_back(steps > 0 ? residual_sum / steps : 0.0);
  }
  if (records.size() > capacity)
    records.erase(records.begin(), records.end() - static_cast<std::ptrdiff_t>(capacity));
  return out;
}

RewardMapperFit::RewardMapperFit(int dim)
    : gram_(Matrix::Zero(dim, dim)), moment_(Vector::Zero(dim)) {
  require(dim > 0, ErrorKind::InvalidArgument, "reward mapper dimension must be positive");
}

void RewardMapperFit::add(const Eigen::Ref<const Vector>& phi, double reward) {
  require(phi.size() == moment_.size(), ErrorKind::ShapeMismatch,
          "feature dimension does not match the reward mapper");
  gram_.noalias() += phi * phi.transpose();
  moment_ += reward * phi;
  ++count_;
}

Vector RewardMapperFit::solve() const {
  if (count_ == 0) return Vector::Zero(moment_.size());
  const Matrix system = gram_ + kRidge * Matrix::Identity(gram_.rows(), gram_.cols());
  const auto factor = system.ldlt();
  Vector w = factor.solve(moment_);
  // Iterative refinement strips the ridge bias on the observed subspace; null
  // directions stay at zero.
  for (int pass = 0; pass < 2; ++pass) w += factor.solve(moment_ - gram_ * w);
  return w;
}

RewardMapper fit_reward_mapper(const std::vector<RewardObservation>& observed,
                               const FeatureMap& features) {
  require(!observed.empty(), ErrorKind::InvalidArgument, "need at least one reward observation");
  RewardMapperFit fit(features.dim());
  for (const auto& obs : observed) {
    require(obs.pair >= 0 && obs.pair < features.phi.rows(), ErrorKind::InvalidArgument,
            "observation pair index out of range");
    fit.add(features.phi.row(obs.pair).transpose(), obs.reward);
  }
  return {fit.solve()};
}

}  // namespace sfde
