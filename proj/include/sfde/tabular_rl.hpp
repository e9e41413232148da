#pragma once

#include <vector>

#include "sfde/dp.hpp"

namespace sfde {

enum class AlphaSchedule { kConstant, kInverseVisits };
enum class StartMode { kMdpDefault, kUniformRandom };

struct LearningParams {
  double alpha = 0.05;
  double epsilon = 0.9;
  // Applied once per environment step.
  double epsilon_decay = 0.9999;
  int max_episodes = 1000;
  int max_steps_per_episode = 100;
  AlphaSchedule alpha_schedule = AlphaSchedule::kConstant;
  StartMode start_mode = StartMode::kMdpDefault;
  // SF datasets retain at most this many of the most recent records.
  int dataset_capacity = 10000;

  void validate() const;
};

struct EpisodeRecord {
  int episode = 0;
  double total_reward = 0.0;
  double epsilon = 0.0;
};

struct QLearningResult {
  QTable table;
  Policy policy;
  std::vector<EpisodeRecord> trace;
};

/// Tabular Q-learning from a zero table with epsilon-greedy behaviour.
QLearningResult q_learning(const TabularMdp& mdp, const LearningParams& params, Rng& rng);

/// Tabular successor-feature estimate psi_hat, (S*A) x D.
struct SfTable {
  Matrix psi;
  std::vector<int> visit_counts;
};

struct SfRecord {
  int state = 0;
  int action = 0;
  Vector psi;
  double reward = 0.0;
  int next_state = 0;
};

/// Ordered SF samples; source_index is -1 for target data.
struct SfDataset {
  int source_index = -1;
  int feature_dim = 0;
  std::vector<SfRecord> records;

  std::size_t size() const { return records.size(); }
  void append(SfRecord record);
};

struct SfExtraction {
  SfTable table;
  SfDataset dataset;
  // Mean TD residual norm per episode.
  std::vector<double> residual_trace;
};

/// One TD step psi(s,a) += alpha (phi(s,a) + gamma psi(s', pi(s')) - psi(s,a)).
/// The bootstrap is dropped when s' is terminal. Returns the residual norm.
double sf_td_update(const TabularMdp& mdp, Matrix& psi, int s, int a, int next_state,
                    int next_action, double alpha);

/// Online TD estimation of psi^pi under epsilon-greedy behaviour around pi.
SfExtraction extract_sf(const TabularMdp& mdp, const Policy& policy, const LearningParams& params,
                        Rng& rng, int source_index = -1);

struct RewardObservation {
  int pair = 0;
  double reward = 0.0;
};

/// Incremental ridge least squares for w in r = phi^T w.
class RewardMapperFit {
 public:
  static constexpr double kRidge = 1e-8;

  explicit RewardMapperFit(int dim);

  void add(const Eigen::Ref<const Vector>& phi, double reward);
  int count() const { return count_; }
  Vector solve() const;

 private:
  Matrix gram_;
  Vector moment_;
  int count_ = 0;
};

RewardMapper fit_reward_mapper(const std::vector<RewardObservation>& observed,
                               const FeatureMap& features);

/// Epsilon-greedy choice; `greedy` is used with probability 1 - epsilon.
int epsilon_greedy(int greedy, int num_actions, double epsilon, Rng& rng);

}  // namespace sfde
