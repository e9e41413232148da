#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sfde/gp.hpp"
#include "sfde/tabular_rl.hpp"

namespace sfde {

struct SourceBundle {
  int index = 0;
  Policy policy;
  SfTable sf;
  SfDataset dataset;
};

enum class LabelMode {
  // Per source i: phi(s,a) + gamma * mu_i(s', pi_i(s')).
  kPolicyBootstrap,
  // Shared: phi(s,a) + gamma * mu(s', GPI action) from the current source GPs.
  kGpBootstrap,
  // Post-update entry of a tabular TD estimate of psi under the executed policy.
  kTdTable,
};

struct TransferConfig {
  double sigma_s_sq = 0.1;
  double sigma_sq = 0.01;
  int adaptation_steps = 1000;
  int testing_steps = 10000;
  int batch_size = 64;
  int source_subsample = 500;
  double epsilon = 0.5;
  double epsilon_decay = 0.9999;
  // Step size of the target TD estimators (FSF fine-tuning, TD-table labels).
  double alpha = 0.05;
  int max_steps_per_episode = 100;
  // Buffered target points are pushed into the GPs every k adaptation steps.
  int refit_every = 1;
  // Every k adaptation steps all stored target labels are recomputed from the current
  // estimates; 0 keeps each label as it was when its point was added.
  int relabel_every = 0;
  LabelMode label_mode = LabelMode::kGpBootstrap;
  // Fixed kernel lengthscale; non-positive selects one per source by marginal likelihood.
  double lengthscale = 0.0;
  std::vector<double> lengthscale_grid = default_lengthscale_grid();
  // Starting reward mapper; zero when absent.
  std::optional<Vector> initial_w;

  void validate() const;
  NoiseConfig noise() const { return {sigma_sq, sigma_s_sq}; }
};

enum class Phase { kAdaptation, kTesting, kLearning };
const char* to_string(Phase phase);

struct TraceRow {
  int step = 0;
  Phase phase = Phase::kAdaptation;
  // Undiscounted reward of the current episode up to and including this step.
  double cumulative_episode_reward = 0.0;
  int episode_index = 0;
  // -1 when the action was drawn uniformly at random.
  int chosen_source = -1;
  int action = 0;
  double epsilon = 0.0;
};

struct EpisodeSummary {
  int index = 0;
  Phase phase = Phase::kAdaptation;
  int first_step = 0;
  int length = 0;
  double total_reward = 0.0;
  bool completed = false;
};

struct PhaseTrace {
  std::string method;
  std::uint64_t seed = 0;
  int adaptation_steps = 0;
  int refit_every = 1;
  std::vector<TraceRow> rows;
  std::vector<EpisodeSummary> episodes;
  // Greedy action per state of the frozen testing policy (empty for Q-learning).
  std::vector<int> testing_policy;
  // Digest of every adaptable parameter, taken at the phase switch and at the end.
  double fingerprint_at_switch = 0.0;
  double fingerprint_final = 0.0;
  Vector final_w;
  // Fine-tuned source SF tables at the end of the run (FSF only).
  std::vector<Matrix> final_psi;

  /// Mean total reward of completed episodes that started in `phase`.
  double average_episode_reward(Phase phase) const;
};

/// Argmax over actions of the max over sources; ties go to the lowest action, then source.
std::pair<int, int> gpi_action(const Matrix& q_matrix);

PhaseTrace sfde_run(const std::vector<SourceBundle>& sources, const TabularMdp& target,
                    const TransferConfig& config, std::uint64_t seed);

PhaseTrace fsf_baseline(const std::vector<SourceBundle>& sources, const TabularMdp& target,
                        const TransferConfig& config, std::uint64_t seed);

PhaseTrace lpsf_baseline(const std::vector<SourceBundle>& sources, const TabularMdp& target,
                         const TransferConfig& config, std::uint64_t seed);

struct QLearnBaselineParams {
  double alpha = 0.05;
  double epsilon = 0.9;
  double epsilon_decay = 0.9999;
  int total_steps = 10000;
  int max_steps_per_episode = 100;
};

PhaseTrace qlearning_baseline(const TabularMdp& target, const QLearnBaselineParams& params,
                              std::uint64_t seed);

/// Ridge least squares for beta in y ~ beta psi over paired rows (N x D each).
Matrix fit_linear_projection(const Matrix& source_psi, const Matrix& target_psi, double ridge);

/// Per-step curve: mean of the last `window` completed episode totals (NaN before the first).
std::vector<double> smoothed_episode_curve(const PhaseTrace& trace, int window);
std::vector<double> smoothed_episode_curve(const std::vector<EpisodeSummary>& episodes,
                                           int num_steps, int window);

}  // namespace sfde
