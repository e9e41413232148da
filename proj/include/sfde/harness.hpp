#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sfde/io.hpp"

namespace sfde {

inline constexpr int kConfigVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitRunFailure = 2, kExitBoundViolation = 3 };

struct MazeEnvConfig {
  int width = 10;
  int height = 10;
  int num_obstacles = 25;
  double step_reward = -1.0;
  double obstacle_reward = -50.0;
  double goal_reward = 100.0;
  double gamma = 0.9;
};

struct ObjectWorldEnvConfig {
  int grid_size = 10;
  int num_objects = 10;
  int num_types = 2;
  // Source i uses entry i modulo the list length.
  std::vector<std::vector<double>> source_type_rewards{{1.0, -1.0}, {-1.0, 1.0}};
  std::vector<double> target_type_rewards{1.0, 1.0};
  double transition_noise = 0.0;
  std::optional<double> terminal_reward;
  double gamma = 0.9;
};

inline LearningParams default_source_qlearning() {
  LearningParams p;
  p.alpha = 0.5;
  p.epsilon = 1.0;
  p.epsilon_decay = 0.99995;
  p.max_episodes = 3000;
  p.start_mode = StartMode::kUniformRandom;
  return p;
}

inline LearningParams default_sf_extraction() {
  LearningParams p = default_source_qlearning();
  p.epsilon = 0.5;
  p.epsilon_decay = 1.0;
  p.max_episodes = 5000;
  return p;
}

struct SourceTrainingConfig {
  LearningParams qlearning = default_source_qlearning();
  LearningParams sf_extraction = default_sf_extraction();
  // Max |psi^T w - Q^pi| relative to max |Q^pi|.
  double audit_tolerance = 0.05;
};

struct BoundsSuiteConfig {
  std::uint64_t seed = 1;
  int theorem1_pairs = 100;
  int num_states = 6;
  int max_actions = 4;
  std::vector<int> feature_dims{2, 4};
  int gp_pairs = 50;
  int gp_samples = 40;
  double gp_lengthscale = 1.0;
  int coverage_trials = 200;
  int coverage_m = 64;
  double delta = 0.1;
  // Also certify Theorem 1 over every ordered pair of generated source environments.
  bool env_pairs = false;
};

struct ExperimentConfig {
  int version = kConfigVersion;
  std::string benchmark = "maze";
  std::uint64_t env_seed = 1;
  int num_sources = 12;
  // One target environment per transfer seed instead of a single shared target.
  bool target_per_seed = false;
  MazeEnvConfig maze;
  ObjectWorldEnvConfig object_world;
  RandomMdpSpec random_mdp;
  std::vector<std::string> methods{"sfde", "fsf", "lpsf"};
  std::vector<std::uint64_t> seeds{0};
  SourceTrainingConfig source_training;
  TransferConfig transfer;
  QLearnBaselineParams qlearn;
  BoundsSuiteConfig bounds;
  int report_window = 20;
  std::filesystem::path output_dir = "sfde_out";

  void validate() const;
};

/// Builds a config from JSON; unknown keys and type errors name the offending field.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
Json config_to_json(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

struct CommandResult {
  int exit_code = kExitOk;
  std::string message;
};

// Each command writes under config.output_dir and a manifest.json in its subdirectory.
CommandResult cmd_gen_envs(const ExperimentConfig& config, std::ostream& log);
CommandResult cmd_train_sources(const ExperimentConfig& config, std::ostream& log);
CommandResult cmd_transfer(const ExperimentConfig& config, std::ostream& log);
CommandResult cmd_bounds(const ExperimentConfig& config, std::ostream& log);
CommandResult cmd_report(const std::filesystem::path& run_dir, std::ostream& log);

/// SFDE_LAB_WORKERS when set, else the hardware concurrency; at least 1.
int worker_count();

// Output layout shared by the commands and their consumers.
std::filesystem::path source_env_path(const std::filesystem::path& out, int index);
std::filesystem::path target_env_path(const ExperimentConfig& config, std::uint64_t seed);
std::filesystem::path bundle_path(const std::filesystem::path& out, int index);
std::filesystem::path run_trace_path(const std::filesystem::path& out, const std::string& method,
                                     std::uint64_t seed);
std::filesystem::path run_episodes_path(const std::filesystem::path& out, const std::string& method,
                                        std::uint64_t seed);

struct SignTest {
  int wins = 0;
  int losses = 0;
  int ties = 0;
  // P(X >= wins) for X ~ Binomial(wins + losses, 1/2); ties are dropped.
  double p_value = 1.0;
};

/// One-sided paired sign test for a > b.
SignTest sign_test(const std::vector<double>& a, const std::vector<double>& b);

/// Headline metric of one run: testing-phase average episode reward for the
/// transfer methods, mean of the last `window` completed episodes for Q-learning.
double headline_metric(const std::string& method, const std::vector<EpisodeSummary>& episodes,
                       int window);

}  // namespace sfde
