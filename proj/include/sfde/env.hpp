#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "sfde/common.hpp"

namespace sfde {

// Grid actions share one ordering across every grid family.
enum GridAction : int { kLeft = 0, kRight = 1, kUp = 2, kDown = 3 };
inline constexpr int kNumGridActions = 4;

/// Row-major cell indexing: state = row * width + col, (0,0) is the top-left cell.
struct GridShape {
  int width = 0;
  int height = 0;

  int cell(int row, int col) const { return row * width + col; }
  int row(int state) const { return state / width; }
  int col(int state) const { return state % width; }
  int num_cells() const { return width * height; }
  /// Deterministic move; bumping into the border keeps the agent in place.
  int move(int state, int action) const;
};

/// phi(s,a) for every state-action pair; rows are indexed by TabularMdp::pair_index.
struct FeatureMap {
  Matrix phi;
  int dim() const { return static_cast<int>(phi.cols()); }
};

struct RewardMapper {
  Vector w;
};

/// Deterministic policy table, one action per state.
struct Policy {
  std::vector<int> action;
};

/// Layout of a generated benchmark instance. Informational only; dynamics live in the MDP.
struct LayoutInfo {
  std::string family;  // "maze", "object_world", "random_mdp", or empty
  std::vector<int> obstacle_cells;
  int goal_cell = -1;
  std::vector<int> object_cells;
  std::vector<int> object_types;
  std::vector<double> type_rewards;
  int terminal_cell = -1;
};

/// Finite MDP whose rewards decompose as phi(s,a)^T w.
///
/// Transitions are stored densely as a (S*A) x S matrix. Terminal states are
/// absorbing with zero features, hence zero reward. Immutable after construction.
class TabularMdp {
 public:
  TabularMdp(int num_states, int num_actions, Matrix transition, std::vector<bool> terminal,
             double gamma, FeatureMap features, RewardMapper weights);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int num_pairs() const { return num_states_ * num_actions_; }
  int feature_dim() const { return features_.dim(); }
  int pair_index(int s, int a) const { return s * num_actions_ + a; }

  double gamma() const { return gamma_; }
  const Matrix& transition() const { return transition_; }
  auto transition_row(int s, int a) const { return transition_.row(pair_index(s, a)); }
  const std::vector<bool>& terminal() const { return terminal_; }
  bool is_terminal(int s) const { return terminal_[static_cast<std::size_t>(s)]; }
  const FeatureMap& features() const { return features_; }
  const RewardMapper& weights() const { return weights_; }
  auto phi(int s, int a) const { return features_.phi.row(pair_index(s, a)); }

  /// Reward vector over all pairs, Phi * w.
  Vector rewards() const { return features_.phi * weights_.w; }

  /// -1 means "uniform over non-terminal states".
  int start_state() const { return start_state_; }
  const std::optional<GridShape>& grid() const { return grid_; }
  const LayoutInfo& layout() const { return layout_; }

  TabularMdp with_weights(Vector w) const;
  TabularMdp with_start_state(int s) const;
  TabularMdp with_grid(GridShape grid, LayoutInfo layout) const;

 private:
  void validate() const;

  int num_states_;
  int num_actions_;
  Matrix transition_;
  std::vector<bool> terminal_;
  double gamma_;
  FeatureMap features_;
  RewardMapper weights_;
  int start_state_ = -1;
  std::optional<GridShape> grid_;
  LayoutInfo layout_;
};

struct MazeSpec {
  int width = 10;
  int height = 10;
  // Explicit obstacle cells; when empty, num_random_obstacles are sampled from rng_seed.
  std::vector<int> obstacle_cells;
  int num_random_obstacles = 0;
  // Goal cell; -1 samples it from rng_seed.
  int goal_cell = -1;
  int start_cell = 0;
  double step_reward = -1.0;
  double obstacle_reward = -50.0;
  double goal_reward = 100.0;
  double gamma = 0.9;
  std::uint64_t rng_seed = 0;
};

// Maze feature classes, one-hot per transition.
enum MazeFeature : int { kStepFeature = 0, kObstacleFeature = 1, kGoalFeature = 2 };

/// Deterministic grid maze with passable obstacles and a terminal goal.
TabularMdp make_maze(const MazeSpec& spec);

struct ObjectWorldSpec {
  int grid_size = 10;
  int num_objects = 10;
  int num_types = 2;
  std::vector<double> type_rewards{1.0, -1.0};
  double transition_noise = 0.0;
  std::optional<double> terminal_cell_reward;
  double gamma = 0.9;
  std::uint64_t rng_seed = 0;
};

/// Grid with a frozen object layout; the agent position is the state.
///
/// Features: one column per object type plus one terminal-cell column, each the
/// probability that the transition lands on that kind of cell.
TabularMdp make_object_world(const ObjectWorldSpec& spec);

struct RandomMdpSpec {
  int num_states = 6;
  int num_actions = 3;
  int feature_dim = 2;
  double gamma = 0.9;
};

/// Dense random MDP: Dirichlet(1) transition rows, uniform[-1,1] features and weights.
TabularMdp make_random_mdp(const RandomMdpSpec& spec, Rng& rng);

/// Same features and weights, fresh Dirichlet(1) dynamics.
TabularMdp resample_dynamics(const TabularMdp& mdp, Rng& rng);

double reward(const TabularMdp& mdp, int s, int a);

struct StepResult {
  int next_state;
  double reward;
  bool done;
};

StepResult step(const TabularMdp& mdp, Rng& rng, int s, int a);

/// Draws an episode start: the MDP's start state or a uniform non-terminal state.
int sample_start_state(const TabularMdp& mdp, Rng& rng);

}  // namespace sfde
