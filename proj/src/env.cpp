#include "sfde/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sfde {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidGeometry: return "invalid-geometry";
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::ShapeMismatch: return "shape-mismatch";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::NotPositiveDefinite: return "not-positive-definite";
    case ErrorKind::NumericalInstability: return "numerical-instability";
    case ErrorKind::Domain: return "domain-error";
    case ErrorKind::Io: return "io-error";
    case ErrorKind::MissingData: return "missing-data";
  }
  return "error";
}

int GridShape::move(int state, int action) const {
  int r = row(state);
  int c = col(state);
  switch (action) {
    case kLeft: c = std::max(0, c - 1); break;
    case kRight: c = std::min(width - 1, c + 1); break;
    case kUp: r = std::max(0, r - 1); break;
    case kDown: r = std::min(height - 1, r + 1); break;
    default: throw Error(ErrorKind::InvalidArgument, "grid action out of range");
  }
  return cell(r, c);
}

TabularMdp::TabularMdp(int num_states, int num_actions, Matrix transition,
                       std::vector<bool> terminal, double gamma, FeatureMap features,
                       RewardMapper weights)
    : num_states_(num_states),
      num_actions_(num_actions),
      transition_(std::move(transition)),
      terminal_(std::move(terminal)),
      gamma_(gamma),
      features_(std::move(features)),
      weights_(std::move(weights)) {
  validate();
}

void TabularMdp::validate() const {
  require(num_states_ > 0 && num_actions_ > 0, ErrorKind::InvalidArgument,
          "state and action counts must be positive");
  require(gamma_ > 0.0 && gamma_ < 1.0, ErrorKind::InvalidArgument, "gamma must lie in (0,1)");
  require(transition_.rows() == num_pairs() && transition_.cols() == num_states_,
          ErrorKind::ShapeMismatch, "transition must be (S*A) x S");
  require(static_cast<int>(terminal_.size()) == num_states_, ErrorKind::ShapeMismatch,
          "terminal mask must have one entry per state");
  require(features_.phi.rows() == num_pairs() && features_.dim() > 0, ErrorKind::ShapeMismatch,
          "feature table must be (S*A) x D with D > 0");
  require(weights_.w.size() == features_.dim(), ErrorKind::ShapeMismatch,
          "reward weights must match the feature dimension");
  require(features_.phi.allFinite() && weights_.w.allFinite(), ErrorKind::InvalidArgument,
          "features and weights must be finite");
  for (int sa = 0; sa < num_pairs(); ++sa) {
    const auto row = transition_.row(sa);
    require(row.minCoeff() >= 0.0, ErrorKind::InvalidArgument,
            "negative transition probability at pair " + std::to_string(sa));
    require(std::abs(row.sum() - 1.0) <= 1e-9, ErrorKind::InvalidArgument,
            "transition row " + std::to_string(sa) + " does not sum to 1");
  }
  for (int s = 0; s < num_states_; ++s) {
    if (!terminal_[static_cast<std::size_t>(s)]) continue;
    for (int a = 0; a < num_actions_; ++a) {
      require(transition_(pair_index(s, a), s) == 1.0, ErrorKind::InvalidArgument,
              "terminal state " + std::to_string(s) + " must self-loop");
      require(features_.phi.row(pair_index(s, a)).isZero(0.0), ErrorKind::InvalidArgument,
              "terminal state " + std::to_string(s) + " must have zero features");
    }
  }
  require(start_state_ >= -1 && start_state_ < num_states_, ErrorKind::InvalidArgument,
          "start state out of range");
}

TabularMdp TabularMdp::with_weights(Vector w) const {
  TabularMdp copy = *this;
  copy.weights_.w = std::move(w);
  copy.validate();
  return copy;
}

TabularMdp TabularMdp::with_start_state(int s) const {
  TabularMdp copy = *this;
  copy.start_state_ = s;
  copy.validate();
  return copy;
}

TabularMdp TabularMdp::with_grid(GridShape grid, LayoutInfo layout) const {
  require(grid.num_cells() == num_states_, ErrorKind::ShapeMismatch,
          "grid shape does not match the state count");
  TabularMdp copy = *this;
  copy.grid_ = grid;
  copy.layout_ = std::move(layout);
  return copy;
}

namespace {

// Picks `count` distinct cells from `pool` (in pool order after a seeded shuffle).
std::vector<int> sample_cells(std::vector<int> pool, int count, Rng& rng) {
  for (std::size_t i = pool.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(pool[i - 1], pool[pick(rng)]);
  }
  pool.resize(static_cast<std::size_t>(count));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

TabularMdp make_maze(const MazeSpec& spec) {
  require(spec.width >= 2 && spec.height >= 2, ErrorKind::InvalidGeometry,
          "maze must be at least 2x2");
  const GridShape grid{spec.width, spec.height};
  const int cells = grid.num_cells();
  require(spec.start_cell >= 0 && spec.start_cell < cells, ErrorKind::InvalidGeometry,
          "start cell outside grid");
  Rng rng(spec.rng_seed);

  int goal = spec.goal_cell;
  if (goal < 0) {
    std::vector<int> pool;
    for (int c = 0; c < cells; ++c)
      if (c != spec.start_cell) pool.push_back(c);
    goal = sample_cells(pool, 1, rng).front();
  }
  require(goal < cells, ErrorKind::InvalidGeometry, "goal cell outside grid");
  require(goal != spec.start_cell, ErrorKind::InvalidGeometry, "goal coincides with start");

  std::vector<int> obstacles = spec.obstacle_cells;
  if (obstacles.empty() && spec.num_random_obstacles > 0) {
    std::vector<int> pool;
    for (int c = 0; c < cells; ++c)
      if (c != goal && c != spec.start_cell) pool.push_back(c);
    require(spec.num_random_obstacles <= static_cast<int>(pool.size()),
            ErrorKind::InvalidGeometry, "too many obstacles for the grid");
    obstacles = sample_cells(pool, spec.num_random_obstacles, rng);
  }
  std::vector<bool> is_obstacle(static_cast<std::size_t>(cells), false);
  for (int c : obstacles) {
    require(c >= 0 && c < cells, ErrorKind::InvalidGeometry, "obstacle cell outside grid");
    require(c != goal, ErrorKind::InvalidGeometry, "goal cell is listed as an obstacle");
    is_obstacle[static_cast<std::size_t>(c)] = true;
  }

  const int num_actions = kNumGridActions;
  Matrix transition = Matrix::Zero(cells * num_actions, cells);
  Matrix phi = Matrix::Zero(cells * num_actions, 3);
  std::vector<bool> terminal(static_cast<std::size_t>(cells), false);
  terminal[static_cast<std::size_t>(goal)] = true;

  for (int s = 0; s < cells; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      const int sa = s * num_actions + a;
      if (s == goal) {
        transition(sa, s) = 1.0;
        continue;
      }
      const int next = grid.move(s, a);
      transition(sa, next) = 1.0;
      if (next == goal) {
        phi(sa, kGoalFeature) = 1.0;
      } else if (is_obstacle[static_cast<std::size_t>(next)]) {
        phi(sa, kObstacleFeature) = 1.0;
      } else {
        phi(sa, kStepFeature) = 1.0;
      }
    }
  }

  Vector w(3);
  w << spec.step_reward, spec.obstacle_reward, spec.goal_reward;
  LayoutInfo layout;
  layout.family = "maze";
  layout.obstacle_cells = obstacles;
  std::sort(layout.obstacle_cells.begin(), layout.obstacle_cells.end());
  layout.goal_cell = goal;
  return TabularMdp(cells, num_actions, std::move(transition), std::move(terminal), spec.gamma,
                    FeatureMap{std::move(phi)}, RewardMapper{std::move(w)})
      .with_start_state(spec.start_cell)
      .with_grid(grid, std::move(layout));
}

TabularMdp make_object_world(const ObjectWorldSpec& spec) {
  require(spec.grid_size >= 2, ErrorKind::InvalidConfig, "object world must be at least 2x2");
  require(spec.num_types >= 1, ErrorKind::InvalidConfig, "need at least one object type");
  require(static_cast<int>(spec.type_rewards.size()) == spec.num_types, ErrorKind::InvalidConfig,
          "type_rewards length must equal num_types");
  require(spec.transition_noise >= 0.0 && spec.transition_noise < 1.0, ErrorKind::InvalidConfig,
          "transition_noise must lie in [0,1)");
  const GridShape grid{spec.grid_size, spec.grid_size};
  const int cells = grid.num_cells();
  require(spec.num_objects >= 0 && spec.num_objects <= cells - 1, ErrorKind::InvalidConfig,
          "num_objects must be at most cells - 1");

  Rng rng(spec.rng_seed);
  std::vector<int> all(static_cast<std::size_t>(cells));
  std::iota(all.begin(), all.end(), 0);

  int terminal_cell = -1;
  if (spec.terminal_cell_reward) terminal_cell = sample_cells(all, 1, rng).front();
  std::vector<int> pool;
  for (int c : all)
    if (c != terminal_cell) pool.push_back(c);
  require(spec.num_objects <= static_cast<int>(pool.size()), ErrorKind::InvalidConfig,
          "not enough free cells for the objects");
  const std::vector<int> object_cells = sample_cells(pool, spec.num_objects, rng);
  std::vector<int> object_types;
  std::uniform_int_distribution<int> type_dist(0, spec.num_types - 1);
  for (std::size_t i = 0; i < object_cells.size(); ++i) object_types.push_back(type_dist(rng));

  const int dim = spec.num_types + 1;
  std::vector<int> cell_class(static_cast<std::size_t>(cells), -1);
  for (std::size_t i = 0; i < object_cells.size(); ++i)
    cell_class[static_cast<std::size_t>(object_cells[i])] = object_types[i];
  if (terminal_cell >= 0) cell_class[static_cast<std::size_t>(terminal_cell)] = spec.num_types;

  const int num_actions = kNumGridActions;
  Matrix transition = Matrix::Zero(cells * num_actions, cells);
  std::vector<bool> terminal(static_cast<std::size_t>(cells), false);
  if (terminal_cell >= 0) terminal[static_cast<std::size_t>(terminal_cell)] = true;

  const double noise = spec.transition_noise;
  for (int s = 0; s < cells; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      const int sa = s * num_actions + a;
      if (s == terminal_cell) {
        transition(sa, s) = 1.0;
        continue;
      }
      transition(sa, grid.move(s, a)) += 1.0 - noise;
      for (int b = 0; b < num_actions; ++b) transition(sa, grid.move(s, b)) += noise / num_actions;
    }
  }
  Matrix phi = Matrix::Zero(cells * num_actions, dim);
  for (int sa = 0; sa < cells * num_actions; ++sa) {
    if (sa / num_actions == terminal_cell) continue;
    for (int next = 0; next < cells; ++next) {
      const int cls = cell_class[static_cast<std::size_t>(next)];
      if (cls >= 0 && transition(sa, next) > 0.0) phi(sa, cls) += transition(sa, next);
    }
  }

  Vector w(dim);
  for (int t = 0; t < spec.num_types; ++t) w(t) = spec.type_rewards[static_cast<std::size_t>(t)];
  w(spec.num_types) = spec.terminal_cell_reward.value_or(0.0);

  LayoutInfo layout;
  layout.family = "object_world";
  layout.object_cells = object_cells;
  layout.object_types = object_types;
  layout.type_rewards = spec.type_rewards;
  layout.terminal_cell = terminal_cell;
  return TabularMdp(cells, num_actions, std::move(transition), std::move(terminal), spec.gamma,
                    FeatureMap{std::move(phi)}, RewardMapper{std::move(w)})
      .with_grid(grid, std::move(layout));
}

namespace {

Matrix dirichlet_rows(int rows, int cols, Rng& rng) {
  std::gamma_distribution<double> gamma(1.0, 1.0);
  Matrix out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    double total = 0.0;
    for (int c = 0; c < cols; ++c) {
      out(r, c) = gamma(rng);
      total += out(r, c);
    }
    out.row(r) /= total;
  }
  return out;
}

}  // namespace

TabularMdp make_random_mdp(const RandomMdpSpec& spec, Rng& rng) {
  require(spec.num_states > 0 && spec.num_actions > 0 && spec.feature_dim > 0,
          ErrorKind::InvalidConfig, "random MDP sizes must be positive");
  const int pairs = spec.num_states * spec.num_actions;
  Matrix transition = dirichlet_rows(pairs, spec.num_states, rng);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Matrix phi(pairs, spec.feature_dim);
  for (int i = 0; i < pairs; ++i)
    for (int d = 0; d < spec.feature_dim; ++d) phi(i, d) = unit(rng);
  Vector w(spec.feature_dim);
  for (int d = 0; d < spec.feature_dim; ++d) w(d) = unit(rng);
  return TabularMdp(spec.num_states, spec.num_actions, std::move(transition),
                    std::vector<bool>(static_cast<std::size_t>(spec.num_states), false), spec.gamma,
                    FeatureMap{std::move(phi)}, RewardMapper{std::move(w)});
}

TabularMdp resample_dynamics(const TabularMdp& mdp, Rng& rng) {
  Matrix transition = dirichlet_rows(mdp.num_pairs(), mdp.num_states(), rng);
  for (int s = 0; s < mdp.num_states(); ++s) {
    if (!mdp.is_terminal(s)) continue;
    for (int a = 0; a < mdp.num_actions(); ++a) {
      transition.row(mdp.pair_index(s, a)).setZero();
      transition(mdp.pair_index(s, a), s) = 1.0;
    }
  }
  return TabularMdp(mdp.num_states(), mdp.num_actions(), std::move(transition), mdp.terminal(),
                    mdp.gamma(), mdp.features(), mdp.weights())
      .with_start_state(mdp.start_state());
}

double reward(const TabularMdp& mdp, int s, int a) {
  require(s >= 0 && s < mdp.num_states() && a >= 0 && a < mdp.num_actions(),
          ErrorKind::InvalidArgument, "state or action index out of range");
  return mdp.phi(s, a).dot(mdp.weights().w);
}

StepResult step(const TabularMdp& mdp, Rng& rng, int s, int a) {
  if (mdp.is_terminal(s)) return {s, 0.0, true};
  const double r = reward(mdp, s, a);
  const auto row = mdp.transition_row(s, a);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cumulative = 0.0;
  int next = mdp.num_states() - 1;
  for (int sp = 0; sp < mdp.num_states(); ++sp) {
    if (row(sp) <= 0.0) continue;
    cumulative += row(sp);
    next = sp;
    if (u < cumulative) break;
  }
  return {next, r, mdp.is_terminal(next)};
}

int sample_start_state(const TabularMdp& mdp, Rng& rng) {
  if (mdp.start_state() >= 0) return mdp.start_state();
  std::vector<int> candidates;
  for (int s = 0; s < mdp.num_states(); ++s)
    if (!mdp.is_terminal(s)) candidates.push_back(s);
  require(!candidates.empty(), ErrorKind::InvalidArgument, "MDP has no non-terminal state");
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  return candidates[pick(rng)];
}

}  // namespace sfde
