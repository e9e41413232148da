#include <gtest/gtest.h>

#include <deque>

#include "sfde/env.hpp"

namespace sfde {
namespace {

TabularMdp open_maze(int width, int height, int goal) {
  MazeSpec spec;
  spec.width = width;
  spec.height = height;
  spec.goal_cell = goal;
  return make_maze(spec);
}

TEST(GridShape, MovesAreBlockedByWalls) {
  const GridShape grid{3, 2};
  EXPECT_EQ(grid.move(0, kLeft), 0);
  EXPECT_EQ(grid.move(0, kUp), 0);
  EXPECT_EQ(grid.move(0, kRight), 1);
  EXPECT_EQ(grid.move(0, kDown), 3);
  EXPECT_EQ(grid.move(5, kRight), 5);
  EXPECT_EQ(grid.move(5, kDown), 5);
}

TEST(Maze, SmallestInstanceReachesGoal) {
  const TabularMdp mdp = open_maze(2, 2, 3);
  EXPECT_EQ(mdp.num_states(), 4);
  EXPECT_EQ(mdp.num_actions(), 4);
  Rng rng(1);
  const StepResult first = step(mdp, rng, 0, kRight);
  EXPECT_EQ(first.next_state, 1);
  EXPECT_DOUBLE_EQ(first.reward, -1.0);
  EXPECT_FALSE(first.done);
  const StepResult second = step(mdp, rng, first.next_state, kDown);
  EXPECT_EQ(second.next_state, 3);
  EXPECT_DOUBLE_EQ(second.reward, 100.0);
  EXPECT_TRUE(second.done);
}

TEST(Maze, TerminalIsAbsorbingWithZeroReward) {
  const TabularMdp mdp = open_maze(2, 2, 3);
  Rng rng(2);
  for (int a = 0; a < 4; ++a) {
    const StepResult out = step(mdp, rng, 3, a);
    EXPECT_EQ(out.next_state, 3);
    EXPECT_EQ(out.reward, 0.0);
    EXPECT_TRUE(out.done);
  }
}

TEST(Maze, ObstacleHitCostsObstacleRewardEveryTime) {
  MazeSpec spec;
  spec.width = 3;
  spec.height = 3;
  spec.goal_cell = 8;
  spec.obstacle_cells = {1};
  const TabularMdp mdp = make_maze(spec);
  Rng rng(3);
  EXPECT_DOUBLE_EQ(step(mdp, rng, 0, kRight).reward, -50.0);
  // Staying on the obstacle by bumping the top wall hits it again.
  EXPECT_DOUBLE_EQ(step(mdp, rng, 1, kUp).reward, -50.0);
  EXPECT_DOUBLE_EQ(step(mdp, rng, 1, kDown).reward, -1.0);
  EXPECT_DOUBLE_EQ(step(mdp, rng, 5, kDown).reward, 100.0);
}

TEST(Maze, BenchmarkFamilyShape) {
  MazeSpec spec;
  spec.num_random_obstacles = 25;
  spec.rng_seed = 11;
  const TabularMdp mdp = make_maze(spec);
  EXPECT_EQ(mdp.num_states(), 100);
  EXPECT_EQ(mdp.feature_dim(), 3);
  const auto& layout = mdp.layout();
  EXPECT_EQ(layout.obstacle_cells.size(), 25u);
  EXPECT_NE(layout.goal_cell, 0);
  for (int c : layout.obstacle_cells) {
    EXPECT_NE(c, 0);
    EXPECT_NE(c, layout.goal_cell);
  }
  EXPECT_EQ(mdp.start_state(), 0);
  EXPECT_DOUBLE_EQ(mdp.weights().w(kStepFeature), -1.0);
  EXPECT_DOUBLE_EQ(mdp.weights().w(kObstacleFeature), -50.0);
  EXPECT_DOUBLE_EQ(mdp.weights().w(kGoalFeature), 100.0);
}

TEST(Maze, SameSeedSameLayout) {
  MazeSpec spec;
  spec.num_random_obstacles = 25;
  spec.rng_seed = 7;
  const TabularMdp a = make_maze(spec);
  const TabularMdp b = make_maze(spec);
  EXPECT_EQ(a.layout().obstacle_cells, b.layout().obstacle_cells);
  EXPECT_EQ(a.layout().goal_cell, b.layout().goal_cell);
  EXPECT_EQ(a.transition(), b.transition());
  EXPECT_EQ(a.features().phi, b.features().phi);
  spec.rng_seed = 8;
  EXPECT_NE(make_maze(spec).layout().obstacle_cells, a.layout().obstacle_cells);
}

TEST(Maze, RejectsBadGeometry) {
  MazeSpec tiny;
  tiny.width = 1;
  tiny.height = 5;
  tiny.goal_cell = 4;
  EXPECT_THROW(
      {
        try {
          make_maze(tiny);
        } catch (const Error& e) {
          EXPECT_EQ(e.kind(), ErrorKind::InvalidGeometry);
          throw;
        }
      },
      Error);
  MazeSpec outside;
  outside.goal_cell = 100;
  EXPECT_THROW(make_maze(outside), Error);
  MazeSpec on_obstacle;
  on_obstacle.goal_cell = 5;
  on_obstacle.obstacle_cells = {5};
  EXPECT_THROW(make_maze(on_obstacle), Error);
}

// Breadth-first search over the deterministic transition graph.
int bfs_steps(const TabularMdp& mdp, int start, int goal) {
  std::vector<int> dist(static_cast<std::size_t>(mdp.num_states()), -1);
  std::deque<int> queue{start};
  dist[static_cast<std::size_t>(start)] = 0;
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    if (s == goal) return dist[static_cast<std::size_t>(s)];
    for (int a = 0; a < mdp.num_actions(); ++a) {
      for (int next = 0; next < mdp.num_states(); ++next) {
        if (mdp.transition_row(s, a)(next) > 0.0 && dist[static_cast<std::size_t>(next)] < 0) {
          dist[static_cast<std::size_t>(next)] = dist[static_cast<std::size_t>(s)] + 1;
          queue.push_back(next);
        }
      }
    }
  }
  return -1;
}

TEST(MazeProperty, OpenMazeShortestPathIsManhattan) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<int> side(2, 7);
    const int w = side(rng);
    const int h = side(rng);
    std::uniform_int_distribution<int> cell(1, w * h - 1);
    const int goal = cell(rng);
    const TabularMdp mdp = open_maze(w, h, goal);
    const GridShape grid{w, h};
    EXPECT_EQ(bfs_steps(mdp, 0, goal), grid.row(goal) + grid.col(goal));
  }
}

TEST(ObjectWorld, TargetFamilyShape) {
  ObjectWorldSpec spec;
  spec.transition_noise = 0.05;
  spec.terminal_cell_reward = -1.0;
  spec.rng_seed = 4;
  const TabularMdp mdp = make_object_world(spec);
  EXPECT_EQ(mdp.num_states(), 100);
  EXPECT_EQ(mdp.feature_dim(), 3);
  EXPECT_EQ(mdp.layout().object_cells.size(), 10u);
  ASSERT_GE(mdp.layout().terminal_cell, 0);
  EXPECT_TRUE(mdp.is_terminal(mdp.layout().terminal_cell));
  EXPECT_DOUBLE_EQ(mdp.weights().w(2), -1.0);
  EXPECT_EQ(mdp.start_state(), -1);
}

TEST(ObjectWorld, NoObjectsNoNoiseIsPlainGrid) {
  ObjectWorldSpec spec;
  spec.grid_size = 3;
  spec.num_objects = 0;
  const TabularMdp mdp = make_object_world(spec);
  EXPECT_TRUE(mdp.features().phi.isZero());
  const GridShape grid{3, 3};
  for (int s = 0; s < 9; ++s)
    for (int a = 0; a < 4; ++a) EXPECT_EQ(mdp.transition_row(s, a)(grid.move(s, a)), 1.0);
}

TEST(ObjectWorld, RejectsBadConfig) {
  ObjectWorldSpec noisy;
  noisy.transition_noise = 1.0;
  EXPECT_THROW(make_object_world(noisy), Error);
  ObjectWorldSpec mismatch;
  mismatch.type_rewards = {1.0};
  try {
    make_object_world(mismatch);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidConfig);
  }
  ObjectWorldSpec crowded;
  crowded.grid_size = 2;
  crowded.num_objects = 4;
  EXPECT_THROW(make_object_world(crowded), Error);
}

TEST(ObjectWorld, SampledTransitionsMatchProbabilities) {
  ObjectWorldSpec spec;
  spec.transition_noise = 0.05;
  spec.rng_seed = 9;
  const TabularMdp mdp = make_object_world(spec);
  Rng rng(10);
  const int s = 0;
  const int a = kRight;
  const int samples = 100000;
  Vector counts = Vector::Zero(mdp.num_states());
  for (int i = 0; i < samples; ++i) counts(step(mdp, rng, s, a).next_state) += 1.0;
  const Vector freq = counts / samples;
  EXPECT_LE((freq - mdp.transition_row(s, a).transpose()).cwiseAbs().maxCoeff(), 0.01);
}

TEST(Reward, MatchesDotProduct) {
  Rng rng(12);
  RandomMdpSpec spec;
  spec.num_states = 5;
  spec.feature_dim = 3;
  const TabularMdp mdp = make_random_mdp(spec, rng);
  for (int s = 0; s < 5; ++s) {
    for (int a = 0; a < mdp.num_actions(); ++a) {
      double expected = 0.0;
      for (int d = 0; d < 3; ++d) expected += mdp.phi(s, a)(d) * mdp.weights().w(d);
      EXPECT_NEAR(reward(mdp, s, a), expected, 1e-15);
    }
  }
  const TabularMdp zero = mdp.with_weights(Vector::Zero(3));
  for (int s = 0; s < 5; ++s) EXPECT_EQ(reward(zero, s, 0), 0.0);
}

TEST(MazeReward, NonGoalStepCostsOne) {
  const TabularMdp mdp = open_maze(4, 4, 15);
  EXPECT_DOUBLE_EQ(reward(mdp, 0, kRight), -1.0);
}

TEST(GeneratorProperty, RowsAreDistributionsAndRewardsDecompose) {
  Rng seeds(13);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<TabularMdp> mdps;
    MazeSpec maze;
    maze.width = 5;
    maze.height = 4;
    maze.num_random_obstacles = 4;
    maze.rng_seed = seeds();
    mdps.push_back(make_maze(maze));
    ObjectWorldSpec world;
    world.grid_size = 4;
    world.num_objects = 5;
    world.transition_noise = 0.1;
    world.terminal_cell_reward = -1.0;
    world.rng_seed = seeds();
    mdps.push_back(make_object_world(world));
    RandomMdpSpec random;
    mdps.push_back(make_random_mdp(random, seeds));
    for (const auto& mdp : mdps) {
      EXPECT_GE(mdp.transition().minCoeff(), 0.0);
      EXPECT_LE((mdp.transition().rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-9);
      for (int s = 0; s < mdp.num_states(); ++s)
        for (int a = 0; a < mdp.num_actions(); ++a)
          EXPECT_EQ(reward(mdp, s, a), mdp.phi(s, a).dot(mdp.weights().w));
    }
  }
}

TEST(TabularMdp, ValidatesInputs) {
  Matrix p = Matrix::Constant(2, 2, 0.5);
  FeatureMap phi{Matrix::Ones(2, 1)};
  RewardMapper w{Vector::Ones(1)};
  EXPECT_NO_THROW(TabularMdp(2, 1, p, {false, false}, 0.9, phi, w));
  EXPECT_THROW(TabularMdp(2, 1, p, {false, false}, 1.0, phi, w), Error);
  Matrix bad = p;
  bad(0, 0) = 0.6;
  EXPECT_THROW(TabularMdp(2, 1, bad, {false, false}, 0.9, phi, w), Error);
  EXPECT_THROW(TabularMdp(2, 1, p, {true, false}, 0.9, phi, w), Error);
  EXPECT_THROW(TabularMdp(2, 1, p, {false, false}, 0.9, phi, RewardMapper{Vector::Ones(2)}),
               Error);
}

}  // namespace
}  // namespace sfde
