#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "sfde/dp.hpp"
#include "sfde/transfer.hpp"

namespace sfde {
namespace {

TabularMdp small_maze(int goal = 24) {
  MazeSpec spec;
  spec.width = 5;
  spec.height = 5;
  spec.obstacle_cells = {6, 12, 17};
  spec.goal_cell = goal;
  return make_maze(spec);
}

// Bundle whose SF table and dataset hold the exact successor features of the optimal policy.
SourceBundle exact_bundle(const TabularMdp& mdp, int index, int repeats, Rng& rng) {
  SourceBundle bundle;
  bundle.index = index;
  bundle.policy = greedy_policy(value_iteration(mdp));
  const Matrix psi = exact_successor_features(mdp, bundle.policy).psi;
  bundle.sf = SfTable{psi, std::vector<int>(static_cast<std::size_t>(mdp.num_pairs()), 1)};
  bundle.dataset.source_index = index;
  bundle.dataset.feature_dim = mdp.feature_dim();
  for (int r = 0; r < repeats; ++r) {
    for (int s = 0; s < mdp.num_states(); ++s) {
      if (mdp.is_terminal(s)) continue;
      for (int a = 0; a < mdp.num_actions(); ++a) {
        const StepResult out = step(mdp, rng, s, a);
        bundle.dataset.append({s, a, psi.row(mdp.pair_index(s, a)).transpose(), out.reward,
                               out.next_state});
      }
    }
  }
  return bundle;
}

// Undiscounted return of a deterministic policy from the start state.
double rollout_return(const TabularMdp& mdp, const std::vector<int>& policy, int max_steps) {
  Rng rng(0);
  int s = mdp.start_state();
  double total = 0.0;
  for (int t = 0; t < max_steps; ++t) {
    const StepResult out = step(mdp, rng, s, policy[static_cast<std::size_t>(s)]);
    total += out.reward;
    if (out.done) break;
    s = out.next_state;
  }
  return total;
}

std::vector<int> frozen_gpi_policy(const std::vector<SourceBundle>& sources, const TabularMdp& mdp,
                                   const Vector& w) {
  std::vector<int> policy(static_cast<std::size_t>(mdp.num_states()), 0);
  for (int s = 0; s < mdp.num_states(); ++s) {
    if (mdp.is_terminal(s)) continue;
    Matrix q(static_cast<Eigen::Index>(sources.size()), mdp.num_actions());
    for (std::size_t i = 0; i < sources.size(); ++i)
      for (int a = 0; a < mdp.num_actions(); ++a)
        q(static_cast<Eigen::Index>(i), a) = sources[i].sf.psi.row(mdp.pair_index(s, a)).dot(w);
    policy[static_cast<std::size_t>(s)] = gpi_action(q).first;
  }
  return policy;
}

TransferConfig quick_config() {
  TransferConfig config;
  config.adaptation_steps = 300;
  config.testing_steps = 500;
  config.lengthscale = 0.1;
  config.source_subsample = 200;
  return config;
}

void expect_same_rows(const PhaseTrace& a, const PhaseTrace& b) {
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t t = 0; t < a.rows.size(); ++t) {
    EXPECT_EQ(a.rows[t].action, b.rows[t].action) << t;
    EXPECT_EQ(a.rows[t].chosen_source, b.rows[t].chosen_source) << t;
    EXPECT_EQ(a.rows[t].cumulative_episode_reward, b.rows[t].cumulative_episode_reward) << t;
    EXPECT_EQ(a.rows[t].episode_index, b.rows[t].episode_index) << t;
  }
  EXPECT_EQ(a.fingerprint_final, b.fingerprint_final);
}

TEST(GpiAction, SingleSourceIsGreedy) {
  Matrix q(1, 4);
  q << 0.5, 2.0, -1.0, 2.0;
  EXPECT_EQ(gpi_action(q), std::make_pair(1, 0));
}

TEST(GpiAction, HandExample) {
  Matrix q(2, 2);
  q << 1.0, 2.0, 3.0, 0.0;
  EXPECT_EQ(gpi_action(q), std::make_pair(0, 1));
}

TEST(GpiAction, MatchesExhaustiveScan) {
  Rng rng(1);
  std::uniform_int_distribution<int> coarse(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    Matrix q(12, 4);
    for (int i = 0; i < 12; ++i)
      for (int a = 0; a < 4; ++a) q(i, a) = coarse(rng);
    const double top = q.maxCoeff();
    std::pair<int, int> expected{4, 12};
    for (int i = 0; i < 12; ++i)
      for (int a = 0; a < 4; ++a)
        if (q(i, a) == top) expected = std::min(expected, std::make_pair(a, i));
    EXPECT_EQ(gpi_action(q), expected);
  }
}

TEST(GpiAction, RejectsEmpty) { EXPECT_THROW(gpi_action(Matrix(0, 4)), Error); }

TEST(LinearProjection, RecoversKnownMap) {
  Rng rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix beta(3, 3);
    Matrix src(40, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) beta(i, j) = normal(rng);
    for (int k = 0; k < 40; ++k)
      for (int j = 0; j < 3; ++j) src(k, j) = normal(rng);
    const Matrix tgt = src * beta.transpose();
    EXPECT_LT((fit_linear_projection(src, tgt, 1e-8) - beta).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(LinearProjection, RejectsMismatch) {
  EXPECT_THROW(fit_linear_projection(Matrix::Zero(3, 2), Matrix::Zero(4, 2), 0.0), Error);
}

TEST(Sfde, SelfTransferNearOptimal) {
  const TabularMdp mdp = small_maze();
  Rng rng(3);
  const std::vector<SourceBundle> sources{exact_bundle(mdp, 0, 20, rng)};
  TransferConfig config = quick_config();
  config.sigma_s_sq = 1e-6;
  config.source_subsample = 2000;
  const PhaseTrace trace = sfde_run(sources, mdp, config, 5);
  const double optimal = rollout_return(mdp, sources[0].policy.action, 100);
  const double testing = trace.average_episode_reward(Phase::kTesting);
  EXPECT_GE(testing, optimal - 0.05 * std::abs(optimal));
}

TEST(Sfde, ZeroAdaptationIsGpiOverSourcePosteriors) {
  const TabularMdp mdp = small_maze();
  Rng rng(4);
  const std::vector<SourceBundle> sources{exact_bundle(mdp, 0, 4, rng),
                                          exact_bundle(small_maze(20), 1, 4, rng)};
  TransferConfig config = quick_config();
  config.adaptation_steps = 0;
  // Larger than each dataset, so every record enters the source GP in order.
  config.source_subsample = 1000;
  config.initial_w = mdp.weights().w;
  const PhaseTrace trace = sfde_run(sources, mdp, config, 6);

  const InputEncoding enc = InputEncoding::for_mdp(mdp);
  std::vector<GpSfModel> models;
  for (const SourceBundle& src : sources) {
    const auto& records = src.dataset.records;
    Matrix x(enc.dim(), static_cast<Eigen::Index>(records.size()));
    Matrix y(static_cast<Eigen::Index>(records.size()), mdp.feature_dim());
    for (std::size_t k = 0; k < records.size(); ++k) {
      x.col(static_cast<Eigen::Index>(k)) = enc.encode(records[k].state, records[k].action);
      y.row(static_cast<Eigen::Index>(k)) = records[k].psi.transpose();
    }
    models.push_back(GpSfModel::fit(x, y, Matrix(enc.dim(), 0), Matrix(0, mdp.feature_dim()),
                                    Kernel{config.lengthscale}, config.noise()));
  }
  for (int s = 0; s < mdp.num_states(); ++s) {
    if (mdp.is_terminal(s)) continue;
    Matrix q(2, mdp.num_actions());
    for (int i = 0; i < 2; ++i)
      for (int a = 0; a < mdp.num_actions(); ++a)
        q(i, a) = models[static_cast<std::size_t>(i)].posterior_mean(enc.encode(s, a)).dot(mdp.weights().w);
    EXPECT_EQ(trace.testing_policy[static_cast<std::size_t>(s)], gpi_action(q).first) << s;
  }
  EXPECT_EQ(trace.fingerprint_at_switch, trace.fingerprint_final);
  for (const TraceRow& row : trace.rows) EXPECT_EQ(row.phase, Phase::kTesting);
}

TEST(Sfde, LabelModesRun) {
  const TabularMdp mdp = small_maze();
  Rng rng(5);
  const std::vector<SourceBundle> sources{exact_bundle(small_maze(20), 0, 2, rng)};
  for (LabelMode mode : {LabelMode::kPolicyBootstrap, LabelMode::kGpBootstrap, LabelMode::kTdTable}) {
    TransferConfig config = quick_config();
    config.label_mode = mode;
    const PhaseTrace trace = sfde_run(sources, mdp, config, 7);
    EXPECT_EQ(trace.rows.size(), 800u);
    EXPECT_EQ(trace.fingerprint_at_switch, trace.fingerprint_final);
  }
}

TEST(Sfde, SelfTransferSurvivesRelabelling) {
  // Exact source SFs satisfy their own bootstrap, so refreshed labels stay consistent.
  const TabularMdp mdp = small_maze();
  Rng rng(3);
  const std::vector<SourceBundle> sources{exact_bundle(mdp, 0, 20, rng)};
  TransferConfig config = quick_config();
  config.sigma_s_sq = 1e-6;
  config.source_subsample = 2000;
  config.label_mode = LabelMode::kPolicyBootstrap;
  config.relabel_every = 5;
  const PhaseTrace trace = sfde_run(sources, mdp, config, 5);
  const double optimal = rollout_return(mdp, sources[0].policy.action, 100);
  EXPECT_GE(trace.average_episode_reward(Phase::kTesting), optimal - 0.05 * std::abs(optimal));
}

TEST(Sfde, PendingRelabelRunsAtFreeze) {
  // A cadence equal to the adaptation budget and one beyond it both relabel once, after the last point.
  const TabularMdp mdp = small_maze();
  Rng rng(8);
  const std::vector<SourceBundle> sources{exact_bundle(small_maze(20), 0, 2, rng),
                                          exact_bundle(small_maze(4), 1, 2, rng)};
  TransferConfig at_end = quick_config();
  at_end.relabel_every = at_end.adaptation_steps;
  TransferConfig beyond = quick_config();
  beyond.relabel_every = 10 * beyond.adaptation_steps;
  expect_same_rows(sfde_run(sources, mdp, at_end, 9), sfde_run(sources, mdp, beyond, 9));
  const PhaseTrace never = sfde_run(sources, mdp, quick_config(), 9);
  EXPECT_NE(sfde_run(sources, mdp, at_end, 9).fingerprint_at_switch, never.fingerprint_at_switch);
}

TEST(Sfde, LengthscaleByMarginalLikelihood) {
  const TabularMdp mdp = small_maze();
  Rng rng(6);
  const std::vector<SourceBundle> sources{exact_bundle(mdp, 0, 2, rng)};
  TransferConfig config = quick_config();
  config.lengthscale = 0.0;
  config.adaptation_steps = 50;
  config.testing_steps = 50;
  const PhaseTrace trace = sfde_run(sources, mdp, config, 8);
  EXPECT_EQ(trace.rows.size(), 100u);
}

TEST(Sfde, RejectsEmptyDatasetAndMismatchedSources) {
  const TabularMdp mdp = small_maze();
  Rng rng(7);
  SourceBundle bundle = exact_bundle(mdp, 0, 1, rng);
  bundle.dataset.records.clear();
  EXPECT_THROW(sfde_run({bundle}, mdp, quick_config(), 1), Error);
  EXPECT_THROW(sfde_run({}, mdp, quick_config(), 1), Error);
  MazeSpec other;
  other.width = 4;
  other.height = 4;
  other.goal_cell = 15;
  EXPECT_THROW(sfde_run({exact_bundle(make_maze(other), 0, 1, rng)}, mdp, quick_config(), 1), Error);
}

TEST(Protocol, PhaseDisciplineForEveryMethod) {
  const TabularMdp mdp = small_maze();
  Rng rng(8);
  const std::vector<SourceBundle> sources{exact_bundle(small_maze(20), 0, 2, rng),
                                          exact_bundle(small_maze(4), 1, 2, rng)};
  const TransferConfig config = quick_config();
  for (auto run : {sfde_run, fsf_baseline, lpsf_baseline}) {
    const PhaseTrace trace = run(sources, mdp, config, 9);
    ASSERT_EQ(trace.rows.size(), 800u);
    EXPECT_EQ(trace.fingerprint_at_switch, trace.fingerprint_final) << trace.method;
    EXPECT_EQ(trace.testing_policy.size(), static_cast<std::size_t>(mdp.num_states()));
    for (std::size_t t = 0; t < trace.rows.size(); ++t) {
      const TraceRow& row = trace.rows[t];
      EXPECT_EQ(row.step, static_cast<int>(t));
      EXPECT_EQ(row.phase, t < 300 ? Phase::kAdaptation : Phase::kTesting);
      if (row.phase == Phase::kTesting) {
        EXPECT_EQ(row.epsilon, 0.0);
        EXPECT_GE(row.chosen_source, 0);
      }
    }
    for (const EpisodeSummary& ep : trace.episodes) {
      // No episode straddles the phase switch.
      EXPECT_TRUE(ep.first_step + ep.length <= 300 || ep.first_step >= 300) << trace.method;
      EXPECT_LE(ep.length, config.max_steps_per_episode);
    }
  }
}

TEST(Protocol, EpsilonDecaysPerAdaptationStep) {
  const TabularMdp mdp = small_maze();
  Rng rng(9);
  const std::vector<SourceBundle> sources{exact_bundle(mdp, 0, 1, rng)};
  const PhaseTrace trace = fsf_baseline(sources, mdp, quick_config(), 1);
  double expected = 0.5;
  for (int t = 0; t < 300; ++t) {
    EXPECT_DOUBLE_EQ(trace.rows[static_cast<std::size_t>(t)].epsilon, expected);
    expected *= 0.9999;
  }
}

TEST(Protocol, DeterministicPerSeed) {
  const TabularMdp mdp = small_maze();
  Rng rng(10);
  const std::vector<SourceBundle> sources{exact_bundle(small_maze(20), 0, 2, rng),
                                          exact_bundle(small_maze(4), 1, 2, rng)};
  for (auto run : {sfde_run, fsf_baseline, lpsf_baseline}) {
    expect_same_rows(run(sources, mdp, quick_config(), 11), run(sources, mdp, quick_config(), 11));
  }
  const PhaseTrace a = sfde_run(sources, mdp, quick_config(), 11);
  const PhaseTrace b = sfde_run(sources, mdp, quick_config(), 12);
  bool differs = false;
  for (std::size_t t = 0; t < a.rows.size(); ++t) differs |= a.rows[t].action != b.rows[t].action;
  EXPECT_TRUE(differs);
}

TEST(Protocol, EpisodeTotalsMatchRows) {
  const TabularMdp mdp = small_maze();
  Rng rng(11);
  const std::vector<SourceBundle> sources{exact_bundle(small_maze(20), 0, 2, rng)};
  const PhaseTrace trace = lpsf_baseline(sources, mdp, quick_config(), 3);
  std::map<int, double> last;
  for (const TraceRow& row : trace.rows) last[row.episode_index] = row.cumulative_episode_reward;
  ASSERT_EQ(last.size(), trace.episodes.size());
  double sum = 0.0;
  int count = 0;
  for (const EpisodeSummary& ep : trace.episodes) {
    EXPECT_EQ(last[ep.index], ep.total_reward);
    if (ep.phase == Phase::kTesting && ep.completed) {
      sum += ep.total_reward;
      ++count;
    }
  }
  ASSERT_GT(count, 0);
  EXPECT_DOUBLE_EQ(trace.average_episode_reward(Phase::kTesting), sum / count);
}

TEST(Fsf, ZeroFineTuningIsFrozenGpi) {
  const TabularMdp mdp = small_maze();
  Rng rng(12);
  const std::vector<SourceBundle> sources{exact_bundle(small_maze(20), 0, 1, rng),
                                          exact_bundle(small_maze(4), 1, 1, rng)};
  TransferConfig config = quick_config();
  config.adaptation_steps = 0;
  config.initial_w = mdp.weights().w;
  const PhaseTrace trace = fsf_baseline(sources, mdp, config, 2);
  EXPECT_EQ(trace.testing_policy, frozen_gpi_policy(sources, mdp, mdp.weights().w));
  for (std::size_t i = 0; i < sources.size(); ++i)
    EXPECT_EQ(trace.final_psi[i], sources[i].sf.psi);
}

TEST(Fsf, SelfTransferDriftIsSmall) {
  const TabularMdp mdp = small_maze();
  Rng rng(13);
  const std::vector<SourceBundle> sources{exact_bundle(mdp, 0, 1, rng)};
  TransferConfig config = quick_config();
  config.adaptation_steps = 1000;
  const PhaseTrace trace = fsf_baseline(sources, mdp, config, 4);
  ASSERT_EQ(trace.final_psi.size(), 1u);
  EXPECT_LT((trace.final_psi[0] - sources[0].sf.psi).cwiseAbs().maxCoeff(), 0.1);
}

TEST(Lpsf, NoDataKeepsIdentityProjection) {
  const TabularMdp mdp = small_maze();
  Rng rng(14);
  const std::vector<SourceBundle> sources{exact_bundle(small_maze(20), 0, 1, rng),
                                          exact_bundle(small_maze(4), 1, 1, rng)};
  TransferConfig config = quick_config();
  config.adaptation_steps = 0;
  config.initial_w = mdp.weights().w;
  const PhaseTrace lpsf = lpsf_baseline(sources, mdp, config, 2);
  EXPECT_EQ(lpsf.testing_policy, frozen_gpi_policy(sources, mdp, mdp.weights().w));
  // Fewer transitions than a batch: the projection never moves from the identity.
  config.adaptation_steps = config.batch_size - 1;
  const PhaseTrace short_run = lpsf_baseline(sources, mdp, config, 2);
  EXPECT_DOUBLE_EQ(short_run.fingerprint_final - short_run.final_w.sum() - 1e-3 * 63,
                   2.0 * mdp.feature_dim());
}

TEST(QLearnBaseline, LearnsTinyMaze) {
  MazeSpec spec;
  spec.width = 3;
  spec.height = 2;
  spec.goal_cell = 5;
  const TabularMdp chain = make_maze(spec);
  QLearnBaselineParams params;
  params.alpha = 0.5;
  params.epsilon_decay = 0.995;
  params.total_steps = 3000;
  const PhaseTrace trace = qlearning_baseline(chain, params, 1);
  const Policy optimal = greedy_policy(value_iteration(chain));
  const double best = rollout_return(chain, optimal.action, 100);
  ASSERT_GE(trace.episodes.size(), 5u);
  for (std::size_t k = trace.episodes.size() - 5; k < trace.episodes.size(); ++k) {
    if (trace.episodes[k].completed) {
      EXPECT_EQ(trace.episodes[k].total_reward, best);
    }
  }
  EXPECT_EQ(trace.rows.size(), 3000u);
  for (const TraceRow& row : trace.rows) EXPECT_EQ(row.phase, Phase::kLearning);
}

TEST(SmoothedCurve, MatchesRecomputation) {
  const TabularMdp mdp = small_maze();
  Rng rng(15);
  const std::vector<SourceBundle> sources{exact_bundle(small_maze(20), 0, 1, rng)};
  const PhaseTrace trace = fsf_baseline(sources, mdp, quick_config(), 5);
  for (int window : {1, 3, 20}) {
    const std::vector<double> curve = smoothed_episode_curve(trace, window);
    ASSERT_EQ(curve.size(), trace.rows.size());
    for (std::size_t t = 0; t < curve.size(); ++t) {
      std::vector<double> done;
      for (const EpisodeSummary& ep : trace.episodes)
        if (ep.completed && ep.first_step + ep.length - 1 <= static_cast<int>(t))
          done.push_back(ep.total_reward);
      if (done.empty()) {
        EXPECT_TRUE(std::isnan(curve[t]));
        continue;
      }
      const std::size_t n = std::min<std::size_t>(done.size(), static_cast<std::size_t>(window));
      double sum = 0.0;
      for (std::size_t k = done.size() - n; k < done.size(); ++k) sum += done[k];
      EXPECT_NEAR(curve[t], sum / static_cast<double>(n), 1e-12);
    }
  }
  EXPECT_THROW(smoothed_episode_curve(trace, 0), Error);
}

TEST(TransferConfig, Validation) {
  TransferConfig config;
  EXPECT_NO_THROW(config.validate());
  config.sigma_sq = -1.0;
  EXPECT_THROW(config.validate(), Error);
  config = TransferConfig{};
  config.epsilon = 1.5;
  EXPECT_THROW(config.validate(), Error);
  config = TransferConfig{};
  config.lengthscale = 0.0;
  config.lengthscale_grid.clear();
  EXPECT_THROW(config.validate(), Error);
  config = TransferConfig{};
  config.relabel_every = -1;
  EXPECT_THROW(config.validate(), Error);
}

}  // namespace
}  // namespace sfde
