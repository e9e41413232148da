#include "sfde/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <tuple>

namespace sfde {

void TransferConfig::validate() const {
  noise().validate();
  require(adaptation_steps >= 0 && testing_steps >= 0, ErrorKind::InvalidConfig,
          "step budgets must be non-negative");
  require(batch_size > 0, ErrorKind::InvalidConfig, "batch_size must be positive");
  require(source_subsample > 0, ErrorKind::InvalidConfig, "source_subsample must be positive");
  require(epsilon >= 0.0 && epsilon <= 1.0, ErrorKind::InvalidConfig, "epsilon must lie in [0,1]");
  require(epsilon_decay > 0.0 && epsilon_decay <= 1.0, ErrorKind::InvalidConfig,
          "epsilon_decay must lie in (0,1]");
  require(alpha >= 0.0, ErrorKind::InvalidConfig, "alpha must be non-negative");
  require(max_steps_per_episode > 0, ErrorKind::InvalidConfig,
          "max_steps_per_episode must be positive");
  require(refit_every > 0, ErrorKind::InvalidConfig, "refit_every must be positive");
  require(relabel_every >= 0, ErrorKind::InvalidConfig, "relabel_every must be non-negative");
  require(lengthscale > 0.0 || !lengthscale_grid.empty(), ErrorKind::InvalidConfig,
          "need a fixed lengthscale or a non-empty lengthscale grid");
}

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::kAdaptation: return "adaptation";
    case Phase::kTesting: return "testing";
    case Phase::kLearning: return "learning";
  }
  return "unknown";
}

double PhaseTrace::average_episode_reward(Phase phase) const {
  double sum = 0.0;
  int count = 0;
  for (const auto& ep : episodes) {
    if (ep.phase != phase || !ep.completed) continue;
    sum += ep.total_reward;
    ++count;
  }
  return count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

std::pair<int, int> gpi_action(const Matrix& q_matrix) {
  require(q_matrix.rows() > 0 && q_matrix.cols() > 0, ErrorKind::InvalidArgument,
          "GPI needs at least one source and one action");
  int best_action = 0;
  int best_source = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < q_matrix.cols(); ++a) {
    for (int i = 0; i < q_matrix.rows(); ++i) {
      if (q_matrix(i, a) > best) {
        best = q_matrix(i, a);
        best_action = a;
        best_source = i;
      }
    }
  }
  return {best_action, best_source};
}

Matrix fit_linear_projection(const Matrix& source_psi, const Matrix& target_psi, double ridge) {
  require(source_psi.rows() == target_psi.rows() && source_psi.cols() == target_psi.cols(),
          ErrorKind::ShapeMismatch, "projection rows must pair up");
  const Eigen::Index d = source_psi.cols();
  const Matrix gram = source_psi.transpose() * source_psi + ridge * Matrix::Identity(d, d);
  return gram.ldlt().solve(source_psi.transpose() * target_psi).transpose();
}

namespace {

std::vector<int> sample_without_replacement(int population, int count, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(population));
  std::iota(idx.begin(), idx.end(), 0);
  count = std::min(count, population);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, population - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(count));
  return idx;
}

void check_sources(const std::vector<SourceBundle>& sources, const TabularMdp& target) {
  require(!sources.empty(), ErrorKind::InvalidArgument, "transfer needs at least one source");
  for (const auto& src : sources) {
    require(static_cast<int>(src.policy.action.size()) == target.num_states(),
            ErrorKind::ShapeMismatch, "source policy does not match the target state space");
    require(src.sf.psi.rows() == target.num_pairs() && src.sf.psi.cols() == target.feature_dim(),
            ErrorKind::ShapeMismatch, "source SF table does not match the target");
    require(src.dataset.feature_dim == target.feature_dim(), ErrorKind::ShapeMismatch,
            "source dataset dimension does not match the target features");
  }
}

// Shared machinery for the GPI-based methods: reward mapper and action values.
class Agent {
 public:
  Agent(const TabularMdp& target, const TransferConfig& config)
      : target_(target), config_(config), w_fit_(target.feature_dim()) {
    w_ = config.initial_w ? *config.initial_w : Vector::Zero(target.feature_dim());
    require(w_.size() == target.feature_dim(), ErrorKind::ShapeMismatch,
            "initial_w does not match the feature dimension");
  }
  virtual ~Agent() = default;

  /// Sources x actions matrix of estimated target action values at s.
  virtual Matrix q_matrix(int s) const = 0;
  virtual void learn(int s, int a, int next, bool done, Rng& rng) = 0;
  virtual void freeze() {}
  virtual double model_digest() const = 0;
  virtual std::vector<Matrix> adapted_tables() const { return {}; }

  void observe(int s, int a, double r, int next, bool done, Rng& rng) {
    learn(s, a, next, done, rng);
    w_fit_.add(target_.phi(s, a).transpose(), r);
    w_ = w_fit_.solve();
  }
  double fingerprint() const { return model_digest() + w_.sum() + 1e-3 * w_fit_.count(); }
  const Vector& w() const { return w_; }

 protected:
  const TabularMdp& target_;
  const TransferConfig& config_;
  Vector w_;

 private:
  RewardMapperFit w_fit_;
};

class EpisodeTracker {
 public:
  EpisodeTracker(PhaseTrace& trace, const TabularMdp& target) : trace_(trace), target_(target) {}

  int begin(int step, Phase phase, Rng& rng) {
    current_ = EpisodeSummary{};
    current_.index = next_index_++;
    current_.phase = phase;
    current_.first_step = step;
    open_ = true;
    return sample_start_state(target_, rng);
  }
  void add(double reward) {
    current_.total_reward += reward;
    ++current_.length;
  }
  void close(bool completed) {
    if (!open_) return;
    if (current_.length > 0) {
      current_.completed = completed;
      trace_.episodes.push_back(current_);
    } else {
      --next_index_;
    }
    open_ = false;
  }
  const EpisodeSummary& current() const { return current_; }
  bool open() const { return open_; }

 private:
  PhaseTrace& trace_;
  const TabularMdp& target_;
  EpisodeSummary current_;
  int next_index_ = 0;
  bool open_ = false;
};

PhaseTrace run_protocol(Agent& agent, const TabularMdp& target, const TransferConfig& config,
                        const std::string& method, std::uint64_t seed, Rng& rng) {
  PhaseTrace trace;
  trace.method = method;
  trace.seed = seed;
  trace.adaptation_steps = config.adaptation_steps;
  trace.refit_every = config.refit_every;
  const int total = config.adaptation_steps + config.testing_steps;
  trace.rows.reserve(static_cast<std::size_t>(total));

  EpisodeTracker episodes(trace, target);
  std::vector<int> frozen_source;
  double epsilon = config.epsilon;
  int s = -1;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> any_action(0, target.num_actions() - 1);

  auto freeze = [&] {
    agent.freeze();
    trace.fingerprint_at_switch = agent.fingerprint();
    trace.testing_policy.assign(static_cast<std::size_t>(target.num_states()), 0);
    frozen_source.assign(static_cast<std::size_t>(target.num_states()), 0);
    for (int state = 0; state < target.num_states(); ++state) {
      if (target.is_terminal(state)) continue;
      const auto [a, src] = gpi_action(agent.q_matrix(state));
      trace.testing_policy[static_cast<std::size_t>(state)] = a;
      frozen_source[static_cast<std::size_t>(state)] = src;
    }
  };

  if (config.adaptation_steps == 0) freeze();
  for (int t = 0; t < total; ++t) {
    const bool testing = t >= config.adaptation_steps;
    if (t == config.adaptation_steps && t > 0) {
      episodes.close(false);
      freeze();
    }
    if (!episodes.open()) s = episodes.begin(t, testing ? Phase::kTesting : Phase::kAdaptation, rng);

    int action = 0;
    int source = -1;
    double used_epsilon = 0.0;
    if (testing) {
      action = trace.testing_policy[static_cast<std::size_t>(s)];
      source = frozen_source[static_cast<std::size_t>(s)];
    } else {
      used_epsilon = epsilon;
      if (epsilon > 0.0 && unit(rng) < epsilon) {
        action = any_action(rng);
      } else {
        std::tie(action, source) = gpi_action(agent.q_matrix(s));
      }
      epsilon *= config.epsilon_decay;
    }

    const StepResult out = step(target, rng, s, action);
    if (!testing) agent.observe(s, action, out.reward, out.next_state, out.done, rng);
    episodes.add(out.reward);
    const EpisodeSummary& ep = episodes.current();
    trace.rows.push_back({t, testing ? Phase::kTesting : Phase::kAdaptation, ep.total_reward,
                          ep.index, source, action, used_epsilon});
    s = out.next_state;
    if (out.done || ep.length >= config.max_steps_per_episode) episodes.close(true);
  }
  episodes.close(false);
  trace.fingerprint_final = agent.fingerprint();
  trace.final_w = agent.w();
  trace.final_psi = agent.adapted_tables();
  return trace;
}

class SfdeAgent final : public Agent {
 public:
  SfdeAgent(const std::vector<SourceBundle>& sources, const TabularMdp& target,
            const TransferConfig& config, Rng& rng)
      : Agent(target, config) {
    const InputEncoding encoding = InputEncoding::for_mdp(target);
    inputs_.resize(encoding.dim(), target.num_pairs());
    for (int s = 0; s < target.num_states(); ++s)
      for (int a = 0; a < target.num_actions(); ++a)
        inputs_.col(target.pair_index(s, a)) = encoding.encode(s, a);
    const int dim = target.feature_dim();
    for (const auto& src : sources) {
      policies_.push_back(src.policy);
      const auto& records = src.dataset.records;
      require(!records.empty(), ErrorKind::MissingData,
              "source " + std::to_string(src.index) + " has an empty SF dataset");
      std::vector<int> picked =
          sample_without_replacement(static_cast<int>(records.size()), config.source_subsample, rng);
      std::sort(picked.begin(), picked.end());
      Matrix x(encoding.dim(), static_cast<Eigen::Index>(picked.size()));
      Matrix y(static_cast<Eigen::Index>(picked.size()), dim);
      std::vector<int> pairs;
      for (std::size_t j = 0; j < picked.size(); ++j) {
        const SfRecord& rec = records[static_cast<std::size_t>(picked[j])];
        pairs.push_back(target.pair_index(rec.state, rec.action));
        x.col(static_cast<Eigen::Index>(j)) = inputs_.col(pairs.back());
        y.row(static_cast<Eigen::Index>(j)) = rec.psi.transpose();
      }
      const Matrix no_x(encoding.dim(), 0);
      const Matrix no_y(0, dim);
      const Kernel kernel = config.lengthscale > 0.0
                                ? Kernel{config.lengthscale}
                                : optimize_hyperparams(x, y, no_x, no_y, config.noise(),
                                                       config.lengthscale_grid);
      models_.push_back(GpSfModel::fit(x, y, no_x, no_y, kernel, config.noise()));
      point_pairs_.push_back(std::move(pairs));
      auto it = pair_grams_.find(kernel.lengthscale);
      if (it == pair_grams_.end())
        it = pair_grams_.emplace(kernel.lengthscale, assemble_covariance(inputs_, kernel)).first;
      grams_.push_back(&it->second);
    }
    means_.resize(models_.size());
    for (std::size_t i = 0; i < models_.size(); ++i) refresh_means(i);
    if (config.label_mode == LabelMode::kTdTable)
      td_table_ = Matrix::Zero(target.num_pairs(), dim);
  }

  Matrix q_matrix(int s) const override {
    Matrix q(static_cast<Eigen::Index>(models_.size()), target_.num_actions());
    for (std::size_t i = 0; i < models_.size(); ++i)
      for (int a = 0; a < target_.num_actions(); ++a)
        q(static_cast<Eigen::Index>(i), a) = predict(i, s, a).dot(w_);
    return q;
  }

  void learn(int s, int a, int next, bool done, Rng&) override {
    if (config_.label_mode == LabelMode::kTdTable) {
      const int next_a = done ? 0 : gpi_action(q_matrix(next)).first;
      sf_td_update(target_, td_table_, s, a, next, next_a, config_.alpha);
    }
    pending_.push_back({s, a, next, done});
    if (static_cast<int>(pending_.size()) >= config_.refit_every) flush();
    if (config_.relabel_every > 0 && ++since_relabel_ >= config_.relabel_every) relabel();
  }

  void freeze() override {
    flush();
    if (config_.relabel_every > 0 && since_relabel_ > 0) relabel();
  }

  double model_digest() const override {
    double digest = td_table_.sum();
    for (const auto& m : models_) digest += m.coefficients().sum() + m.size();
    return digest;
  }

 private:
  struct Point {
    int s;
    int a;
    int next;
    bool done;
  };

  Vector predict(std::size_t source, int s, int a) const {
    return means_[source].row(target_.pair_index(s, a)).transpose();
  }

  // Posterior means at every pair: k(x)^T alpha grouped by the pair each training point sits on.
  void refresh_means(std::size_t i) {
    const auto coef = models_[i].coefficients();
    Matrix grouped = Matrix::Zero(target_.num_pairs(), coef.cols());
    for (std::size_t j = 0; j < point_pairs_[i].size(); ++j)
      grouped.row(point_pairs_[i][j]) += coef.row(static_cast<Eigen::Index>(j));
    means_[i].noalias() = *grams_[i] * grouped;
  }

  // Label of one target point for source i, read from the current estimates.
  Vector label(const Point& p, std::size_t i) const {
    if (config_.label_mode == LabelMode::kTdTable)
      return td_table_.row(target_.pair_index(p.s, p.a)).transpose();
    Vector out = target_.phi(p.s, p.a).transpose();
    if (p.done) return out;
    if (config_.label_mode == LabelMode::kPolicyBootstrap)
      return out + target_.gamma() * predict(i, p.next, policies_[i].action[static_cast<std::size_t>(p.next)]);
    const auto [next_a, next_src] = gpi_action(q_matrix(p.next));
    return out + target_.gamma() * predict(static_cast<std::size_t>(next_src), p.next, next_a);
  }

  bool shared_labels() const { return config_.label_mode != LabelMode::kPolicyBootstrap; }

  void flush() {
    if (pending_.empty()) return;
    // All labels are read before any model changes.
    std::vector<std::vector<Vector>> labels;
    for (const Point& p : pending_) {
      std::vector<Vector> row;
      for (std::size_t i = 0; i < models_.size(); ++i)
        row.push_back(shared_labels() && i > 0 ? row.front() : label(p, i));
      labels.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < models_.size(); ++i) {
      for (std::size_t k = 0; k < pending_.size(); ++k) {
        const int pair = target_.pair_index(pending_[k].s, pending_[k].a);
        models_[i].append_target(inputs_.col(pair), labels[k][i]);
        point_pairs_[i].push_back(pair);
      }
      refresh_means(i);
    }
    points_.insert(points_.end(), pending_.begin(), pending_.end());
    pending_.clear();
  }

  // Recomputes every stored target label from the current estimates.
  void relabel() {
    since_relabel_ = 0;
    flush();
    if (points_.empty()) return;
    const Eigen::Index m = static_cast<Eigen::Index>(points_.size());
    std::vector<Matrix> labels(models_.size(), Matrix(m, target_.feature_dim()));
    for (Eigen::Index k = 0; k < m; ++k)
      for (std::size_t i = 0; i < models_.size(); ++i)
        labels[i].row(k) = shared_labels() && i > 0
                               ? Vector(labels.front().row(k).transpose())
                               : label(points_[static_cast<std::size_t>(k)], i);
    for (std::size_t i = 0; i < models_.size(); ++i) {
      models_[i].relabel_targets(labels[i]);
      refresh_means(i);
    }
  }

  Matrix inputs_;
  std::vector<GpSfModel> models_;
  std::vector<Policy> policies_;
  // Pair index of every training row, per source, in model order.
  std::vector<std::vector<int>> point_pairs_;
  std::map<double, Matrix> pair_grams_;
  std::vector<const Matrix*> grams_;
  std::vector<Matrix> means_;
  Matrix td_table_;
  std::vector<Point> pending_;
  std::vector<Point> points_;
  int since_relabel_ = 0;
};

struct Transition {
  int s;
  int a;
  int next;
  bool done;
};

class FsfAgent final : public Agent {
 public:
  FsfAgent(const std::vector<SourceBundle>& sources, const TabularMdp& target,
           const TransferConfig& config)
      : Agent(target, config) {
    for (const auto& src : sources) {
      tables_.push_back(src.sf.psi);
      policies_.push_back(src.policy);
    }
  }

  Matrix q_matrix(int s) const override {
    Matrix q(static_cast<Eigen::Index>(tables_.size()), target_.num_actions());
    for (std::size_t i = 0; i < tables_.size(); ++i)
      for (int a = 0; a < target_.num_actions(); ++a)
        q(static_cast<Eigen::Index>(i), a) = tables_[i].row(target_.pair_index(s, a)).dot(w_);
    return q;
  }

  void learn(int s, int a, int next, bool done, Rng& rng) override {
    buffer_.push_back({s, a, next, done});
    if (static_cast<int>(buffer_.size()) < config_.batch_size) return;
    const std::vector<int> batch =
        sample_without_replacement(static_cast<int>(buffer_.size()), config_.batch_size, rng);
    for (std::size_t i = 0; i < tables_.size(); ++i) {
      for (int idx : batch) {
        const Transition& tr = buffer_[static_cast<std::size_t>(idx)];
        sf_td_update(target_, tables_[i], tr.s, tr.a, tr.next,
                     policies_[i].action[static_cast<std::size_t>(tr.next)], config_.alpha);
      }
    }
  }

  double model_digest() const override {
    double digest = 0.0;
    for (const auto& t : tables_) digest += t.sum();
    return digest;
  }

  std::vector<Matrix> adapted_tables() const override { return tables_; }

 private:
  std::vector<Matrix> tables_;
  std::vector<Policy> policies_;
  std::vector<Transition> buffer_;
};

class LpsfAgent final : public Agent {
 public:
  static constexpr double kRidge = 1e-8;

  LpsfAgent(const std::vector<SourceBundle>& sources, const TabularMdp& target,
            const TransferConfig& config)
      : Agent(target, config) {
    const int dim = target.feature_dim();
    for (const auto& src : sources) {
      tables_.push_back(src.sf.psi);
      beta_.push_back(Matrix::Identity(dim, dim));
    }
    best_beta_ = beta_;
    best_loss_.assign(sources.size(), std::numeric_limits<double>::infinity());
  }

  Matrix q_matrix(int s) const override {
    Matrix q(static_cast<Eigen::Index>(tables_.size()), target_.num_actions());
    for (std::size_t i = 0; i < tables_.size(); ++i)
      for (int a = 0; a < target_.num_actions(); ++a)
        q(static_cast<Eigen::Index>(i), a) = projected(i, s, a).dot(w_);
    return q;
  }

  void learn(int s, int a, int next, bool done, Rng& rng) override {
    Vector label = target_.phi(s, a).transpose();
    if (!done) {
      const auto [next_a, next_src] = gpi_action(q_matrix(next));
      label += target_.gamma() * projected(static_cast<std::size_t>(next_src), next, next_a);
    }
    pairs_.push_back(target_.pair_index(s, a));
    labels_.push_back(std::move(label));
    const int n = static_cast<int>(pairs_.size());
    if (n < config_.batch_size) return;

    const int dim = target_.feature_dim();
    const std::vector<int> batch = sample_without_replacement(n, config_.batch_size, rng);
    Matrix y(static_cast<Eigen::Index>(batch.size()), dim);
    for (std::size_t j = 0; j < batch.size(); ++j)
      y.row(static_cast<Eigen::Index>(j)) = labels_[static_cast<std::size_t>(batch[j])].transpose();
    for (std::size_t i = 0; i < tables_.size(); ++i) {
      Matrix x(static_cast<Eigen::Index>(batch.size()), dim);
      for (std::size_t j = 0; j < batch.size(); ++j)
        x.row(static_cast<Eigen::Index>(j)) = tables_[i].row(pairs_[static_cast<std::size_t>(batch[j])]);
      beta_[i] = fit_linear_projection(x, y, kRidge);
      double loss = 0.0;
      for (int k = 0; k < n; ++k) {
        const Vector residual = labels_[static_cast<std::size_t>(k)] -
                                beta_[i] * tables_[i].row(pairs_[static_cast<std::size_t>(k)]).transpose();
        loss += residual.squaredNorm();
      }
      if (loss < best_loss_[i]) {
        best_loss_[i] = loss;
        best_beta_[i] = beta_[i];
      }
    }
  }

  void freeze() override { beta_ = best_beta_; }

  double model_digest() const override {
    double digest = 0.0;
    for (const auto& b : beta_) digest += b.sum();
    return digest;
  }

 private:
  Vector projected(std::size_t i, int s, int a) const {
    return beta_[i] * tables_[i].row(target_.pair_index(s, a)).transpose();
  }

  std::vector<Matrix> tables_;
  std::vector<Matrix> beta_;
  std::vector<Matrix> best_beta_;
  std::vector<double> best_loss_;
  std::vector<int> pairs_;
  std::vector<Vector> labels_;
};

}  // namespace

PhaseTrace sfde_run(const std::vector<SourceBundle>& sources, const TabularMdp& target,
                    const TransferConfig& config, std::uint64_t seed) {
  config.validate();
  check_sources(sources, target);
  Rng rng(seed);
  SfdeAgent agent(sources, target, config, rng);
  return run_protocol(agent, target, config, "sfde", seed, rng);
}

PhaseTrace fsf_baseline(const std::vector<SourceBundle>& sources, const TabularMdp& target,
                        const TransferConfig& config, std::uint64_t seed) {
  config.validate();
  check_sources(sources, target);
  Rng rng(seed);
  FsfAgent agent(sources, target, config);
  return run_protocol(agent, target, config, "fsf", seed, rng);
}

PhaseTrace lpsf_baseline(const std::vector<SourceBundle>& sources, const TabularMdp& target,
                         const TransferConfig& config, std::uint64_t seed) {
  config.validate();
  check_sources(sources, target);
  Rng rng(seed);
  LpsfAgent agent(sources, target, config);
  return run_protocol(agent, target, config, "lpsf", seed, rng);
}

PhaseTrace qlearning_baseline(const TabularMdp& target, const QLearnBaselineParams& params,
                              std::uint64_t seed) {
  require(params.total_steps >= 0 && params.max_steps_per_episode > 0, ErrorKind::InvalidConfig,
          "Q-learning step budgets must be valid");
  require(params.epsilon >= 0.0 && params.epsilon <= 1.0 && params.epsilon_decay > 0.0 &&
              params.epsilon_decay <= 1.0 && params.alpha >= 0.0,
          ErrorKind::InvalidConfig, "Q-learning parameters out of range");
  Rng rng(seed);
  PhaseTrace trace;
  trace.method = "qlearn";
  trace.seed = seed;
  trace.adaptation_steps = params.total_steps;
  Matrix q = Matrix::Zero(target.num_states(), target.num_actions());
  EpisodeTracker episodes(trace, target);
  double epsilon = params.epsilon;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> any_action(0, target.num_actions() - 1);
  int s = -1;
  for (int t = 0; t < params.total_steps; ++t) {
    if (!episodes.open()) s = episodes.begin(t, Phase::kLearning, rng);
    int action = 0;
    int source = -1;
    if (epsilon > 0.0 && unit(rng) < epsilon) {
      action = any_action(rng);
    } else {
      for (int a = 1; a < target.num_actions(); ++a)
        if (q(s, a) > q(s, action)) action = a;
      source = 0;
    }
    const StepResult out = step(target, rng, s, action);
    const double bootstrap = out.done ? 0.0 : q.row(out.next_state).maxCoeff();
    q(s, action) += params.alpha * (out.reward + target.gamma() * bootstrap - q(s, action));
    episodes.add(out.reward);
    const EpisodeSummary& ep = episodes.current();
    trace.rows.push_back({t, Phase::kLearning, ep.total_reward, ep.index, source, action, epsilon});
    epsilon *= params.epsilon_decay;
    s = out.next_state;
    if (out.done || ep.length >= params.max_steps_per_episode) episodes.close(true);
  }
  episodes.close(false);
  trace.fingerprint_at_switch = trace.fingerprint_final = q.sum();
  return trace;
}

std::vector<double> smoothed_episode_curve(const std::vector<EpisodeSummary>& episodes,
                                           int num_steps, int window) {
  require(window > 0, ErrorKind::InvalidArgument, "smoothing window must be positive");
  require(num_steps >= 0, ErrorKind::InvalidArgument, "step count must be non-negative");
  std::vector<double> curve(static_cast<std::size_t>(num_steps),
                            std::numeric_limits<double>::quiet_NaN());
  std::vector<double> finished;
  std::size_t next_episode = 0;
  double current = std::numeric_limits<double>::quiet_NaN();
  for (int t = 0; t < num_steps; ++t) {
    while (next_episode < episodes.size()) {
      const EpisodeSummary& ep = episodes[next_episode];
      if (ep.first_step + ep.length - 1 > t) break;
      if (ep.completed) {
        finished.push_back(ep.total_reward);
        const std::size_t n = std::min<std::size_t>(finished.size(), window);
        current = std::accumulate(finished.end() - static_cast<std::ptrdiff_t>(n), finished.end(),
                                  0.0) /
                  static_cast<double>(n);
      }
      ++next_episode;
    }
    curve[static_cast<std::size_t>(t)] = current;
  }
  return curve;
}

std::vector<double> smoothed_episode_curve(const PhaseTrace& trace, int window) {
  return smoothed_episode_curve(trace.episodes, static_cast<int>(trace.rows.size()), window);
}

}  // namespace sfde
