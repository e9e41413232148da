#include "sfde/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace sfde {

namespace fs = std::filesystem;

namespace {

// Seed streams for independent generators; tags keep roles apart.
enum SeedTag : std::uint64_t { kBaseTag = 0, kSourceTag = 1, kTargetTag = 2, kTrainTag = 3 };

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, std::uint64_t index) {
  std::uint64_t z = base * 0x9e3779b97f4a7c15ULL + (tag << 40) + index + 0x632be59bd9b4e019ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------- config

class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    require(j_.is_object(), ErrorKind::InvalidConfig, where() + "must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::InvalidConfig, path_ + key + ": wrong type");
    }
  }

  void read(const char* key, std::optional<double>& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    double v = 0.0;
    read(key, v);
    out = v;
  }

  template <typename Enum>
  void read_enum(const char* key, Enum& out, std::initializer_list<std::pair<const char*, Enum>> names) {
    std::string text;
    read(key, text);
    if (!j_.contains(key)) return;
    for (const auto& [name, value] : names) {
      if (text == name) {
        out = value;
        return;
      }
    }
    throw Error(ErrorKind::InvalidConfig, path_ + key + ": unknown value '" + text + "'");
  }

  template <typename Fn>
  void child(const char* key, Fn fn) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Reader sub(j_.at(key), path_ + key + ".");
    fn(sub);
    sub.finish();
  }

  void finish() const {
    for (const auto& item : j_.items())
      require(seen_.count(item.key()) > 0, ErrorKind::InvalidConfig,
              path_ + item.key() + ": unknown key");
  }

 private:
  std::string where() const { return path_.empty() ? "config " : path_ + " "; }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

const std::initializer_list<std::pair<const char*, LabelMode>> kLabelModes{
    {"policy_bootstrap", LabelMode::kPolicyBootstrap},
    {"gp_bootstrap", LabelMode::kGpBootstrap},
    {"td_table", LabelMode::kTdTable}};
const std::initializer_list<std::pair<const char*, StartMode>> kStartModes{
    {"mdp_default", StartMode::kMdpDefault}, {"uniform_random", StartMode::kUniformRandom}};
const std::initializer_list<std::pair<const char*, AlphaSchedule>> kSchedules{
    {"constant", AlphaSchedule::kConstant}, {"inverse_visits", AlphaSchedule::kInverseVisits}};

template <typename Enum>
std::string enum_name(Enum value, std::initializer_list<std::pair<const char*, Enum>> names) {
  for (const auto& [name, v] : names)
    if (v == value) return name;
  return "unknown";
}

void read_learning(Reader& r, LearningParams& p) {
  r.read("alpha", p.alpha);
  r.read("epsilon", p.epsilon);
  r.read("epsilon_decay", p.epsilon_decay);
  r.read("max_episodes", p.max_episodes);
  r.read("max_steps_per_episode", p.max_steps_per_episode);
  r.read_enum("alpha_schedule", p.alpha_schedule, kSchedules);
  r.read_enum("start_mode", p.start_mode, kStartModes);
  r.read("dataset_capacity", p.dataset_capacity);
}

Json learning_json(const LearningParams& p) {
  return {{"alpha", p.alpha},
          {"epsilon", p.epsilon},
          {"epsilon_decay", p.epsilon_decay},
          {"max_episodes", p.max_episodes},
          {"max_steps_per_episode", p.max_steps_per_episode},
          {"alpha_schedule", enum_name(p.alpha_schedule, kSchedules)},
          {"start_mode", enum_name(p.start_mode, kStartModes)},
          {"dataset_capacity", p.dataset_capacity}};
}

}  // namespace

void ExperimentConfig::validate() const {
  require(version == kConfigVersion, ErrorKind::InvalidConfig,
          "version: unsupported schema version " + std::to_string(version));
  require(benchmark == "maze" || benchmark == "object_world" || benchmark == "random_mdp",
          ErrorKind::InvalidConfig, "benchmark: must be maze, object_world or random_mdp");
  require(num_sources > 0, ErrorKind::InvalidConfig, "num_sources: must be positive");
  require(!methods.empty(), ErrorKind::InvalidConfig, "methods: must not be empty");
  for (const auto& m : methods)
    require(m == "sfde" || m == "fsf" || m == "lpsf" || m == "qlearn", ErrorKind::InvalidConfig,
            "methods: unknown method '" + m + "'");
  require(std::set<std::string>(methods.begin(), methods.end()).size() == methods.size(),
          ErrorKind::InvalidConfig, "methods: duplicate entry");
  require(!seeds.empty(), ErrorKind::InvalidConfig, "seeds: must not be empty");
  require(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == seeds.size(),
          ErrorKind::InvalidConfig, "seeds: duplicate entry");
  require(maze.width >= 2 && maze.height >= 2 && maze.num_obstacles >= 0, ErrorKind::InvalidConfig,
          "maze: needs width, height >= 2 and non-negative num_obstacles");
  require(object_world.num_types > 0 && !object_world.source_type_rewards.empty() &&
              static_cast<int>(object_world.target_type_rewards.size()) == object_world.num_types,
          ErrorKind::InvalidConfig, "object_world: type reward lists must have num_types entries");
  for (const auto& r : object_world.source_type_rewards)
    require(static_cast<int>(r.size()) == object_world.num_types, ErrorKind::InvalidConfig,
            "object_world.source_type_rewards: each entry needs num_types values");
  require(random_mdp.num_states > 0 && random_mdp.num_actions > 0 && random_mdp.feature_dim > 0,
          ErrorKind::InvalidConfig, "random_mdp: sizes must be positive");
  auto wrap = [](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      throw Error(ErrorKind::InvalidConfig, std::string(section) + ": " + e.what());
    }
  };
  wrap("source_training.qlearning", [&] { source_training.qlearning.validate(); });
  wrap("source_training.sf_extraction", [&] { source_training.sf_extraction.validate(); });
  require(source_training.audit_tolerance > 0.0, ErrorKind::InvalidConfig,
          "source_training.audit_tolerance: must be positive");
  wrap("transfer", [&] { transfer.validate(); });
  require(qlearn.total_steps > 0 && qlearn.max_steps_per_episode > 0 && qlearn.alpha >= 0.0 &&
              qlearn.epsilon >= 0.0 && qlearn.epsilon <= 1.0 && qlearn.epsilon_decay > 0.0 &&
              qlearn.epsilon_decay <= 1.0,
          ErrorKind::InvalidConfig, "qlearn: parameters out of range");
  require(bounds.theorem1_pairs >= 0 && bounds.gp_pairs >= 0 && bounds.coverage_trials >= 0 &&
              bounds.num_states > 0 && bounds.max_actions >= 2 && bounds.gp_samples > 0 &&
              bounds.coverage_m > 0 && bounds.gp_lengthscale > 0.0 && !bounds.feature_dims.empty(),
          ErrorKind::InvalidConfig, "bounds: sizes out of range");
  require(bounds.delta > 0.0 && bounds.delta < 1.0, ErrorKind::InvalidConfig,
          "bounds.delta: must lie in (0,1)");
  require(report_window > 0, ErrorKind::InvalidConfig, "report_window: must be positive");
}

ExperimentConfig parse_config(const Json& j) {
  ExperimentConfig c;
  Reader r(j, "");
  r.read("version", c.version);
  require(c.version == kConfigVersion, ErrorKind::InvalidConfig,
          "version: unsupported schema version " + std::to_string(c.version));
  r.read("benchmark", c.benchmark);
  r.read("env_seed", c.env_seed);
  r.read("num_sources", c.num_sources);
  r.read("target_per_seed", c.target_per_seed);
  r.child("maze", [&](Reader& m) {
    m.read("width", c.maze.width);
    m.read("height", c.maze.height);
    m.read("num_obstacles", c.maze.num_obstacles);
    m.read("step_reward", c.maze.step_reward);
    m.read("obstacle_reward", c.maze.obstacle_reward);
    m.read("goal_reward", c.maze.goal_reward);
    m.read("gamma", c.maze.gamma);
  });
  r.child("object_world", [&](Reader& o) {
    o.read("grid_size", c.object_world.grid_size);
    o.read("num_objects", c.object_world.num_objects);
    o.read("num_types", c.object_world.num_types);
    o.read("source_type_rewards", c.object_world.source_type_rewards);
    o.read("target_type_rewards", c.object_world.target_type_rewards);
    o.read("transition_noise", c.object_world.transition_noise);
    o.read("terminal_reward", c.object_world.terminal_reward);
    o.read("gamma", c.object_world.gamma);
  });
  r.child("random_mdp", [&](Reader& m) {
    m.read("num_states", c.random_mdp.num_states);
    m.read("num_actions", c.random_mdp.num_actions);
    m.read("feature_dim", c.random_mdp.feature_dim);
    m.read("gamma", c.random_mdp.gamma);
  });
  r.read("methods", c.methods);
  r.read("seeds", c.seeds);
  r.child("source_training", [&](Reader& s) {
    s.child("qlearning", [&](Reader& q) { read_learning(q, c.source_training.qlearning); });
    s.child("sf_extraction", [&](Reader& q) { read_learning(q, c.source_training.sf_extraction); });
    s.read("audit_tolerance", c.source_training.audit_tolerance);
  });
  r.child("transfer", [&](Reader& t) {
    TransferConfig& x = c.transfer;
    t.read("sigma_s_sq", x.sigma_s_sq);
    t.read("sigma_sq", x.sigma_sq);
    t.read("adaptation_steps", x.adaptation_steps);
    t.read("testing_steps", x.testing_steps);
    t.read("batch_size", x.batch_size);
    t.read("source_subsample", x.source_subsample);
    t.read("epsilon", x.epsilon);
    t.read("epsilon_decay", x.epsilon_decay);
    t.read("alpha", x.alpha);
    t.read("max_steps_per_episode", x.max_steps_per_episode);
    t.read("refit_every", x.refit_every);
    t.read("relabel_every", x.relabel_every);
    t.read_enum("label_mode", x.label_mode, kLabelModes);
    t.read("lengthscale", x.lengthscale);
    t.read("lengthscale_grid", x.lengthscale_grid);
  });
  r.child("qlearn", [&](Reader& q) {
    q.read("alpha", c.qlearn.alpha);
    q.read("epsilon", c.qlearn.epsilon);
    q.read("epsilon_decay", c.qlearn.epsilon_decay);
    q.read("total_steps", c.qlearn.total_steps);
    q.read("max_steps_per_episode", c.qlearn.max_steps_per_episode);
  });
  r.child("bounds", [&](Reader& b) {
    b.read("seed", c.bounds.seed);
    b.read("theorem1_pairs", c.bounds.theorem1_pairs);
    b.read("num_states", c.bounds.num_states);
    b.read("max_actions", c.bounds.max_actions);
    b.read("feature_dims", c.bounds.feature_dims);
    b.read("gp_pairs", c.bounds.gp_pairs);
    b.read("gp_samples", c.bounds.gp_samples);
    b.read("gp_lengthscale", c.bounds.gp_lengthscale);
    b.read("coverage_trials", c.bounds.coverage_trials);
    b.read("coverage_m", c.bounds.coverage_m);
    b.read("delta", c.bounds.delta);
    b.read("env_pairs", c.bounds.env_pairs);
  });
  r.read("report_window", c.report_window);
  std::string out = c.output_dir.string();
  r.read("output_dir", out);
  c.output_dir = out;
  r.finish();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, path.string() + ": " + e.what());
  }
  return parse_config(j);
}

Json config_to_json(const ExperimentConfig& c) {
  const TransferConfig& t = c.transfer;
  const ObjectWorldEnvConfig& o = c.object_world;
  return {
      {"version", c.version},
      {"benchmark", c.benchmark},
      {"env_seed", c.env_seed},
      {"num_sources", c.num_sources},
      {"target_per_seed", c.target_per_seed},
      {"maze",
       {{"width", c.maze.width},
        {"height", c.maze.height},
        {"num_obstacles", c.maze.num_obstacles},
        {"step_reward", c.maze.step_reward},
        {"obstacle_reward", c.maze.obstacle_reward},
        {"goal_reward", c.maze.goal_reward},
        {"gamma", c.maze.gamma}}},
      {"object_world",
       {{"grid_size", o.grid_size},
        {"num_objects", o.num_objects},
        {"num_types", o.num_types},
        {"source_type_rewards", o.source_type_rewards},
        {"target_type_rewards", o.target_type_rewards},
        {"transition_noise", o.transition_noise},
        {"terminal_reward", o.terminal_reward ? Json(*o.terminal_reward) : Json(nullptr)},
        {"gamma", o.gamma}}},
      {"random_mdp",
       {{"num_states", c.random_mdp.num_states},
        {"num_actions", c.random_mdp.num_actions},
        {"feature_dim", c.random_mdp.feature_dim},
        {"gamma", c.random_mdp.gamma}}},
      {"methods", c.methods},
      {"seeds", c.seeds},
      {"source_training",
       {{"qlearning", learning_json(c.source_training.qlearning)},
        {"sf_extraction", learning_json(c.source_training.sf_extraction)},
        {"audit_tolerance", c.source_training.audit_tolerance}}},
      {"transfer",
       {{"sigma_s_sq", t.sigma_s_sq},
        {"sigma_sq", t.sigma_sq},
        {"adaptation_steps", t.adaptation_steps},
        {"testing_steps", t.testing_steps},
        {"batch_size", t.batch_size},
        {"source_subsample", t.source_subsample},
        {"epsilon", t.epsilon},
        {"epsilon_decay", t.epsilon_decay},
        {"alpha", t.alpha},
        {"max_steps_per_episode", t.max_steps_per_episode},
        {"refit_every", t.refit_every},
        {"relabel_every", t.relabel_every},
        {"label_mode", enum_name(t.label_mode, kLabelModes)},
        {"lengthscale", t.lengthscale},
        {"lengthscale_grid", t.lengthscale_grid}}},
      {"qlearn",
       {{"alpha", c.qlearn.alpha},
        {"epsilon", c.qlearn.epsilon},
        {"epsilon_decay", c.qlearn.epsilon_decay},
        {"total_steps", c.qlearn.total_steps},
        {"max_steps_per_episode", c.qlearn.max_steps_per_episode}}},
      {"bounds",
       {{"seed", c.bounds.seed},
        {"theorem1_pairs", c.bounds.theorem1_pairs},
        {"num_states", c.bounds.num_states},
        {"max_actions", c.bounds.max_actions},
        {"feature_dims", c.bounds.feature_dims},
        {"gp_pairs", c.bounds.gp_pairs},
        {"gp_samples", c.bounds.gp_samples},
        {"gp_lengthscale", c.bounds.gp_lengthscale},
        {"coverage_trials", c.bounds.coverage_trials},
        {"coverage_m", c.bounds.coverage_m},
        {"delta", c.bounds.delta},
        {"env_pairs", c.bounds.env_pairs}}},
      {"report_window", c.report_window},
      {"output_dir", c.output_dir.string()},
  };
}

std::string config_hash(const ExperimentConfig& config) {
  Json j = config_to_json(config);
  // The hash identifies the experiment, not where it was written.
  j.erase("output_dir");
  return hex64(fnv1a64(j.dump()));
}

int worker_count() {
  if (const char* env = std::getenv("SFDE_LAB_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    require(end != env && *end == '\0' && v > 0, ErrorKind::InvalidConfig,
            "SFDE_LAB_WORKERS must be a positive integer");
    return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

fs::path source_env_path(const fs::path& out, int index) {
  char name[32];
  std::snprintf(name, sizeof(name), "source_%02d.json", index);
  return out / "envs" / name;
}

fs::path target_env_path(const ExperimentConfig& config, std::uint64_t seed) {
  if (!config.target_per_seed) return config.output_dir / "envs" / "target.json";
  return config.output_dir / "envs" / ("target_seed_" + std::to_string(seed) + ".json");
}

fs::path bundle_path(const fs::path& out, int index) {
  char name[32];
  std::snprintf(name, sizeof(name), "bundle_%02d.json", index);
  return out / "sources" / name;
}

fs::path run_trace_path(const fs::path& out, const std::string& method, std::uint64_t seed) {
  return out / "runs" / method / ("seed_" + std::to_string(seed) + ".csv");
}

fs::path run_episodes_path(const fs::path& out, const std::string& method, std::uint64_t seed) {
  return out / "runs" / method / ("seed_" + std::to_string(seed) + "_episodes.csv");
}

double headline_metric(const std::string& method, const std::vector<EpisodeSummary>& episodes,
                       int window) {
  std::vector<double> totals;
  const Phase phase = method == "qlearn" ? Phase::kLearning : Phase::kTesting;
  for (const auto& ep : episodes)
    if (ep.phase == phase && ep.completed) totals.push_back(ep.total_reward);
  if (totals.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t first = 0;
  if (method == "qlearn" && totals.size() > static_cast<std::size_t>(window))
    first = totals.size() - static_cast<std::size_t>(window);
  double sum = 0.0;
  for (std::size_t k = first; k < totals.size(); ++k) sum += totals[k];
  return sum / static_cast<double>(totals.size() - first);
}

namespace {

// ---------------------------------------------------------------- plumbing

/// Runs fn(0..n-1) on a bounded pool. fn must not throw.
template <typename Fn>
void parallel_for(int n, Fn fn) {
  const int workers = std::min(worker_count(), n);
  std::atomic<int> next{0};
  auto loop = [&] {
    for (int i = next++; i < n; i = next++) fn(i);
  };
  if (workers <= 1) {
    loop();
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(loop);
  for (auto& t : pool) t.join();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Records provenance of one command invocation in <dir>/manifest.json.
class Manifest {
 public:
  Manifest(fs::path dir, std::string command, const Json& config, std::string hash)
      : dir_(std::move(dir)), start_(std::chrono::steady_clock::now()) {
    doc_["tool"] = "sfde-lab";
    doc_["version"] = SFDE_VERSION;
    doc_["command"] = std::move(command);
    doc_["config_hash"] = std::move(hash);
    doc_["config"] = config;
    doc_["status"] = "running";
    doc_["artifacts"] = Json::array();
    doc_["runs"] = Json::array();
  }

  void plan(const fs::path& artifact) { planned_.push_back(artifact); }
  void add_run(Json run) {
    std::lock_guard<std::mutex> lock(mutex_);
    runs_.push_back(std::move(run));
  }

  /// Must precede every result file.
  void write_initial() {
    Json artifacts = Json::array();
    for (const auto& p : planned_) artifacts.push_back({{"path", relative(p)}, {"fnv1a64", nullptr}});
    doc_["artifacts"] = artifacts;
    write_json_file(dir_ / "manifest.json", doc_);
  }

  void finish(const std::string& status) {
    Json artifacts = Json::array();
    for (const auto& p : planned_) {
      Json entry{{"path", relative(p)}, {"fnv1a64", nullptr}};
      if (fs::exists(p)) entry["fnv1a64"] = hex64(fnv1a64(read_text_file(p)));
      artifacts.push_back(std::move(entry));
    }
    std::sort(runs_.begin(), runs_.end(), [](const Json& a, const Json& b) { return a.dump() < b.dump(); });
    doc_["artifacts"] = artifacts;
    doc_["runs"] = runs_;
    doc_["status"] = status;
    doc_["wall_seconds"] = seconds_since(start_);
    write_json_file(dir_ / "manifest.json", doc_);
  }

 private:
  std::string relative(const fs::path& p) const { return fs::relative(p, dir_).generic_string(); }

  fs::path dir_;
  Json doc_;
  std::vector<fs::path> planned_;
  std::vector<Json> runs_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point start_;
};

Manifest make_manifest(const ExperimentConfig& config, const char* sub, const char* command) {
  return Manifest(config.output_dir / sub, command, config_to_json(config), config_hash(config));
}

// ---------------------------------------------------------------- environments

Vector uniform_weights(Rng& rng, int dim) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vector w(dim);
  for (int d = 0; d < dim; ++d) w(d) = unit(rng);
  return w;
}

TabularMdp make_env(const ExperimentConfig& c, bool target, std::uint64_t index) {
  const std::uint64_t seed = derive_seed(c.env_seed, target ? kTargetTag : kSourceTag, index);
  if (c.benchmark == "maze") {
    MazeSpec spec;
    spec.width = c.maze.width;
    spec.height = c.maze.height;
    spec.num_random_obstacles = c.maze.num_obstacles;
    spec.step_reward = c.maze.step_reward;
    spec.obstacle_reward = c.maze.obstacle_reward;
    spec.goal_reward = c.maze.goal_reward;
    spec.gamma = c.maze.gamma;
    spec.rng_seed = seed;
    return make_maze(spec);
  }
  if (c.benchmark == "object_world") {
    // One frozen layout; the environments differ only in what each object type is worth.
    const ObjectWorldEnvConfig& o = c.object_world;
    ObjectWorldSpec spec;
    spec.grid_size = o.grid_size;
    spec.num_objects = o.num_objects;
    spec.num_types = o.num_types;
    spec.type_rewards = target ? o.target_type_rewards
                               : o.source_type_rewards[index % o.source_type_rewards.size()];
    spec.transition_noise = o.transition_noise;
    spec.terminal_cell_reward = o.terminal_reward;
    spec.gamma = o.gamma;
    spec.rng_seed = derive_seed(c.env_seed, kBaseTag, 0);
    return make_object_world(spec);
  }
  // Shared features, per-environment dynamics and weights.
  Rng base_rng(derive_seed(c.env_seed, kBaseTag, 0));
  const TabularMdp base = make_random_mdp(c.random_mdp, base_rng);
  Rng rng(seed);
  const TabularMdp env = resample_dynamics(base, rng);
  return env.with_weights(uniform_weights(rng, base.feature_dim()));
}

std::vector<std::uint64_t> target_indices(const ExperimentConfig& c) {
  return c.target_per_seed ? c.seeds : std::vector<std::uint64_t>{0};
}

std::string describe(const std::exception& e) { return e.what(); }

}  // namespace

// ---------------------------------------------------------------- commands

CommandResult cmd_gen_envs(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  Manifest manifest = make_manifest(config, "envs", "gen-envs");
  for (int i = 0; i < config.num_sources; ++i) manifest.plan(source_env_path(config.output_dir, i));
  for (std::uint64_t seed : target_indices(config)) manifest.plan(target_env_path(config, seed));
  manifest.write_initial();

  for (int i = 0; i < config.num_sources; ++i) {
    Json j = mdp_to_json(make_env(config, false, static_cast<std::uint64_t>(i)));
    j["role"] = "source";
    j["index"] = i;
    j["manifest"] = "manifest.json";
    write_json_file(source_env_path(config.output_dir, i), j);
  }
  for (std::uint64_t seed : target_indices(config)) {
    Json j = mdp_to_json(make_env(config, true, seed));
    j["role"] = "target";
    j["index"] = seed;
    j["manifest"] = "manifest.json";
    write_json_file(target_env_path(config, seed), j);
  }
  manifest.finish("ok");
  const std::size_t targets = target_indices(config).size();
  log << "gen-envs: wrote " << config.num_sources << " source and " << targets
      << " target environment(s) to " << (config.output_dir / "envs").string() << "\n";
  return {kExitOk, ""};
}

CommandResult cmd_train_sources(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const fs::path& out = config.output_dir;
  std::vector<TabularMdp> envs;
  for (int i = 0; i < config.num_sources; ++i)
    envs.push_back(mdp_from_json(read_json_file(source_env_path(out, i))));

  Manifest manifest = make_manifest(config, "sources", "train-sources");
  const fs::path dir = out / "sources";
  auto csv_name = [&](const char* stem, int i) {
    char name[48];
    std::snprintf(name, sizeof(name), "%s_%02d.csv", stem, i);
    return dir / name;
  };
  for (int i = 0; i < config.num_sources; ++i) {
    manifest.plan(bundle_path(out, i));
    manifest.plan(csv_name("qlearning", i));
    manifest.plan(csv_name("sf_residual", i));
  }
  manifest.plan(dir / "audit.json");
  manifest.write_initial();

  struct Outcome {
    double audit = 0.0;
    bool passed = false;
    std::string error;
  };
  std::vector<Outcome> outcomes(static_cast<std::size_t>(config.num_sources));
  parallel_for(config.num_sources, [&](int i) {
    Outcome& o = outcomes[static_cast<std::size_t>(i)];
    const auto start = std::chrono::steady_clock::now();
    try {
      const TabularMdp& mdp = envs[static_cast<std::size_t>(i)];
      Rng rng(derive_seed(config.env_seed, kTrainTag, static_cast<std::uint64_t>(i)));
      const QLearningResult ql = q_learning(mdp, config.source_training.qlearning, rng);
      const SfExtraction ex = extract_sf(mdp, ql.policy, config.source_training.sf_extraction, rng, i);
      const Matrix q = policy_evaluation_q(mdp, ql.policy).q;
      const double scale = std::max(q.cwiseAbs().maxCoeff(), 1e-12);
      o.audit = (sf_to_q(mdp, ex.table.psi, mdp.weights().w) - q).cwiseAbs().maxCoeff() / scale;
      o.passed = o.audit <= config.source_training.audit_tolerance;
      Json j = bundle_to_json({i, ql.policy, ex.table, ex.dataset});
      j["audit"] = {{"relative_error", o.audit}, {"tolerance", config.source_training.audit_tolerance},
                    {"passed", o.passed}};
      j["manifest"] = "manifest.json";
      write_json_file(bundle_path(out, i), j);
      write_text_file(csv_name("qlearning", i), learning_trace_csv(ql.trace));
      std::string residual = "episode,mean_residual\n";
      for (std::size_t k = 0; k < ex.residual_trace.size(); ++k)
        residual += std::to_string(k) + "," + format_double(ex.residual_trace[k]) + "\n";
      write_text_file(csv_name("sf_residual", i), residual);
    } catch (const std::exception& e) {
      o.error = describe(e);
    }
    manifest.add_run({{"source", i}, {"ok", o.error.empty()}, {"seconds", seconds_since(start)}});
  });

  Json audit = Json::array();
  int failures = 0;
  for (int i = 0; i < config.num_sources; ++i) {
    const Outcome& o = outcomes[static_cast<std::size_t>(i)];
    Json entry{{"source", i}, {"relative_error", o.error.empty() ? Json(o.audit) : Json(nullptr)},
               {"passed", o.error.empty() && o.passed}};
    if (!o.error.empty()) {
      entry["error"] = o.error;
      log << "train-sources: source " << i << " failed: " << o.error << "\n";
    } else if (!o.passed) {
      log << "train-sources: source " << i << " failed the SF audit (relative error "
          << format_double(o.audit) << ")\n";
    }
    if (!(o.error.empty() && o.passed)) ++failures;
    audit.push_back(std::move(entry));
  }
  write_json_file(dir / "audit.json",
                  {{"manifest", "manifest.json"},
                   {"tolerance", config.source_training.audit_tolerance},
                   {"sources", audit}});
  manifest.finish(failures == 0 ? "ok" : "failed");
  log << "train-sources: " << config.num_sources - failures << "/" << config.num_sources
      << " sources passed the audit\n";
  if (failures > 0) return {kExitRunFailure, std::to_string(failures) + " source(s) failed"};
  return {kExitOk, ""};
}

CommandResult cmd_transfer(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const fs::path& out = config.output_dir;
  const bool needs_sources = std::any_of(config.methods.begin(), config.methods.end(),
                                         [](const std::string& m) { return m != "qlearn"; });
  std::vector<SourceBundle> sources;
  if (needs_sources)
    for (int i = 0; i < config.num_sources; ++i)
      sources.push_back(bundle_from_json(read_json_file(bundle_path(out, i))));
  std::map<std::uint64_t, TabularMdp> targets;
  for (std::uint64_t k : target_indices(config))
    targets.emplace(k, mdp_from_json(read_json_file(target_env_path(config, k))));

  Manifest manifest = make_manifest(config, "runs", "transfer");
  struct Task {
    std::string method;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& m : config.methods)
    for (std::uint64_t s : config.seeds) {
      tasks.push_back({m, s});
      manifest.plan(run_trace_path(out, m, s));
      manifest.plan(run_episodes_path(out, m, s));
    }
  manifest.plan(out / "runs" / "summary.json");
  manifest.write_initial();

  std::vector<double> metric(tasks.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> errors(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), [&](int idx) {
    const Task& task = tasks[static_cast<std::size_t>(idx)];
    const auto start = std::chrono::steady_clock::now();
    try {
      const TabularMdp& target = targets.at(config.target_per_seed ? task.seed : 0);
      PhaseTrace trace;
      if (task.method == "sfde") trace = sfde_run(sources, target, config.transfer, task.seed);
      else if (task.method == "fsf") trace = fsf_baseline(sources, target, config.transfer, task.seed);
      else if (task.method == "lpsf") trace = lpsf_baseline(sources, target, config.transfer, task.seed);
      else trace = qlearning_baseline(target, config.qlearn, task.seed);
      write_text_file(run_trace_path(out, task.method, task.seed), trace_csv(trace));
      write_text_file(run_episodes_path(out, task.method, task.seed), episodes_csv(trace));
      metric[static_cast<std::size_t>(idx)] =
          headline_metric(task.method, trace.episodes, config.report_window);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(idx)] = describe(e);
    }
    manifest.add_run({{"method", task.method},
                      {"seed", task.seed},
                      {"ok", errors[static_cast<std::size_t>(idx)].empty()},
                      {"seconds", seconds_since(start)}});
  });

  Json methods = Json::object();
  int failures = 0;
  for (const auto& m : config.methods) {
    Json per_seed = Json::array();
    Json failed = Json::array();
    std::vector<double> values;
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      if (tasks[k].method != m) continue;
      if (!errors[k].empty()) {
        ++failures;
        failed.push_back({{"seed", tasks[k].seed}, {"error", errors[k]}});
        log << "transfer: " << m << " seed " << tasks[k].seed << " failed: " << errors[k] << "\n";
        continue;
      }
      per_seed.push_back({{"seed", tasks[k].seed},
                          {"value", std::isfinite(metric[k]) ? Json(metric[k]) : Json(nullptr)}});
      if (std::isfinite(metric[k])) values.push_back(metric[k]);
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean = values.empty() ? std::numeric_limits<double>::quiet_NaN() : mean / values.size();
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(var / (values.size() - 1)) : 0.0;
    methods[m] = {{"runs", per_seed.size()},
                  {"mean", std::isfinite(mean) ? Json(mean) : Json(nullptr)},
                  {"std", sd},
                  {"per_seed", per_seed},
                  {"failed", failed}};
    log << "transfer: " << m << " mean " << format_double(mean) << " std " << format_double(sd)
        << " over " << values.size() << " run(s)\n";
  }
  write_json_file(out / "runs" / "summary.json",
                  {{"manifest", "manifest.json"},
                   {"metric", "testing-phase average episode reward (qlearn: mean of the last "
                              "report_window completed episodes)"},
                   {"adaptation_steps", config.transfer.adaptation_steps},
                   {"testing_steps", config.transfer.testing_steps},
                   {"methods", methods}});
  manifest.finish(failures == 0 ? "ok" : "failed");
  if (failures > 0) return {kExitRunFailure, std::to_string(failures) + " run(s) failed"};
  return {kExitOk, ""};
}

namespace {

struct SuiteTally {
  explicit SuiteTally(std::string n) : name(std::move(n)) {}

  std::string name;
  int instances = 0;
  int violations = 0;
  int preconditions_met = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  std::vector<std::string> offending;

  void add(const BoundReport& report, const std::string& instance) {
    ++instances;
    violations += report.violations;
    if (report.precondition_met) ++preconditions_met;
    min_slack = std::min(min_slack, report.min_slack);
    for (const BoundRow& row : report.rows)
      if (row.slack < -kSlackTolerance && offending.size() < 20)
        offending.push_back(instance + " (s=" + std::to_string(row.s) + ", a=" +
                            std::to_string(row.a) + ") slack " + format_double(row.slack));
  }

  Json to_json() const {
    return {{"name", name},
            {"instances", instances},
            {"violations", violations},
            {"preconditions_met", preconditions_met},
            {"min_slack", std::isfinite(min_slack) ? Json(min_slack) : Json(nullptr)}};
  }
};

std::string instance_name(int k) {
  char name[32];
  std::snprintf(name, sizeof(name), "instance_%03d", k);
  return name;
}

}  // namespace

CommandResult cmd_bounds(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const BoundsSuiteConfig& b = config.bounds;
  const fs::path dir = config.output_dir / "bounds";
  Manifest manifest = make_manifest(config, "bounds", "bounds");
  manifest.plan(dir / "summary.json");
  manifest.write_initial();

  Rng rng(b.seed);
  std::uniform_int_distribution<int> actions(2, b.max_actions);
  std::uniform_int_distribution<std::size_t> dims(0, b.feature_dims.size() - 1);
  auto random_pair = [&] {
    const int dim = b.feature_dims[dims(rng)];
    TabularMdp a = make_random_mdp({b.num_states, actions(rng), dim, 0.9}, rng);
    TabularMdp other = resample_dynamics(a, rng).with_weights(uniform_weights(rng, dim));
    return std::make_pair(std::move(a), std::move(other));
  };
  std::vector<SuiteTally> suites;
  auto emit = [&](SuiteTally& tally, const BoundReport& report, const std::string& instance) {
    const fs::path file = dir / tally.name / (instance + ".csv");
    write_text_file(file, bound_csv(report));
    manifest.plan(file);
    tally.add(report, instance);
  };

  SuiteTally printed{"theorem1_printed"}, sketch{"theorem1_sketch"};
  for (int k = 0; k < b.theorem1_pairs; ++k) {
    const auto [mi, mj] = random_pair();
    const Theorem1Report r = theorem1_bound(mi, mj);
    emit(printed, r.printed, instance_name(k));
    emit(sketch, r.sketch, instance_name(k));
  }
  suites.push_back(printed);
  suites.push_back(sketch);

  {
    SuiteTally identical{"theorem1_identical"};
    const TabularMdp mdp = make_random_mdp({b.num_states, b.max_actions, b.feature_dims.front(), 0.9}, rng);
    const Theorem1Report r = theorem1_bound(mdp, mdp);
    emit(identical, r.printed, "printed");
    emit(identical, r.sketch, "sketch");
    // Any nonzero entry counts against the suite.
    for (const BoundReport* rep : {&r.printed, &r.sketch})
      for (const BoundRow& row : rep->rows)
        if (row.lhs != 0.0 || row.rhs != 0.0) ++identical.violations;
    suites.push_back(identical);
  }

  {
    SuiteTally adversarial{"theorem1_adversarial"};
    const auto [mi, mj0] = random_pair();
    const TabularMdp mj = mj0.with_weights(-100.0 * mi.weights().w);
    const Theorem1Report r = theorem1_bound(mi, mj);
    emit(adversarial, r.printed, "printed");
    emit(adversarial, r.sketch, "sketch");
    suites.push_back(adversarial);
  }

  if (b.env_pairs) {
    SuiteTally envs{"theorem1_env_pairs"};
    std::vector<TabularMdp> sources;
    for (int i = 0; i < config.num_sources; ++i)
      sources.push_back(mdp_from_json(read_json_file(source_env_path(config.output_dir, i))));
    for (std::size_t i = 0; i < sources.size(); ++i)
      for (std::size_t j = 0; j < sources.size(); ++j)
        if (i != j)
          emit(envs, theorem1_bound(sources[i], sources[j]).printed,
               "pair_" + std::to_string(i) + "_" + std::to_string(j));
    suites.push_back(envs);
  }

  const NoiseConfig noise = config.transfer.noise();
  {
    SuiteTally remark{"remark1_gp"};
    for (int k = 0; k < b.gp_pairs; ++k) {
      const int dim = b.feature_dims[dims(rng)];
      const TabularMdp target = make_random_mdp({b.num_states, actions(rng), dim, 0.9}, rng);
      std::vector<Policy> policies;
      std::vector<Matrix> q_tilde;
      double eps = 0.0;
      for (int i = 0; i < 3; ++i) {
        const TabularMdp source = resample_dynamics(target, rng).with_weights(uniform_weights(rng, dim));
        policies.push_back(greedy_policy(value_iteration(source)));
        const GpTransferEstimate est = gp_transfer_estimate(
            target, source, policies.back(), target.weights().w, b.gp_samples, b.gp_lengthscale,
            b.delta, noise, rng);
        q_tilde.push_back(est.q);
        eps = std::max(eps, est.epsilon);
      }
      emit(remark, remark1_check(target, policies, q_tilde, eps), instance_name(k));
    }
    suites.push_back(remark);
  }
  {
    SuiteTally theorem2{"theorem2_gp"};
    for (int k = 0; k < b.gp_pairs; ++k) {
      const auto [target, source] = random_pair();
      const Policy pi = greedy_policy(value_iteration(source));
      const GpTransferEstimate est = gp_transfer_estimate(target, source, pi, target.weights().w,
                                                          b.gp_samples, b.gp_lengthscale, b.delta,
                                                          noise, rng);
      emit(theorem2, theorem2_bound(target, source, pi, target.weights().w, est.q, est.epsilon),
           instance_name(k));
    }
    suites.push_back(theorem2);
  }

  Json coverage_json = nullptr;
  bool coverage_ok = true;
  if (b.coverage_trials > 0) {
    MazeSpec spec;
    spec.width = 4;
    spec.height = 4;
    spec.obstacle_cells = {5, 10};
    spec.goal_cell = 15;
    const TabularMdp maze = make_maze(spec);
    CoverageOptions options;
    options.m = b.coverage_m;
    options.noise = noise;
    const CoverageResult cov = lemma1_coverage_test(maze, greedy_policy(value_iteration(maze)),
                                                    maze.weights().w, b.delta, b.coverage_trials,
                                                    options, rng);
    const double threshold = 1.0 - b.delta - 0.03;
    coverage_ok = cov.skipped || cov.fraction >= threshold;
    coverage_json = {{"trials", cov.trials},   {"covered", cov.covered},
                     {"fraction", cov.fraction}, {"threshold", threshold},
                     {"max_ratio", cov.max_ratio}, {"skipped", cov.skipped},
                     {"diagnostic", cov.diagnostic}, {"passed", coverage_ok}};
    log << "bounds: lemma1 coverage " << format_double(cov.fraction) << " (threshold "
        << format_double(threshold) << ")\n";
  }

  Json suite_json = Json::array();
  int violations = 0;
  for (const SuiteTally& s : suites) {
    suite_json.push_back(s.to_json());
    violations += s.violations;
    log << "bounds: " << s.name << " instances " << s.instances << " violations " << s.violations
        << " min slack " << format_double(s.min_slack) << "\n";
    for (const auto& o : s.offending) log << "  violation: " << s.name << " " << o << "\n";
  }
  write_json_file(dir / "summary.json", {{"manifest", "manifest.json"},
                                         {"suites", suite_json},
                                         {"lemma1_coverage", coverage_json},
                                         {"violations", violations}});
  const bool ok = violations == 0 && coverage_ok;
  manifest.finish(ok ? "ok" : "violations");
  if (!ok) return {kExitBoundViolation, "bound violations found"};
  return {kExitOk, ""};
}

namespace {

std::vector<double> per_step_rewards(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line.rfind("step,phase,", 0) == 0,
          ErrorKind::Io, origin + ": unexpected trace header");
  std::vector<double> rewards;
  int last_episode = -1;
  double last_cumulative = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    require(cells.size() == 7, ErrorKind::Io, origin + ": expected 7 cells per row");
    const double cumulative = std::stod(cells[2]);
    const int episode = std::stoi(cells[3]);
    rewards.push_back(episode == last_episode ? cumulative - last_cumulative : cumulative);
    last_episode = episode;
    last_cumulative = cumulative;
  }
  return rewards;
}

std::string curve_file(const std::string& header, const std::vector<double>& curve) {
  std::string out = "# " + header + "\n";
  for (std::size_t t = 0; t < curve.size(); ++t)
    out += std::to_string(t) + " " + format_double(curve[t]) + "\n";
  return out;
}

// Pointwise mean over runs, skipping runs with no value yet.
std::vector<double> mean_curve(const std::vector<std::vector<double>>& curves) {
  std::size_t len = 0;
  for (const auto& c : curves) len = std::max(len, c.size());
  std::vector<double> out(len, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t t = 0; t < len; ++t) {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : curves)
      if (t < c.size() && std::isfinite(c[t])) {
        sum += c[t];
        ++n;
      }
    if (n > 0) out[t] = sum / n;
  }
  return out;
}

constexpr int kStepWindow = 100;

}  // namespace

SignTest sign_test(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size(), ErrorKind::InvalidArgument, "sign test needs paired samples");
  SignTest t;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) ++t.wins;
    else if (a[i] < b[i]) ++t.losses;
    else ++t.ties;
  }
  const int n = t.wins + t.losses;
  double pmf = std::ldexp(1.0, -n);  // P(X = 0)
  double tail = 0.0;
  for (int k = 0; k <= n; ++k) {
    if (k >= t.wins) tail += pmf;
    pmf *= static_cast<double>(n - k) / (k + 1);
  }
  t.p_value = std::min(1.0, tail);
  return t;
}

CommandResult cmd_report(const fs::path& run_dir, std::ostream& log) {
  const fs::path runs = run_dir / "runs";
  require(fs::exists(runs / "manifest.json"), ErrorKind::MissingData,
          "no transfer runs under " + runs.string() + " (missing manifest.json)");
  const Json transfer_manifest = read_json_file(runs / "manifest.json");
  ExperimentConfig config = parse_config(transfer_manifest.at("config"));
  config.output_dir = run_dir;

  std::vector<std::string> missing;
  for (const auto& m : config.methods)
    for (std::uint64_t s : config.seeds)
      for (const fs::path& p : {run_trace_path(run_dir, m, s), run_episodes_path(run_dir, m, s)})
        if (!fs::exists(p)) missing.push_back(fs::relative(p, run_dir).generic_string());
  if (!missing.empty()) {
    std::string list;
    for (const auto& p : missing) list += (list.empty() ? "" : ", ") + p;
    throw Error(ErrorKind::MissingData, "missing run files: " + list);
  }

  Manifest manifest = make_manifest(config, "report", "report");
  const fs::path dir = run_dir / "report";
  for (const auto& m : config.methods) {
    manifest.plan(dir / ("curve_" + m + ".dat"));
    manifest.plan(dir / ("step_curve_" + m + ".dat"));
  }
  manifest.plan(dir / "summary.json");
  manifest.write_initial();

  Json methods = Json::object();
  std::map<std::string, std::vector<double>> paired;  // NaN marks a run without a headline value
  for (const auto& m : config.methods) {
    std::vector<std::vector<double>> episode_curves;
    std::vector<std::vector<double>> step_curves;
    Json per_seed = Json::array();
    std::vector<double> values;
    for (std::uint64_t s : config.seeds) {
      const fs::path ep_path = run_episodes_path(run_dir, m, s);
      const auto episodes = parse_episodes_csv(read_text_file(ep_path), ep_path.string());
      const std::vector<double> rewards =
          per_step_rewards(read_text_file(run_trace_path(run_dir, m, s)),
                           run_trace_path(run_dir, m, s).string());
      episode_curves.push_back(smoothed_episode_curve(episodes, static_cast<int>(rewards.size()),
                                                      config.report_window));
      std::vector<double> step_curve(rewards.size());
      double window_sum = 0.0;
      for (std::size_t t = 0; t < rewards.size(); ++t) {
        window_sum += rewards[t];
        if (t >= static_cast<std::size_t>(kStepWindow)) window_sum -= rewards[t - kStepWindow];
        step_curve[t] = window_sum / static_cast<double>(std::min<std::size_t>(t + 1, kStepWindow));
      }
      step_curves.push_back(std::move(step_curve));
      const double v = headline_metric(m, episodes, config.report_window);
      per_seed.push_back({{"seed", s}, {"value", std::isfinite(v) ? Json(v) : Json(nullptr)}});
      paired[m].push_back(v);
      if (std::isfinite(v)) values.push_back(v);
    }
    const std::string n = std::to_string(config.seeds.size());
    write_text_file(dir / ("curve_" + m + ".dat"),
                    curve_file("step mean_episode_reward(window " +
                                   std::to_string(config.report_window) + " episodes, " + n +
                                   " seeds)",
                               mean_curve(episode_curves)));
    write_text_file(dir / ("step_curve_" + m + ".dat"),
                    curve_file("step mean_step_reward(window " + std::to_string(kStepWindow) +
                                   " steps, " + n + " seeds)",
                               mean_curve(step_curves)));
    double mean = 0.0;
    for (double v : values) mean += v;
    mean = values.empty() ? std::numeric_limits<double>::quiet_NaN() : mean / values.size();
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(var / (values.size() - 1)) : 0.0;
    methods[m] = {{"mean", std::isfinite(mean) ? Json(mean) : Json(nullptr)},
                  {"std", sd},
                  {"per_seed", per_seed},
                  {"curve", "curve_" + m + ".dat"},
                  {"step_curve", "step_curve_" + m + ".dat"}};
    log << "report: " << m << " mean " << format_double(mean) << "\n";
  }
  Json sign_tests = Json::object();
  if (paired.count("sfde")) {
    for (const auto& m : config.methods) {
      if (m == "sfde") continue;
      std::vector<double> a;
      std::vector<double> b;
      for (std::size_t i = 0; i < config.seeds.size(); ++i)
        if (std::isfinite(paired["sfde"][i]) && std::isfinite(paired[m][i])) {
          a.push_back(paired["sfde"][i]);
          b.push_back(paired[m][i]);
        }
      const SignTest t = sign_test(a, b);
      sign_tests["sfde>" + m] = {
          {"wins", t.wins}, {"losses", t.losses}, {"ties", t.ties}, {"p_value", t.p_value}};
    }
  }
  write_json_file(dir / "summary.json", {{"manifest", "manifest.json"},
                                         {"window_episodes", config.report_window},
                                         {"window_steps", kStepWindow},
                                         {"adaptation_steps", config.transfer.adaptation_steps},
                                         {"methods", methods},
                                         {"sign_tests", sign_tests}});
  manifest.finish("ok");
  return {kExitOk, ""};
}

}  // namespace sfde
