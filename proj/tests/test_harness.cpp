#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "sfde/harness.hpp"

namespace sfde {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sfde_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig tiny_maze(const fs::path& out) {
  ExperimentConfig c;
  c.maze.width = 5;
  c.maze.height = 5;
  c.maze.num_obstacles = 3;
  c.num_sources = 3;
  c.seeds = {0, 1};
  c.source_training.qlearning.max_episodes = 600;
  c.source_training.sf_extraction.max_episodes = 1500;
  c.transfer.adaptation_steps = 100;
  c.transfer.testing_steps = 200;
  c.transfer.lengthscale = 0.1;
  c.transfer.source_subsample = 100;
  c.qlearn.total_steps = 300;
  c.output_dir = out;
  return c;
}

std::map<std::string, std::string> snapshot(const fs::path& dir, const std::string& ext) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext && e.path().filename() != "manifest.json")
      files[fs::relative(e.path(), dir).generic_string()] = read_text_file(e.path());
  return files;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SFDE_LAB_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Config, DefaultsRoundTrip) {
  const ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  const ExperimentConfig back = parse_config(config_to_json(c));
  EXPECT_EQ(config_to_json(back).dump(), config_to_json(c).dump());
  EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, RejectsUnknownKeysWithFieldPath) {
  Json j = config_to_json(ExperimentConfig{});
  j["transfer"]["sigma"] = 1.0;
  try {
    parse_config(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidConfig);
    EXPECT_NE(std::string(e.what()).find("transfer.sigma"), std::string::npos);
  }
}

TEST(Config, RejectsBadValues) {
  Json j = config_to_json(ExperimentConfig{});
  j["version"] = 2;
  EXPECT_THROW(parse_config(j), Error);
  j = config_to_json(ExperimentConfig{});
  j["transfer"]["label_mode"] = "magic";
  EXPECT_THROW(parse_config(j), Error);
  j = config_to_json(ExperimentConfig{});
  j["seeds"] = "zero";
  EXPECT_THROW(parse_config(j), Error);

  ExperimentConfig c;
  c.num_sources = 0;
  EXPECT_THROW(c.validate(), Error);
  c = ExperimentConfig{};
  c.methods = {"sfde", "dqn"};
  EXPECT_THROW(c.validate(), Error);
  c = ExperimentConfig{};
  c.seeds.clear();
  EXPECT_THROW(c.validate(), Error);
}

TEST(Config, HashIgnoresOutputDir) {
  ExperimentConfig a;
  ExperimentConfig b;
  b.output_dir = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.env_seed = 99;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Headline, TestingMeanAndQlearnWindow) {
  std::vector<EpisodeSummary> eps{{0, Phase::kAdaptation, 0, 5, -5.0, true},
                                  {1, Phase::kTesting, 5, 5, 10.0, true},
                                  {2, Phase::kTesting, 10, 5, 20.0, true},
                                  {3, Phase::kTesting, 15, 2, -2.0, false}};
  EXPECT_DOUBLE_EQ(headline_metric("sfde", eps, 20), 15.0);
  std::vector<EpisodeSummary> learn;
  for (int k = 0; k < 5; ++k) learn.push_back({k, Phase::kLearning, k, 1, double(k), true});
  EXPECT_DOUBLE_EQ(headline_metric("qlearn", learn, 2), 3.5);
}

TEST(SignTest, BinomialTails) {
  const SignTest all = sign_test({1, 2, 3, 4, 5}, {0, 0, 0, 0, 0});
  EXPECT_EQ(all.wins, 5);
  EXPECT_DOUBLE_EQ(all.p_value, 1.0 / 32.0);
  // 8 of 10: (45 + 10 + 1) / 1024.
  const SignTest most = sign_test({1, 1, 1, 1, 1, 1, 1, 1, 0, 0}, {0, 0, 0, 0, 0, 0, 0, 0, 1, 1});
  EXPECT_NEAR(most.p_value, 56.0 / 1024.0, 1e-15);
  const SignTest none = sign_test({0, 0, 0}, {1, 1, 1});
  EXPECT_DOUBLE_EQ(none.p_value, 1.0);
  EXPECT_THROW(sign_test({1.0}, {}), Error);
}

TEST(SignTest, TiesAreDropped) {
  const SignTest t = sign_test({1, 1, 1, 5, 5}, {1, 1, 1, 0, 0});
  EXPECT_EQ(t.ties, 3);
  EXPECT_EQ(t.wins, 2);
  EXPECT_DOUBLE_EQ(t.p_value, 0.25);
  EXPECT_DOUBLE_EQ(sign_test({2, 2}, {2, 2}).p_value, 1.0);
}

TEST(Pipeline, MazeEndToEndIsDeterministic) {
  const fs::path a = scratch("a");
  const fs::path b = scratch("b");
  std::ostringstream log;
  for (const fs::path& out : {a, b}) {
    ExperimentConfig c = tiny_maze(out);
    c.methods = {"sfde", "fsf", "lpsf", "qlearn"};
    ASSERT_EQ(cmd_gen_envs(c, log).exit_code, kExitOk);
    ASSERT_EQ(cmd_train_sources(c, log).exit_code, kExitOk) << log.str();
    ASSERT_EQ(cmd_transfer(c, log).exit_code, kExitOk) << log.str();
    ASSERT_EQ(cmd_report(out, log).exit_code, kExitOk) << log.str();
  }
  for (const char* ext : {".csv", ".json", ".dat"}) {
    const auto fa = snapshot(a, ext);
    const auto fb = snapshot(b, ext);
    EXPECT_FALSE(fa.empty()) << ext;
    EXPECT_EQ(fa, fb) << ext;
  }
  EXPECT_EQ(snapshot(a / "envs", ".json").size(), 4u);  // 3 sources + 1 shared target
  EXPECT_TRUE(fs::exists(a / "runs" / "sfde" / "seed_1.csv"));
  EXPECT_TRUE(fs::exists(a / "report" / "curve_qlearn.dat"));

  // Manifest hashes describe the files on disk.
  const Json manifest = read_json_file(a / "runs" / "manifest.json");
  EXPECT_EQ(manifest["status"], "ok");
  for (const auto& art : manifest["artifacts"])
    EXPECT_EQ(art["fnv1a64"], hex64(fnv1a64(read_text_file(a / "runs" / art["path"].get<std::string>()))));
  EXPECT_EQ(read_json_file(b / "runs" / "manifest.json")["artifacts"], manifest["artifacts"]);

  // Summary means equal per-seed means recomputed from the raw episode files.
  const Json summary = read_json_file(a / "report" / "summary.json");
  EXPECT_TRUE(summary["sign_tests"].contains("sfde>fsf"));
  for (const auto& [name, t] : summary["sign_tests"].items())
    EXPECT_EQ(t["wins"].get<int>() + t["losses"].get<int>() + t["ties"].get<int>(), 2) << name;
  for (const char* m : {"sfde", "fsf", "lpsf"}) {
    double total = 0.0;
    for (std::uint64_t seed : {0, 1}) {
      double sum = 0.0;
      int n = 0;
      for (const auto& ep : parse_episodes_csv(read_text_file(run_episodes_path(a, m, seed)), "x"))
        if (ep.phase == Phase::kTesting && ep.completed) {
          sum += ep.total_reward;
          ++n;
        }
      total += sum / n;
    }
    EXPECT_NEAR(summary["methods"][m]["mean"].get<double>(), total / 2.0, 1e-9) << m;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Pipeline, TargetPerSeedWritesOneTargetPerSeed) {
  const fs::path out = scratch("per_seed");
  ExperimentConfig c = tiny_maze(out);
  c.target_per_seed = true;
  c.seeds = {3, 7};
  std::ostringstream log;
  ASSERT_EQ(cmd_gen_envs(c, log).exit_code, kExitOk);
  EXPECT_TRUE(fs::exists(out / "envs" / "target_seed_3.json"));
  EXPECT_TRUE(fs::exists(out / "envs" / "target_seed_7.json"));
  EXPECT_NE(read_text_file(out / "envs" / "target_seed_3.json"),
            read_text_file(out / "envs" / "target_seed_7.json"));
  fs::remove_all(out);
}

TEST(Pipeline, ObjectWorldTwoSources) {
  const fs::path out = scratch("objects");
  ExperimentConfig c;
  c.benchmark = "object_world";
  c.num_sources = 2;
  c.object_world.grid_size = 5;
  c.object_world.num_objects = 4;
  c.output_dir = out;
  std::ostringstream log;
  ASSERT_EQ(cmd_gen_envs(c, log).exit_code, kExitOk);
  const Json s0 = read_json_file(source_env_path(out, 0));
  const Json s1 = read_json_file(source_env_path(out, 1));
  const Json t = read_json_file(out / "envs" / "target.json");
  EXPECT_EQ(s0["layout"]["type_rewards"], Json({1.0, -1.0}));
  EXPECT_EQ(s1["layout"]["type_rewards"], Json({-1.0, 1.0}));
  EXPECT_EQ(t["layout"]["type_rewards"], Json({1.0, 1.0}));
  EXPECT_EQ(s0["layout"]["object_cells"], t["layout"]["object_cells"]);
  fs::remove_all(out);
}

TEST(Pipeline, MissingEnvFileNamesPath) {
  const fs::path out = scratch("missing");
  std::ostringstream log;
  try {
    cmd_train_sources(tiny_maze(out), log);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
    EXPECT_NE(std::string(e.what()).find("source_00.json"), std::string::npos);
  }
}

TEST(Pipeline, ReportOnEmptyDirIsMissingData) {
  const fs::path out = scratch("empty");
  fs::create_directories(out);
  std::ostringstream log;
  try {
    cmd_report(out, log);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingData);
  }
  fs::remove_all(out);
}

TEST(Pipeline, BoundsSuitePasses) {
  const fs::path out = scratch("bounds");
  ExperimentConfig c;
  c.bounds.theorem1_pairs = 10;
  c.bounds.gp_pairs = 5;
  c.bounds.coverage_trials = 40;
  c.output_dir = out;
  std::ostringstream log;
  EXPECT_EQ(cmd_bounds(c, log).exit_code, kExitOk) << log.str();
  const Json summary = read_json_file(out / "bounds" / "summary.json");
  EXPECT_EQ(summary["violations"], 0);
  for (const auto& e : fs::directory_iterator(out / "bounds" / "theorem1_identical")) {
    std::istringstream rows(read_text_file(e.path()));
    std::string line;
    std::getline(rows, line);
    while (std::getline(rows, line)) EXPECT_NE(line.find(",0,0,0,0,0,0"), std::string::npos) << line;
  }
  fs::remove_all(out);
}

TEST(Cli, ExitCodes) {
  const fs::path out = scratch("cli");
  fs::create_directories(out);
  const fs::path cfg = out / "config.json";
  Json j = config_to_json(tiny_maze(out / "run"));
  write_json_file(cfg, j);
  EXPECT_EQ(run_cli(""), kExitUsage);
  EXPECT_EQ(run_cli("gen-envs"), kExitUsage);
  EXPECT_EQ(run_cli("gen-envs --config " + cfg.string()), kExitOk);
  EXPECT_EQ(run_cli("gen-envs --config " + cfg.string() + " --seeds 1,x"), kExitUsage);
  EXPECT_EQ(run_cli("transfer --config " + cfg.string()), kExitRunFailure);  // no bundles yet
  EXPECT_EQ(run_cli("report --out " + (out / "nothing").string()), kExitRunFailure);

  j["num_sources"] = 0;
  write_json_file(cfg, j);
  EXPECT_EQ(run_cli("gen-envs --config " + cfg.string()), kExitUsage);
  j = config_to_json(tiny_maze(out / "run"));
  j["unknown"] = true;
  write_json_file(cfg, j);
  EXPECT_EQ(run_cli("gen-envs --config " + cfg.string()), kExitUsage);
  fs::remove_all(out);
}

TEST(Workers, EnvironmentOverride) {
  setenv("SFDE_LAB_WORKERS", "3", 1);
  EXPECT_EQ(worker_count(), 3);
  setenv("SFDE_LAB_WORKERS", "0", 1);
  EXPECT_THROW(worker_count(), Error);
  unsetenv("SFDE_LAB_WORKERS");
  EXPECT_GE(worker_count(), 1);
}

}  // namespace
}  // namespace sfde
