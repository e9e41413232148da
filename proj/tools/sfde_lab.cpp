#include <iostream>
#include <sstream>
#include <utility>

#include <CLI11.hpp>

#include "sfde/harness.hpp"

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size())
      throw sfde::Error(sfde::ErrorKind::InvalidConfig, "--seeds: '" + item + "' is not a seed");
    seeds.push_back(v);
  }
  return seeds;
}

std::vector<std::string> parse_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) items.push_back(item);
  return items;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Successor-feature transfer experiments: environments, training, transfer, bounds, reports"};
  app.set_version_flag("--version", std::string(SFDE_VERSION));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string seeds;
  std::string methods;
  const std::pair<const char*, const char*> commands[] = {
      {"gen-envs", "write source and target environments"},
      {"train-sources", "learn source policies and successor features"},
      {"transfer", "run transfer methods over the configured seeds"},
      {"bounds", "certify the transfer bounds on random instances"},
      {"report", "emit curve files and a summary from transfer runs"}};
  for (const auto& [name, about] : commands) {
    CLI::App* sub = app.add_subcommand(name, about);
    auto* config_opt = sub->add_option("--config", config_path, "experiment config (JSON)");
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    if (std::string(name) != "report") {
      config_opt->required();
      sub->add_option("--seeds", seeds, "comma-separated seed list (overrides seeds)");
      sub->add_option("--methods", methods, "comma-separated methods (overrides methods)");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? sfde::kExitOk : sfde::kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "report" && config_path.empty()) {
      if (out_dir.empty()) {
        std::cerr << "report: needs --out or --config\n";
        return sfde::kExitUsage;
      }
      return sfde::cmd_report(out_dir, std::cout).exit_code;
    }
    sfde::ExperimentConfig config = sfde::load_config(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (!seeds.empty()) config.seeds = parse_seeds(seeds);
    if (!methods.empty()) config.methods = parse_list(methods);
    config.validate();
    sfde::CommandResult result;
    if (command == "gen-envs") result = sfde::cmd_gen_envs(config, std::cout);
    else if (command == "train-sources") result = sfde::cmd_train_sources(config, std::cout);
    else if (command == "transfer") result = sfde::cmd_transfer(config, std::cout);
    else if (command == "bounds") result = sfde::cmd_bounds(config, std::cout);
    else result = sfde::cmd_report(config.output_dir, std::cout);
    if (!result.message.empty()) std::cerr << command << ": " << result.message << "\n";
    return result.exit_code;
  } catch (const sfde::Error& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return e.kind() == sfde::ErrorKind::InvalidConfig ? sfde::kExitUsage : sfde::kExitRunFailure;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return sfde::kExitRunFailure;
  }
}
