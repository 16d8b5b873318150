#include "distlab/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "distlab/config.hpp"
#include "distlab/error.hpp"
#include "distlab/experiments.hpp"

namespace distlab {

namespace {

std::size_t default_jobs() {
  if (const char* env = std::getenv("DISTLAB_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring DISTLAB_JOBS='" << env << "'\n";
  }
  return 1;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"distlab: distillation experiments on synthetic problems"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment and write CSV results");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::optional<std::size_t> trials;
  std::size_t jobs = default_jobs();
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--seed", seed, "base seed override");
  run->add_option("--out", out_path, "CSV output path (default: config output_path or stdout)");
  run->add_option("--trials", trials, "trial count override");
  run->add_option("--jobs", jobs, "worker threads (default: DISTLAB_JOBS or 1)")
      ->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("validate-config", "parse and validate a config file");
  std::string check_path;
  check->add_option("config", check_path, "experiment config (JSON)")->required();

  app.add_subcommand("list-experiments", "print the experiment names");
  app.add_subcommand("version", "print the version");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("list-experiments")) {
      for (auto name : experiment_names()) std::cout << name << '\n';
      return 0;
    }
    if (app.got_subcommand("version")) {
      std::cout << "distlab " << kVersion << '\n';
      return 0;
    }
    if (app.got_subcommand("validate-config")) {
      const auto config = load_config(check_path);
      std::cout << "ok: " << to_string(config.experiment) << '\n';
      return 0;
    }

    ExperimentConfig config = load_config(config_path);
    if (seed) config.base_seed = *seed;
    if (trials) config.trials = *trials;
    if (!out_path.empty()) config.output_path = out_path;
    validate(config);

    const ResultTable table = run_experiment(config, jobs);
    std::ostringstream csv;
    write_csv(table, csv);
    if (config.output_path.empty()) {
      std::cout << csv.str();
    } else {
      write_file(config.output_path, csv.str());
      write_file(config.output_path + ".resolved.json", to_json(config).dump(2) + "\n");
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

int cli_main(int argc, char** argv) {
  return cli_main(std::vector<std::string>(argv, argv + argc));
}

}  // namespace distlab
