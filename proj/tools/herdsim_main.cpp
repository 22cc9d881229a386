#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "herdsim/harness.hpp"
#include "herdsim/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"herdsim - sparse mean-field herding simulation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, manifest_path;
  std::string convert_in, convert_out;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t threads = 0;
  bool verbose = false;

  auto* run = app.add_subcommand("run", "run the experiment named in a config");
  run->add_option("--config", config_path, "config file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory (overrides config)");
  run->add_option("--seed", seed, "seed override")
      ->each([&](const std::string&) { seed_given = true; });
  run->add_option("--threads", threads, "worker threads (0 = auto)");
  run->add_flag("--verbose", verbose, "print the run summary");

  auto* report = app.add_subcommand("report", "pass/fail summary of a run");
  report->add_option("manifest", manifest_path, "path to manifest.json")
      ->required()
      ->check(CLI::ExistingFile);

  auto* convert =
      app.add_subcommand("convert", "HERD1 binary trajectory to CSV");
  convert->add_option("--in", convert_in, "binary trajectory")
      ->required()
      ->check(CLI::ExistingFile);
  convert->add_option("--out", convert_out, "CSV destination")->required();

  CLI11_PARSE(app, argc, argv);

  if (threads) herdsim::set_thread_count(threads);

  if (run->parsed()) {
    std::ifstream is(config_path);
    nlohmann::json raw;
    try {
      is >> raw;
    } catch (const std::exception& e) {
      std::cerr << "config file is not valid JSON: " << e.what() << "\n";
      return 1;
    }
    if (seed_given) raw["seed"] = seed;
    std::string dir = out_dir;
    if (dir.empty() && raw.contains("output_dir") &&
        raw["output_dir"].is_string())
      dir = raw["output_dir"].get<std::string>();
    if (dir.empty()) dir = "out";
    return herdsim::run_experiment(raw, dir, std::cerr, verbose);
  }
  if (report->parsed()) return herdsim::report_manifest(manifest_path, std::cout);
  if (convert->parsed())
    return herdsim::convert_trajectory(convert_in, convert_out, std::cerr);
  return 1;
}
