#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "herdsim/experiments.hpp"
#include "herdsim/optimizer.hpp"

namespace herdsim {

/// All schema violations found in one pass, never just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Parsed and validated experiment definition. Unknown keys are errors;
/// every numeric field is checked against the module preconditions before a
/// run starts.
struct ExperimentConfig {
  int schema_version = 1;
  std::string experiment;
  std::uint64_t seed = 0;
  std::size_t replicas = 2;
  std::string output_dir;
  std::size_t threads = 0;

  // dynamics
  int d = 1;
  std::size_t N = 64;
  std::size_t m = 1;
  double T = 1.0, dt = 1e-3, sigma = 0.25;
  double dt_max = 0.0;  // 0 -> T/100
  std::optional<KernelSet> kernels;
  std::optional<InitialLaw> init;
  std::vector<double> Y0;  // m * d

  // controls + cost
  std::vector<ControlLaw> controls;
  CostSpec cost;

  // ensemble / PDE solvers
  std::size_t M = 2000;
  PicardConfig picard;
  GridSpec grid{-8.0, 8.0, 512};
  FpConfig fp;

  // optimizer
  MinimizeOptions minimize_opts;
  bool optimize_g = true;
  std::string objective = "FN";  // "FN" | "F"

  // experiment parameters
  std::vector<std::size_t> N_grid;
  std::vector<std::size_t> j_grid;
  double amplitude = 0.25;
  std::size_t mref_factor = 16;
  std::size_t M_equiv = 10000;
  double equiv_threshold = 0.05;
  double chaos_slope_threshold = -0.35;
  std::size_t snapshot_stride = 0;  // 0 -> about ten snapshots

  ExperimentSetup setup() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

/// Content hash of the canonicalized (sorted-key) config document.
std::string config_hash(const nlohmann::json& j);

}  // namespace herdsim
