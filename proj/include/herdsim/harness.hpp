#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "herdsim/config.hpp"

namespace herdsim {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Run the experiment named by the config; writes CSV artifacts, the run
/// manifest and a human-readable summary into out_dir. Returns the process
/// exit code (0: success and all recorded checks passed).
int run_experiment(const nlohmann::json& raw_config,
                   const std::filesystem::path& out_dir, std::ostream& log,
                   bool verbose);

/// Reconstruct the pass/fail summary from a manifest; missing artifacts are
/// named explicitly and make the report partial (nonzero exit).
int report_manifest(const std::filesystem::path& manifest_path,
                    std::ostream& out);

/// HERD1 binary trajectory -> CSV.
int convert_trajectory(const std::filesystem::path& in,
                       const std::filesystem::path& out, std::ostream& log);

}  // namespace herdsim
