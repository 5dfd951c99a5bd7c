#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "traction_cli/config.hpp"

namespace traction::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitCertification = 4;

std::string version();

struct SubcommandInfo {
  std::string name;
  std::string description;
  /// Header of report.csv; empty when the subcommand writes no CSV.
  std::string csv_columns;
};

const std::vector<SubcommandInfo>& subcommands();
bool is_subcommand(const std::string& name);

struct RunOptions {
  /// solve-linear and solve-limit: use the divergence-free counterpart.
  bool incompressible = false;
};

struct Report {
  nlohmann::json document;
  std::optional<std::string> csv;
  bool certified = true;
};

/// Runs one subcommand in memory. Throws the library errors unchanged.
Report execute(const std::string& subcommand, const Config& config, const RunOptions& opts = {});

/// Loads the config (defaults when the path is empty), runs the subcommand
/// and writes report.json, report.csv and timing.json into out_dir.
/// Returns the process exit code; diagnostics go to err.
int run(const std::string& subcommand, const std::string& config_path, const std::string& out_dir,
        const RunOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace traction::cli
