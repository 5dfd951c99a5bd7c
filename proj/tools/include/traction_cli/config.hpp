#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "traction/limit_solvers.hpp"
#include "traction/nonlinear.hpp"

namespace traction::cli {

/// Tolerances used by the certification checks, keyed by name. Every key
/// has a default; unknown keys are rejected.
using Tolerances = std::map<std::string, double>;

Tolerances default_tolerances();

struct Config {
  std::string domain = "cylinder";
  std::vector<double> phi_coeffs{-1.0, 0.0, 6.0, 0.0, -9.0, 0.0, 4.0};
  /// Empty means ψ = β(z − 1/2).
  std::vector<double> psi_coeffs;
  std::optional<double> surface_pressure;
  std::optional<std::string> builtin;
  SpaceSpec basis{SpaceKind::Full, 6, 4};
  /// 0 selects the exact order for the basis.
  int quadrature_order = 0;
  int kernel_samples = kDefaultKernelSamples;
  std::vector<double> h_schedule{0.2, 0.1, 0.05, 0.02};
  /// Degree of the nonlinear study; 0 uses basis.degree.
  int study_degree = 4;
  /// κ of the nonlinear incompressibility penalty; 0 turns it off.
  double penalty_kappa = 0.0;
  double beta = 0.01;
  unsigned seed = 0;
  Tolerances tolerances = default_tolerances();

  LoadSpec load_spec() const;
  LimitConfig limit_config() const;
  StudyOptions study_options() const;
};

/// Throws ValidationError naming the offending field as a JSON pointer.
Config parse_config(const nlohmann::json& j);
Config load_config(const std::string& path);

/// Fully expanded config, defaults included. Keys are sorted.
nlohmann::json to_json(const Config& c);

/// 64-bit FNV-1a of the canonical dump of to_json(c), as 16 hex digits.
std::string config_hash(const Config& c);
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace traction::cli
