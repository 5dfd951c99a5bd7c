#pragma once

// Minimization of the linear energy ℰ(u) = ∫Q(𝔼u) − L(u), the limit energy
// 𝒢(u) = ∫Q(𝔼u) − max_{R ∈ S⁰_L} L(Ru), and their incompressible variants,
// together with the reports built on top of them.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "traction/explicit_solution.hpp"
#include "traction/galerkin.hpp"
#include "traction/loads.hpp"

namespace traction {

struct LimitConfig {
  SpaceSpec basis{SpaceKind::Full, 6, 4};
  /// ≤ 0 selects galerkin_quadrature_order(basis).
  int quadrature_order = 0;
  /// Order of the rules used for closed-form field integrals.
  int reference_order = kDefaultQuadratureOrder;
  int kernel_samples = kDefaultKernelSamples;
  double kernel_tol = kKernelTol;
  int theta_grid = 64;
  double theta_tol = 1e-10;
  int so3_starts = 8;
  unsigned seed = 0;
  std::vector<double> penalty_schedule{1e3, 1e4, 1e5, 1e6};
  SolverOptions solver;
  /// Loads are replaced by v ↦ L(load_rotation · v).
  Mat3 load_rotation = Mat3::Identity();
};

/// DivFree for Full, AnsatzKdiv for AnsatzK, unchanged otherwise.
SpaceSpec incompressible_counterpart(const SpaceSpec& s);

/// A Galerkin space with its assembled system and the kernel of the loads.
struct LimitProblem {
  GalerkinSpace space;
  LoadFunctional loads;
  StiffnessSystem system;
  KernelReport kernel;
};

LimitProblem make_problem(const LoadSpec& spec, const SpaceSpec& basis, const LimitConfig& cfg,
                          std::optional<double> penalty = std::nullopt);

/// Rotation by θ about a unit axis; equals z_rotation(θ) for e_z.
Mat3 axis_rotation(const Vec3& axis, double theta);

struct LinearReport {
  SolveResult solution;
  /// −4∫|𝔼(u₀)|² when the closed form applies.
  std::optional<double> closed_form;
  /// |value + ½L(u)|.
  double identity_residual = 0.0;
  /// Incompressible only: div-free Galerkin value (upper bound).
  std::optional<double> upper;
  /// Incompressible only: full-space penalized values per κ.
  std::vector<std::pair<double, double>> penalized;
  /// Incompressible only: penalized value at the largest κ.
  std::optional<double> lower;
};

LinearReport min_linear(const LoadSpec& spec, bool incompressible, const LimitConfig& cfg = {});

struct LimitResult {
  SolveResult solution;
  KernelReport kernel;
  /// (θ, value) samples of the outer objective for axis kernels.
  std::vector<std::pair<double, double>> theta_scan;
};

/// Minimum of 𝒢 on an assembled problem (loads already rotated).
LimitResult min_limit(const LimitProblem& problem, const LimitConfig& cfg);
LimitResult min_limit(const LoadSpec& spec, bool incompressible, const LimitConfig& cfg = {});

struct DecompositionRow {
  double theta = 0.0;
  double min_G_theta = 0.0;
  double predicted = 0.0;
  double residual = 0.0;
};

struct IncompressibleReport {
  double min_EI_upper = 0.0;
  double min_EI_lower = 0.0;
  std::vector<std::pair<double, double>> penalized;
  double min_GI_upper = 0.0;
  /// min ℰ from the closed form (a lower bound for min ℰ^I), when available.
  std::optional<double> min_E_floor;
  bool certified = false;
  int degree = 0;
  std::string status;
};

struct GapReport {
  bool closed_form = false;
  double min_E = 0.0;
  double min_G = 0.0;
  double min_G_tilde = 0.0;
  double margin = 0.0;
  double optimal_theta = 0.0;
  double min_E_galerkin = 0.0;
  double min_G_galerkin = 0.0;
  double min_G_tilde_galerkin = 0.0;
  IncompressibleReport incompressible;
  std::vector<DecompositionRow> decomposition_table;
  KernelReport kernel;
  std::string note;
};

GapReport gap_report(const LoadSpec& spec, const LimitConfig& cfg = {});

/// Value of 𝒢 for a given field and the kernel rotation attaining the max.
struct LimitEnergy {
  double value = 0.0;
  double quadratic = 0.0;
  double load_max = 0.0;
  Mat3 rotation = Mat3::Identity();
};

LimitEnergy limit_energy(const BasisField& u, const LoadFunctional& L, const KernelReport& kernel);

struct RotatedCheck {
  Mat3 rotation = Mat3::Identity();
  double min_G_R = 0.0;
  double min_E_R = 0.0;
  double difference = 0.0;
  double relative = 0.0;
  KernelClass class_before = KernelClass::IdentityOnly;
  KernelClass class_after = KernelClass::IdentityOnly;
  Vec3 axis_before = Vec3::Zero();
  Vec3 axis_after = Vec3::Zero();
  bool same_kernel = false;
};

/// Uses the optimal rotation of min_limit unless one is given.
RotatedCheck rotated_no_gap_check(const LoadSpec& spec, const LimitConfig& cfg = {},
                                  std::optional<Mat3> rotation = std::nullopt);

struct NonuniquenessReport {
  double G_u = 0.0;
  double G_uhat = 0.0;
  double relative_difference = 0.0;
  double strain_norm = 0.0;
  double strain_difference = 0.0;
  double G_u_plus_rigid = 0.0;
  Mat3 rotation_u = Mat3::Identity();
  Mat3 rotation_uhat = Mat3::Identity();
  bool energies_match = false;
  bool distinct = false;
  bool from_closed_form = false;
};

/// Compares u* with û = (−u*₁, −u*₂, u*₃).
NonuniquenessReport nonuniqueness_check(const LoadSpec& spec, const LimitConfig& cfg = {});

}  // namespace traction
