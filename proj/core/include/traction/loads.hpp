#pragma once

// External loads: the body force of a radial/axial profile pair (or a
// builtin field), an optional uniform pressure g = λn on the boundary, and
// the linear functional L(v) = ∫ f·v + ∫ g·v they define.
//
// Everything about rigid rotations is carried by the moment tensor
// T = ∫ f ⊗ x + ∫ g ⊗ x, since L(M x) = M : T for any constant matrix M.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "traction/core_math.hpp"
#include "traction/domains.hpp"
#include "traction/polynomial.hpp"

namespace traction {

enum class BuiltinLoad { None, BallPullIn };

struct LoadSpec {
  /// Radial profile φ(r); the planar force is ∇φ = φ'(r)(x, y)/r.
  Polynomial phi;
  /// Axial force ψ(z).
  Polynomial psi;
  /// λ in g = λ n on the whole boundary (cylinder only).
  std::optional<double> surface_pressure;
  BuiltinLoad builtin = BuiltinLoad::None;
  Domain domain = Domain::cylinder();

  /// φ = 4r⁶ − 9r⁴ + 6r² − 1 and ψ = β(z − 1/2) on the unit cylinder.
  static LoadSpec cylinder_counterexample(double beta = 0.01);
  static LoadSpec ball_pull_in();
  static LoadSpec uniform_pressure(double lambda, Domain d = Domain::cylinder());

  /// Throws ValidationError on a malformed spec (φ'(0) ≠ 0, builtin on the
  /// wrong domain, pressure on the ball).
  void validate() const;
};

/// Values entering the side conditions on the cylinder profiles.
struct ProfileConditions {
  double phi_at_1 = 0.0;
  double dphi_at_1 = 0.0;
  double r2_dphi_integral = 0.0;  // ∫₀¹ r² φ'(r) dr
  double psi_integral = 0.0;      // ∫₀¹ ψ
  double z_psi_integral = 0.0;    // ∫₀¹ z ψ
  bool laplacian_nonzero = false;

  bool radial_ok(double tol = 1e-12) const;
  bool axial_ok(double tol = 1e-12) const;
};

ProfileConditions profile_conditions(const LoadSpec& spec);

/// True when the closed-form cylinder minimizers apply: unit cylinder, body
/// force from profiles only, and both profile conditions hold.
bool has_closed_form(const LoadSpec& spec);

Vec3 body_force(const LoadSpec& spec, const Vec3& x);

/// The functional L, tabulated on the volume and surface quadrature nodes.
class LoadFunctional {
 public:
  LoadFunctional(const LoadSpec& spec, std::shared_ptr<const DomainRules> rules);

  double operator()(const VectorField& v) const;

  /// ∫ f ⊗ u + ∫ g ⊗ u, so that L(R u) = R : tensor_against(u).
  Mat3 tensor_against(const VectorField& u) const;

  const Mat3& moment_tensor() const { return moment_; }
  Vec3 resultant() const;
  /// L(M x) for a constant matrix M.
  double work_on_linear_map(const Mat3& M) const { return frobenius_dot(M, moment_); }

  /// v ↦ L(R v); the forces become Rᵀf and Rᵀg.
  LoadFunctional rotated(const Mat3& R) const;

  const std::vector<Vec3>& volume_forces() const { return volume_forces_; }
  const std::vector<Vec3>& surface_forces() const { return surface_forces_; }
  const DomainRules& rules() const { return *rules_; }
  const std::shared_ptr<const DomainRules>& rules_ptr() const { return rules_; }
  bool is_zero() const;

 private:
  LoadFunctional() = default;
  void compute_moment();

  std::shared_ptr<const DomainRules> rules_;
  std::vector<Vec3> volume_forces_;
  std::vector<Vec3> surface_forces_;
  Mat3 moment_ = Mat3::Zero();
};

enum class KernelClass {
  IdentityOnly,
  AxisSubgroup,
  FullSO3,
  /// Zero work exactly for rotations about axes in a plane. That set is
  /// not closed under composition, so it is reported separately.
  PlaneOfAxes,
  Incompatible,
};

std::string to_string(KernelClass k);

struct KernelSample {
  SkewParams direction;  // unit (a, b, c)
  double value = 0.0;    // L(W² x) with |W|² = 2
};

struct KernelReport {
  Vec3 resultant = Vec3::Zero();
  double momentum_max = 0.0;
  std::vector<KernelSample> w2_values;
  KernelClass classification = KernelClass::IdentityOnly;
  /// Rotation axis for AxisSubgroup; normal of the axis plane for PlaneOfAxes.
  Vec3 axis = Vec3::Zero();
  /// Eigenvalues of ω ↦ L(W(ω)² x) on unit axial vectors, ascending.
  Vec3 form_eigenvalues = Vec3::Zero();
  double tol = 1e-9;
  std::string note;
};

inline constexpr int kDefaultKernelSamples = 200;
inline constexpr double kKernelTol = 1e-9;

/// Fibonacci points on the unit sphere.
std::vector<Vec3> fibonacci_sphere(int n);

KernelReport compatibility_report(const LoadFunctional& L, int samples = kDefaultKernelSamples,
                                  double tol = kKernelTol);

/// Distance in Frobenius norm from R to the closest kernel rotation.
double rotation_distance_to_kernel(const Mat3& R, const KernelReport& k);

/// True if L((R − I)x) = 0 within tol.
bool in_kernel(const LoadFunctional& L, const Mat3& R, double tol = kKernelTol);

/// A rotation R with L((R − I)x) > tol among an axis-angle grid, if any.
std::optional<Mat3> reversed_compatibility_witness(const LoadFunctional& L,
                                                   double tol = kKernelTol);

/// v ≈ a + W x, W skew.
struct RigidPart {
  Vec3 translation = Vec3::Zero();
  SkewParams spin;

  Vec3 operator()(const Vec3& x) const { return translation + skew_matrix(spin) * x; }
};

/// L²(Ω) projection onto infinitesimal rigid displacements.
RigidPart rigid_projection(const VectorField& v, const QuadratureRule& rule);

LoadFunctional rotate_loads(const LoadFunctional& L, const Mat3& R);

}  // namespace traction
