#pragma once

// Polynomial displacement spaces on the reference domain, assembly of the
// quadratic energy 4∫|𝔼(v)|² − L(Rv), and its minimization on the
// complement of the infinitesimal rigid displacements.
//
// Every space is orthonormalized in L²(Ω) (with respect to its own volume
// rule) at construction, so the mass matrix is the identity in the
// coefficient vectors exposed here.

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "traction/core_math.hpp"
#include "traction/domains.hpp"
#include "traction/loads.hpp"

namespace traction {

enum class SpaceKind {
  /// Each component spanned by Legendre products of total degree ≤ degree.
  Full,
  /// (u_y, −u_x, 0) for bivariate u of degree 1..degree, plus (0, 0, w(z))
  /// for w of degree ≤ degree1d.
  AnsatzK,
  /// Planar part of AnsatzK only; every field is divergence free.
  AnsatzKdiv,
  /// Divergence-free fields of the Full space (curls of polynomial
  /// potentials), degree ≤ degree.
  DivFree,
};

std::string to_string(SpaceKind k);
/// Accepts "full", "ansatz_k", "ansatz_k_div", "div_free".
SpaceKind space_kind_from_string(const std::string& s);

struct SpaceSpec {
  SpaceKind kind = SpaceKind::Full;
  int degree = 6;
  int degree1d = 4;
};

/// Quadrature order that integrates the stiffness and load integrands of a
/// space exactly for polynomial loads of the given degree.
int galerkin_quadrature_order(const SpaceSpec& spec, int load_degree = 6);

struct BasisField {
  std::function<Vec3(const Vec3&)> value;
  std::function<Mat3(const Vec3&)> gradient;
};

/// Symmetric part of ∇v at x.
Mat3 strain(const BasisField& v, const Vec3& x);

class GalerkinSpace {
 public:
  /// quadrature_order ≤ 0 selects galerkin_quadrature_order(spec).
  static GalerkinSpace build(const SpaceSpec& spec, const Domain& domain, int quadrature_order = 0);

  const SpaceSpec& spec() const;
  const Domain& domain() const;
  int dim() const;
  const std::shared_ptr<const DomainRules>& rules() const;

  /// Values at the volume nodes, row 3q + i holds component i at node q.
  const Eigen::MatrixXd& node_values() const;
  /// Gradients at the volume nodes, row 9q + 3i + j holds ∂v_i/∂x_j.
  const Eigen::MatrixXd& node_gradients() const;
  /// Values at the surface nodes (empty for the ball).
  const Eigen::MatrixXd& surface_values() const;

  /// All basis values (3 × dim) and gradients (9 × dim, row 3i + j) at x.
  void evaluate(const Vec3& x, Eigen::Matrix<double, 3, Eigen::Dynamic>& values,
                Eigen::Matrix<double, 9, Eigen::Dynamic>& gradients) const;

  Vec3 value(const Eigen::VectorXd& c, const Vec3& x) const;
  Mat3 gradient(const Eigen::VectorXd& c, const Vec3& x) const;
  BasisField basis(int i) const;
  BasisField field(const Eigen::VectorXd& c) const;

  /// Gradients ∇u at every volume node for coefficients c.
  std::vector<Mat3> node_gradients(const Eigen::VectorXd& c) const;

  /// Orthonormal coefficient vectors (dim × k, k ≤ 6) spanning the rigid
  /// displacements a + Wx contained in the space.
  const Eigen::MatrixXd& rigid_modes() const;
  Eigen::VectorXd remove_rigid(const Eigen::VectorXd& c) const;

  /// L²(Ω) projection of v onto the space.
  Eigen::VectorXd project(const std::function<Vec3(const Vec3&)>& v) const;

 private:
  struct Data;
  std::shared_ptr<const Data> data_;
};

GalerkinSpace build_space(const SpaceSpec& spec, const Domain& domain, int quadrature_order = 0);

struct AssembleOptions {
  std::optional<double> incompressible_penalty;
};

struct StiffnessSystem {
  /// Aᵢⱼ = 8∫𝔼(bᵢ):𝔼(bⱼ).
  Eigen::MatrixXd A;
  /// ∫ div bᵢ div bⱼ, present when a penalty was requested.
  std::optional<Eigen::MatrixXd> penalty_div;
  double kappa = 0.0;
  /// Row i holds ∫ f ⊗ bᵢ + ∫ g ⊗ bᵢ flattened row-major, so that
  /// L(R bᵢ) = (load_moments · vec(R))ᵢ.
  Eigen::MatrixXd load_moments;
  Eigen::MatrixXd rigid_modes;
  Vec3 resultant = Vec3::Zero();
  Mat3 moment_tensor = Mat3::Zero();

  Eigen::VectorXd load_vector(const Mat3& R) const;
  /// A + κ D.
  Eigen::MatrixXd system_matrix() const;
  int dim() const { return static_cast<int>(A.rows()); }
};

Eigen::Matrix<double, 9, 1> flatten(const Mat3& R);
Mat3 unflatten(const Eigen::Matrix<double, 9, 1>& v);

StiffnessSystem assemble(const GalerkinSpace& space, const LoadFunctional& L,
                         const AssembleOptions& opts = {});
StiffnessSystem assemble(const GalerkinSpace& space, const LoadSpec& spec,
                         const AssembleOptions& opts = {});

/// Number of eigenvalues of A below rel_tol·‖A‖₂.
int numeric_kernel_dimension(const StiffnessSystem& sys, double rel_tol = 1e-10);

enum class Preconditioner { Jacobi, Cholesky };

struct SolverOptions {
  double tol = 1e-12;
  /// ≤ 0 means 10·dim.
  int max_iterations = 0;
  /// Bound on |bᵀc| for each rigid mode c.
  double compatibility_tol = 1e-8;
  Preconditioner preconditioner = Preconditioner::Jacobi;
  std::optional<Eigen::VectorXd> initial_guess;
};

struct SolveResult {
  Eigen::VectorXd coeffs;
  /// ½cᵀAc − cᵀb, i.e. ∫Q(𝔼u) − L(Ru) on the space.
  double value = 0.0;
  Mat3 rotation = Mat3::Identity();
  std::optional<double> theta;
  double residual_norm = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;
  std::string status = "converged";
  std::string note;
};

/// Minimizes ½cᵀAc − cᵀb over the complement of the rigid modes by
/// projected preconditioned conjugate gradients. Throws
/// IncompatibleLoadsError if b has a component along a rigid mode and
/// SolverError (with the residual history) if CG fails twice.
SolveResult solve_quadratic(const StiffnessSystem& sys, const Eigen::VectorXd& b,
                            const SolverOptions& opts = {});
/// solve_quadratic with b = b(R); records R in the result.
SolveResult solve_for_rotation(const StiffnessSystem& sys, const Mat3& R,
                               const SolverOptions& opts = {});

}  // namespace traction
