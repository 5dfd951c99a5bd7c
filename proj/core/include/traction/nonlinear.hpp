#pragma once

// Scaled nonlinear energy for deformations y = R(x + h u):
//   𝒢_h = h⁻²∫W(I + h∇u) − L(Ru) − h⁻¹L((R − I)x),
// optionally with the incompressibility penalty h⁻²κ∫(det(I + h∇u) − 1)².

#include <optional>
#include <string>
#include <vector>

#include "traction/galerkin.hpp"
#include "traction/limit_solvers.hpp"
#include "traction/loads.hpp"

namespace traction {

struct DeformationAnsatz {
  Mat3 rotation = Mat3::Identity();
  Eigen::VectorXd coeffs;
  double h = 0.1;

  AxisAngle axis_angle() const;
};

struct NonlinearProblem {
  GalerkinSpace space;
  LoadFunctional loads;
  StiffnessSystem system;
  KernelReport kernel;
  std::optional<double> kappa;
};

/// Quadrature order defaults to one that integrates W(I + h∇u) exactly.
NonlinearProblem make_nonlinear_problem(const LoadSpec& spec, const SpaceSpec& basis,
                                        std::optional<double> kappa = std::nullopt,
                                        int quadrature_order = 0);

double eval_Gh(const NonlinearProblem& p, const DeformationAnsatz& y);

/// Value and gradient with respect to the coefficients.
double eval_Gh(const NonlinearProblem& p, const Eigen::VectorXd& c, const Mat3& R, double h,
               Eigen::VectorXd* grad);

struct NonlinearOptions {
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  double gradient_tol = 1e-8;
  int max_iterations = 5000;
  double joint_tol = 1e-10;
  int max_rounds = 100;
  double divergence_floor = -1e12;
};

struct NonlinearResult {
  DeformationAnsatz y;
  double value = 0.0;
  std::string status = "converged";
  int rounds = 0;
  int iterations = 0;
  double gradient_norm = 0.0;
  /// Values after every accepted descent step.
  std::vector<double> history;
};

/// Alternates preconditioned gradient descent in u with the exact rotation
/// update R = argmax R : (∫f⊗u + h⁻¹T).
NonlinearResult minimize_Gh(const NonlinearProblem& p, const DeformationAnsatz& init,
                            const NonlinearOptions& opts = {});

/// argmin over SO(3) of Σ wᵢ g_p(|∇yᵢ − R|).
Mat3 optimal_rotation_Ap(const std::vector<Mat3>& grad_y, const QuadratureRule& rule, double p);
Mat3 optimal_rotation_Ap(const std::function<Mat3(const Vec3&)>& grad_y, const QuadratureRule& rule,
                         double p);

/// ‖sym((R − I)/h + R∇u)‖_{L²}, the strain of v_h = h⁻¹(y − x).
double rescaled_strain_norm(const NonlinearProblem& p, const DeformationAnsatz& y);

struct ConvergenceRow {
  double h = 0.0;
  double value_Gh = 0.0;
  /// Relative to ConvergenceStudy::limit_value.
  double gap_to_limit = 0.0;
  /// Relative to the closed-form min 𝒢, when one exists.
  std::optional<double> gap_to_closed_form;
  double rotation_distance_to_kernel = 0.0;
  double strain_norm_rescaled = 0.0;
  std::string status;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  /// Limit value the gaps refer to.
  double limit_value = 0.0;
  std::string limit_source;
  /// Same-degree Galerkin minimum of the limit energy.
  double limit_galerkin = 0.0;
  std::optional<double> limit_closed_form;
  Mat3 limit_rotation = Mat3::Identity();
};

struct StudyOptions {
  SpaceSpec basis{SpaceKind::Full, 4, 4};
  std::optional<double> kappa;
  NonlinearOptions descent;
  LimitConfig limit;
};

/// h_schedule must be strictly decreasing. Each row warm-starts from the
/// previous one; the first from the limit minimizer.
ConvergenceStudy convergence_study(const LoadSpec& spec, const std::vector<double>& h_schedule,
                                   const StudyOptions& opts = {});

}  // namespace traction
