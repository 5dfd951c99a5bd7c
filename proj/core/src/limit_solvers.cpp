#include "traction/limit_solvers.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "traction/energy.hpp"
#include "traction/error.hpp"
#include "traction/rotation_search.hpp"

namespace traction {
namespace {

constexpr double kPi = std::numbers::pi;

void require_compatible(const KernelReport& k) {
  if (k.classification == KernelClass::Incompatible) {
    throw IncompatibleLoadsError("loads are incompatible: " + k.note +
                                 " (the limit energies are unbounded below)");
  }
}

SolverOptions penalized_solver(const SolverOptions& base) {
  SolverOptions o = base;
  o.preconditioner = Preconditioner::Cholesky;
  return o;
}

Eigen::VectorXd solve_or_zero(const StiffnessSystem& sys, const Eigen::VectorXd& b, const SolverOptions& o) {
  return solve_quadratic(sys, b, o).coeffs;
}

struct AxisFrame {
  Mat3 P, C, K;  // R_θ = P + cosθ·C − sinθ·K
};

AxisFrame axis_frame(const Vec3& axis) {
  const Vec3 a = axis.normalized();
  AxisFrame f;
  f.P = a * a.transpose();
  f.C = Mat3::Identity() - f.P;
  f.K = skew_matrix(SkewParams::from_axial(a));
  return f;
}

Vec3 kernel_axis(const KernelReport& k) {
  return k.classification == KernelClass::AxisSubgroup ? k.axis : Vec3::UnitZ();
}

double quadratic_energy(const BasisField& u, const QuadratureRule& rule) {
  std::vector<double> terms(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) terms[q] = rule.weights[q] * quadratic_form(u.gradient(rule.nodes[q]));
  return pairwise_sum(terms);
}

double strain_norm(const BasisField& u, const QuadratureRule& rule) {
  return std::sqrt(std::max(0.0, strain_inner_product(u, u, rule)));
}

}  // namespace

SpaceSpec incompressible_counterpart(const SpaceSpec& s) {
  SpaceSpec out = s;
  if (s.kind == SpaceKind::Full) out.kind = SpaceKind::DivFree;
  if (s.kind == SpaceKind::AnsatzK) out.kind = SpaceKind::AnsatzKdiv;
  return out;
}

Mat3 axis_rotation(const Vec3& axis, double theta) {
  const AxisFrame f = axis_frame(axis);
  return f.P + std::cos(theta) * f.C - std::sin(theta) * f.K;
}

LimitProblem make_problem(const LoadSpec& spec, const SpaceSpec& basis, const LimitConfig& cfg,
                          std::optional<double> penalty) {
  spec.validate();
  GalerkinSpace space = build_space(basis, spec.domain, cfg.quadrature_order);
  LoadFunctional L(spec, space.rules());
  if (!cfg.load_rotation.isIdentity(0.0)) L = L.rotated(cfg.load_rotation);
  AssembleOptions ao;
  ao.incompressible_penalty = penalty;
  StiffnessSystem sys = assemble(space, L, ao);
  KernelReport kernel = compatibility_report(L, cfg.kernel_samples, cfg.kernel_tol);
  return {std::move(space), std::move(L), std::move(sys), std::move(kernel)};
}

LinearReport min_linear(const LoadSpec& spec, bool incompressible, const LimitConfig& cfg) {
  LinearReport rep;
  if (!incompressible) {
    const LimitProblem p = make_problem(spec, cfg.basis, cfg);
    require_compatible(p.kernel);
    rep.solution = solve_for_rotation(p.system, Mat3::Identity(), cfg.solver);
    const Eigen::VectorXd b = p.system.load_vector(Mat3::Identity());
    rep.identity_residual = std::abs(rep.solution.value + 0.5 * b.dot(rep.solution.coeffs));
    if (has_closed_form(spec) && cfg.load_rotation.isIdentity(0.0)) {
      rep.closed_form = explicit_minimizers(spec).min_E();
    }
    return rep;
  }

  const LimitProblem p = make_problem(spec, incompressible_counterpart(cfg.basis), cfg);
  require_compatible(p.kernel);
  rep.solution = solve_for_rotation(p.system, Mat3::Identity(), cfg.solver);
  const Eigen::VectorXd b = p.system.load_vector(Mat3::Identity());
  rep.identity_residual = std::abs(rep.solution.value + 0.5 * b.dot(rep.solution.coeffs));
  rep.upper = rep.solution.value;

  SpaceSpec full = cfg.basis;
  if (full.kind == SpaceKind::DivFree) full.kind = SpaceKind::Full;
  if (full.kind == SpaceKind::AnsatzKdiv) full.kind = SpaceKind::AnsatzK;
  for (double kappa : cfg.penalty_schedule) {
    const LimitProblem pk = make_problem(spec, full, cfg, kappa);
    const SolveResult r = solve_for_rotation(pk.system, Mat3::Identity(), penalized_solver(cfg.solver));
    rep.penalized.emplace_back(kappa, r.value);
  }
  if (!rep.penalized.empty()) rep.lower = rep.penalized.back().second;
  return rep;
}

LimitResult min_limit(const LimitProblem& problem, const LimitConfig& cfg) {
  LimitResult out;
  out.kernel = problem.kernel;
  require_compatible(problem.kernel);
  const StiffnessSystem& sys = problem.system;
  const Eigen::MatrixXd K = sys.system_matrix();

  switch (problem.kernel.classification) {
    case KernelClass::IdentityOnly: {
      out.solution = solve_for_rotation(sys, Mat3::Identity(), cfg.solver);
      out.solution.note = "kernel is the identity; limit energy equals the linear energy";
      return out;
    }
    case KernelClass::PlaneOfAxes:
      throw Error("limit minimization is not supported when the zero-work rotations do not form a subgroup");
    case KernelClass::Incompatible:
      break;  // handled above
    case KernelClass::AxisSubgroup: {
      const AxisFrame f = axis_frame(problem.kernel.axis);
      const Eigen::VectorXd bP = sys.load_vector(f.P), bC = sys.load_vector(f.C), bK = sys.load_vector(f.K);
      const Eigen::VectorXd xP = solve_or_zero(sys, bP, cfg.solver);
      const Eigen::VectorXd xC = solve_or_zero(sys, bC, cfg.solver);
      const Eigen::VectorXd xK = solve_or_zero(sys, bK, cfg.solver);
      const auto objective = [&](double t) {
        const double c = std::cos(t), s = std::sin(t);
        const Eigen::VectorXd b = bP + c * bC - s * bK;
        const Eigen::VectorXd x = xP + c * xC - s * xK;
        return -0.5 * b.dot(x);
      };
      const int n = std::max(cfg.theta_grid, 8);
      for (int i = 0; i < n; ++i) {
        const double t = -kPi + 2.0 * kPi * i / n;
        out.theta_scan.emplace_back(t, objective(t));
      }
      const ScalarMinimum m = scan_and_refine(objective, -kPi, kPi, n, cfg.theta_tol);
      const double c = std::cos(m.x), s = std::sin(m.x);
      const Mat3 R = axis_rotation(problem.kernel.axis, m.x);
      SolveResult res;
      res.coeffs = xP + c * xC - s * xK;
      const Eigen::VectorXd b = sys.load_vector(R);
      res.value = 0.5 * res.coeffs.dot(K * res.coeffs) - res.coeffs.dot(b);
      res.residual_norm = (K * res.coeffs - b).norm();
      res.rotation = R;
      res.theta = m.x;
      // another minimizer at −θ (reflection symmetry) is reported in the note
      const double mirror = objective(-m.x);
      if (std::abs(m.x) > 1e-6 && std::abs(mirror - m.value) <= 1e-9 * std::max(1.0, std::abs(m.value))) {
        std::ostringstream os;
        os << "theta = " << m.x << " and " << -m.x << " are both optimal; first found reported";
        res.note = os.str();
      }
      out.solution = std::move(res);
      return out;
    }
    case KernelClass::FullSO3: {
      Eigen::MatrixXd X(sys.dim(), 9);
      for (int k = 0; k < 9; ++k) X.col(k) = solve_or_zero(sys, sys.load_moments.col(k), cfg.solver);
      Eigen::Matrix<double, 9, 9> Kr = sys.load_moments.transpose() * X;
      Kr = 0.5 * (Kr + Kr.transpose()).eval();
      const RotationObjective f = [&Kr](const Mat3& R) {
        const Eigen::Matrix<double, 9, 1> v = flatten(R);
        return -0.5 * v.dot(Kr * v);
      };
      const RotationMinimum best = so3_multistart(f, cfg.so3_starts, cfg.seed);
      out.solution = solve_for_rotation(sys, best.rotation, cfg.solver);
      return out;
    }
  }
  throw Error("unreachable kernel classification");
}

LimitResult min_limit(const LoadSpec& spec, bool incompressible, const LimitConfig& cfg) {
  const SpaceSpec basis = incompressible ? incompressible_counterpart(cfg.basis) : cfg.basis;
  const LimitProblem p = make_problem(spec, basis, cfg);
  return min_limit(p, cfg);
}

namespace {

IncompressibleReport incompressible_sandwich(const LoadSpec& spec, const LimitConfig& cfg,
                                             std::optional<double> floor) {
  IncompressibleReport rep;
  rep.min_E_floor = floor;
  for (int attempt = 0; attempt < 2; ++attempt) {
    LimitConfig c = cfg;
    c.basis.degree += 2 * attempt;
    c.basis.degree1d += 2 * attempt;
    rep.degree = c.basis.degree;
    SpaceSpec full = c.basis;
    full.kind = SpaceKind::Full;
    const LinearReport lin = min_linear(spec, true, [&] {
      LimitConfig cc = c;
      cc.basis = full;
      return cc;
    }());
    rep.min_EI_upper = *lin.upper;
    rep.penalized = lin.penalized;
    rep.min_EI_lower = lin.lower.value_or(rep.min_EI_upper);

    SpaceSpec kdiv = c.basis;
    kdiv.kind = SpaceKind::AnsatzKdiv;
    const LimitProblem pk = make_problem(spec, kdiv, c);
    rep.min_GI_upper = min_limit(pk, c).solution.value;
    rep.certified = rep.min_GI_upper < rep.min_EI_lower;
    if (rep.certified) {
      rep.status = attempt == 0 ? "certified" : "certified after degree refinement";
      return rep;
    }
  }
  rep.status = "not certified at this resolution";
  return rep;
}

}  // namespace

GapReport gap_report(const LoadSpec& spec, const LimitConfig& cfg) {
  GapReport rep;
  const LimitProblem p = make_problem(spec, cfg.basis, cfg);
  rep.kernel = p.kernel;
  require_compatible(p.kernel);

  rep.min_E_galerkin = solve_for_rotation(p.system, Mat3::Identity(), cfg.solver).value;
  const LimitResult lim = min_limit(p, cfg);
  rep.min_G_galerkin = lim.solution.value;
  rep.optimal_theta = lim.solution.theta.value_or(0.0);

  const bool rotational = p.kernel.classification == KernelClass::AxisSubgroup ||
                          p.kernel.classification == KernelClass::FullSO3;
  const Vec3 axis = kernel_axis(p.kernel);
  if (rotational) {
    rep.min_G_tilde_galerkin = solve_for_rotation(p.system, axis_rotation(axis, -kPi / 2.0), cfg.solver).value;
    for (double t : {-kPi / 2.0, -kPi / 4.0, 0.0, kPi / 4.0, kPi / 2.0}) {
      DecompositionRow row;
      row.theta = t;
      row.min_G_theta = solve_for_rotation(p.system, axis_rotation(axis, t), cfg.solver).value;
      const double c = std::cos(t), s = std::sin(t);
      row.predicted = c * c * rep.min_E_galerkin + s * s * rep.min_G_tilde_galerkin;
      row.residual = std::abs(row.min_G_theta - row.predicted);
      rep.decomposition_table.push_back(row);
    }
  } else {
    rep.min_G_tilde_galerkin = rep.min_E_galerkin;
    rep.note = "kernel has no rotations besides the identity; decomposition table omitted";
  }

  std::optional<double> floor;
  if (has_closed_form(spec)) {
    const ExplicitSolution ex = explicit_minimizers(spec);
    rep.closed_form = true;
    rep.min_E = ex.min_E();
    rep.min_G_tilde = ex.min_G_tilde();
    rep.margin = ex.margin();
    if (p.kernel.classification == KernelClass::AxisSubgroup) {
      rep.min_G = ex.min_G();
    } else {
      rep.min_G = std::min(ex.min_G(), rep.min_G_galerkin);
      if (rep.note.empty()) rep.note = "min_G combines the closed form with the Galerkin value";
    }
    floor = rep.min_E;
  } else {
    rep.min_E = rep.min_E_galerkin;
    rep.min_G = rep.min_G_galerkin;
    rep.min_G_tilde = rep.min_G_tilde_galerkin;
    rep.margin = rep.min_E - rep.min_G;
  }

  rep.incompressible = incompressible_sandwich(spec, cfg, floor);
  return rep;
}

LimitEnergy limit_energy(const BasisField& u, const LoadFunctional& L, const KernelReport& kernel) {
  LimitEnergy e;
  e.quadratic = quadratic_energy(u, L.rules().volume);
  const Mat3 M = L.tensor_against(u.value);
  switch (kernel.classification) {
    case KernelClass::AxisSubgroup: {
      const AxisFrame f = axis_frame(kernel.axis);
      const double a = frobenius_dot(f.P, M), c = frobenius_dot(f.C, M), k = frobenius_dot(f.K, M);
      const double rho = std::hypot(c, k);
      e.load_max = a + rho;
      const double theta = rho > 0.0 ? std::atan2(-k, c) : 0.0;
      e.rotation = axis_rotation(kernel.axis, theta);
      break;
    }
    case KernelClass::FullSO3:
      e.rotation = maximize_trace_alignment(M);
      e.load_max = frobenius_dot(e.rotation, M);
      break;
    case KernelClass::IdentityOnly:
      e.load_max = M.trace();
      break;
    case KernelClass::PlaneOfAxes:
      throw Error("limit energy is not defined here: zero-work rotations do not form a subgroup");
    case KernelClass::Incompatible:
      require_compatible(kernel);
  }
  e.value = e.quadratic - e.load_max;
  return e;
}

RotatedCheck rotated_no_gap_check(const LoadSpec& spec, const LimitConfig& cfg, std::optional<Mat3> rotation) {
  RotatedCheck out;
  const LimitProblem base = make_problem(spec, cfg.basis, cfg);
  out.class_before = base.kernel.classification;
  out.axis_before = base.kernel.axis;
  out.rotation = rotation ? *rotation : min_limit(base, cfg).solution.rotation;

  LimitConfig rc = cfg;
  rc.load_rotation = out.rotation * cfg.load_rotation;
  const LimitProblem rotated = make_problem(spec, cfg.basis, rc);
  out.class_after = rotated.kernel.classification;
  out.axis_after = rotated.kernel.axis;
  out.min_E_R = solve_for_rotation(rotated.system, Mat3::Identity(), cfg.solver).value;
  out.min_G_R = min_limit(rotated, rc).solution.value;
  out.difference = out.min_G_R - out.min_E_R;
  out.relative = out.min_E_R != 0.0 ? std::abs(out.difference) / std::abs(out.min_E_R) : std::abs(out.difference);
  out.same_kernel = out.class_before == out.class_after;
  if (out.same_kernel && out.class_before == KernelClass::AxisSubgroup) {
    out.same_kernel = std::abs(out.axis_before.dot(out.axis_after)) > 1.0 - 1e-9;
  }
  return out;
}

NonuniquenessReport nonuniqueness_check(const LoadSpec& spec, const LimitConfig& cfg) {
  NonuniquenessReport rep;
  BasisField u;
  std::shared_ptr<const DomainRules> rules;
  if (has_closed_form(spec)) {
    rep.from_closed_form = true;
    rules = std::make_shared<const DomainRules>(DomainRules::build(spec.domain, cfg.reference_order));
    u = explicit_minimizers(spec).u_minus_half_pi();
  } else {
    const LimitProblem p = make_problem(spec, cfg.basis, cfg);
    const LimitResult lim = min_limit(p, cfg);
    rules = p.space.rules();
    u = p.space.field(lim.solution.coeffs);
  }
  const LoadFunctional L(spec, rules);
  const KernelReport kernel = compatibility_report(L, cfg.kernel_samples, cfg.kernel_tol);

  const Mat3 S = Vec3(-1.0, -1.0, 1.0).asDiagonal();
  const BasisField uhat{[u, S](const Vec3& x) -> Vec3 { return S * u.value(x); },
                        [u, S](const Vec3& x) -> Mat3 { return S * u.gradient(x); }};
  const BasisField diff{[u, uhat](const Vec3& x) -> Vec3 { return uhat.value(x) - u.value(x); },
                        [u, uhat](const Vec3& x) -> Mat3 { return uhat.gradient(x) - u.gradient(x); }};
  const Vec3 a{0.3, -0.2, 0.1};
  const Mat3 W = skew_matrix({0.2, -0.1, 0.4});
  const BasisField shifted{[u, a, W](const Vec3& x) -> Vec3 { return u.value(x) + a + W * x; },
                           [u, W](const Vec3& x) -> Mat3 { return u.gradient(x) + W; }};

  const LimitEnergy eu = limit_energy(u, L, kernel);
  const LimitEnergy eh = limit_energy(uhat, L, kernel);
  rep.G_u = eu.value;
  rep.G_uhat = eh.value;
  rep.rotation_u = eu.rotation;
  rep.rotation_uhat = eh.rotation;
  rep.G_u_plus_rigid = limit_energy(shifted, L, kernel).value;
  const double scale = std::max(std::abs(rep.G_u), std::abs(rep.G_uhat));
  rep.relative_difference = scale > 0.0 ? std::abs(rep.G_u - rep.G_uhat) / scale : 0.0;
  rep.strain_norm = strain_norm(u, rules->volume);
  rep.strain_difference = strain_norm(diff, rules->volume);
  rep.energies_match = rep.relative_difference < 1e-8;
  rep.distinct = rep.strain_difference > 0.1 * rep.strain_norm;
  return rep;
}

}  // namespace traction
