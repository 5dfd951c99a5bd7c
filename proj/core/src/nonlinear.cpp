#include "traction/nonlinear.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <sstream>

#include "traction/energy.hpp"
#include "traction/error.hpp"
#include "traction/explicit_solution.hpp"
#include "traction/rotation_search.hpp"

namespace traction {
namespace {

Mat3 cofactor(const Mat3& F) {
  Mat3 C;
  C.row(0) = F.row(1).cross(F.row(2));
  C.row(1) = F.row(2).cross(F.row(0));
  C.row(2) = F.row(0).cross(F.row(1));
  return C;
}

Mat3 load_tensor(const NonlinearProblem& p, const Eigen::VectorXd& c) {
  const Eigen::Matrix<double, 9, 1> v = p.system.load_moments.transpose() * c;
  return unflatten(v);
}

// Moves the mean rotation of I + h∇u into R. The deformation R(x + hu) is
// unchanged, provided the space contains Qᵀu + (Qᵀ − I)x/h; returns false
// (and leaves R, c alone) when it does not.
bool regauge(const NonlinearProblem& p, double h, Mat3& R, Eigen::VectorXd& c) {
  const auto& vol = p.space.rules()->volume;
  const auto& V = p.space.node_values();
  const auto nq = static_cast<Eigen::Index>(vol.size());
  const Eigen::VectorXd gq = p.space.node_gradients() * c;
  Mat3 mean = Mat3::Zero();
  for (Eigen::Index q = 0; q < nq; ++q) {
    mean += vol.weights[static_cast<std::size_t>(q)] *
            Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(gq.data() + 9 * q);
  }
  const Mat3 Q = nearest_rotation(Mat3::Identity() + h * mean / vol.total_weight()).rotation;
  if ((Q - Mat3::Identity()).norm() < 1e-14) return false;

  const Eigen::VectorXd uq = V * c;
  Eigen::VectorXd target(3 * nq), weighted(3 * nq);
  for (Eigen::Index q = 0; q < nq; ++q) {
    const Vec3& x = vol.nodes[static_cast<std::size_t>(q)];
    const Vec3 z = x + h * Vec3(uq.segment<3>(3 * q));
    target.segment<3>(3 * q) = (Q.transpose() * z - x) / h;
    weighted.segment<3>(3 * q) = vol.weights[static_cast<std::size_t>(q)] * target.segment<3>(3 * q);
  }
  const Eigen::VectorXd cn = V.transpose() * weighted;
  const Eigen::VectorXd err = V * cn - target;
  double e2 = 0.0, t2 = 0.0;
  for (Eigen::Index q = 0; q < nq; ++q) {
    const double w = vol.weights[static_cast<std::size_t>(q)];
    e2 += w * err.segment<3>(3 * q).squaredNorm();
    t2 += w * target.segment<3>(3 * q).squaredNorm();
  }
  if (e2 > 1e-20 * std::max(1.0, t2)) return false;
  R = R * Q;
  c = cn;
  return true;
}

}  // namespace

AxisAngle DeformationAnsatz::axis_angle() const {
  const Vec3 w = log_map(rotation);
  const double t = w.norm();
  if (t == 0.0) return {};
  // axis_angle_matrix({a, θ}) = exp_map(−θa)
  return {-w / t, t};
}

NonlinearProblem make_nonlinear_problem(const LoadSpec& spec, const SpaceSpec& basis, std::optional<double> kappa,
                                        int quadrature_order) {
  spec.validate();
  int order = quadrature_order;
  if (order <= 0) {
    const int d = basis.kind == SpaceKind::AnsatzK ? std::max(basis.degree, basis.degree1d) : basis.degree;
    const int integrand = kappa ? 6 * (d - 1) : 4 * (d - 1);
    order = std::max(galerkin_quadrature_order(basis), (integrand + 2) / 2);
  }
  GalerkinSpace space = build_space(basis, spec.domain, order);
  LoadFunctional L(spec, space.rules());
  AssembleOptions ao;
  if (kappa) ao.incompressible_penalty = *kappa;
  StiffnessSystem sys = assemble(space, L, ao);
  KernelReport kernel = compatibility_report(L);
  return {std::move(space), std::move(L), std::move(sys), std::move(kernel), kappa};
}

double eval_Gh(const NonlinearProblem& p, const Eigen::VectorXd& c, const Mat3& R, double h, Eigen::VectorXd* grad) {
  if (!(h > 0.0)) throw ValidationError("eval_Gh: h must be positive");
  const auto& vol = p.space.rules()->volume;
  const Eigen::VectorXd gq = p.space.node_gradients() * c;
  const std::size_t nq = vol.size();
  std::vector<double> terms(nq);
  Eigen::VectorXd dG;
  if (grad) dG.resize(static_cast<Eigen::Index>(9 * nq));
  const double ih = 1.0 / h;
  const double kappa = p.kappa.value_or(0.0);
  for (std::size_t q = 0; q < nq; ++q) {
    const Mat3 G = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(gq.data() + 9 * q);
    const Mat3 F = Mat3::Identity() + h * G;
    double e = density(F) * ih * ih;
    Mat3 dE;
    if (grad) dE = ih * density_gradient(F);
    if (kappa > 0.0) {
      const double j = F.determinant() - 1.0;
      e += kappa * ih * ih * j * j;
      if (grad) dE += 2.0 * kappa * ih * j * cofactor(F);
    }
    terms[q] = vol.weights[q] * e;
    if (grad) {
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          dG[static_cast<Eigen::Index>(9 * q + 3 * a + b)] = vol.weights[q] * dE(a, b);
    }
  }
  const Eigen::VectorXd b = p.system.load_vector(R);
  const double elastic = pairwise_sum(terms);
  const double value = elastic - b.dot(c) - ih * p.loads.work_on_linear_map(R - Mat3::Identity());
  if (grad) *grad = p.space.node_gradients().transpose() * dG - b;
  return value;
}

double eval_Gh(const NonlinearProblem& p, const DeformationAnsatz& y) {
  return eval_Gh(p, y.coeffs, y.rotation, y.h, nullptr);
}

NonlinearResult minimize_Gh(const NonlinearProblem& p, const DeformationAnsatz& init, const NonlinearOptions& opts) {
  if (p.kernel.classification == KernelClass::Incompatible) {
    throw IncompatibleLoadsError("refusing to minimize: " + p.kernel.note +
                                 "; the scaled energy is unbounded below as h -> 0");
  }
  const int n = p.space.dim();
  if (init.coeffs.size() != n) throw ValidationError("minimize_Gh: initial coefficients have the wrong size");
  const double h = init.h;

  Eigen::MatrixXd P = p.system.A;
  if (p.system.penalty_div && p.kappa) P += 2.0 * *p.kappa * *p.system.penalty_div;
  const double tau = 1e-3 * P.diagonal().mean();
  P.diagonal().array() += tau;
  const Eigen::LLT<Eigen::MatrixXd> llt(P);
  if (llt.info() != Eigen::Success) throw SolverError("minimize_Gh: preconditioner factorization failed");

  NonlinearResult res;
  res.y = init;
  res.y.rotation = nearest_rotation(init.rotation).rotation;
  Eigen::VectorXd c = init.coeffs;
  Mat3 R = res.y.rotation;
  Eigen::VectorXd g;
  double f = eval_Gh(p, c, R, h, &g);
  res.history.push_back(f);

  const auto check_divergence = [&](double v) {
    if (v < opts.divergence_floor || !std::isfinite(v)) {
      std::ostringstream os;
      os << "scaled energy diverged (value " << v << "); loads are likely incompatible";
      throw SolverError(os.str(), res.history);
    }
  };

  res.status = "max_rounds";
  for (int round = 0; round < opts.max_rounds; ++round) {
    const double round_start = f;
    // u-step
    for (int it = 0; it < opts.max_iterations; ++it) {
      res.gradient_norm = g.norm();
      if (res.gradient_norm < opts.gradient_tol) break;
      const Eigen::VectorXd d = -llt.solve(g);
      const double slope = g.dot(d);
      if (!(slope < 0.0)) break;
      double step = opts.initial_step;
      bool accepted = false;
      Eigen::VectorXd gt;
      for (int ls = 0; ls < 60; ++ls) {
        const Eigen::VectorXd ct = c + step * d;
        const double ft = eval_Gh(p, ct, R, h, &gt);
        if (ft <= f + opts.sufficient_decrease * step * slope) {
          const double drop = f - ft;
          c = ct;
          f = ft;
          g = gt;
          accepted = true;
          res.history.push_back(f);
          ++res.iterations;
          check_divergence(f);
          if (drop <= 1e-15 * std::max(1.0, std::abs(f))) it = opts.max_iterations;
          break;
        }
        step *= opts.shrink;
      }
      if (!accepted) break;
    }
    // gauge: keep the rigid rotation of x + hu in R rather than in u
    {
      Mat3 Rg = R;
      Eigen::VectorXd cg = c, gg;
      if (regauge(p, h, Rg, cg)) {
        const double fg = eval_Gh(p, cg, Rg, h, &gg);
        if (fg <= f + 1e-12 * std::max(1.0, std::abs(f))) {
          R = Rg;
          c = cg;
          g = gg;
          f = fg;
        }
      }
    }
    // R-step: maximize R : (∫f⊗u + h⁻¹T)
    const Mat3 N = load_tensor(p, c) + p.loads.moment_tensor() / h;
    const Mat3 Rn = maximize_trace_alignment(N);
    Eigen::VectorXd gn;
    const double fn = eval_Gh(p, c, Rn, h, &gn);
    if (fn < f) {
      R = Rn;
      f = fn;
      g = gn;
      res.history.push_back(f);
      check_divergence(f);
    }
    res.rounds = round + 1;
    const double decrease = round_start - f;
    if (decrease < -1e-12 * std::max(1.0, std::abs(f))) {
      res.status = "stationary";
      break;
    }
    if (decrease < opts.joint_tol) {
      res.status = "converged";
      break;
    }
  }
  res.gradient_norm = g.norm();
  res.y.coeffs = c;
  res.y.rotation = R;
  res.value = f;
  return res;
}

Mat3 optimal_rotation_Ap(const std::vector<Mat3>& grad_y, const QuadratureRule& rule, double p) {
  if (grad_y.size() != rule.size()) throw ValidationError("optimal_rotation_Ap: one gradient per node required");
  g_p(0.0, p);  // validates p
  Mat3 mean = Mat3::Zero();
  const double vol = rule.total_weight();
  for (std::size_t q = 0; q < rule.size(); ++q) mean += rule.weights[q] * grad_y[q];
  mean /= vol;
  const RotationObjective f = [&](const Mat3& R) {
    std::vector<double> terms(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q) terms[q] = rule.weights[q] * g_p((grad_y[q] - R).norm(), p);
    return pairwise_sum(terms);
  };
  DescentOptions o;
  o.gradient_tol = 1e-12;
  return so3_local_descent(f, nearest_rotation(mean).rotation, o).rotation;
}

Mat3 optimal_rotation_Ap(const std::function<Mat3(const Vec3&)>& grad_y, const QuadratureRule& rule, double p) {
  std::vector<Mat3> g(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) g[q] = grad_y(rule.nodes[q]);
  return optimal_rotation_Ap(g, rule, p);
}

double rescaled_strain_norm(const NonlinearProblem& p, const DeformationAnsatz& y) {
  const auto& vol = p.space.rules()->volume;
  const std::vector<Mat3> G = p.space.node_gradients(y.coeffs);
  const Mat3 base = (y.rotation - Mat3::Identity()) / y.h;
  std::vector<double> terms(vol.size());
  for (std::size_t q = 0; q < vol.size(); ++q) {
    terms[q] = vol.weights[q] * sym(base + y.rotation * G[q]).squaredNorm();
  }
  return std::sqrt(pairwise_sum(terms));
}

ConvergenceStudy convergence_study(const LoadSpec& spec, const std::vector<double>& h_schedule,
                                   const StudyOptions& opts) {
  for (std::size_t i = 0; i < h_schedule.size(); ++i) {
    if (!(h_schedule[i] > 0.0 && h_schedule[i] < 1.0)) throw ValidationError("h_schedule entries must lie in (0, 1)");
    if (i > 0 && !(h_schedule[i] < h_schedule[i - 1])) {
      throw ValidationError("h_schedule must be strictly decreasing");
    }
  }
  ConvergenceStudy study;
  const NonlinearProblem p = make_nonlinear_problem(spec, opts.basis, opts.kappa);
  if (p.kernel.classification == KernelClass::Incompatible) {
    throw IncompatibleLoadsError("refusing the study: " + p.kernel.note);
  }

  // limit minimizer on the same space and rules
  LimitProblem lp{p.space, p.loads, p.system, p.kernel};
  const LimitResult lim = min_limit(lp, opts.limit);
  study.limit_galerkin = lim.solution.value;
  study.limit_rotation = lim.solution.rotation;

  DeformationAnsatz y;
  y.rotation = lim.solution.rotation;
  y.coeffs = lim.solution.coeffs;
  if (has_closed_form(spec) && !opts.kappa) {
    const ExplicitSolution ex = explicit_minimizers(spec);
    if (p.kernel.classification == KernelClass::AxisSubgroup) study.limit_closed_form = ex.min_G();
    const double theta = lim.solution.theta.value_or(0.0);
    y.coeffs = p.space.project(ex.u_theta(theta).value);
  }
  // gaps refer to the limit minimum on the same space and rules
  study.limit_value = study.limit_galerkin;
  study.limit_source = "galerkin";

  for (double h : h_schedule) {
    ConvergenceRow row;
    row.h = h;
    y.h = h;
    try {
      const NonlinearResult r = minimize_Gh(p, y, opts.descent);
      y = r.y;
      row.value_Gh = r.value;
      row.status = r.status;
      row.rotation_distance_to_kernel = rotation_distance_to_kernel(r.y.rotation, p.kernel);
      row.strain_norm_rescaled = rescaled_strain_norm(p, r.y);
      const double denom = std::abs(study.limit_value) > 0.0 ? std::abs(study.limit_value) : 1.0;
      row.gap_to_limit = std::abs(row.value_Gh - study.limit_value) / denom;
      if (study.limit_closed_form) {
        row.gap_to_closed_form = std::abs(row.value_Gh - *study.limit_closed_form) / std::abs(*study.limit_closed_form);
      }
    } catch (const Error& e) {
      row.value_Gh = std::numeric_limits<double>::quiet_NaN();
      row.gap_to_limit = std::numeric_limits<double>::quiet_NaN();
      row.rotation_distance_to_kernel = std::numeric_limits<double>::quiet_NaN();
      row.strain_norm_rescaled = std::numeric_limits<double>::quiet_NaN();
      row.status = std::string("error: ") + e.what();
    }
    study.rows.push_back(row);
  }
  return study;
}

}  // namespace traction
