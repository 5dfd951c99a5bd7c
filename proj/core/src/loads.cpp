#include "traction/loads.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <numbers>

#include "traction/error.hpp"

namespace traction {
namespace {

constexpr double kPi = std::numbers::pi;

// Weighted sum of w_i a_i ⊗ b_i with pairwise summation per entry.
Mat3 weighted_outer_sum(const std::vector<double>& w, const std::vector<Vec3>& a,
                        const std::vector<Vec3>& b) {
  Mat3 out = Mat3::Zero();
  std::vector<double> terms(w.size());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      for (std::size_t q = 0; q < w.size(); ++q) terms[q] = w[q] * a[q][i] * b[q][j];
      out(i, j) = pairwise_sum(terms);
    }
  return out;
}

}  // namespace

LoadSpec LoadSpec::cylinder_counterexample(double beta) {
  LoadSpec s;
  s.phi = Polynomial{-1.0, 0.0, 6.0, 0.0, -9.0, 0.0, 4.0};
  s.psi = Polynomial{-0.5 * beta, beta};
  s.domain = Domain::cylinder();
  return s;
}

LoadSpec LoadSpec::ball_pull_in() {
  LoadSpec s;
  s.builtin = BuiltinLoad::BallPullIn;
  s.domain = Domain::unit_ball();
  return s;
}

LoadSpec LoadSpec::uniform_pressure(double lambda, Domain d) {
  LoadSpec s;
  s.surface_pressure = lambda;
  s.domain = d;
  return s;
}

void LoadSpec::validate() const {
  if (phi.coeff(1) != 0.0) {
    throw ValidationError("phi: the linear coefficient must vanish (phi'(0) = 0 keeps the radial force smooth on the axis)");
  }
  if (builtin == BuiltinLoad::BallPullIn && domain.kind != DomainKind::UnitBall) {
    throw ValidationError("builtin ball_pull_in requires the unit ball domain");
  }
  if (surface_pressure && domain.kind != DomainKind::Cylinder) {
    throw ValidationError("surface_pressure is only supported on the cylinder");
  }
  if (surface_pressure && !std::isfinite(*surface_pressure)) {
    throw ValidationError("surface_pressure must be finite");
  }
  for (double c : phi.coeffs())
    if (!std::isfinite(c)) throw ValidationError("phi coefficients must be finite");
  for (double c : psi.coeffs())
    if (!std::isfinite(c)) throw ValidationError("psi coefficients must be finite");
}

bool ProfileConditions::radial_ok(double tol) const {
  return std::abs(phi_at_1) < tol && std::abs(dphi_at_1) < tol && std::abs(r2_dphi_integral) < tol;
}

bool ProfileConditions::axial_ok(double tol) const {
  return std::abs(psi_integral) < tol && z_psi_integral >= -tol;
}

ProfileConditions profile_conditions(const LoadSpec& spec) {
  ProfileConditions c;
  const Polynomial dphi = spec.phi.derivative();
  c.phi_at_1 = spec.phi(1.0);
  c.dphi_at_1 = dphi(1.0);
  c.r2_dphi_integral = (Polynomial::monomial(2) * dphi).integrate(0.0, 1.0);
  c.psi_integral = spec.psi.integrate(0.0, 1.0);
  c.z_psi_integral = (Polynomial::monomial(1) * spec.psi).integrate(0.0, 1.0);
  // Δφ = Σ k² c_k r^{k−2}; the r⁻¹ term from c_1 is reported as nonzero too
  for (int k = 1; k <= spec.phi.degree(); ++k)
    if (spec.phi.coeff(k) != 0.0) c.laplacian_nonzero = true;
  return c;
}

bool has_closed_form(const LoadSpec& spec) {
  if (!spec.domain.is_unit_cylinder() || spec.surface_pressure || spec.builtin != BuiltinLoad::None) {
    return false;
  }
  const auto c = profile_conditions(spec);
  return c.radial_ok() && c.axial_ok();
}

Vec3 body_force(const LoadSpec& spec, const Vec3& x) {
  if (spec.builtin == BuiltinLoad::BallPullIn) return -x;
  const double r = std::hypot(x.x(), x.y());
  // φ'(r)/r = Σ k c_k r^{k−2}, k ≥ 2 (c_1 = 0 by validation)
  double radial = 0.0;
  const auto c = spec.phi.coeffs();
  for (std::size_t k = 2; k < c.size(); ++k) {
    radial += static_cast<double>(k) * c[k] * std::pow(r, static_cast<double>(k) - 2.0);
  }
  return {radial * x.x(), radial * x.y(), spec.psi(x.z())};
}

LoadFunctional::LoadFunctional(const LoadSpec& spec, std::shared_ptr<const DomainRules> rules)
    : rules_(std::move(rules)) {
  spec.validate();
  if (rules_->domain.kind != spec.domain.kind) {
    throw ValidationError("load spec and quadrature rules refer to different domains");
  }
  const auto& vol = rules_->volume;
  volume_forces_.resize(vol.size());
  for (std::size_t q = 0; q < vol.size(); ++q) volume_forces_[q] = body_force(spec, vol.nodes[q]);
  const auto& surf = rules_->surface;
  surface_forces_.assign(surf.size(), Vec3::Zero());
  if (spec.surface_pressure) {
    for (std::size_t q = 0; q < surf.size(); ++q) surface_forces_[q] = *spec.surface_pressure * surf.normals[q];
  }
  compute_moment();
}

void LoadFunctional::compute_moment() {
  moment_ = weighted_outer_sum(rules_->volume.weights, volume_forces_, rules_->volume.nodes);
  if (!rules_->surface.weights.empty()) {
    moment_ += weighted_outer_sum(rules_->surface.weights, surface_forces_, rules_->surface.nodes);
  }
}

double LoadFunctional::operator()(const VectorField& v) const {
  const auto& vol = rules_->volume;
  const auto& surf = rules_->surface;
  std::vector<double> terms;
  terms.reserve(vol.size() + surf.size());
  for (std::size_t q = 0; q < vol.size(); ++q) {
    const Vec3 val = v(vol.nodes[q]);
    if (!val.allFinite()) throw Error("load functional: non-finite field value at a volume node");
    terms.push_back(vol.weights[q] * volume_forces_[q].dot(val));
  }
  for (std::size_t q = 0; q < surf.size(); ++q) {
    if (surface_forces_[q].isZero(0.0)) continue;
    const Vec3 val = v(surf.nodes[q]);
    if (!val.allFinite()) throw Error("load functional: non-finite field value at a surface node");
    terms.push_back(surf.weights[q] * surface_forces_[q].dot(val));
  }
  return pairwise_sum(terms);
}

Mat3 LoadFunctional::tensor_against(const VectorField& u) const {
  const auto& vol = rules_->volume;
  std::vector<Vec3> vals(vol.size());
  for (std::size_t q = 0; q < vol.size(); ++q) vals[q] = u(vol.nodes[q]);
  Mat3 out = weighted_outer_sum(vol.weights, volume_forces_, vals);
  const auto& surf = rules_->surface;
  if (!surf.weights.empty()) {
    std::vector<Vec3> svals(surf.size());
    for (std::size_t q = 0; q < surf.size(); ++q) svals[q] = u(surf.nodes[q]);
    out += weighted_outer_sum(surf.weights, surface_forces_, svals);
  }
  return out;
}

Vec3 LoadFunctional::resultant() const {
  Vec3 out;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> terms;
    terms.reserve(volume_forces_.size() + surface_forces_.size());
    for (std::size_t q = 0; q < volume_forces_.size(); ++q)
      terms.push_back(rules_->volume.weights[q] * volume_forces_[q][c]);
    for (std::size_t q = 0; q < surface_forces_.size(); ++q)
      terms.push_back(rules_->surface.weights[q] * surface_forces_[q][c]);
    out[c] = pairwise_sum(terms);
  }
  return out;
}

LoadFunctional LoadFunctional::rotated(const Mat3& R) const {
  LoadFunctional out;
  out.rules_ = rules_;
  const Mat3 Rt = R.transpose();
  out.volume_forces_.resize(volume_forces_.size());
  for (std::size_t q = 0; q < volume_forces_.size(); ++q) out.volume_forces_[q] = Rt * volume_forces_[q];
  out.surface_forces_.resize(surface_forces_.size());
  for (std::size_t q = 0; q < surface_forces_.size(); ++q) out.surface_forces_[q] = Rt * surface_forces_[q];
  out.compute_moment();
  return out;
}

bool LoadFunctional::is_zero() const {
  for (const auto& f : volume_forces_)
    if (!f.isZero(0.0)) return false;
  for (const auto& g : surface_forces_)
    if (!g.isZero(0.0)) return false;
  return true;
}

std::string to_string(KernelClass k) {
  switch (k) {
    case KernelClass::IdentityOnly: return "identity_only";
    case KernelClass::AxisSubgroup: return "axis_subgroup";
    case KernelClass::FullSO3: return "full_so3";
    case KernelClass::PlaneOfAxes: return "plane_of_axes";
    case KernelClass::Incompatible: return "incompatible";
  }
  return "unknown";
}

std::vector<Vec3> fibonacci_sphere(int n) {
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(n));
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double t = golden * i;
    pts.emplace_back(rho * std::cos(t), rho * std::sin(t), z);
  }
  return pts;
}

KernelReport compatibility_report(const LoadFunctional& L, int samples, double tol) {
  KernelReport rep;
  rep.tol = tol;
  rep.resultant = L.resultant();
  const Mat3& T = L.moment_tensor();

  const SkewParams generators[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (const auto& g : generators) {
    rep.momentum_max = std::max(rep.momentum_max, std::abs(L.work_on_linear_map(skew_matrix(g))));
  }

  double max_sample = -std::numeric_limits<double>::infinity();
  for (const Vec3& p : fibonacci_sphere(samples)) {
    const SkewParams dir{p.x(), p.y(), p.z()};
    const Mat3 W = skew_matrix(dir);
    const double v = L.work_on_linear_map(W * W);
    rep.w2_values.push_back({dir, v});
    max_sample = std::max(max_sample, v);
  }

  // For a unit axial vector ω, W² = ωωᵀ − I, so L(W²x) = ωᵀ(S − tr S·I)ω
  // with S = sym T.
  const Mat3 S = sym(T);
  const Mat3 form = S - S.trace() * Mat3::Identity();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(form);
  rep.form_eigenvalues = eig.eigenvalues();

  if (rep.resultant.norm() > tol) {
    rep.classification = KernelClass::Incompatible;
    rep.note = "loads have a nonzero resultant";
    return rep;
  }
  if (rep.momentum_max > tol) {
    rep.classification = KernelClass::Incompatible;
    rep.note = "loads have a nonzero moment";
    return rep;
  }
  if (max_sample > tol || rep.form_eigenvalues.maxCoeff() > tol) {
    rep.classification = KernelClass::Incompatible;
    rep.note = "loads do positive work on some rigid rotation";
    return rep;
  }

  int zeros = 0;
  for (int i = 0; i < 3; ++i)
    if (std::abs(rep.form_eigenvalues[i]) <= tol) ++zeros;

  auto canonical = [](Vec3 v) {
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    return v[k] < 0.0 ? Vec3(-v) : v;
  };

  switch (zeros) {
    case 3:
      rep.classification = KernelClass::FullSO3;
      break;
    case 1:
      // the zero eigenvalue is the largest one (the form is ≤ 0)
      rep.classification = KernelClass::AxisSubgroup;
      rep.axis = canonical(eig.eigenvectors().col(2));
      break;
    case 2:
      rep.classification = KernelClass::PlaneOfAxes;
      rep.axis = canonical(eig.eigenvectors().col(0));
      rep.note = "zero work only for rotations about axes in a plane";
      break;
    default:
      rep.classification = KernelClass::IdentityOnly;
      rep.note = "identity-only classification is sampled; heuristic for non-preset loads";
      break;
  }
  return rep;
}

double rotation_distance_to_kernel(const Mat3& R, const KernelReport& k) {
  switch (k.classification) {
    case KernelClass::FullSO3:
      return 0.0;
    case KernelClass::AxisSubgroup: {
      // max over θ of R : R_θ(axis); R_θ = a aᵀ + cosθ (I − a aᵀ) − sinθ [a]×
      const Vec3 a = k.axis.normalized();
      const Mat3 P = a * a.transpose();
      const Mat3 K = skew_matrix(SkewParams::from_axial(a));
      const double c0 = frobenius_dot(R, P);
      const double cc = frobenius_dot(R, Mat3::Identity() - P);
      const double cs = -frobenius_dot(R, K);
      const double best = c0 + std::hypot(cc, cs);
      return std::sqrt(std::max(0.0, 6.0 - 2.0 * best));
    }
    case KernelClass::PlaneOfAxes:
    case KernelClass::IdentityOnly:
    case KernelClass::Incompatible:
      break;
  }
  return (R - Mat3::Identity()).norm();
}

bool in_kernel(const LoadFunctional& L, const Mat3& R, double tol) {
  return std::abs(L.work_on_linear_map(R - Mat3::Identity())) <= tol;
}

std::optional<Mat3> reversed_compatibility_witness(const LoadFunctional& L, double tol) {
  std::optional<Mat3> best;
  double best_value = tol;
  constexpr int kAngles = 8;
  for (const Vec3& axis : fibonacci_sphere(100)) {
    for (int k = 1; k <= kAngles; ++k) {
      const double theta = kPi * k / kAngles;
      for (double sign : {1.0, -1.0}) {
        const Mat3 R = exp_map(sign * theta * axis);
        const double v = L.work_on_linear_map(R - Mat3::Identity());
        if (v > best_value) {
          best_value = v;
          best = R;
        }
      }
    }
  }
  return best;
}

RigidPart rigid_projection(const VectorField& v, const QuadratureRule& rule) {
  const std::size_t n = rule.size();
  std::vector<Vec3> vals(n);
  for (std::size_t q = 0; q < n; ++q) vals[q] = v(rule.nodes[q]);

  const double vol = rule.total_weight();
  Vec3 xbar = Vec3::Zero();
  Vec3 vbar = Vec3::Zero();
  {
    std::vector<double> tx(n), tv(n);
    for (int c = 0; c < 3; ++c) {
      for (std::size_t q = 0; q < n; ++q) {
        tx[q] = rule.weights[q] * rule.nodes[q][c];
        tv[q] = rule.weights[q] * vals[q][c];
      }
      xbar[c] = pairwise_sum(tx) / vol;
      vbar[c] = pairwise_sum(tv) / vol;
    }
  }

  // with y = x − x̄ and d = v − v̄: J w = ∫ y × d, J = ∫ (|y|² I − y yᵀ)
  Mat3 J = Mat3::Zero();
  Vec3 rhs = Vec3::Zero();
  {
    std::vector<double> t(n);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        for (std::size_t q = 0; q < n; ++q) {
          const Vec3 y = rule.nodes[q] - xbar;
          t[q] = rule.weights[q] * ((i == j ? y.squaredNorm() : 0.0) - y[i] * y[j]);
        }
        J(i, j) = pairwise_sum(t);
      }
      for (std::size_t q = 0; q < n; ++q) {
        const Vec3 y = rule.nodes[q] - xbar;
        t[q] = rule.weights[q] * y.cross(vals[q] - vbar)[i];
      }
      rhs[i] = pairwise_sum(t);
    }
  }
  const Vec3 w = J.partialPivLu().solve(rhs);
  RigidPart out;
  out.spin = SkewParams::from_axial(w);
  out.translation = vbar - skew_matrix(out.spin) * xbar;
  return out;
}

LoadFunctional rotate_loads(const LoadFunctional& L, const Mat3& R) { return L.rotated(R); }

}  // namespace traction
