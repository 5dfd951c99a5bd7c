#include "traction/explicit_solution.hpp"

#include <cmath>
#include <numbers>

#include "traction/error.hpp"

namespace traction {
namespace {

constexpr double kPi = std::numbers::pi;

double integrate01(const std::function<double(double)>& f) {
  std::vector<double> x, w;
  gauss_legendre(32, 0.0, 1.0, x, w);
  std::vector<double> terms(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) terms[i] = w[i] * f(x[i]);
  return pairwise_sum(terms);
}

}  // namespace

Polynomial eta_star(const Polynomial& phi) {
  LoadSpec probe;
  probe.phi = phi;
  const auto c = profile_conditions(probe);
  if (!c.radial_ok()) {
    throw ValidationError("eta_star: radial profile violates phi(1) = phi'(1) = int r^2 phi' = 0");
  }
  const Polynomial inner = (Polynomial::monomial(2) * phi.derivative()).antiderivative();
  return (1.0 / 16.0) * (inner.divide_by_x() - Polynomial::monomial(1) * phi);
}

Polynomial axial_profile(const Polynomial& psi) {
  return (-1.0 / 8.0) * psi.antiderivative().antiderivative();
}

double ode_residual(const Polynomial& eta, const Polynomial& phi, std::span<const double> r_grid) {
  const Polynomial d1 = eta.derivative();
  const Polynomial d2 = d1.derivative();
  const Polynomial dphi = phi.derivative();
  double worst = 0.0;
  for (double r : r_grid) {
    const double v = r * r * d2(r) + r * d1(r) - eta(r) + r * r * dphi(r) / 8.0;
    worst = std::max(worst, std::abs(v));
  }
  return worst;
}

double biharmonic_residual(const Polynomial& eta, const Polynomial& phi, std::span<const double> r_grid) {
  // radial Laplacian in the plane: F'' + F'/r; with Φ' = η, ΔΦ = η' + η/r
  const Polynomial H = eta.derivative() + eta.divide_by_x();
  const Polynomial dH = H.derivative();
  const Polynomial ddH = dH.derivative();
  const Polynomial dphi = phi.derivative();
  const Polynomial ddphi = dphi.derivative();
  double worst = 0.0;
  for (double r : r_grid) {
    if (!(r > 0.0)) throw ValidationError("biharmonic_residual: grid must lie in (0, 1]");
    const double lap2 = ddH(r) + dH(r) / r;
    const double lapphi = ddphi(r) + dphi(r) / r;
    worst = std::max(worst, std::abs(8.0 * lap2 + lapphi));
  }
  return worst;
}

ExplicitSolution::ExplicitSolution(Polynomial eta, Polynomial psi_profile)
    : eta_(std::move(eta)), Psi_(std::move(psi_profile)) {
  g_ = eta_.divide_by_x();
  const Polynomial dg = g_.derivative();
  if (std::abs(dg.coeff(0)) < 1e-14) {
    dg_over_r_ = dg.divide_by_x();
  } else {
    dg_over_r_ = dg;
    dg_over_r_poly_ = false;
  }
  dPsi_ = Psi_.derivative();
}

BasisField ExplicitSolution::u_theta(double theta) const {
  const double c = std::cos(theta), s = std::sin(theta);
  const ExplicitSolution self = *this;
  auto value = [self, c, s](const Vec3& x) -> Vec3 {
    const double r = std::hypot(x.x(), x.y());
    const double g = self.g_(r);
    return {c * g * x.x() - 2.0 * s * g * x.y(), c * g * x.y() + 2.0 * s * g * x.x(), self.Psi_(x.z())};
  };
  auto gradient = [self, c, s](const Vec3& x) -> Mat3 {
    const double r = std::hypot(x.x(), x.y());
    const double g = self.g_(r);
    double k = 0.0;  // g'(r)/r
    if (self.dg_over_r_poly_) {
      k = self.dg_over_r_(r);
    } else if (r > 0.0) {
      k = self.dg_over_r_(r) / r;
    }
    const double X = x.x(), Y = x.y();
    Mat3 G = Mat3::Zero();
    // ∇(g x), ∇(g y)
    const double gxx = g + k * X * X, gxy = k * X * Y, gyy = g + k * Y * Y;
    // radial part c·(g x, g y)
    G(0, 0) += c * gxx;
    G(0, 1) += c * gxy;
    G(1, 0) += c * gxy;
    G(1, 1) += c * gyy;
    // azimuthal part −2s·(g y, −g x)
    G(0, 0) += -2.0 * s * (k * Y * X);
    G(0, 1) += -2.0 * s * (g + k * Y * Y);
    G(1, 0) += 2.0 * s * (g + k * X * X);
    G(1, 1) += 2.0 * s * (k * X * Y);
    G(2, 2) = self.dPsi_(x.z());
    return G;
  };
  return {value, gradient};
}

BasisField ExplicitSolution::u_minus_half_pi() const { return u_theta(-kPi / 2.0); }

BasisField ExplicitSolution::axial_part() const {
  const Polynomial Psi = Psi_, dPsi = dPsi_;
  return {[Psi](const Vec3& x) -> Vec3 { return {0.0, 0.0, Psi(x.z())}; },
          [dPsi](const Vec3& x) -> Mat3 {
            Mat3 G = Mat3::Zero();
            G(2, 2) = dPsi(x.z());
            return G;
          }};
}

double ExplicitSolution::radial_strain_energy() const {
  const Polynomial deta = eta_.derivative();
  return 2.0 * kPi * integrate01([&](double r) { return (deta(r) * deta(r) + g_(r) * g_(r)) * r; });
}

double ExplicitSolution::azimuthal_strain_energy() const {
  const Polynomial deta = eta_.derivative();
  return 2.0 * kPi * integrate01([&](double r) {
           const double d = deta(r) - g_(r);
           return 2.0 * d * d * r;
         });
}

double ExplicitSolution::axial_strain_energy() const {
  return kPi * integrate01([&](double z) { return dPsi_(z) * dPsi_(z); });
}

double ExplicitSolution::min_E() const { return -4.0 * (radial_strain_energy() + axial_strain_energy()); }

double ExplicitSolution::min_G_tilde() const {
  return -4.0 * (azimuthal_strain_energy() + axial_strain_energy());
}

double ExplicitSolution::min_G() const { return std::min(min_E(), min_G_tilde()); }

ExplicitSolution explicit_minimizers(const LoadSpec& spec) {
  if (!has_closed_form(spec)) {
    throw ValidationError("explicit minimizers need the unit cylinder with profile loads satisfying the side conditions");
  }
  return ExplicitSolution(eta_star(spec.phi), axial_profile(spec.psi));
}

EulerLagrangeResidual euler_lagrange_residual(const LoadSpec& spec, const BasisField& u, int n) {
  if (n < 2) throw ValidationError("euler_lagrange_residual: need n >= 2");
  EulerLagrangeResidual out;
  const double h = 1e-3;
  const auto E = [&u](const Vec3& x) -> Mat3 { return sym(u.gradient(x)); };
  const auto dE = [&](const Vec3& x, int j) -> Mat3 {
    const Vec3 e = h * Vec3::Unit(j);
    return (-E(x + 2.0 * e) + 8.0 * E(x + e) - 8.0 * E(x - e) + E(x - 2.0 * e)) / (12.0 * h);
  };
  const double R = spec.domain.radius, H = spec.domain.height;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < 2 * n; ++b)
      for (int c = 0; c < n; ++c) {
        const double r = R * (a + 0.5) / n * 0.95;
        const double t = 2.0 * kPi * b / (2 * n);
        const double z = H * (0.025 + 0.95 * (c + 0.5) / n);
        const Vec3 x{r * std::cos(t), r * std::sin(t), z};
        Vec3 div = Vec3::Zero();
        for (int j = 0; j < 3; ++j) div += dE(x, j).col(j);
        out.interior = std::max(out.interior, (-8.0 * div - body_force(spec, x)).norm());
      }
  // lateral wall and caps
  for (int b = 0; b < 2 * n; ++b) {
    const double t = 2.0 * kPi * b / (2 * n);
    const Vec3 nrm{std::cos(t), std::sin(t), 0.0};
    for (int c = 0; c <= n; ++c) {
      const Vec3 x{R * nrm.x(), R * nrm.y(), H * c / n};
      out.boundary = std::max(out.boundary, (E(x) * nrm).norm());
    }
    for (int a = 0; a <= n; ++a) {
      const double r = R * a / n;
      for (const double z : {0.0, H}) {
        const Vec3 x{r * std::cos(t), r * std::sin(t), z};
        const Vec3 cap{0.0, 0.0, z == 0.0 ? -1.0 : 1.0};
        out.boundary = std::max(out.boundary, (E(x) * cap).norm());
      }
    }
  }
  return out;
}

double strain_inner_product(const BasisField& u, const BasisField& v, const QuadratureRule& rule) {
  std::vector<double> terms(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    terms[q] = rule.weights[q] * frobenius_dot(sym(u.gradient(rule.nodes[q])), sym(v.gradient(rule.nodes[q])));
  }
  return pairwise_sum(terms);
}

}  // namespace traction
