#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "traction/error.hpp"
#include "traction/explicit_solution.hpp"

using namespace traction;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> unit_grid(int n) {
  std::vector<double> r(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = (i + 1.0) / n;
  return r;
}

}  // namespace

TEST(EtaStar, ClosedFormForCounterexample) {
  const auto spec = LoadSpec::cylinder_counterexample(0.01);
  const Polynomial eta = eta_star(spec.phi);
  for (double r : unit_grid(50)) EXPECT_NEAR(eta(r), r * std::pow(1 - r * r, 3) / 16, 1e-15);
  EXPECT_EQ(eta(0.0), 0.0);
  EXPECT_NEAR(eta.derivative()(1.0), 0.0, 1e-14);
}

TEST(EtaStar, RejectsViolatedRadialConditions) {
  EXPECT_THROW(eta_star(Polynomial{-1.0, 0.0, 1.0}), ValidationError);
}

TEST(OdeResidual, Examples) {
  const auto spec = LoadSpec::cylinder_counterexample(0.01);
  const Polynomial eta = eta_star(spec.phi);
  const auto grid = unit_grid(1000);
  EXPECT_LT(ode_residual(eta, spec.phi, grid), 1e-12);
  EXPECT_GT(ode_residual(eta + Polynomial::monomial(2, 0.01), spec.phi, grid), 1e-3);
  EXPECT_EQ(ode_residual(Polynomial{}, Polynomial{}, grid), 0.0);
}

TEST(OdeResidual, Biharmonic) {
  const auto spec = LoadSpec::cylinder_counterexample(0.01);
  EXPECT_LT(biharmonic_residual(eta_star(spec.phi), spec.phi, unit_grid(1000)), 1e-8);
}

TEST(AxialProfile, NeumannEnds) {
  const auto spec = LoadSpec::cylinder_counterexample(0.3);
  const Polynomial Psi = axial_profile(spec.psi);
  EXPECT_NEAR(Psi.derivative()(0.0), 0.0, 1e-15);
  EXPECT_NEAR(Psi.derivative()(1.0), 0.0, 1e-14);
  // −8Ψ'' = ψ
  for (double z : {0.1, 0.5, 0.8}) EXPECT_NEAR(-8 * Psi.derivative().derivative()(z), spec.psi(z), 1e-14);
}

TEST(ExplicitSolution, EulerLagrange) {
  const auto spec = LoadSpec::cylinder_counterexample(0.01);
  const auto ex = explicit_minimizers(spec);
  const auto res = euler_lagrange_residual(spec, ex.u0());
  EXPECT_LT(res.interior, 1e-8);
  EXPECT_LT(res.boundary, 1e-8);
}

TEST(ExplicitSolution, Orthogonality) {
  // the planar parts are orthogonal; both fields share (0, 0, Ψ)
  const auto ex = explicit_minimizers(LoadSpec::cylinder_counterexample(0.01));
  const auto rule = volume_quadrature(Domain::cylinder());
  const BasisField ax = ex.axial_part();
  auto planar = [&](const BasisField& u) {
    return BasisField{[u, ax](const Vec3& x) -> Vec3 { return u.value(x) - ax.value(x); },
                      [u, ax](const Vec3& x) -> Mat3 { return u.gradient(x) - ax.gradient(x); }};
  };
  EXPECT_LT(std::abs(strain_inner_product(planar(ex.u0()), planar(ex.u_minus_half_pi()), rule)), 1e-10);
  EXPECT_NEAR(strain_inner_product(ex.u0(), ex.u_minus_half_pi(), rule), ex.axial_strain_energy(), 1e-15);
  EXPECT_NEAR(strain_inner_product(ax, ax, rule), ex.axial_strain_energy(), 1e-15);
}

TEST(ExplicitSolution, GradientsMatchFiniteDifferences) {
  const auto ex = explicit_minimizers(LoadSpec::cylinder_counterexample(0.2));
  const BasisField u = ex.u_theta(0.7);
  const double h = 1e-6;
  for (const Vec3 x : {Vec3(0.2, -0.3, 0.4), Vec3(0.6, 0.1, 0.9), Vec3(0, 0, 0.5)}) {
    Mat3 fd;
    for (int j = 0; j < 3; ++j) fd.col(j) = (u.value(x + h * Vec3::Unit(j)) - u.value(x - h * Vec3::Unit(j))) / (2 * h);
    EXPECT_LT((fd - u.gradient(x)).norm(), 1e-8);
  }
}

TEST(ExplicitSolution, OneDimensionalEnergiesMatchVolumeQuadrature) {
  const auto ex = explicit_minimizers(LoadSpec::cylinder_counterexample(0.4));
  const auto rule = volume_quadrature(Domain::cylinder());
  const double e0 = strain_inner_product(ex.u0(), ex.u0(), rule);
  const double e1 = strain_inner_product(ex.u_minus_half_pi(), ex.u_minus_half_pi(), rule);
  EXPECT_NEAR(-4 * e0, ex.min_E(), 1e-13);
  EXPECT_NEAR(-4 * e1, ex.min_G_tilde(), 1e-13);
}

TEST(ExplicitSolution, ClosedValues) {
  // η* = r(1 − r²)³/16 and Ψ from ψ = β(z − ½) integrate to these by hand
  for (double beta : {0.0, 0.01, 0.5}) {
    const auto ex = explicit_minimizers(LoadSpec::cylinder_counterexample(beta));
    EXPECT_NEAR(ex.min_E(), -kPi * (72 + 7 * beta * beta) / 13440, 1e-15);
    EXPECT_NEAR(ex.min_G_tilde(), -kPi * (144 + 7 * beta * beta) / 13440, 1e-15);
    EXPECT_NEAR(ex.margin(), 3 * kPi / 560, 1e-15);
    EXPECT_GT(ex.margin(), 1e-3 * std::abs(ex.min_E()));
  }
}
