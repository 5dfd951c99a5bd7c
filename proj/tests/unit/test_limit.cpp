#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "traction/error.hpp"
#include "traction/limit_solvers.hpp"

using namespace traction;

namespace {

constexpr double kPi = std::numbers::pi;

LimitConfig config(int degree) {
  LimitConfig cfg;
  cfg.basis = {SpaceKind::Full, degree, 4};
  return cfg;
}

LoadSpec zero_loads() {
  LoadSpec s;
  s.phi = Polynomial{};
  s.psi = Polynomial{};
  return s;
}

}  // namespace

TEST(AxisRotation, MatchesZRotation) {
  for (double t : {-1.0, 0.4, 2.0}) EXPECT_LT((axis_rotation(Vec3::UnitZ(), t) - z_rotation(t)).norm(), 1e-15);
  const Mat3 R = axis_rotation(Vec3(1, 2, 2) / 3.0, 0.9);
  EXPECT_TRUE(is_rotation(R));
  EXPECT_LT((R * Vec3(1, 2, 2) - Vec3(1, 2, 2)).norm(), 1e-14);
}

TEST(MinLinear, IdentityAndClosedForm) {
  const auto rep = min_linear(LoadSpec::cylinder_counterexample(0.01), false, config(4));
  ASSERT_TRUE(rep.closed_form.has_value());
  EXPECT_LT(rep.identity_residual, 1e-10);
  EXPECT_LT(rep.solution.value, 0.0);
  // Galerkin values are upper bounds of the true minimum
  EXPECT_GE(rep.solution.value, *rep.closed_form - 1e-12);
}

TEST(MinLinear, ZeroLoads) {
  const auto rep = min_linear(zero_loads(), false, config(2));
  EXPECT_EQ(rep.solution.value, 0.0);
}

TEST(MinLinear, IncompressibleBrackets) {
  auto cfg = config(4);
  const auto spec = LoadSpec::cylinder_counterexample(0.01);
  const auto rep = min_linear(spec, true, cfg);
  ASSERT_TRUE(rep.upper && rep.lower);
  EXPECT_LE(*rep.lower, *rep.upper + 1e-12);
  const auto comp = min_linear(spec, false, cfg);
  EXPECT_GE(*rep.upper, comp.solution.value - 1e-12);
  ASSERT_EQ(rep.penalized.size(), 4u);
  for (std::size_t i = 1; i < rep.penalized.size(); ++i) EXPECT_GE(rep.penalized[i].second, rep.penalized[i - 1].second - 1e-12);
}

TEST(MinLimit, AxisKernelOptimalAngle) {
  const auto spec = LoadSpec::cylinder_counterexample(0.01);
  const auto res = min_limit(spec, false, config(7));
  ASSERT_TRUE(res.solution.theta.has_value());
  EXPECT_NEAR(std::abs(*res.solution.theta), kPi / 2, 1e-6);
  const auto ex = explicit_minimizers(spec);
  EXPECT_NEAR(res.solution.value, ex.min_G(), 1e-6 * std::abs(ex.min_G()));
  EXPECT_EQ(res.kernel.classification, KernelClass::AxisSubgroup);
}

TEST(MinLimit, LimitBelowLinear) {
  const auto spec = LoadSpec::cylinder_counterexample(0.01);
  const auto cfg = config(4);
  const double G = min_limit(spec, false, cfg).solution.value;
  const double E = min_linear(spec, false, cfg).solution.value;
  const double GI = min_limit(spec, true, cfg).solution.value;
  EXPECT_LE(G, E + 1e-12);
  EXPECT_GE(GI, G - 1e-12);
}

TEST(MinLimit, IdentityKernelReducesToLinear) {
  const auto spec = LoadSpec::uniform_pressure(1.0);
  const auto cfg = config(3);
  const auto lim = min_limit(spec, false, cfg);
  EXPECT_EQ(lim.kernel.classification, KernelClass::IdentityOnly);
  EXPECT_NEAR(lim.solution.value, min_linear(spec, false, cfg).solution.value, 1e-12);
}

TEST(MinLimit, ZeroLoads) {
  const auto lim = min_limit(zero_loads(), false, config(2));
  EXPECT_EQ(lim.kernel.classification, KernelClass::FullSO3);
  EXPECT_EQ(lim.solution.value, 0.0);
}

TEST(MinLimit, IncompatibleRefused) {
  EXPECT_THROW(min_limit(LoadSpec::ball_pull_in(), false, config(2)), IncompatibleLoadsError);
}

TEST(MinLimit, ThetaScanFollowsDecomposition) {
  const auto spec = LoadSpec::cylinder_counterexample(0.01);
  const auto cfg = config(4);
  const auto p = make_problem(spec, cfg.basis, cfg);
  const auto lim = min_limit(p, cfg);
  const double E = solve_for_rotation(p.system, Mat3::Identity()).value;
  const double Gt = solve_for_rotation(p.system, z_rotation(-kPi / 2)).value;
  ASSERT_EQ(lim.theta_scan.size(), 64u);
  for (const auto& [theta, value] : lim.theta_scan) {
    const double c = std::cos(theta), s = std::sin(theta);
    EXPECT_NEAR(value, c * c * E + s * s * Gt, 1e-8 * std::abs(E));
  }
}

TEST(GapReport, MarginAndDecomposition) {
  const auto rep = gap_report(LoadSpec::cylinder_counterexample(0.01), config(4));
  ASSERT_TRUE(rep.closed_form);
  EXPECT_GT(rep.margin, 0.0);
  EXPECT_NEAR(rep.margin, rep.min_E - rep.min_G, 1e-15);
  ASSERT_EQ(rep.decomposition_table.size(), 5u);
  for (const auto& row : rep.decomposition_table) EXPECT_LT(row.residual, 1e-8 * std::abs(rep.min_E_galerkin));
}

TEST(GapReport, FullGroupStillHasMargin) {
  const auto rep = gap_report(LoadSpec::cylinder_counterexample(0.0), config(3));
  EXPECT_EQ(rep.kernel.classification, KernelClass::FullSO3);
  EXPECT_GT(rep.margin, 0.0);
}

TEST(RotatedCheck, NoGapAfterOptimalRotation) {
  const auto spec = LoadSpec::cylinder_counterexample(0.01);
  const auto rc = rotated_no_gap_check(spec, config(4), z_rotation(-kPi / 2));
  EXPECT_LT(std::abs(rc.min_G_R - rc.min_E_R), 1e-6 * std::abs(rc.min_E_R));
  EXPECT_TRUE(rc.same_kernel);
  EXPECT_EQ(rc.class_after, KernelClass::AxisSubgroup);
}

TEST(RotatedCheck, IdentityRotationShowsGap) {
  const auto spec = LoadSpec::cylinder_counterexample(0.01);
  const auto cfg = config(4);
  const auto rc = rotated_no_gap_check(spec, cfg, Mat3::Identity());
  const auto p = make_problem(spec, cfg.basis, cfg);
  const double E = solve_for_rotation(p.system, Mat3::Identity()).value;
  const double G = min_limit(p, cfg).solution.value;
  EXPECT_NEAR(rc.min_E_R, E, 1e-12);
  EXPECT_NEAR(rc.min_G_R, G, 1e-10);
  EXPECT_NEAR(rc.difference, G - E, 1e-10);
  EXPECT_LT(rc.difference, 0.0);
}

TEST(Nonuniqueness, ReflectedMinimizer) {
  const auto rep = nonuniqueness_check(LoadSpec::cylinder_counterexample(0.01));
  EXPECT_TRUE(rep.from_closed_form);
  EXPECT_TRUE(rep.energies_match);
  EXPECT_TRUE(rep.distinct);
  EXPECT_LT(rep.relative_difference, 1e-8);
  EXPECT_GT(rep.strain_difference, 0.1 * rep.strain_norm);
  EXPECT_NEAR(rep.G_u_plus_rigid, rep.G_u, 1e-10);
}

TEST(Nonuniqueness, ZeroLoadsTrivial) {
  const auto rep = nonuniqueness_check(zero_loads());
  EXPECT_EQ(rep.G_u, 0.0);
  EXPECT_TRUE(rep.energies_match);
  EXPECT_EQ(rep.strain_difference, 0.0);
}
