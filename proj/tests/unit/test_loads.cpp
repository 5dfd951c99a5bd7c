#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "traction/error.hpp"
#include "traction/loads.hpp"
#include "traction/rotation_search.hpp"

using namespace traction;

namespace {

constexpr double kPi = std::numbers::pi;

LoadFunctional make_loads(const LoadSpec& spec, int order = 10) {
  return LoadFunctional(spec, std::make_shared<const DomainRules>(DomainRules::build(spec.domain, order)));
}

LoadSpec zero_loads() {
  LoadSpec s;
  s.phi = Polynomial{};
  s.psi = Polynomial{};
  return s;
}

// random cubic vector field
struct RandomField {
  double c[3][10];
  explicit RandomField(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& row : c)
      for (double& v : row) v = u(rng);
  }
  Vec3 operator()(const Vec3& x) const {
    const double m[10] = {1, x.x(), x.y(), x.z(), x.x() * x.y(), x.y() * x.z(), x.z() * x.z(),
                          x.x() * x.x() * x.y(), x.z() * x.z() * x.z(), x.x() * x.y() * x.z()};
    Vec3 out = Vec3::Zero();
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 10; ++k) out[i] += c[i][k] * m[k];
    return out;
  }
};

}  // namespace

TEST(LoadSpec, CounterexampleProfiles) {
  const auto s = LoadSpec::cylinder_counterexample(0.01);
  EXPECT_DOUBLE_EQ(s.phi(0.5), 4 * std::pow(0.5, 6) - 9 * std::pow(0.5, 4) + 6 * 0.25 - 1);
  EXPECT_DOUBLE_EQ(s.psi(0.25), 0.01 * (0.25 - 0.5));
  const auto pc = profile_conditions(s);
  EXPECT_TRUE(pc.radial_ok());
  EXPECT_TRUE(pc.axial_ok());
  EXPECT_LT(std::abs(pc.phi_at_1) + std::abs(pc.dphi_at_1) + std::abs(pc.r2_dphi_integral), 1e-12);
  EXPECT_TRUE(has_closed_form(s));
}

TEST(LoadSpec, ValidationRejectsLinearPhi) {
  LoadSpec s = LoadSpec::cylinder_counterexample();
  s.phi = Polynomial{0.0, 1.0};
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(LoadSpec, ValidationRejectsBuiltinOnCylinder) {
  LoadSpec s = LoadSpec::ball_pull_in();
  s.domain = Domain::cylinder();
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(BodyForce, AxisLimit) {
  const auto s = LoadSpec::cylinder_counterexample(0.01);
  const Vec3 f = body_force(s, Vec3::Zero());
  EXPECT_DOUBLE_EQ(f.x(), 0.0);
  EXPECT_DOUBLE_EQ(f.y(), 0.0);
  EXPECT_DOUBLE_EQ(f.z(), s.psi(0.0));
}

TEST(BodyForce, BallPullIn) {
  const Vec3 f = body_force(LoadSpec::ball_pull_in(), Vec3(1, 0, 0));
  EXPECT_LT((f - Vec3(-1, 0, 0)).norm(), 1e-15);
}

TEST(BodyForce, AxialProfile) {
  const auto s = LoadSpec::cylinder_counterexample(1.0);
  EXPECT_NEAR(body_force(s, Vec3(0, 0, 1)).z(), 0.5, 1e-15);
}

TEST(LoadFunctional, NullResultantAndMomentum) {
  const auto L = make_loads(LoadSpec::cylinder_counterexample(0.01));
  EXPECT_NEAR(L([](const Vec3&) { return Vec3(0.3, -2.0, 1.5); }), 0.0, 1e-14);
  std::mt19937 rng(21);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int s = 0; s < 10; ++s) {
    const Mat3 W = skew_matrix({n(rng), n(rng), n(rng)});
    EXPECT_NEAR(L([&](const Vec3& x) { return Vec3(W * x); }), 0.0, 1e-14);
  }
}

TEST(LoadFunctional, SquaredSkewWork) {
  const double beta = 0.37;
  const auto L = make_loads(LoadSpec::cylinder_counterexample(beta));
  const double zpsi = beta / 12.0;  // ∫₀¹ z β(z − ½) dz
  std::mt19937 rng(22);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int s = 0; s < 10; ++s) {
    const SkewParams p{n(rng), n(rng), n(rng)};
    const Mat3 W2 = skew_matrix(p) * skew_matrix(p);
    EXPECT_NEAR(L([&](const Vec3& x) { return Vec3(W2 * x); }), -kPi * (p.b * p.b + p.c * p.c) * zpsi, 1e-13);
  }
}

TEST(LoadFunctional, Linearity) {
  const auto L = make_loads(LoadSpec::cylinder_counterexample(0.2));
  std::mt19937 rng(23);
  for (int s = 0; s < 10; ++s) {
    const RandomField u(rng), v(rng);
    const double a = 1.7, b = -0.4;
    const double lhs = L([&](const Vec3& x) { return Vec3(a * u(x) + b * v(x)); });
    EXPECT_NEAR(lhs, a * L(u) + b * L(v), 1e-12);
  }
}

TEST(LoadFunctional, MomentTensorGivesLinearWork) {
  const auto L = make_loads(LoadSpec::uniform_pressure(-1.0));
  std::mt19937 rng(24);
  std::normal_distribution<double> n(0.0, 1.0);
  Mat3 M;
  for (int i = 0; i < 9; ++i) M.data()[i] = n(rng);
  EXPECT_NEAR(L([&](const Vec3& x) { return Vec3(M * x); }), L.work_on_linear_map(M), 1e-12);
  // pressure λn: L(Mx) = λ Tr(M) |Ω|
  EXPECT_NEAR(L.work_on_linear_map(M), -M.trace() * kPi, 1e-12);
}

TEST(Kernel, AxisSubgroupForPositiveBeta) {
  const auto rep = compatibility_report(make_loads(LoadSpec::cylinder_counterexample(0.01)));
  EXPECT_EQ(rep.classification, KernelClass::AxisSubgroup);
  EXPECT_LT((rep.axis - Vec3::UnitZ()).norm(), 1e-12);
}

TEST(Kernel, FullGroupForZeroBeta) {
  const auto rep = compatibility_report(make_loads(LoadSpec::cylinder_counterexample(0.0)));
  EXPECT_EQ(rep.classification, KernelClass::FullSO3);
}

TEST(Kernel, BallPullInIncompatible) {
  const auto rep = compatibility_report(make_loads(LoadSpec::ball_pull_in()));
  EXPECT_EQ(rep.classification, KernelClass::Incompatible);
  EXPECT_LT(rep.resultant.norm(), 1e-12);
  EXPECT_LT(rep.momentum_max, 1e-12);
}

TEST(Kernel, ZAxisRotationsDoNoWork) {
  const auto L = make_loads(LoadSpec::cylinder_counterexample(0.01));
  for (int k = 0; k < 100; ++k) {
    const double t = -kPi + 2 * kPi * k / 100.0;
    EXPECT_LT(std::abs(L.work_on_linear_map(z_rotation(t) - Mat3::Identity())), 1e-10);
  }
}

TEST(Kernel, SubgroupProperty) {
  const auto L = make_loads(LoadSpec::cylinder_counterexample(0.01));
  std::mt19937 rng(25);
  std::uniform_real_distribution<double> th(-kPi, kPi);
  for (int s = 0; s < 20; ++s) {
    const Mat3 R = z_rotation(th(rng)), S = z_rotation(th(rng));
    ASSERT_TRUE(in_kernel(L, R));
    ASSERT_TRUE(in_kernel(L, S));
    EXPECT_LT(std::abs(L.work_on_linear_map(R * S - Mat3::Identity())), kKernelTol);
    EXPECT_LT(std::abs(L.work_on_linear_map(R.transpose() - Mat3::Identity())), kKernelTol);
  }
  EXPECT_FALSE(in_kernel(L, exp_map(Vec3(0.5, 0, 0))));
}

TEST(Kernel, DistanceToAxisKernel) {
  const auto rep = compatibility_report(make_loads(LoadSpec::cylinder_counterexample(0.01)));
  EXPECT_LT(rotation_distance_to_kernel(z_rotation(0.7), rep), 1e-12);
  EXPECT_GT(rotation_distance_to_kernel(exp_map(Vec3(kPi / 2, 0, 0)), rep), 0.5);
}

TEST(ReversedWitness, CompressivePressure) {
  const auto L = make_loads(LoadSpec::uniform_pressure(-1.0));
  const auto R = reversed_compatibility_witness(L);
  ASSERT_TRUE(R.has_value());
  const double work = L.work_on_linear_map(*R - Mat3::Identity());
  EXPECT_GT(work, kKernelTol);
  EXPECT_NEAR(work, -(*R - Mat3::Identity()).trace() * kPi, 1e-10);
}

TEST(ReversedWitness, NoneForCompatibleOrZeroLoads) {
  EXPECT_FALSE(reversed_compatibility_witness(make_loads(LoadSpec::cylinder_counterexample(0.01))).has_value());
  EXPECT_FALSE(reversed_compatibility_witness(make_loads(zero_loads())).has_value());
}

TEST(RigidProjection, Examples) {
  const auto rule = volume_quadrature(Domain::cylinder(), 8);
  const auto c = rigid_projection([](const Vec3&) { return Vec3(1, 2, 3); }, rule);
  EXPECT_LT((c.translation - Vec3(1, 2, 3)).norm(), 1e-12);
  EXPECT_LT(c.spin.norm(), 1e-12);

  const Mat3 W = skew_matrix({0.3, -0.2, 0.5});
  const auto w = rigid_projection([&](const Vec3& x) { return Vec3(W * x); }, rule);
  EXPECT_LT(w.translation.norm(), 1e-12);
  EXPECT_LT((skew_matrix(w.spin) - W).norm(), 1e-12);

  const auto id = rigid_projection([](const Vec3& x) { return x; }, rule);
  EXPECT_LT((id.translation - Domain::cylinder().centroid()).norm(), 1e-12);
  EXPECT_LT(id.spin.norm(), 1e-12);
}

TEST(RigidProjection, Idempotent) {
  const auto rule = volume_quadrature(Domain::cylinder(), 8);
  std::mt19937 rng(26);
  for (int s = 0; s < 10; ++s) {
    const RandomField v(rng);
    const RigidPart p = rigid_projection(v, rule);
    const RigidPart q = rigid_projection(p, rule);
    EXPECT_LT((p.translation - q.translation).norm(), 1e-12);
    EXPECT_LT((skew_matrix(p.spin) - skew_matrix(q.spin)).norm(), 1e-12);
  }
}

TEST(RotateLoads, IdentityUnchanged) {
  const auto L = make_loads(LoadSpec::cylinder_counterexample(0.1));
  const auto LR = rotate_loads(L, Mat3::Identity());
  std::mt19937 rng(27);
  for (int s = 0; s < 20; ++s) {
    const RandomField v(rng);
    EXPECT_NEAR(L(v), LR(v), 1e-14);
  }
}

TEST(RotateLoads, EvaluatesRotatedField) {
  const auto L = make_loads(LoadSpec::cylinder_counterexample(0.1));
  const Mat3 R = exp_map(Vec3(0.2, -0.7, 0.4));
  const auto LR = rotate_loads(L, R);
  std::mt19937 rng(28);
  for (int s = 0; s < 5; ++s) {
    const RandomField v(rng);
    EXPECT_NEAR(LR(v), L([&](const Vec3& x) { return Vec3(R * v(x)); }), 1e-13);
  }
}

TEST(RotateLoads, KernelRotationsStayFree) {
  const auto L = make_loads(LoadSpec::cylinder_counterexample(0.01));
  const auto LR = rotate_loads(L, z_rotation(0.9));
  for (double t : {-2.0, 0.3, 1.4}) {
    const Mat3 S = z_rotation(t);
    EXPECT_NEAR(LR([&](const Vec3& x) { return Vec3((S - Mat3::Identity()) * x); }), 0.0, 1e-12);
  }
}

TEST(RotateLoads, QuarterTurnGivesAzimuthalForces) {
  const auto spec = LoadSpec::cylinder_counterexample(0.01);
  const auto L = make_loads(spec);
  const auto LR = rotate_loads(L, z_rotation(-kPi / 2));
  const auto& nodes = L.rules().volume.nodes;
  for (std::size_t q = 0; q < nodes.size(); q += 37) {
    const Vec3 f = body_force(spec, nodes[q]);
    EXPECT_LT((LR.volume_forces()[q] - Vec3(f.y(), -f.x(), f.z())).norm(), 1e-14);
  }
}
