#include "traction/core_math.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "traction/error.hpp"

namespace traction {

double SkewParams::norm() const { return std::sqrt(a * a + b * b + c * c); }

Vec3 SkewParams::axial() const { return {-c, b, -a}; }

SkewParams SkewParams::from_axial(const Vec3& w) { return {-w.z(), w.y(), -w.x()}; }

SkewParams SkewParams::from_matrix(const Mat3& W) {
  const Mat3 S = skew_part(W);
  return {S(0, 1), S(0, 2), S(1, 2)};
}

Mat3 skew_matrix(const SkewParams& p) {
  Mat3 W;
  W << 0.0, p.a, p.b,
       -p.a, 0.0, p.c,
       -p.b, -p.c, 0.0;
  return W;
}

Mat3 rodrigues(const Mat3& W, double theta) {
  constexpr double tol = 1e-12;
  if ((W + W.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw ValidationError("rodrigues: W is not skew-symmetric");
  }
  const double n2 = W.squaredNorm();
  if (std::abs(n2 - 2.0) > tol) {
    throw ValidationError("rodrigues: expected |W|^2 = 2, got " + std::to_string(n2));
  }
  return Mat3::Identity() + std::sin(theta) * W + (1.0 - std::cos(theta)) * (W * W);
}

Mat3 exp_map(const Vec3& omega) {
  const double angle = omega.norm();
  const Mat3 K = skew_matrix(SkewParams::from_axial(omega));
  if (angle < 1e-8) {
    // second-order Taylor expansion; the remainder is below 1e-24
    return Mat3::Identity() + K + 0.5 * K * K;
  }
  const Mat3 U = K / angle;
  return Mat3::Identity() + std::sin(angle) * U + (1.0 - std::cos(angle)) * (U * U);
}

Vec3 log_map(const Mat3& R) {
  const double c = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
  const double angle = std::acos(c);
  const Vec3 v{R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1)};
  if (angle < 1e-8) return 0.5 * v;
  if (std::numbers::pi - angle > 1e-6) return angle / (2.0 * std::sin(angle)) * v;
  // near π: axis from the symmetric part R = 2aaᵀ − I
  const Mat3 B = 0.5 * (R + Mat3::Identity());
  Eigen::Index k = 0;
  B.diagonal().maxCoeff(&k);
  Vec3 axis = B.col(k) / std::sqrt(std::max(B(k, k), 1e-300));
  if (axis.dot(v) < 0.0) axis = -axis;
  return angle * axis.normalized();
}

Mat3 axis_angle_matrix(const AxisAngle& aa) { return exp_map(-aa.theta * aa.axis.normalized()); }

Mat3 z_rotation(double theta) { return axis_angle_matrix({Vec3::UnitZ(), theta}); }

NearestRotation nearest_rotation(const Mat3& F) {
  Eigen::JacobiSVD<Mat3> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3 U = svd.matrixU();
  const Mat3 V = svd.matrixV();
  Mat3 D = Mat3::Identity();
  // singular values are sorted descending; flip the smallest one
  if ((U * V.transpose()).determinant() < 0.0) D(2, 2) = -1.0;
  NearestRotation out;
  out.rotation = U * D * V.transpose();
  out.distance = (F - out.rotation).norm();
  return out;
}

Mat3 maximize_trace_alignment(const Mat3& N) { return nearest_rotation(N).rotation; }

double g_p(double t, double p) {
  if (!(t >= 0.0)) throw ValidationError("g_p: t must be nonnegative");
  if (!(p > 1.0 && p <= 2.0)) throw ValidationError("g_p: p must lie in (1, 2]");
  if (t <= 1.0) return t * t;
  return 2.0 * std::pow(t, p) / p - 2.0 / p + 1.0;
}

bool is_rotation(const Mat3& R, double tol) {
  return (R.transpose() * R - Mat3::Identity()).norm() < tol &&
         std::abs(R.determinant() - 1.0) < tol;
}

}  // namespace traction
