#pragma once

// Small fixed-size linear algebra on top of Eigen: skew matrices, rotation
// parameterizations, projection onto SO(3) and the g_p growth profile.

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

namespace traction {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Free entries of a skew matrix W with rows (0,a,b), (-a,0,c), (-b,-c,0).
struct SkewParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double norm() const;
  /// Axial vector w with W x = w × x.
  Vec3 axial() const;
  static SkewParams from_axial(const Vec3& w);
  static SkewParams from_matrix(const Mat3& W);
};

struct AxisAngle {
  Vec3 axis = Vec3::UnitZ();
  double theta = 0.0;
};

Mat3 skew_matrix(const SkewParams& p);

inline Mat3 sym(const Mat3& F) { return 0.5 * (F + F.transpose()); }
inline Mat3 skew_part(const Mat3& F) { return 0.5 * (F - F.transpose()); }
inline double frobenius_dot(const Mat3& A, const Mat3& B) { return A.cwiseProduct(B).sum(); }

/// R = I + sinθ W + (1 − cosθ) W². W must be skew with |W|² = 2 (tolerance
/// 1e-12); throws ValidationError otherwise.
Mat3 rodrigues(const Mat3& W, double theta);

/// Rotation about a unit axis. The angle convention matches rodrigues() with
/// W = skew_matrix(SkewParams::from_axial(-axis)); in particular
/// axis_angle_matrix({e_z, θ}) has rows (cosθ, sinθ, 0), (−sinθ, cosθ, 0),
/// (0, 0, 1).
Mat3 axis_angle_matrix(const AxisAngle& aa);

/// Unnormalized exponential map: exp of the skew matrix with axial vector
/// omega, i.e. a right-handed rotation by |omega| about omega/|omega|.
Mat3 exp_map(const Vec3& omega);

/// Inverse of exp_map on rotations with angle < π (angle π returns one of
/// the two valid axes).
Vec3 log_map(const Mat3& R);

/// Rotation about e_z in the convention above.
Mat3 z_rotation(double theta);

struct NearestRotation {
  Mat3 rotation;
  double distance = 0.0;
};

/// Closest rotation in Frobenius norm (orthogonal Procrustes with
/// determinant correction).
NearestRotation nearest_rotation(const Mat3& F);

/// Rotation maximizing R : N over SO(3).
Mat3 maximize_trace_alignment(const Mat3& N);

/// Growth profile: t² on [0,1], (2/p)tᵖ − 2/p + 1 beyond. Requires t ≥ 0 and
/// p ∈ (1,2].
double g_p(double t, double p);

bool is_rotation(const Mat3& R, double tol = 1e-12);

}  // namespace traction
