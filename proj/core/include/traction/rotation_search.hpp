#pragma once

// One-dimensional and SO(3) searches used by the outer rotation problems.

#include <functional>

#include "traction/core_math.hpp"

namespace traction {

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Golden-section search for a minimum of f on [a, b] to bracket width tol.
ScalarMinimum golden_section(const std::function<double(double)>& f, double a, double b,
                             double tol = 1e-10);

/// Uniform scan of n points on [a, b) followed by golden section around the
/// best sample. Ties keep the first (smallest) sample.
ScalarMinimum scan_and_refine(const std::function<double(double)>& f, double a, double b, int n,
                              double tol = 1e-10);

using RotationObjective = std::function<double(const Mat3&)>;

struct RotationMinimum {
  Mat3 rotation = Mat3::Identity();
  double value = 0.0;
  int iterations = 0;
};

struct DescentOptions {
  double gradient_tol = 1e-10;
  int max_iterations = 500;
  double fd_step = 1e-6;
};

/// Local descent in the right-trivialized axis-angle chart R·exp(ω) with
/// central-difference gradients and Armijo backtracking.
RotationMinimum so3_local_descent(const RotationObjective& f, const Mat3& start,
                                  const DescentOptions& opts = {});

/// Local descents from the identity and from starts − 1 rotations drawn
/// uniformly with a fixed seed; returns the best.
RotationMinimum so3_multistart(const RotationObjective& f, int starts = 8, unsigned seed = 0,
                               const DescentOptions& opts = {});

/// Haar-uniform random rotation from three uniforms in [0, 1).
Mat3 uniform_rotation(double u1, double u2, double u3);

}  // namespace traction
