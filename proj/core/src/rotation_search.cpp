#include "traction/rotation_search.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>
#include <random>

#include "traction/error.hpp"

namespace traction {

ScalarMinimum golden_section(const std::function<double(double)>& f, double a, double b, double tol) {
  if (!(b > a)) throw ValidationError("golden_section: empty bracket");
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  ScalarMinimum out;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  out.evaluations = 2;
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
    ++out.evaluations;
  }
  out.x = fc <= fd ? c : d;
  out.value = std::min(fc, fd);
  return out;
}

ScalarMinimum scan_and_refine(const std::function<double(double)>& f, double a, double b, int n, double tol) {
  if (n < 3) throw ValidationError("scan_and_refine: need at least 3 samples");
  const double step = (b - a) / n;
  int best = 0;
  double best_value = f(a);
  for (int i = 1; i < n; ++i) {
    const double v = f(a + i * step);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  const double x0 = a + best * step;
  ScalarMinimum refined = golden_section(f, x0 - step, x0 + step, tol);
  refined.evaluations += n;
  if (best_value < refined.value) return {x0, best_value, refined.evaluations};
  return refined;
}

Mat3 uniform_rotation(double u1, double u2, double u3) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const Eigen::Quaterniond q(b * std::cos(kTwoPi * u3), a * std::sin(kTwoPi * u2), a * std::cos(kTwoPi * u2),
                             b * std::sin(kTwoPi * u3));
  return q.normalized().toRotationMatrix();
}

RotationMinimum so3_local_descent(const RotationObjective& f, const Mat3& start, const DescentOptions& opts) {
  RotationMinimum out;
  Mat3 R = nearest_rotation(start).rotation;
  double fR = f(R);
  const double h = opts.fd_step;
  for (int it = 0; it < opts.max_iterations; ++it) {
    Vec3 g;
    for (int k = 0; k < 3; ++k) {
      const Vec3 e = h * Vec3::Unit(k);
      g[k] = (f(R * exp_map(e)) - f(R * exp_map(-e))) / (2.0 * h);
    }
    out.iterations = it + 1;
    const double gn = g.norm();
    if (gn < opts.gradient_tol) break;
    // Armijo backtracking along −g, first trial step of length 1 radian at most
    double step = std::min(1.0, 1.0 / gn);
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Mat3 trial = R * exp_map(-step * g);
      const double ft = f(trial);
      if (ft <= fR - 1e-4 * step * gn * gn) {
        R = nearest_rotation(trial).rotation;
        fR = ft;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  out.rotation = R;
  out.value = fR;
  return out;
}

RotationMinimum so3_multistart(const RotationObjective& f, int starts, unsigned seed, const DescentOptions& opts) {
  if (starts < 1) throw ValidationError("so3_multistart: need at least one start");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  RotationMinimum best = so3_local_descent(f, Mat3::Identity(), opts);
  for (int s = 1; s < starts; ++s) {
    const double u1 = unif(rng), u2 = unif(rng), u3 = unif(rng);
    const RotationMinimum m = so3_local_descent(f, uniform_rotation(u1, u2, u3), opts);
    if (m.value < best.value) best = m;
  }
  return best;
}

}  // namespace traction
