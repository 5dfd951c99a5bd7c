#include "traction/energy.hpp"

#include <cmath>

#include "traction/error.hpp"

namespace traction {

double density(const Mat3& F) {
  const Mat3 C = F.transpose() * F - Mat3::Identity();
  return C.squaredNorm();
}

Mat3 density_gradient(const Mat3& F) {
  return 4.0 * F * (F.transpose() * F - Mat3::Identity());
}

double quadratic_form(const Mat3& F) { return EnergyModel{}.quadratic_scale * sym(F).squaredNorm(); }

double quadratic_form_incompressible(const Mat3& F) {
  if (std::abs(F.trace()) >= kTraceTol) return kInfiniteEnergy;
  return quadratic_form(F);
}

double taylor_residual(const Mat3& B, double h) {
  if (!(h > 0.0)) throw ValidationError("taylor_residual: h must be positive");
  const Mat3 F = Mat3::Identity() + h * B;
  return std::abs(density(F) / (h * h) - quadratic_form(sym(B)));
}

}  // namespace traction
