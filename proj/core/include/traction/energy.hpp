#pragma once

// Homogeneous Kirchhoff–Saint-Venant stored energy W(F) = |FᵀF − I|² and
// its quadratic form at the identity.

#include <limits>

#include "traction/core_math.hpp"

namespace traction {

struct EnergyModel {
  /// Q(F) = quadratic_scale · |sym F|².
  double quadratic_scale = 4.0;
};

/// Value returned by the incompressible quadratic form off the constraint.
inline constexpr double kInfiniteEnergy = std::numeric_limits<double>::infinity();
inline constexpr double kTraceTol = 1e-12;

double density(const Mat3& F);

/// ∂W/∂F = 4F(FᵀF − I).
Mat3 density_gradient(const Mat3& F);

double quadratic_form(const Mat3& F);

/// Q(F) when |Tr F| < 1e-12, +∞ otherwise.
double quadratic_form_incompressible(const Mat3& F);

/// |h⁻² W(I + hB) − Q(sym B)|; decays like O(h).
double taylor_residual(const Mat3& B, double h);

}  // namespace traction
