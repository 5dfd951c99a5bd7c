#pragma once

// Closed-form minimizers for the unit cylinder loaded by f = (∇φ, ψ(z)).
//
// With η* the radial profile and Ψ(z) = −⅛∫₀ᶻ∫₀ˢψ, the family
//   u_θ = cosθ·g(r)(x, y, 0) − sinθ·2g(r)(y, −x, 0) + (0, 0, Ψ(z)),  g = η*/r,
// contains the minimizer of the linear energy (θ = 0) and of the limit
// energy (θ = ±π/2).

#include <span>

#include "traction/galerkin.hpp"
#include "traction/loads.hpp"
#include "traction/polynomial.hpp"

namespace traction {

/// η*(r) = −rφ(r)/16 + (1/16r)∫₀ʳ t²φ'(t)dt. Throws ValidationError unless
/// φ(1) = φ'(1) = ∫₀¹r²φ' = 0.
Polynomial eta_star(const Polynomial& phi);

/// Ψ(z) = −⅛∫₀ᶻ∫₀ˢψ(t)dt ds.
Polynomial axial_profile(const Polynomial& psi);

/// max over the grid of |r²η'' + rη' − η + r²φ'/8|.
double ode_residual(const Polynomial& eta, const Polynomial& phi, std::span<const double> r_grid);

/// max over the grid of |8Δ²Φ + Δφ| for the radial Φ with Φ' = η.
double biharmonic_residual(const Polynomial& eta, const Polynomial& phi, std::span<const double> r_grid);

class ExplicitSolution {
 public:
  ExplicitSolution(Polynomial eta, Polynomial psi_profile);

  const Polynomial& eta() const { return eta_; }
  const Polynomial& g() const { return g_; }
  const Polynomial& Psi() const { return Psi_; }

  BasisField u_theta(double theta) const;
  BasisField u0() const { return u_theta(0.0); }
  BasisField u_minus_half_pi() const;
  /// (0, 0, Ψ(z)), the part shared by every u_θ.
  BasisField axial_part() const;

  /// ∫|𝔼|² of the radial, azimuthal and axial parts by 1D quadrature.
  double radial_strain_energy() const;
  double azimuthal_strain_energy() const;
  double axial_strain_energy() const;

  /// −4∫|𝔼(u₀)|², the minimum of the linear energy.
  double min_E() const;
  /// −4∫|𝔼(u_{−π/2})|², the minimum with azimuthal forces (φ_y, −φ_x, ψ).
  double min_G_tilde() const;
  /// min over θ of cos²θ·min_E + sin²θ·min_G_tilde.
  double min_G() const;
  /// min_E − min_G.
  double margin() const { return min_E() - min_G(); }

 private:
  Polynomial eta_, g_, dg_over_r_, Psi_, dPsi_;
  bool dg_over_r_poly_ = true;
};

/// Requires has_closed_form(spec).
ExplicitSolution explicit_minimizers(const LoadSpec& spec);

struct EulerLagrangeResidual {
  /// max |−8 div 𝔼(u) − f| over interior samples.
  double interior = 0.0;
  /// max |𝔼(u) n| over boundary samples.
  double boundary = 0.0;
};

/// Fourth-order central differences of the analytic gradient on a
/// cylindrical sample grid with n points per direction.
EulerLagrangeResidual euler_lagrange_residual(const LoadSpec& spec, const BasisField& u, int n = 12);

/// ∫ 𝔼(u):𝔼(v) on the rule.
double strain_inner_product(const BasisField& u, const BasisField& v, const QuadratureRule& rule);

}  // namespace traction
