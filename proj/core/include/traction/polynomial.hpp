#pragma once

#include <initializer_list>
#include <span>
#include <vector>

namespace traction {

/// Univariate polynomial with coefficients in ascending powers.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);
  Polynomial(std::initializer_list<double> coeffs);

  static Polynomial monomial(int power, double coeff = 1.0);

  double operator()(double x) const;
  int degree() const;
  std::span<const double> coeffs() const { return coeffs_; }
  double coeff(int power) const;
  bool is_zero() const { return coeffs_.empty(); }

  Polynomial derivative() const;
  /// Antiderivative vanishing at 0.
  Polynomial antiderivative() const;
  double integrate(double a, double b) const;
  /// Exact division by x; throws if the constant term is nonzero beyond tol.
  Polynomial divide_by_x(double tol = 1e-14) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

 private:
  void trim();
  std::vector<double> coeffs_;
};

}  // namespace traction
