#pragma once

// Reference configurations and their quadrature rules.
//
// The cylinder is {x² + y² < radius², 0 < z < height} with its axis on e_z.
// Angular directions use the periodic trapezoid rule with 2·order points,
// which integrates trigonometric polynomials of degree ≤ 2·order − 1
// exactly; radial, polar and axial directions use Gauss–Legendre with
// `order` points. Together the rules integrate polynomials in (x, y, z) of
// total degree ≤ 2·order − 1 exactly.

#include <functional>
#include <span>
#include <vector>

#include "traction/core_math.hpp"

namespace traction {

enum class DomainKind { Cylinder, UnitBall };

struct Domain {
  DomainKind kind = DomainKind::Cylinder;
  double radius = 1.0;
  double height = 1.0;

  static Domain cylinder(double radius = 1.0, double height = 1.0);
  static Domain unit_ball();

  double volume() const;
  Vec3 centroid() const;
  /// Axis-aligned bounding box.
  Vec3 box_min() const;
  Vec3 box_max() const;
  bool is_unit_cylinder() const;
};

struct QuadratureRule {
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  /// Outward unit normals; empty for volume rules.
  std::vector<Vec3> normals;

  std::size_t size() const { return nodes.size(); }
  double total_weight() const;
};

inline constexpr int kDefaultQuadratureOrder = 16;

/// Gauss–Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);

QuadratureRule volume_quadrature(const Domain& d, int order = kDefaultQuadratureOrder);

/// Lateral wall plus both caps. Only the cylinder is supported.
QuadratureRule surface_quadrature(const Domain& d, int order = kDefaultQuadratureOrder);

/// Pairwise (cascade) summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

using ScalarField = std::function<double(const Vec3&)>;
using VectorField = std::function<Vec3(const Vec3&)>;

/// ∑ wᵢ field(xᵢ). Throws Error naming the node if a value is not finite.
double integrate_scalar(const ScalarField& field, const QuadratureRule& rule);

Vec3 integrate_vector(const VectorField& field, const QuadratureRule& rule);

/// The volume rule plus, for the cylinder, the surface rule.
struct DomainRules {
  Domain domain;
  QuadratureRule volume;
  QuadratureRule surface;  // empty for the ball

  static DomainRules build(const Domain& d, int order = kDefaultQuadratureOrder);
};

}  // namespace traction
