#include "traction/domains.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "traction/error.hpp"

namespace traction {
namespace {

constexpr double kPi = std::numbers::pi;

void check_order(int order) {
  if (order < 1) throw ValidationError("quadrature order must be >= 1");
}

std::vector<double> trapezoid_angles(int n) {
  std::vector<double> a(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) a[static_cast<std::size_t>(k)] = 2.0 * kPi * (k + 0.5) / n;
  return a;
}

}  // namespace

Domain Domain::cylinder(double radius, double height) {
  if (!(radius > 0.0) || !(height > 0.0)) {
    throw ValidationError("cylinder radius and height must be positive");
  }
  return {DomainKind::Cylinder, radius, height};
}

Domain Domain::unit_ball() { return {DomainKind::UnitBall, 1.0, 0.0}; }

double Domain::volume() const {
  if (kind == DomainKind::Cylinder) return kPi * radius * radius * height;
  return 4.0 * kPi / 3.0;
}

Vec3 Domain::centroid() const {
  if (kind == DomainKind::Cylinder) return {0.0, 0.0, 0.5 * height};
  return Vec3::Zero();
}

Vec3 Domain::box_min() const {
  if (kind == DomainKind::Cylinder) return {-radius, -radius, 0.0};
  return {-1.0, -1.0, -1.0};
}

Vec3 Domain::box_max() const {
  if (kind == DomainKind::Cylinder) return {radius, radius, height};
  return {1.0, 1.0, 1.0};
}

bool Domain::is_unit_cylinder() const {
  return kind == DomainKind::Cylinder && radius == 1.0 && height == 1.0;
}

double QuadratureRule::total_weight() const { return pairwise_sum(weights); }

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  check_order(n);
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    nodes[lo] = mid - half * x;
    nodes[hi] = mid + half * x;
    weights[lo] = half * w;
    weights[hi] = half * w;
  }
}

QuadratureRule volume_quadrature(const Domain& d, int order) {
  check_order(order);
  QuadratureRule rule;
  std::vector<double> r, wr, s, ws;
  const auto angles = trapezoid_angles(2 * order);
  const double wa = 2.0 * kPi / (2.0 * order);

  if (d.kind == DomainKind::Cylinder) {
    gauss_legendre(order, 0.0, d.radius, r, wr);
    gauss_legendre(order, 0.0, d.height, s, ws);
    rule.nodes.reserve(r.size() * angles.size() * s.size());
    for (std::size_t k = 0; k < s.size(); ++k)
      for (std::size_t i = 0; i < r.size(); ++i)
        for (double t : angles) {
          rule.nodes.emplace_back(r[i] * std::cos(t), r[i] * std::sin(t), s[k]);
          rule.weights.push_back(wr[i] * r[i] * wa * ws[k]);
        }
    return rule;
  }

  // unit ball: r ∈ (0,1) with r², polar cosine ∈ (−1,1), azimuth periodic
  gauss_legendre(order, 0.0, 1.0, r, wr);
  gauss_legendre(order, -1.0, 1.0, s, ws);
  rule.nodes.reserve(r.size() * angles.size() * s.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t k = 0; k < s.size(); ++k) {
      const double sin_polar = std::sqrt(1.0 - s[k] * s[k]);
      for (double t : angles) {
        rule.nodes.emplace_back(r[i] * sin_polar * std::cos(t), r[i] * sin_polar * std::sin(t),
                                r[i] * s[k]);
        rule.weights.push_back(wr[i] * r[i] * r[i] * ws[k] * wa);
      }
    }
  return rule;
}

QuadratureRule surface_quadrature(const Domain& d, int order) {
  check_order(order);
  if (d.kind != DomainKind::Cylinder) {
    throw ValidationError("surface quadrature: unsupported domain (only the cylinder has a surface rule)");
  }
  QuadratureRule rule;
  std::vector<double> r, wr, s, ws;
  gauss_legendre(order, 0.0, d.radius, r, wr);
  gauss_legendre(order, 0.0, d.height, s, ws);
  const auto angles = trapezoid_angles(2 * order);
  const double wa = 2.0 * kPi / (2.0 * order);

  for (std::size_t k = 0; k < s.size(); ++k)
    for (double t : angles) {
      const Vec3 n{std::cos(t), std::sin(t), 0.0};
      rule.nodes.emplace_back(d.radius * n.x(), d.radius * n.y(), s[k]);
      rule.normals.push_back(n);
      rule.weights.push_back(d.radius * wa * ws[k]);
    }
  for (const double zc : {0.0, d.height}) {
    const Vec3 n{0.0, 0.0, zc == 0.0 ? -1.0 : 1.0};
    for (std::size_t i = 0; i < r.size(); ++i)
      for (double t : angles) {
        rule.nodes.emplace_back(r[i] * std::cos(t), r[i] * std::sin(t), zc);
        rule.normals.push_back(n);
        rule.weights.push_back(wr[i] * r[i] * wa);
      }
  }
  return rule;
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 32;
  if (values.size() <= kBlock) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double integrate_scalar(const ScalarField& field, const QuadratureRule& rule) {
  std::vector<double> terms(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double v = field(rule.nodes[i]);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite field value at node (" << rule.nodes[i].x() << ", " << rule.nodes[i].y()
         << ", " << rule.nodes[i].z() << ")";
      throw Error(os.str());
    }
    terms[i] = rule.weights[i] * v;
  }
  return pairwise_sum(terms);
}

Vec3 integrate_vector(const VectorField& field, const QuadratureRule& rule) {
  std::vector<Vec3> values(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) values[i] = field(rule.nodes[i]);
  Vec3 out;
  std::vector<double> terms(rule.size());
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double v = values[i][c];
      if (!std::isfinite(v)) throw Error("non-finite vector field value at quadrature node");
      terms[i] = rule.weights[i] * v;
    }
    out[c] = pairwise_sum(terms);
  }
  return out;
}

DomainRules DomainRules::build(const Domain& d, int order) {
  DomainRules rules;
  rules.domain = d;
  rules.volume = volume_quadrature(d, order);
  if (d.kind == DomainKind::Cylinder) rules.surface = surface_quadrature(d, order);
  return rules;
}

}  // namespace traction
