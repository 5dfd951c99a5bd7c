#include "traction/galerkin.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "traction/error.hpp"

namespace traction {
namespace {

enum class TermKind { Component, Stream, Axial };

struct RawTerm {
  TermKind kind;
  int comp = 0;
  int i = 0, j = 0, k = 0;
};

// Legendre values and first two derivatives at t for degrees 0..n.
struct Legendre {
  std::vector<double> p, dp, d2p;

  Legendre(int n, double t) : p(n + 1), dp(n + 1), d2p(n + 1) {
    p[0] = 1.0;
    dp[0] = d2p[0] = 0.0;
    if (n >= 1) {
      p[1] = t;
      dp[1] = 1.0;
      d2p[1] = 0.0;
    }
    for (int m = 1; m < n; ++m) {
      p[m + 1] = ((2.0 * m + 1.0) * t * p[m] - m * p[m - 1]) / (m + 1.0);
      dp[m + 1] = dp[m - 1] + (2.0 * m + 1.0) * p[m];
      d2p[m + 1] = d2p[m - 1] + (2.0 * m + 1.0) * dp[m];
    }
  }
};

struct BoxMap {
  Vec3 scale;   // d(mapped)/dx per axis
  Vec3 offset;  // mapped = scale * x + offset
};

BoxMap box_map(const Domain& d) {
  if (d.kind == DomainKind::Cylinder) {
    return {{1.0 / d.radius, 1.0 / d.radius, 2.0 / d.height}, {0.0, 0.0, -1.0}};
  }
  return {{1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}};
}

std::vector<RawTerm> raw_terms(const SpaceSpec& s) {
  std::vector<RawTerm> terms;
  const bool full_like = s.kind == SpaceKind::Full || s.kind == SpaceKind::DivFree;
  if (full_like) {
    for (int c = 0; c < 3; ++c)
      for (int tot = 0; tot <= s.degree; ++tot)
        for (int i = tot; i >= 0; --i)
          for (int j = tot - i; j >= 0; --j) terms.push_back({TermKind::Component, c, i, j, tot - i - j});
    return terms;
  }
  for (int tot = 1; tot <= s.degree; ++tot)
    for (int i = tot; i >= 0; --i) terms.push_back({TermKind::Stream, 0, i, tot - i, 0});
  if (s.kind == SpaceKind::AnsatzK) {
    for (int k = 0; k <= s.degree1d; ++k) terms.push_back({TermKind::Axial, 2, 0, 0, k});
  }
  return terms;
}

int max_degree(const SpaceSpec& s) {
  return s.kind == SpaceKind::AnsatzK ? std::max(s.degree, s.degree1d) : s.degree;
}

void validate_spec(const SpaceSpec& s) {
  if (s.degree < 1) throw ValidationError("basis degree must be >= 1");
  if (s.kind == SpaceKind::AnsatzK && s.degree1d < 0) throw ValidationError("basis degree1d must be >= 0");
}

using Mat3X = Eigen::Matrix<double, 3, Eigen::Dynamic>;
using Mat9X = Eigen::Matrix<double, 9, Eigen::Dynamic>;

void eval_raw(const std::vector<RawTerm>& terms, int deg, const BoxMap& m, const Vec3& x, Mat3X& V,
              Mat9X& G) {
  const int n = static_cast<int>(terms.size());
  V.setZero(3, n);
  G.setZero(9, n);
  const Legendre Ls(deg, m.scale.x() * x.x() + m.offset.x());
  const Legendre Lt(deg, m.scale.y() * x.y() + m.offset.y());
  const Legendre Lu(deg, m.scale.z() * x.z() + m.offset.z());
  const double sx = m.scale.x(), sy = m.scale.y(), sz = m.scale.z();
  for (int b = 0; b < n; ++b) {
    const RawTerm& t = terms[static_cast<std::size_t>(b)];
    const auto i = static_cast<std::size_t>(t.i), j = static_cast<std::size_t>(t.j),
               k = static_cast<std::size_t>(t.k);
    switch (t.kind) {
      case TermKind::Component: {
        const double val = Ls.p[i] * Lt.p[j] * Lu.p[k];
        V(t.comp, b) = val;
        G(3 * t.comp + 0, b) = Ls.dp[i] * sx * Lt.p[j] * Lu.p[k];
        G(3 * t.comp + 1, b) = Ls.p[i] * Lt.dp[j] * sy * Lu.p[k];
        G(3 * t.comp + 2, b) = Ls.p[i] * Lt.p[j] * Lu.dp[k] * sz;
        break;
      }
      case TermKind::Stream: {
        const double ux = Ls.dp[i] * sx * Lt.p[j];
        const double uy = Ls.p[i] * Lt.dp[j] * sy;
        const double uxx = Ls.d2p[i] * sx * sx * Lt.p[j];
        const double uxy = Ls.dp[i] * Lt.dp[j] * sx * sy;
        const double uyy = Ls.p[i] * Lt.d2p[j] * sy * sy;
        V(0, b) = uy;
        V(1, b) = -ux;
        G(0, b) = uxy;
        G(1, b) = uyy;
        G(3, b) = -uxx;
        G(4, b) = -uxy;
        break;
      }
      case TermKind::Axial:
        V(2, b) = Lu.p[k];
        G(8, b) = Lu.dp[k] * sz;
        break;
    }
  }
}

Mat3 rigid_generator(int k) {
  switch (k) {
    case 0: return skew_matrix({1.0, 0.0, 0.0});
    case 1: return skew_matrix({0.0, 1.0, 0.0});
    default: return skew_matrix({0.0, 0.0, 1.0});
  }
}

Vec3 rigid_field(int k, const Vec3& x) {
  if (k < 3) return Vec3::Unit(k);
  return rigid_generator(k - 3) * x;
}

}  // namespace

struct GalerkinSpace::Data {
  SpaceSpec spec;
  Domain domain;
  std::shared_ptr<const DomainRules> rules;
  std::vector<RawTerm> terms;
  int raw_degree = 0;
  BoxMap map;
  Eigen::MatrixXd transform;  // raw → orthonormal
  Eigen::MatrixXd values;     // 3nq × n
  Eigen::MatrixXd gradients;  // 9nq × n
  Eigen::MatrixXd surface;    // 3ns × n
  Eigen::MatrixXd rigid;      // n × k
};

std::string to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::Full: return "full";
    case SpaceKind::AnsatzK: return "ansatz_k";
    case SpaceKind::AnsatzKdiv: return "ansatz_k_div";
    case SpaceKind::DivFree: return "div_free";
  }
  return "unknown";
}

SpaceKind space_kind_from_string(const std::string& s) {
  if (s == "full") return SpaceKind::Full;
  if (s == "ansatz_k") return SpaceKind::AnsatzK;
  if (s == "ansatz_k_div") return SpaceKind::AnsatzKdiv;
  if (s == "div_free") return SpaceKind::DivFree;
  throw ValidationError("unknown basis kind '" + s + "' (expected full, ansatz_k, ansatz_k_div, div_free)");
}

int galerkin_quadrature_order(const SpaceSpec& spec, int load_degree) {
  const int d = max_degree(spec);
  const int exact_loads = (load_degree + d + 2) / 2;
  return std::max({d + 1, exact_loads, 4});
}

Mat3 strain(const BasisField& v, const Vec3& x) { return sym(v.gradient(x)); }

GalerkinSpace GalerkinSpace::build(const SpaceSpec& spec, const Domain& domain, int quadrature_order) {
  validate_spec(spec);
  auto data = std::make_shared<Data>();
  data->spec = spec;
  data->domain = domain;
  data->terms = raw_terms(spec);
  data->raw_degree = max_degree(spec);
  data->map = box_map(domain);
  const int order = quadrature_order > 0 ? quadrature_order : galerkin_quadrature_order(spec);
  data->rules = std::make_shared<const DomainRules>(DomainRules::build(domain, order));

  const auto& vol = data->rules->volume;
  const auto nq = static_cast<Eigen::Index>(vol.size());
  const auto nr = static_cast<Eigen::Index>(data->terms.size());

  Eigen::MatrixXd Vr(3 * nq, nr), Gr(9 * nq, nr);
  Mat3X V;
  Mat9X G;
  for (Eigen::Index q = 0; q < nq; ++q) {
    eval_raw(data->terms, data->raw_degree, data->map, vol.nodes[static_cast<std::size_t>(q)], V, G);
    Vr.middleRows(3 * q, 3) = V;
    Gr.middleRows(9 * q, 9) = G;
  }

  // weighted mass matrix of the raw basis
  Eigen::MatrixXd WV = Vr;
  for (Eigen::Index q = 0; q < nq; ++q) WV.middleRows(3 * q, 3) *= std::sqrt(vol.weights[static_cast<std::size_t>(q)]);
  const Eigen::MatrixXd Mr = WV.transpose() * WV;

  if (spec.kind == SpaceKind::DivFree) {
    Eigen::MatrixXd Dv(nq, nr);
    for (Eigen::Index q = 0; q < nq; ++q) {
      const double sw = std::sqrt(vol.weights[static_cast<std::size_t>(q)]);
      Dv.row(q) = sw * (Gr.row(9 * q) + Gr.row(9 * q + 4) + Gr.row(9 * q + 8));
    }
    const Eigen::MatrixXd Dr = Dv.transpose() * Dv;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Dr, Mr);
    if (ges.info() != Eigen::Success) throw SolverError("div-free basis: generalized eigensolver failed");
    const double top = ges.eigenvalues().cwiseAbs().maxCoeff();
    Eigen::Index keep = 0;
    while (keep < nr && ges.eigenvalues()[keep] <= 1e-10 * top) ++keep;
    const int d = spec.degree;
    const Eigen::Index expected = 3 * (d + 1) * (d + 2) * (d + 3) / 6 - d * (d + 1) * (d + 2) / 6;
    if (keep != expected) {
      std::ostringstream os;
      os << "div-free basis: found " << keep << " divergence-free fields, expected " << expected;
      throw SolverError(os.str());
    }
    data->transform = ges.eigenvectors().leftCols(keep);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Mr);
    const double top = es.eigenvalues().maxCoeff();
    Eigen::Index first = 0;
    while (first < nr && es.eigenvalues()[first] <= 1e-13 * top) ++first;
    const Eigen::Index keep = nr - first;
    data->transform = es.eigenvectors().rightCols(keep) *
                      es.eigenvalues().tail(keep).cwiseSqrt().cwiseInverse().asDiagonal();
  }

  data->values = Vr * data->transform;
  data->gradients = Gr * data->transform;

  const auto& surf = data->rules->surface;
  if (!surf.nodes.empty()) {
    const auto ns = static_cast<Eigen::Index>(surf.size());
    Eigen::MatrixXd Sr(3 * ns, nr);
    for (Eigen::Index q = 0; q < ns; ++q) {
      eval_raw(data->terms, data->raw_degree, data->map, surf.nodes[static_cast<std::size_t>(q)], V, G);
      Sr.middleRows(3 * q, 3) = V;
    }
    data->surface = Sr * data->transform;
  }

  // rigid displacements contained in the space: α with Σαₖrₖ in span
  const Eigen::Index n = data->transform.cols();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, 6);
  Eigen::Matrix<double, 6, 6> RR = Eigen::Matrix<double, 6, 6>::Zero();
  for (Eigen::Index q = 0; q < nq; ++q) {
    const auto qs = static_cast<std::size_t>(q);
    const double w = vol.weights[qs];
    Eigen::Matrix<double, 3, 6> r;
    for (int k = 0; k < 6; ++k) r.col(k) = rigid_field(k, vol.nodes[qs]);
    B.noalias() += w * data->values.middleRows(3 * q, 3).transpose() * r;
    RR.noalias() += w * r.transpose() * r;
  }
  const Eigen::Matrix<double, 6, 6> residual = RR - B.transpose() * B;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> rs(residual);
  const double scale = RR.diagonal().maxCoeff();
  int k = 0;
  while (k < 6 && rs.eigenvalues()[k] <= 1e-10 * scale) ++k;
  if (k > 0) {
    const Eigen::MatrixXd C = B * rs.eigenvectors().leftCols(k);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(C);
    data->rigid = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
  } else {
    data->rigid = Eigen::MatrixXd::Zero(n, 0);
  }

  GalerkinSpace s;
  s.data_ = std::move(data);
  return s;
}

GalerkinSpace build_space(const SpaceSpec& spec, const Domain& domain, int quadrature_order) {
  return GalerkinSpace::build(spec, domain, quadrature_order);
}

const SpaceSpec& GalerkinSpace::spec() const { return data_->spec; }
const Domain& GalerkinSpace::domain() const { return data_->domain; }
int GalerkinSpace::dim() const { return static_cast<int>(data_->transform.cols()); }
const std::shared_ptr<const DomainRules>& GalerkinSpace::rules() const { return data_->rules; }
const Eigen::MatrixXd& GalerkinSpace::node_values() const { return data_->values; }
const Eigen::MatrixXd& GalerkinSpace::node_gradients() const { return data_->gradients; }
const Eigen::MatrixXd& GalerkinSpace::surface_values() const { return data_->surface; }
const Eigen::MatrixXd& GalerkinSpace::rigid_modes() const { return data_->rigid; }

void GalerkinSpace::evaluate(const Vec3& x, Mat3X& values, Mat9X& gradients) const {
  Mat3X V;
  Mat9X G;
  eval_raw(data_->terms, data_->raw_degree, data_->map, x, V, G);
  values.noalias() = V * data_->transform;
  gradients.noalias() = G * data_->transform;
}

Vec3 GalerkinSpace::value(const Eigen::VectorXd& c, const Vec3& x) const {
  Mat3X V;
  Mat9X G;
  eval_raw(data_->terms, data_->raw_degree, data_->map, x, V, G);
  return V * (data_->transform * c);
}

Mat3 GalerkinSpace::gradient(const Eigen::VectorXd& c, const Vec3& x) const {
  Mat3X V;
  Mat9X G;
  eval_raw(data_->terms, data_->raw_degree, data_->map, x, V, G);
  const Eigen::Matrix<double, 9, 1> g = G * (data_->transform * c);
  return Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(g.data());
}

BasisField GalerkinSpace::basis(int i) const {
  if (i < 0 || i >= dim()) throw ValidationError("basis index out of range");
  Eigen::VectorXd e = Eigen::VectorXd::Unit(dim(), i);
  return field(e);
}

BasisField GalerkinSpace::field(const Eigen::VectorXd& c) const {
  GalerkinSpace self = *this;
  return {[self, c](const Vec3& x) { return self.value(c, x); },
          [self, c](const Vec3& x) { return self.gradient(c, x); }};
}

std::vector<Mat3> GalerkinSpace::node_gradients(const Eigen::VectorXd& c) const {
  const Eigen::VectorXd g = data_->gradients * c;
  std::vector<Mat3> out(static_cast<std::size_t>(g.size() / 9));
  for (std::size_t q = 0; q < out.size(); ++q) {
    out[q] = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(g.data() + 9 * q);
  }
  return out;
}

Eigen::VectorXd GalerkinSpace::remove_rigid(const Eigen::VectorXd& c) const {
  return c - data_->rigid * (data_->rigid.transpose() * c);
}

Eigen::VectorXd GalerkinSpace::project(const std::function<Vec3(const Vec3&)>& v) const {
  const auto& vol = data_->rules->volume;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim());
  for (std::size_t q = 0; q < vol.size(); ++q) {
    const auto qi = static_cast<Eigen::Index>(q);
    rhs.noalias() += vol.weights[q] * data_->values.middleRows(3 * qi, 3).transpose() * v(vol.nodes[q]);
  }
  return rhs;
}

Eigen::Matrix<double, 9, 1> flatten(const Mat3& R) {
  Eigen::Matrix<double, 9, 1> v;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) v[3 * a + b] = R(a, b);
  return v;
}

Mat3 unflatten(const Eigen::Matrix<double, 9, 1>& v) {
  Mat3 R;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) R(a, b) = v[3 * a + b];
  return R;
}

Eigen::VectorXd StiffnessSystem::load_vector(const Mat3& R) const { return load_moments * flatten(R); }

Eigen::MatrixXd StiffnessSystem::system_matrix() const {
  if (penalty_div) return A + kappa * *penalty_div;
  return A;
}

StiffnessSystem assemble(const GalerkinSpace& space, const LoadFunctional& L, const AssembleOptions& opts) {
  const auto& rules = *space.rules();
  if (L.volume_forces().size() != rules.volume.size() || L.surface_forces().size() != rules.surface.size()) {
    throw ValidationError("assemble: load functional was built on a different quadrature rule");
  }
  const auto& vol = rules.volume;
  const auto nq = static_cast<Eigen::Index>(vol.size());
  const int n = space.dim();
  const Eigen::MatrixXd& G = space.node_gradients();
  const double r2 = std::sqrt(2.0);

  // strain rows scaled so that A = SᵀS
  Eigen::MatrixXd S(6 * nq, n);
  for (Eigen::Index q = 0; q < nq; ++q) {
    const double s = std::sqrt(8.0 * vol.weights[static_cast<std::size_t>(q)]);
    const auto g = [&](int i, int j) { return G.row(9 * q + 3 * i + j); };
    S.row(6 * q + 0) = s * g(0, 0);
    S.row(6 * q + 1) = s * g(1, 1);
    S.row(6 * q + 2) = s * g(2, 2);
    S.row(6 * q + 3) = (s * r2 * 0.5) * (g(0, 1) + g(1, 0));
    S.row(6 * q + 4) = (s * r2 * 0.5) * (g(0, 2) + g(2, 0));
    S.row(6 * q + 5) = (s * r2 * 0.5) * (g(1, 2) + g(2, 1));
  }

  StiffnessSystem sys;
  sys.A = Eigen::MatrixXd::Zero(n, n);
  sys.A.selfadjointView<Eigen::Lower>().rankUpdate(S.transpose());
  sys.A = sys.A.selfadjointView<Eigen::Lower>();

  if (opts.incompressible_penalty) {
    if (!(*opts.incompressible_penalty >= 0.0)) throw ValidationError("penalty kappa must be nonnegative");
    Eigen::MatrixXd Dv(nq, n);
    for (Eigen::Index q = 0; q < nq; ++q) {
      const double s = std::sqrt(vol.weights[static_cast<std::size_t>(q)]);
      Dv.row(q) = s * (G.row(9 * q) + G.row(9 * q + 4) + G.row(9 * q + 8));
    }
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    D.selfadjointView<Eigen::Lower>().rankUpdate(Dv.transpose());
    sys.penalty_div = Eigen::MatrixXd(D.selfadjointView<Eigen::Lower>());
    sys.kappa = *opts.incompressible_penalty;
  }

  sys.load_moments = Eigen::MatrixXd::Zero(n, 9);
  const Eigen::MatrixXd& V = space.node_values();
  for (Eigen::Index q = 0; q < nq; ++q) {
    const auto qs = static_cast<std::size_t>(q);
    const Vec3 wf = vol.weights[qs] * L.volume_forces()[qs];
    if (wf.isZero(0.0)) continue;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) sys.load_moments.col(3 * a + b) += wf[a] * V.row(3 * q + b).transpose();
  }
  const auto& surf = rules.surface;
  const Eigen::MatrixXd& Vs = space.surface_values();
  for (std::size_t q = 0; q < surf.size(); ++q) {
    const Vec3 wg = surf.weights[q] * L.surface_forces()[q];
    if (wg.isZero(0.0)) continue;
    const auto qi = static_cast<Eigen::Index>(q);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) sys.load_moments.col(3 * a + b) += wg[a] * Vs.row(3 * qi + b).transpose();
  }

  sys.rigid_modes = space.rigid_modes();
  sys.resultant = L.resultant();
  sys.moment_tensor = L.moment_tensor();
  return sys;
}

StiffnessSystem assemble(const GalerkinSpace& space, const LoadSpec& spec, const AssembleOptions& opts) {
  if (spec.domain.kind != space.domain().kind) {
    throw ValidationError("assemble: load domain does not match the space domain");
  }
  const LoadFunctional L(spec, space.rules());
  return assemble(space, L, opts);
}

int numeric_kernel_dimension(const StiffnessSystem& sys, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.system_matrix(), Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  int k = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] < rel_tol * top) ++k;
  return k;
}

namespace {

struct CgOutcome {
  Eigen::VectorXd x;
  bool converged = false;
  int iterations = 0;
};

// One projected PCG run from x0; appends relative residuals to history.
CgOutcome projected_cg_run(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::MatrixXd& C,
                           const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& precond,
                           Eigen::VectorXd x, double tol, int max_it, std::vector<double>& history) {
  const auto proj = [&C](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    if (C.cols() == 0) return v;
    return v - C * (C.transpose() * v);
  };
  const double bnorm = b.norm();
  CgOutcome out;
  x = proj(x);
  Eigen::VectorXd r = proj(b - A * x);
  double rel = r.norm() / bnorm;
  history.push_back(rel);
  if (rel <= tol) {
    out.x = x;
    out.converged = true;
    return out;
  }
  Eigen::VectorXd z = proj(precond(r));
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  double best = rel;
  int since_best = 0;
  for (int it = 1; it <= max_it; ++it) {
    const Eigen::VectorXd Ap = A * p;
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0) || !std::isfinite(pAp)) break;
    const double alpha = rz / pAp;
    x.noalias() += alpha * p;
    r.noalias() -= alpha * Ap;
    r = proj(r);
    rel = r.norm() / bnorm;
    history.push_back(rel);
    out.iterations = it;
    if (rel <= tol) {
      out.x = x;
      out.converged = true;
      return out;
    }
    if (rel < 0.999 * best) {
      best = rel;
      since_best = 0;
    } else if (++since_best > 50) {
      break;
    }
    z = proj(precond(r));
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  out.x = x;
  return out;
}

}  // namespace

SolveResult solve_quadratic(const StiffnessSystem& sys, const Eigen::VectorXd& b, const SolverOptions& opts) {
  const int n = sys.dim();
  if (b.size() != n) throw ValidationError("solve_quadratic: load vector has the wrong size");
  const Eigen::MatrixXd& C = sys.rigid_modes;

  if (C.cols() > 0) {
    const Eigen::VectorXd proj = C.transpose() * b;
    if (proj.cwiseAbs().maxCoeff() > opts.compatibility_tol) {
      std::ostringstream os;
      os << "load vector is not orthogonal to the rigid displacements (|b·c| = " << proj.cwiseAbs().maxCoeff()
         << "): loads have a nonzero " << (sys.resultant.norm() > opts.compatibility_tol ? "resultant" : "moment");
      throw IncompatibleLoadsError(os.str());
    }
  }

  SolveResult res;
  const Eigen::MatrixXd K = sys.system_matrix();
  const Eigen::VectorXd bp = C.cols() > 0 ? Eigen::VectorXd(b - C * (C.transpose() * b)) : b;
  if (bp.norm() == 0.0) {
    res.coeffs = Eigen::VectorXd::Zero(n);
    res.value = 0.0;
    res.residual_history.push_back(0.0);
    return res;
  }

  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> precond;
  std::shared_ptr<Eigen::LDLT<Eigen::MatrixXd>> ldlt;
  if (opts.preconditioner == Preconditioner::Cholesky) {
    // K + s·CCᵀ is positive definite on the whole space
    const double s = K.diagonal().mean();
    ldlt = std::make_shared<Eigen::LDLT<Eigen::MatrixXd>>(K + s * C * C.transpose());
    precond = [ldlt](const Eigen::VectorXd& r) -> Eigen::VectorXd { return ldlt->solve(r); };
  } else {
    Eigen::VectorXd dinv = K.diagonal();
    for (Eigen::Index i = 0; i < dinv.size(); ++i) dinv[i] = dinv[i] > 0.0 ? 1.0 / dinv[i] : 1.0;
    precond = [dinv](const Eigen::VectorXd& r) -> Eigen::VectorXd { return dinv.cwiseProduct(r); };
  }

  const int max_it = opts.max_iterations > 0 ? opts.max_iterations : 10 * n;
  Eigen::VectorXd x0 = opts.initial_guess ? *opts.initial_guess : Eigen::VectorXd::Zero(n);
  if (x0.size() != n) throw ValidationError("solve_quadratic: initial guess has the wrong size");

  CgOutcome run = projected_cg_run(K, bp, C, precond, x0, opts.tol, max_it, res.residual_history);
  int total = run.iterations;
  if (!run.converged) {
    res.note = "restarted once";
    run = projected_cg_run(K, bp, C, precond, run.x, opts.tol, max_it, res.residual_history);
    total += run.iterations;
    if (!run.converged) {
      std::ostringstream os;
      os << "projected CG did not reach relative residual " << opts.tol << " after " << total
         << " iterations (last " << res.residual_history.back() << ")";
      throw SolverError(os.str(), res.residual_history);
    }
  }

  Eigen::VectorXd x = run.x;
  if (C.cols() > 0) x -= C * (C.transpose() * x);
  res.coeffs = x;
  res.iterations = total;
  res.residual_norm = (K * x - bp).norm();
  res.value = 0.5 * x.dot(K * x) - x.dot(b);
  return res;
}

SolveResult solve_for_rotation(const StiffnessSystem& sys, const Mat3& R, const SolverOptions& opts) {
  SolveResult res = solve_quadratic(sys, sys.load_vector(R), opts);
  res.rotation = R;
  return res;
}

}  // namespace traction
