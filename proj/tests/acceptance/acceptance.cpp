// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "traction/energy.hpp"
#include "traction/error.hpp"
#include "traction/explicit_solution.hpp"
#include "traction/limit_solvers.hpp"
#include "traction/nonlinear.hpp"
#include "traction/rotation_search.hpp"

using namespace traction;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBeta = 0.01;

[[gnu::format(printf, 1, 2)]] std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;

  void check(bool ok, const std::string& msg) {
    lines.push_back((ok ? "ok   " : "FAIL ") + msg);
    pass = pass && ok;
  }
  void info(const std::string& msg) { lines.push_back("info " + msg); }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

LimitConfig config(int degree) {
  LimitConfig cfg;
  cfg.basis = {SpaceKind::Full, degree, 4};
  return cfg;
}

LoadFunctional make_loads(const LoadSpec& spec) {
  return LoadFunctional(spec, std::make_shared<const DomainRules>(DomainRules::build(spec.domain)));
}

void criterion1(Outcome& o) {
  const auto pc = profile_conditions(LoadSpec::cylinder_counterexample(kBeta));
  const double s = std::abs(pc.phi_at_1) + std::abs(pc.dphi_at_1) + std::abs(pc.r2_dphi_integral);
  o.check(s < 1e-12, fmt("|phi(1)| + |phi'(1)| + |int r^2 phi'| = %.3e < 1e-12", s));
}

void criterion2(Outcome& o) {
  const auto spec = LoadSpec::cylinder_counterexample(kBeta);
  const Polynomial eta = eta_star(spec.phi);
  std::vector<double> grid(1000);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = (static_cast<double>(i) + 1.0) / 1000.0;
  const double ode = ode_residual(eta, spec.phi, grid);
  o.check(ode < 1e-12, fmt("ODE residual of eta* on 1000 points = %.3e < 1e-12", ode));
  const auto ex = explicit_minimizers(spec);
  const auto el = euler_lagrange_residual(spec, ex.u0());
  o.check(el.interior < 1e-8, fmt("interior |-8 div E(u0) - f| = %.3e < 1e-8", el.interior));
  o.check(el.boundary < 1e-8, fmt("boundary |E(u0) n| = %.3e < 1e-8", el.boundary));
  const double bh = biharmonic_residual(eta, spec.phi, grid);
  o.check(bh < 1e-8, fmt("biharmonic residual = %.3e < 1e-8", bh));
  const auto rule = volume_quadrature(spec.domain);
  const BasisField ax = ex.axial_part();
  auto planar = [&](const BasisField& u) {
    return BasisField{[u, ax](const Vec3& x) -> Vec3 { return u.value(x) - ax.value(x); },
                      [u, ax](const Vec3& x) -> Mat3 { return u.gradient(x) - ax.gradient(x); }};
  };
  const double orth = std::abs(strain_inner_product(planar(ex.u0()), planar(ex.u_minus_half_pi()), rule));
  o.check(orth < 1e-10, fmt("planar parts: |int E(u0):E(u_-pi/2)| = %.3e < 1e-10", orth));
  const double full = strain_inner_product(ex.u0(), ex.u_minus_half_pi(), rule);
  const double shared = std::abs(full - ex.axial_strain_energy());
  o.check(shared < 1e-10, fmt("full fields: int E(u0):E(u_-pi/2) = %.6e equals the shared axial energy (diff %.3e)",
                              full, shared));
}

void criterion3(Outcome& o) {
  const auto spec = LoadSpec::cylinder_counterexample(kBeta);
  const auto ex = explicit_minimizers(spec);
  o.check(ex.margin() > 0.0, fmt("margin = %.12g > 0", ex.margin()));
  o.check(ex.margin() > 1e-3 * std::abs(ex.min_E()), fmt("margin / |min E| = %.4g > 1e-3",
          ex.margin() / std::abs(ex.min_E())));
  const auto cfg = config(6);
  const auto p = make_problem(spec, cfg.basis, cfg);
  const double E6 = solve_for_rotation(p.system, Mat3::Identity(), cfg.solver).value;
  const double G6 = min_limit(p, cfg).solution.value;
  o.check(rel(E6, ex.min_E()) < 1e-2, fmt("Full degree 6: min E = %.12g vs %.12g, relative %.3e < 1e-2", E6, ex.min_E(),
          rel(E6, ex.min_E())));
  o.check(rel(G6, ex.min_G()) < 1e-2, fmt("Full degree 6: min G = %.12g vs %.12g, relative %.3e < 1e-2", G6, ex.min_G(),
          rel(G6, ex.min_G())));
  const auto cfg7 = config(7);
  const auto p7 = make_problem(spec, cfg7.basis, cfg7);
  const double E7 = solve_for_rotation(p7.system, Mat3::Identity(), cfg7.solver).value;
  const double G7 = min_limit(p7, cfg7).solution.value;
  o.info(fmt("Full degree 7 (contains the degree-7 minimizers): min E relative %.3e, min G relative %.3e",
         rel(E7, ex.min_E()), rel(G7, ex.min_G())));
}

void criterion4(Outcome& o) {
  const auto spec = LoadSpec::cylinder_counterexample(kBeta);
  const auto rep = gap_report(spec, config(6));
  for (const auto& row : rep.decomposition_table) {
    o.check(row.residual < 1e-8 * std::abs(rep.min_E_galerkin), fmt("Galerkin theta = %+.4f: |min G_theta - prediction| = %.3e < %.3e", row.theta, row.residual,
            1e-8 * std::abs(rep.min_E_galerkin)));
  }
  if (rep.decomposition_table.size() != 5) o.check(false, fmt("expected 5 decomposition rows, got %zu", rep.decomposition_table.size()));
  // the same identity on the closed-form family u_theta
  const auto ex = explicit_minimizers(spec);
  const auto rule = volume_quadrature(spec.domain);
  for (double t : {-kPi / 2, -kPi / 4, 0.0, kPi / 4, kPi / 2}) {
    const BasisField u = ex.u_theta(t);
    const double value = -4.0 * strain_inner_product(u, u, rule);
    const double predicted = std::cos(t) * std::cos(t) * ex.min_E() + std::sin(t) * std::sin(t) * ex.min_G_tilde();
    o.check(std::abs(value - predicted) < 1e-8 * std::abs(ex.min_E()), fmt("closed form theta = %+.4f: residual %.3e", t, std::abs(value - predicted)));
  }
}

void criterion5(Outcome& o) {
  const auto a = compatibility_report(make_loads(LoadSpec::cylinder_counterexample(kBeta)));
  o.check(a.classification == KernelClass::AxisSubgroup && (a.axis - Vec3::UnitZ()).norm() < 1e-12, fmt("beta = 0.01: %s, axis (%.3g, %.3g, %.3g)", to_string(a.classification).c_str(), a.axis.x(), a.axis.y(),
          a.axis.z()));
  const auto b = compatibility_report(make_loads(LoadSpec::cylinder_counterexample(0.0)));
  o.check(b.classification == KernelClass::FullSO3, fmt("beta = 0: %s", to_string(b.classification).c_str()));
  const auto c = compatibility_report(make_loads(LoadSpec::ball_pull_in()));
  o.check(c.classification == KernelClass::Incompatible, fmt("ball pull-in: %s", to_string(c.classification).c_str()));
  const auto L = make_loads(LoadSpec::uniform_pressure(-1.0));
  const auto w = reversed_compatibility_witness(L);
  o.check(w.has_value(), fmt("pressure lambda = -1: witness %s, work %.4g", w ? "found" : "missing",
          w ? L.work_on_linear_map(*w - Mat3::Identity()) : 0.0));
}

void criterion6(Outcome& o) {
  const auto rc = rotated_no_gap_check(LoadSpec::cylinder_counterexample(kBeta), config(6));
  o.check(std::abs(rc.min_G_R - rc.min_E_R) < 1e-6 * std::abs(rc.min_E_R), fmt("|min G_R - min E_R| = %.3e < %.3e (min E_R = %.12g)", std::abs(rc.min_G_R - rc.min_E_R),
          1e-6 * std::abs(rc.min_E_R), rc.min_E_R));
  o.info(fmt("kernel before %s, after %s", to_string(rc.class_before).c_str(), to_string(rc.class_after).c_str()));
}

void criterion7(Outcome& o) {
  const auto rep = nonuniqueness_check(LoadSpec::cylinder_counterexample(kBeta));
  o.check(rep.relative_difference < 1e-8, fmt("|G(u_hat) - G(u*)| / |G(u*)| = %.3e < 1e-8", rep.relative_difference));
  o.check(rep.strain_difference > 0.1 * rep.strain_norm, fmt("||E(u_hat - u*)|| = %.4g > 0.1 ||E(u*)|| = %.4g",
          rep.strain_difference, 0.1 * rep.strain_norm));
}

void criterion8(Outcome& o) {
  StudyOptions opts;
  opts.basis = {SpaceKind::Full, 4, 4};
  const auto st = convergence_study(LoadSpec::cylinder_counterexample(kBeta), {0.2, 0.1, 0.05, 0.02}, opts);
  o.info(fmt("min G from the limit solver on the same space: %.12g", st.limit_value));
  bool decreasing = true;
  for (std::size_t i = 0; i < st.rows.size(); ++i) {
    const auto& r = st.rows[i];
    o.info(fmt("h = %.2f value %.12g gap %.3e closed-form gap %.3e rot_dist %.2e strain %.4g [%s]", r.h, r.value_Gh,
           r.gap_to_limit, r.gap_to_closed_form.value_or(NAN), r.rotation_distance_to_kernel, r.strain_norm_rescaled,
           r.status.c_str()));
    if (!std::isfinite(r.gap_to_limit) || (i > 0 && !(r.gap_to_limit < st.rows[i - 1].gap_to_limit))) decreasing = false;
  }
  o.check(decreasing, fmt("|value_Gh - min G| strictly decreasing along the schedule"));
  const double last = st.rows.empty() ? NAN : st.rows.back().gap_to_limit;
  o.check(last < 0.05, fmt("final relative gap %.3e < 5e-2", last));
  const double s0 = st.rows.front().strain_norm_rescaled, s1 = st.rows.back().strain_norm_rescaled;
  o.check(s1 > 2.0 * s0, fmt("strain diagnostic %.4g at h = 0.02 > 2 x %.4g at h = 0.2", s1, s0));
}

void criterion9(Outcome& o) {
  const auto rep = gap_report(LoadSpec::cylinder_counterexample(kBeta), config(6));
  const auto& inc = rep.incompressible;
  o.check(inc.certified && inc.min_GI_upper < inc.min_EI_lower, fmt("min_GI_upper = %.10g < min_EI_lower = %.10g (degree %d, %s)", inc.min_GI_upper, inc.min_EI_lower,
          inc.degree, inc.status.c_str()));
  o.info(fmt("min_EI_upper = %.10g", inc.min_EI_upper));
}

void criterion10(Outcome& o) {
  std::mt19937 rng(2024);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto rnd = [&] {
    Mat3 F;
    for (int i = 0; i < 9; ++i) F.data()[i] = n(rng);
    return F;
  };

  double fi = 0.0;
  for (int s = 0; s < 1000; ++s) {
    const Mat3 R = uniform_rotation(u(rng), u(rng), u(rng)), F = rnd();
    fi = std::max(fi, std::abs(density(R * F) - density(F)) / std::max(1.0, density(F)));
  }
  o.check(fi < 1e-12, fmt("frame indifference over 1000 samples: %.3e < 1e-12", fi));

  bool convex = true;
  for (int s = 0; s < 1000; ++s) {
    const double a = 4 * u(rng), b = 4 * u(rng), l = u(rng), p = 1.0 + 1e-3 + (1.0 - 1e-3) * u(rng);
    if (g_p(l * a + (1 - l) * b, p) > l * g_p(a, p) + (1 - l) * g_p(b, p) + 1e-12) convex = false;
  }
  o.check(convex, fmt("g_p convexity over 1000 samples"));

  const auto rule = volume_quadrature(Domain::cylinder(), 6);
  bool holder = true;
  for (int s = 0; s < 50; ++s) {
    const double h = 0.01 + 0.98 * u(rng), p = 1.05 + 0.95 * u(rng);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double eta = 3.0 * n(rng);
      lhs += rule.weights[i] * g_p(h * std::abs(eta), p) / (h * h);
      rhs += rule.weights[i] * std::pow(std::abs(eta), p);
    }
    if (lhs < rhs - (2.0 - p) / p * rule.total_weight() - 1e-10) holder = false;
  }
  o.check(holder, fmt("discrete g_p lower bound over 50 samples"));

  const auto spec = LoadSpec::cylinder_counterexample(kBeta);
  double prev = 0.0;
  bool monotone = true;
  for (int d : {2, 4, 6}) {
    const auto s = build_space({SpaceKind::Full, d, 0}, spec.domain);
    const double v = solve_for_rotation(assemble(s, spec), Mat3::Identity()).value;
    if (v > prev + 1e-12) monotone = false;
    o.info(fmt("degree %d: min E = %.12g", d, v));
    prev = v;
  }
  o.check(monotone, fmt("Galerkin minimum nonincreasing for degrees 2, 4, 6"));

  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const Mat3 F = rnd(), G = density_gradient(F);
    Mat3 fd;
    for (int k = 0; k < 9; ++k) {
      Mat3 a = F, b = F;
      a.data()[k] += 1e-6;
      b.data()[k] -= 1e-6;
      fd.data()[k] = (density(a) - density(b)) / 2e-6;
    }
    worst = std::max(worst, (fd - G).norm() / G.norm());
  }
  const auto p = make_nonlinear_problem(spec, {SpaceKind::Full, 3, 0}, 1e4);
  Eigen::VectorXd c(p.space.dim()), d(p.space.dim());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    c[i] = 0.05 * n(rng);
    d[i] = n(rng);
  }
  d /= d.norm();
  Eigen::VectorXd g;
  const Mat3 R = exp_map(Vec3(0.1, -0.2, 0.3));
  eval_Gh(p, c, R, 0.1, &g);
  const double fd = (eval_Gh(p, c + 1e-6 * d, R, 0.1, nullptr) - eval_Gh(p, c - 1e-6 * d, R, 0.1, nullptr)) / 2e-6;
  worst = std::max(worst, std::abs(fd - g.dot(d)) / std::max(1.0, std::abs(fd)));
  o.check(worst < 1e-6, fmt("analytic vs central-difference gradients: worst relative %.3e < 1e-6", worst));

  double idem = 0.0;
  for (int s = 0; s < 20; ++s) {
    const Mat3 A = rnd(), B = rnd();
    const auto v = [&](const Vec3& x) { return Vec3(A * x + (B * x).cwiseProduct(x)); };
    const RigidPart r1 = rigid_projection(v, rule);
    const RigidPart r2 = rigid_projection(r1, rule);
    idem = std::max(idem, (r1.translation - r2.translation).norm() +
                              (skew_matrix(r1.spin) - skew_matrix(r2.spin)).norm());
  }
  o.check(idem < 1e-12, fmt("rigid projection idempotent: %.3e < 1e-12", idem));
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> all = {
      {1, "profile constraints", 1, criterion1},
      {2, "explicit-solution residuals", 10, criterion2},
      {3, "compressible gap", 120, criterion3},
      {4, "decomposition over theta", 120, criterion4},
      {5, "kernel classification", 10, criterion5},
      {6, "rotated loads have no gap", 120, criterion6},
      {7, "nonuniqueness", 30, criterion7},
      {8, "scaled energy convergence", 600, criterion8},
      {9, "incompressible gap", 600, criterion9},
      {10, "property suites", 60, criterion10},
  };
  int failed = 0;
  for (const auto& c : all) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.check(false, fmt("threw: %s", e.what()));
    }
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(t < c.budget_s, fmt("runtime %.2f s < %.0f s", t, c.budget_s));
    std::printf("criterion %2d %-28s %s (%.2f s)\n", c.id, c.name, o.pass ? "PASS" : "FAIL", t);
    for (const auto& line : o.lines) std::printf("    %s\n", line.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed;
}
