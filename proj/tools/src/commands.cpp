#include "traction_cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "traction/error.hpp"
#include "traction/explicit_solution.hpp"
#include "traction/limit_solvers.hpp"
#include "traction/nonlinear.hpp"

#ifndef TRACTION_VERSION
#define TRACTION_VERSION "0.0.0"
#endif

namespace traction::cli {

using nlohmann::json;

namespace {

// Non-finite values have no JSON literal; they are kept as strings.
json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

json num(const std::optional<double>& x) { return x ? num(*x) : json(nullptr); }

json vec(const Vec3& v) { return json::array({num(v.x()), num(v.y()), num(v.z())}); }

json mat(const Mat3& m) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) rows.push_back(json::array({num(m(i, 0)), num(m(i, 1)), num(m(i, 2))}));
  return rows;
}

json numbers(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

json pairs(const std::vector<std::pair<double, double>>& v) {
  json a = json::array();
  for (const auto& [x, y] : v) a.push_back(json::array({num(x), num(y)}));
  return a;
}

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json to_json(const KernelReport& k) {
  json samples = json::array();
  for (const auto& s : k.w2_values)
    samples.push_back({{"direction", json::array({num(s.direction.a), num(s.direction.b), num(s.direction.c)})},
                       {"value", num(s.value)}});
  return {{"classification", to_string(k.classification)},
          {"resultant", vec(k.resultant)},
          {"momentum_max", num(k.momentum_max)},
          {"axis", vec(k.axis)},
          {"form_eigenvalues", vec(k.form_eigenvalues)},
          {"tol", num(k.tol)},
          {"note", k.note},
          {"w2_values", samples}};
}

json to_json(const SolveResult& s) {
  return {{"value", num(s.value)},
          {"rotation", mat(s.rotation)},
          {"theta", num(s.theta)},
          {"residual_norm", num(s.residual_norm)},
          {"iterations", s.iterations},
          {"status", s.status},
          {"note", s.note},
          {"dim", s.coeffs.size()},
          {"coeffs", numbers(s.coeffs)}};
}

json to_json(const IncompressibleReport& r) {
  return {{"min_EI_upper", num(r.min_EI_upper)}, {"min_EI_lower", num(r.min_EI_lower)},
          {"penalized", pairs(r.penalized)},     {"min_GI_upper", num(r.min_GI_upper)},
          {"min_E_floor", num(r.min_E_floor)},   {"certified", r.certified},
          {"degree", r.degree},                  {"status", r.status}};
}

std::string kernel_csv(const KernelReport& k) {
  std::string csv = "a,b,c,value\n";
  for (const auto& s : k.w2_values)
    csv += g17(s.direction.a) + "," + g17(s.direction.b) + "," + g17(s.direction.c) + "," + g17(s.value) + "\n";
  return csv;
}

LoadFunctional make_loads(const LoadSpec& spec) {
  return LoadFunctional(spec, std::make_shared<const DomainRules>(DomainRules::build(spec.domain)));
}

struct Checks {
  json list = json::array();
  bool pass = true;

  void below(const std::string& name, double value, double bound) { add(name, value, bound, "<", value < bound); }
  void above(const std::string& name, double value, double bound) { add(name, value, bound, ">", value > bound); }
  void holds(const std::string& name, bool ok) {
    list.push_back({{"name", name}, {"relation", "true"}, {"pass", ok}});
    pass = pass && ok;
  }

 private:
  void add(const std::string& name, double value, double bound, const char* rel, bool ok) {
    list.push_back({{"name", name}, {"value", num(value)}, {"bound", num(bound)}, {"relation", rel}, {"pass", ok}});
    pass = pass && ok;
  }
};

json profile_json(const LoadSpec& spec) {
  if (spec.domain.kind != DomainKind::Cylinder || spec.builtin != BuiltinLoad::None) return nullptr;
  const auto pc = profile_conditions(spec);
  return {{"phi_at_1", num(pc.phi_at_1)},
          {"dphi_at_1", num(pc.dphi_at_1)},
          {"r2_dphi_integral", num(pc.r2_dphi_integral)},
          {"psi_integral", num(pc.psi_integral)},
          {"z_psi_integral", num(pc.z_psi_integral)},
          {"laplacian_nonzero", pc.laplacian_nonzero},
          {"radial_ok", pc.radial_ok()},
          {"axial_ok", pc.axial_ok()},
          {"closed_form", has_closed_form(spec)}};
}

Report check_loads(const Config& c) {
  const LoadSpec spec = c.load_spec();
  const LoadFunctional L = make_loads(spec);
  const KernelReport k = compatibility_report(L, c.kernel_samples, c.tolerances.at("kernel"));
  const auto witness = reversed_compatibility_witness(L, c.tolerances.at("kernel"));
  json result = {{"profile_conditions", profile_json(spec)},
                 {"kernel", to_json(k)},
                 {"reversed_witness", witness ? mat(*witness) : json(nullptr)}};
  if (witness) result["reversed_witness_work"] = num(L.work_on_linear_map(*witness - Mat3::Identity()));
  return {{{"result", result}, {"checks", json::array()}}, kernel_csv(k), true};
}

Report kernel(const Config& c) {
  const KernelReport k = compatibility_report(make_loads(c.load_spec()), c.kernel_samples, c.tolerances.at("kernel"));
  return {{{"result", {{"kernel", to_json(k)}}}, {"checks", json::array()}}, kernel_csv(k), true};
}

std::string history_csv(const std::vector<double>& h) {
  std::string csv = "iteration,residual\n";
  for (std::size_t i = 0; i < h.size(); ++i) csv += std::to_string(i) + "," + g17(h[i]) + "\n";
  return csv;
}

Report solve_linear(const Config& c, const RunOptions& o) {
  const LinearReport r = min_linear(c.load_spec(), o.incompressible, c.limit_config());
  json result = {{"incompressible", o.incompressible},
                 {"solution", to_json(r.solution)},
                 {"closed_form", num(r.closed_form)},
                 {"identity_residual", num(r.identity_residual)},
                 {"upper", num(r.upper)},
                 {"lower", num(r.lower)},
                 {"penalized", pairs(r.penalized)}};
  return {{{"result", result}, {"checks", json::array()}}, history_csv(r.solution.residual_history), true};
}

Report solve_limit(const Config& c, const RunOptions& o) {
  const LimitResult r = min_limit(c.load_spec(), o.incompressible, c.limit_config());
  json result = {{"incompressible", o.incompressible},
                 {"solution", to_json(r.solution)},
                 {"kernel", to_json(r.kernel)},
                 {"theta_scan", pairs(r.theta_scan)}};
  std::string csv = "theta,value\n";
  for (const auto& [t, v] : r.theta_scan) csv += g17(t) + "," + g17(v) + "\n";
  return {{{"result", result}, {"checks", json::array()}}, csv, true};
}

Report gap(const Config& c) {
  const GapReport g = gap_report(c.load_spec(), c.limit_config());
  json rows = json::array();
  std::string csv = "theta,min_G_theta,predicted,residual\n";
  for (const auto& r : g.decomposition_table) {
    rows.push_back({{"theta", num(r.theta)},
                    {"min_G_theta", num(r.min_G_theta)},
                    {"predicted", num(r.predicted)},
                    {"residual", num(r.residual)}});
    csv += g17(r.theta) + "," + g17(r.min_G_theta) + "," + g17(r.predicted) + "," + g17(r.residual) + "\n";
  }
  json result = {{"closed_form", g.closed_form},
                 {"min_E", num(g.min_E)},
                 {"min_G", num(g.min_G)},
                 {"min_G_tilde", num(g.min_G_tilde)},
                 {"margin", num(g.margin)},
                 {"optimal_theta", num(g.optimal_theta)},
                 {"min_E_galerkin", num(g.min_E_galerkin)},
                 {"min_G_galerkin", num(g.min_G_galerkin)},
                 {"min_G_tilde_galerkin", num(g.min_G_tilde_galerkin)},
                 {"incompressible", to_json(g.incompressible)},
                 {"decomposition_table", rows},
                 {"kernel", to_json(g.kernel)},
                 {"note", g.note}};
  Checks ch;
  ch.above("margin", g.margin, 0.0);
  ch.holds("incompressible_certified", g.incompressible.certified);
  return {{{"result", result}, {"checks", ch.list}}, csv, ch.pass};
}

BasisField difference(const BasisField& u, const BasisField& v) {
  return {[u, v](const Vec3& x) -> Vec3 { return u.value(x) - v.value(x); },
          [u, v](const Vec3& x) -> Mat3 { return u.gradient(x) - v.gradient(x); }};
}

Report verify_explicit(const Config& c) {
  const LoadSpec spec = c.load_spec();
  if (!has_closed_form(spec))
    throw ValidationError("verify-explicit needs cylinder profile loads that satisfy the side conditions");
  const Tolerances& tol = c.tolerances;
  const auto pc = profile_conditions(spec);
  const Polynomial eta = eta_star(spec.phi);
  std::vector<double> grid(1000);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = (static_cast<double>(i) + 1.0) / 1000.0;
  const auto ex = explicit_minimizers(spec);
  const auto el = euler_lagrange_residual(spec, ex.u0());
  const auto rule = volume_quadrature(spec.domain);
  const BasisField ax = ex.axial_part();
  const double planar =
      std::abs(strain_inner_product(difference(ex.u0(), ax), difference(ex.u_minus_half_pi(), ax), rule));
  const double full = strain_inner_product(ex.u0(), ex.u_minus_half_pi(), rule);

  Checks ch;
  ch.below("profile", std::abs(pc.phi_at_1) + std::abs(pc.dphi_at_1) + std::abs(pc.r2_dphi_integral),
           tol.at("profile"));
  ch.below("ode", ode_residual(eta, spec.phi, grid), tol.at("ode"));
  ch.below("euler_lagrange_interior", el.interior, tol.at("euler_lagrange"));
  ch.below("euler_lagrange_boundary", el.boundary, tol.at("euler_lagrange"));
  ch.below("biharmonic", biharmonic_residual(eta, spec.phi, grid), tol.at("biharmonic"));
  ch.below("orthogonality_planar", planar, tol.at("orthogonality"));
  ch.below("orthogonality_shared_axial", std::abs(full - ex.axial_strain_energy()), tol.at("orthogonality"));
  json result = {{"eta_coeffs", numbers(std::vector<double>(eta.coeffs().begin(), eta.coeffs().end()))},
                 {"min_E", num(ex.min_E())},
                 {"min_G_tilde", num(ex.min_G_tilde())},
                 {"min_G", num(ex.min_G())},
                 {"margin", num(ex.margin())},
                 {"strain_inner_product_full", num(full)},
                 {"axial_strain_energy", num(ex.axial_strain_energy())}};
  return {{{"result", result}, {"checks", ch.list}}, std::nullopt, ch.pass};
}

Report nonlinear_study(const Config& c) {
  const ConvergenceStudy st = convergence_study(c.load_spec(), c.h_schedule, c.study_options());
  json rows = json::array();
  std::string csv = "h,value_Gh,gap_to_limit,gap_to_closed_form,rotation_distance_to_kernel,strain_norm_rescaled,status\n";
  for (const auto& r : st.rows) {
    rows.push_back({{"h", num(r.h)},
                    {"value_Gh", num(r.value_Gh)},
                    {"gap_to_limit", num(r.gap_to_limit)},
                    {"gap_to_closed_form", num(r.gap_to_closed_form)},
                    {"rotation_distance_to_kernel", num(r.rotation_distance_to_kernel)},
                    {"strain_norm_rescaled", num(r.strain_norm_rescaled)},
                    {"status", r.status}});
    csv += g17(r.h) + "," + g17(r.value_Gh) + "," + g17(r.gap_to_limit) + "," +
           (r.gap_to_closed_form ? g17(*r.gap_to_closed_form) : std::string()) + "," +
           g17(r.rotation_distance_to_kernel) + "," + g17(r.strain_norm_rescaled) + "," + r.status + "\n";
  }
  json result = {{"rows", rows},
                 {"limit_value", num(st.limit_value)},
                 {"limit_source", st.limit_source},
                 {"limit_galerkin", num(st.limit_galerkin)},
                 {"limit_closed_form", num(st.limit_closed_form)},
                 {"limit_rotation", mat(st.limit_rotation)}};
  Checks ch;
  bool decreasing = true;
  for (std::size_t i = 1; i < st.rows.size(); ++i)
    decreasing = decreasing && std::abs(st.rows[i].gap_to_limit) < std::abs(st.rows[i - 1].gap_to_limit);
  ch.holds("gap_strictly_decreasing", decreasing);
  if (!st.rows.empty()) {
    ch.below("final_gap", std::abs(st.rows.back().gap_to_limit), c.tolerances.at("study_final_gap"));
    const double first = st.rows.front().strain_norm_rescaled;
    if (st.rows.size() > 1 && first > 0.0)
      ch.above("strain_ratio", st.rows.back().strain_norm_rescaled / first, c.tolerances.at("study_strain_ratio"));
  }
  return {{{"result", result}, {"checks", ch.list}}, csv, ch.pass};
}

Report rotated(const Config& c) {
  const RotatedCheck r = rotated_no_gap_check(c.load_spec(), c.limit_config());
  json result = {{"rotation", mat(r.rotation)},
                 {"min_G_R", num(r.min_G_R)},
                 {"min_E_R", num(r.min_E_R)},
                 {"difference", num(r.difference)},
                 {"relative", num(r.relative)},
                 {"class_before", to_string(r.class_before)},
                 {"class_after", to_string(r.class_after)},
                 {"axis_before", vec(r.axis_before)},
                 {"axis_after", vec(r.axis_after)},
                 {"same_kernel", r.same_kernel}};
  Checks ch;
  ch.below("relative_difference", r.relative, c.tolerances.at("rotated_relative"));
  return {{{"result", result}, {"checks", ch.list}}, std::nullopt, ch.pass};
}

Report nonuniqueness(const Config& c) {
  const NonuniquenessReport r = nonuniqueness_check(c.load_spec(), c.limit_config());
  json result = {{"G_u", num(r.G_u)},
                 {"G_uhat", num(r.G_uhat)},
                 {"relative_difference", num(r.relative_difference)},
                 {"strain_norm", num(r.strain_norm)},
                 {"strain_difference", num(r.strain_difference)},
                 {"G_u_plus_rigid", num(r.G_u_plus_rigid)},
                 {"rotation_u", mat(r.rotation_u)},
                 {"rotation_uhat", mat(r.rotation_uhat)},
                 {"from_closed_form", r.from_closed_form}};
  Checks ch;
  ch.below("relative_difference", r.relative_difference, c.tolerances.at("nonuniqueness_relative"));
  ch.above("strain_difference_ratio", r.strain_norm > 0.0 ? r.strain_difference / r.strain_norm : 0.0,
           c.tolerances.at("nonuniqueness_distinct"));
  return {{{"result", result}, {"checks", ch.list}}, std::nullopt, ch.pass};
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

}  // namespace

std::string version() { return TRACTION_VERSION; }

const std::vector<SubcommandInfo>& subcommands() {
  static const std::vector<SubcommandInfo> list = {
      {"check-loads", "compatibility report, kernel classification and reversed-work witness", "a,b,c,value"},
      {"kernel", "kernel classification of the loads", "a,b,c,value"},
      {"solve-linear", "minimize the linear energy", "iteration,residual"},
      {"solve-limit", "minimize the limit energy over the kernel rotations", "theta,value"},
      {"gap-report", "linear vs limit minima, margin and incompressible sandwich",
       "theta,min_G_theta,predicted,residual"},
      {"verify-explicit", "residuals of the closed-form cylinder minimizers", ""},
      {"nonlinear-study", "minimize the scaled nonlinear energy along the h schedule",
       "h,value_Gh,gap_to_limit,gap_to_closed_form,rotation_distance_to_kernel,strain_norm_rescaled,status"},
      {"rotated-check", "linear vs limit minima after rotating the loads by the optimal rotation", ""},
      {"nonuniqueness", "limit energy of the minimizer and its reflection", ""},
  };
  return list;
}

bool is_subcommand(const std::string& name) {
  for (const auto& s : subcommands())
    if (s.name == name) return true;
  return false;
}

Report execute(const std::string& sub, const Config& c, const RunOptions& opts) {
  Report r;
  if (sub == "check-loads") r = check_loads(c);
  else if (sub == "kernel") r = kernel(c);
  else if (sub == "solve-linear") r = solve_linear(c, opts);
  else if (sub == "solve-limit") r = solve_limit(c, opts);
  else if (sub == "gap-report") r = gap(c);
  else if (sub == "verify-explicit") r = verify_explicit(c);
  else if (sub == "nonlinear-study") r = nonlinear_study(c);
  else if (sub == "rotated-check") r = rotated(c);
  else if (sub == "nonuniqueness") r = nonuniqueness(c);
  else throw ValidationError("unknown subcommand '" + sub + "'");
  json& d = r.document;
  d["tool"] = "traction-gap";
  d["version"] = version();
  d["subcommand"] = sub;
  d["config"] = to_json(c);
  d["config_hash"] = config_hash(c);
  d["tolerances"] = c.tolerances;
  d["seed"] = c.seed;
  d["status"] = r.certified ? "ok" : "certification_failed";
  return r;
}

int run(const std::string& sub, const std::string& config_path, const std::string& out_dir, const RunOptions& opts,
        std::ostream& out, std::ostream& err) {
  if (!is_subcommand(sub)) {
    err << "unknown subcommand '" << sub << "'\n";
    return kExitUsage;
  }
  const auto t0 = std::chrono::steady_clock::now();
  Config c;
  Report r;
  int code = kExitOk;
  try {
    c = config_path.empty() ? parse_config(json::object()) : load_config(config_path);
    r = execute(sub, c, opts);
    code = r.certified ? kExitOk : kExitCertification;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "solver error: " << e.what() << "\n";
    r.document = {{"tool", "traction-gap"},     {"version", version()},       {"subcommand", sub},
                  {"config", to_json(c)},       {"config_hash", config_hash(c)}, {"tolerances", c.tolerances},
                  {"status", "solver_error"},   {"error", e.what()}};
    r.csv.reset();
    code = kExitSolver;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::filesystem::path dir = out_dir.empty() ? "." : out_dir;
  try {
    std::filesystem::create_directories(dir);
    write_file(dir / "report.json", r.document.dump(2) + "\n");
    if (r.csv) write_file(dir / "report.csv", *r.csv);
    else std::filesystem::remove(dir / "report.csv");
    const json timing = {{"subcommand", sub}, {"config_hash", r.document["config_hash"]}, {"wall_time_s", wall}};
    write_file(dir / "timing.json", timing.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << "\n";
    return kExitSolver;
  }

  out << sub << ": " << r.document["status"].get<std::string>() << " (" << wall << " s), report in "
      << (dir / "report.json").string() << "\n";
  if (r.document.contains("checks"))
    for (const auto& chk : r.document["checks"])
      if (!chk["pass"].get<bool>()) out << "  check failed: " << chk["name"].get<std::string>() << "\n";
  return code;
}

}  // namespace traction::cli
