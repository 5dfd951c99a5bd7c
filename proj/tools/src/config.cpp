#include "traction_cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "traction/error.hpp"

namespace traction::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError("config" + path + ": " + what);
}

std::string type_name(const json& v) { return v.type_name(); }

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number, got " + type_name(v));
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "must be finite");
  return x;
}

int integer(const json& v, const std::string& path, int lo, int hi) {
  if (!v.is_number_integer()) fail(path, "expected an integer, got " + type_name(v));
  const auto x = v.get<long long>();
  if (x < lo || x > hi) fail(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(x);
}

std::string string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string, got " + type_name(v));
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers, got " + type_name(v));
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "/" + std::to_string(i)));
  return out;
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& path) {
  for (const auto& [key, _] : obj.items())
    if (!known.contains(key)) fail(path + "/" + key, "unknown field");
}

}  // namespace

Tolerances default_tolerances() {
  return {
      {"biharmonic", 1e-8},
      {"cg", 1e-12},
      {"compatibility", 1e-8},
      {"euler_lagrange", 1e-8},
      {"kernel", kKernelTol},
      {"nonlinear_gradient", 1e-8},
      {"nonuniqueness_distinct", 0.1},
      {"nonuniqueness_relative", 1e-8},
      {"ode", 1e-12},
      {"orthogonality", 1e-10},
      {"profile", 1e-12},
      {"rotated_relative", 1e-6},
      {"study_final_gap", 0.05},
      {"study_strain_ratio", 2.0},
      {"theta", 1e-10},
  };
}

Config parse_config(const json& j) {
  if (!j.is_object()) fail("", "expected a JSON object, got " + type_name(j));
  reject_unknown(j,
                 {"domain", "phi_coeffs", "psi_coeffs", "surface_pressure", "builtin", "basis", "quadrature_order",
                  "kernel_samples", "h_schedule", "study_degree", "penalty_kappa", "beta", "seed", "tolerances"},
                 "");
  Config c;
  if (j.contains("beta")) c.beta = number(j["beta"], "/beta");
  if (j.contains("builtin") && !j["builtin"].is_null()) {
    c.builtin = string(j["builtin"], "/builtin");
    if (*c.builtin != "ball_pull_in" && *c.builtin != "cylinder_counterexample")
      fail("/builtin", "unknown builtin '" + *c.builtin + "' (expected ball_pull_in, cylinder_counterexample)");
    if (*c.builtin == "ball_pull_in") c.domain = "ball";
  }
  if (j.contains("domain")) {
    c.domain = string(j["domain"], "/domain");
    if (c.domain != "cylinder" && c.domain != "ball") fail("/domain", "expected cylinder or ball");
  }
  if (j.contains("phi_coeffs")) c.phi_coeffs = numbers(j["phi_coeffs"], "/phi_coeffs");
  if (j.contains("psi_coeffs")) c.psi_coeffs = numbers(j["psi_coeffs"], "/psi_coeffs");
  if (j.contains("surface_pressure") && !j["surface_pressure"].is_null())
    c.surface_pressure = number(j["surface_pressure"], "/surface_pressure");
  if (j.contains("basis")) {
    const json& b = j["basis"];
    if (!b.is_object()) fail("/basis", "expected an object, got " + type_name(b));
    reject_unknown(b, {"kind", "degree", "degree1d"}, "/basis");
    if (b.contains("kind")) {
      try {
        c.basis.kind = space_kind_from_string(string(b["kind"], "/basis/kind"));
      } catch (const ValidationError& e) {
        if (std::string(e.what()).starts_with("config")) throw;
        fail("/basis/kind", e.what());
      }
    }
    if (b.contains("degree")) c.basis.degree = integer(b["degree"], "/basis/degree", 1, 12);
    if (b.contains("degree1d")) c.basis.degree1d = integer(b["degree1d"], "/basis/degree1d", 0, 12);
  }
  if (j.contains("quadrature_order")) c.quadrature_order = integer(j["quadrature_order"], "/quadrature_order", 0, 64);
  if (j.contains("kernel_samples")) c.kernel_samples = integer(j["kernel_samples"], "/kernel_samples", 1, 100000);
  if (j.contains("h_schedule")) {
    c.h_schedule = numbers(j["h_schedule"], "/h_schedule");
    if (c.h_schedule.empty()) fail("/h_schedule", "must not be empty");
    for (std::size_t i = 0; i < c.h_schedule.size(); ++i) {
      const std::string p = "/h_schedule/" + std::to_string(i);
      if (c.h_schedule[i] <= 0.0) fail(p, "must be positive");
      if (i > 0 && c.h_schedule[i] >= c.h_schedule[i - 1]) fail(p, "schedule must be strictly decreasing");
    }
  }
  if (j.contains("study_degree")) c.study_degree = integer(j["study_degree"], "/study_degree", 0, 12);
  if (j.contains("penalty_kappa")) {
    c.penalty_kappa = number(j["penalty_kappa"], "/penalty_kappa");
    if (c.penalty_kappa < 0.0) fail("/penalty_kappa", "must be nonnegative");
  }
  if (j.contains("seed")) c.seed = static_cast<unsigned>(integer(j["seed"], "/seed", 0, 2147483647));
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) fail("/tolerances", "expected an object, got " + type_name(t));
    for (const auto& [key, v] : t.items()) {
      const std::string p = "/tolerances/" + key;
      if (!c.tolerances.contains(key)) fail(p, "unknown tolerance");
      const double x = number(v, p);
      if (x <= 0.0) fail(p, "must be positive");
      c.tolerances[key] = x;
    }
  }
  try {
    c.load_spec().validate();
  } catch (const ValidationError& e) {
    fail("", e.what());
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config: " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

LoadSpec Config::load_spec() const {
  if (builtin == "ball_pull_in") {
    LoadSpec s = LoadSpec::ball_pull_in();
    if (domain != "ball") s.domain = Domain::cylinder();
    return s;
  }
  LoadSpec s;
  s.domain = domain == "ball" ? Domain::unit_ball() : Domain::cylinder();
  if (builtin == "cylinder_counterexample") {
    s = LoadSpec::cylinder_counterexample(beta);
  } else {
    s.phi = Polynomial(phi_coeffs);
    s.psi = psi_coeffs.empty() ? Polynomial{-0.5 * beta, beta} : Polynomial(psi_coeffs);
  }
  s.surface_pressure = surface_pressure;
  return s;
}

LimitConfig Config::limit_config() const {
  LimitConfig cfg;
  cfg.basis = basis;
  cfg.quadrature_order = quadrature_order;
  cfg.kernel_samples = kernel_samples;
  cfg.kernel_tol = tolerances.at("kernel");
  cfg.theta_tol = tolerances.at("theta");
  cfg.seed = seed;
  cfg.solver.tol = tolerances.at("cg");
  cfg.solver.compatibility_tol = tolerances.at("compatibility");
  return cfg;
}

StudyOptions Config::study_options() const {
  StudyOptions opts;
  opts.limit = limit_config();
  opts.basis = basis;
  if (study_degree > 0) opts.basis.degree = study_degree;
  opts.limit.basis = opts.basis;
  if (penalty_kappa > 0.0) opts.kappa = penalty_kappa;
  opts.descent.gradient_tol = tolerances.at("nonlinear_gradient");
  return opts;
}

json to_json(const Config& c) {
  json j;
  j["domain"] = c.domain;
  j["phi_coeffs"] = c.phi_coeffs;
  j["psi_coeffs"] = c.psi_coeffs;
  j["surface_pressure"] = c.surface_pressure ? json(*c.surface_pressure) : json(nullptr);
  j["builtin"] = c.builtin ? json(*c.builtin) : json(nullptr);
  j["basis"] = {{"kind", to_string(c.basis.kind)}, {"degree", c.basis.degree}, {"degree1d", c.basis.degree1d}};
  j["quadrature_order"] = c.quadrature_order;
  j["kernel_samples"] = c.kernel_samples;
  j["h_schedule"] = c.h_schedule;
  j["study_degree"] = c.study_degree;
  j["penalty_kappa"] = c.penalty_kappa;
  j["beta"] = c.beta;
  j["seed"] = c.seed;
  j["tolerances"] = c.tolerances;
  return j;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash(const Config& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(c).dump())));
  return buf;
}

}  // namespace traction::cli
