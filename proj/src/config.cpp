#include "hhg/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hhg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int to_int(const std::string& s) {
  std::size_t pos = 0;
  const int v = std::stoi(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("not an integer: " + s);
  return v;
}

double to_real(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("not a number: " + s);
  return v;
}

// "0,2,3" or "0..3".
std::vector<int> int_list(const std::string& s) {
  const auto dots = s.find("..");
  if (dots != std::string::npos) {
    const int a = to_int(trim(s.substr(0, dots))), b = to_int(trim(s.substr(dots + 2)));
    if (b < a) throw std::invalid_argument("empty range: " + s);
    std::vector<int> out;
    for (int v = a; v <= b; ++v) out.push_back(v);
    return out;
  }
  std::vector<int> out;
  for (const auto& t : split(s, ',')) out.push_back(to_int(t));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

Relaxation relaxation(const std::string& s) {
  const std::string t = lower(s);
  if (t == "f" || t == "forward") return Relaxation::Forward;
  if (t == "s" || t == "symmetric") return Relaxation::Symmetric;
  throw std::invalid_argument("unknown relaxation: " + s);
}

void check_range(const std::vector<int>& v, int lo, int hi, const char* what) {
  for (int x : v)
    if (x < lo || x > hi)
      throw std::invalid_argument(std::string(what) + " outside the search space: " + std::to_string(x));
}

}  // namespace

SolverParams parse_params(const std::string& tuple) {
  std::string t = trim(tuple);
  if (!t.empty() && t.front() == '(' && t.back() == ')') t = t.substr(1, t.size() - 2);
  const auto parts = split(t, ',');
  if (parts.size() != 6) throw std::invalid_argument("parameter tuple needs 6 entries: " + tuple);
  SolverParams s;
  s.nu_pre = to_int(parts[0]);
  s.nu_post = to_int(parts[1]);
  s.nu_inc = to_int(parts[2]);
  s.kappa = to_int(parts[3]);
  s.a_hat = relaxation(parts[4]);
  s.xi = to_int(parts[5]);
  s.validate();
  return s;
}

BenchmarkConfig parse_config(std::istream& in) {
  BenchmarkConfig c;
  std::string line;
  int number = 0;
  std::ostringstream echo;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(number) + ": expected key = value");
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (value.empty()) throw std::invalid_argument("missing value");
      if (key == "mesh") {
        c.mesh = value;
      } else if (key == "kind") {
        c.kind = parse_discretization(lower(value));
      } else if (key == "level") {
        c.level = to_int(value);
      } else if (key == "params") {
        c.params = parse_params(value);
        c.params_given = true;
      } else if (key == "omega") {
        const std::string v = lower(value);
        if (v == "default") {
          c.omega = OmegaSource::Default;
        } else if (v == "estimate") {
          c.omega = OmegaSource::Estimate;
        } else {
          c.omega = OmegaSource::Value;
          c.omega_value = to_real(value);
          if (!(c.omega_value > 0.0)) throw std::invalid_argument("omega must be positive");
        }
      } else if (key == "schur") {
        const std::string v = lower(value);
        if (v == "lumped") c.schur = SchurScaling::LumpedMass;
        else if (v == "pspg") c.schur = SchurScaling::PspgDiagonal;
        else throw std::invalid_argument("schur must be lumped or pspg");
      } else if (key == "eps") {
        c.eps = to_real(value);
        if (!(c.eps > 0.0)) throw std::invalid_argument("eps must be positive");
      } else if (key == "csv") {
        c.csv = value;
      } else if (key == "json") {
        c.json = value;
      } else if (key == "cache") {
        c.cache = value;
      } else if (key == "sweep") {
        const std::string v = lower(value);
        if (v == "default") c.sweep = SweepMode::Default;
        else if (v == "full") c.sweep = SweepMode::Full;
        else if (v == "custom") c.sweep = SweepMode::Custom;
        else throw std::invalid_argument("sweep must be default, full or custom");
      } else if (key == "nu_pre") {
        c.nu_pre = int_list(value);
        check_range(c.nu_pre, 0, 3, "nu_pre");
      } else if (key == "nu_post") {
        c.nu_post = int_list(value);
        check_range(c.nu_post, 0, 3, "nu_post");
      } else if (key == "nu_inc") {
        c.nu_inc = int_list(value);
        check_range(c.nu_inc, 0, 3, "nu_inc");
      } else if (key == "kappa") {
        c.kappa = int_list(value);
        check_range(c.kappa, 1, 2, "kappa");
      } else if (key == "relax") {
        // F1,F3,S1
        c.relax.clear();
        for (const auto& r : split(value, ',')) {
          if (r.size() < 2) throw std::invalid_argument("relaxation entry needs a sweep count: " + r);
          const Relaxation a = relaxation(r.substr(0, 1));
          const int xi = to_int(r.substr(1));
          check_range({xi}, 1, a == Relaxation::Forward ? 4 : 2, "xi");
          c.relax.emplace_back(a, xi);
        }
        if (c.relax.empty()) throw std::invalid_argument("empty relaxation list");
      } else if (key == "sweep_budget") {
        c.sweep_budget = to_int(value);
      } else if (key == "gamma_u") {
        c.gamma_u = to_real(value);
      } else if (key == "gamma_p") {
        c.gamma_p = to_real(value);
      } else if (key == "budgets") {
        c.budgets.clear();
        for (const auto& b : split(value, ',')) c.budgets.push_back(to_real(b));
      } else {
        throw std::invalid_argument("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(number) + ": " + e.what());
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("config line " + std::to_string(number) + ": value out of range");
    }
    echo << key << " = " << value << '\n';
  }
  if (c.level < 2) throw std::invalid_argument("config: level must be at least 2");
  c.echo = echo.str();
  return c;
}

BenchmarkConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  return parse_config(in);
}

std::vector<SolverParams> sweep_params(const BenchmarkConfig& c, double omega_inv) {
  switch (c.sweep) {
    case SweepMode::Default:
      return default_sweep(omega_inv, c.schur);
    case SweepMode::Full:
      return search_space(omega_inv, c.schur);
    case SweepMode::Custom:
      break;
  }
  std::vector<SolverParams> out;
  for (int pre : c.nu_pre)
    for (int post : c.nu_post)
      for (int inc : c.nu_inc)
        for (int kappa : c.kappa)
          for (const auto& [a, xi] : c.relax) {
            SolverParams s;
            s.nu_pre = pre;
            s.nu_post = post;
            s.nu_inc = inc;
            s.kappa = kappa;
            s.a_hat = a;
            s.xi = xi;
            s.omega_inv = omega_inv;
            s.schur = c.schur;
            out.push_back(s);
          }
  return out;
}

BenchmarkProblem make_problem(const BenchmarkConfig& c) {
  if (c.mesh == "cube") return BenchmarkProblem::cube(c.kind, c.level);
  const ExactSolution s = cube_exact_solution();
  const MacroMesh mesh = c.mesh == "tet" ? generate_single_tet() : load_mesh(c.mesh);
  return BenchmarkProblem(mesh, c.kind, c.level, s.f, s.u);
}

double resolve_omega(const BenchmarkConfig& c, const Hierarchy& h) {
  switch (c.omega) {
    case OmegaSource::Value:
      return c.omega_value;
    case OmegaSource::Estimate:
      return estimate_omega(h, h.max_level()).omega_inv;
    case OmegaSource::Default:
      break;
  }
  return default_omega_inv(c.kind);
}

}  // namespace hhg
