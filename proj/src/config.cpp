#include "bisolve/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bisolve {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& msg) {
  throw ConfigError(origin + ": " + msg);
}

std::string where(const std::string& block, const std::string& key) {
  return block.empty() ? "key \"" + key + "\"" : "key \"" + key + "\" in the " + block + " block";
}

double as_number(const std::string& origin, const std::string& block, const json& obj,
                 const std::string& key) {
  if (!obj.contains(key)) fail(origin, where(block, key) + " is required");
  const json& v = obj.at(key);
  if (!v.is_number()) fail(origin, where(block, key) + " expects a number, got " + v.dump());
  return v.get<double>();
}

double number_or(const std::string& origin, const std::string& block, const json& obj,
                 const std::string& key, double fallback) {
  return obj.contains(key) ? as_number(origin, block, obj, key) : fallback;
}

int as_integer(const std::string& origin, const json& obj, const std::string& key,
               int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer())
    fail(origin, where("", key) + " expects an integer, got " + v.dump());
  return v.get<int>();
}

bool as_boolean(const std::string& origin, const json& obj, const std::string& key,
                bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(origin, where("", key) + " expects true or false, got " + v.dump());
  return v.get<bool>();
}

std::string as_string(const std::string& origin, const std::string& block, const json& obj,
                      const std::string& key) {
  if (!obj.contains(key)) fail(origin, where(block, key) + " is required");
  const json& v = obj.at(key);
  if (!v.is_string()) fail(origin, where(block, key) + " expects a string, got " + v.dump());
  return v.get<std::string>();
}

void reject_unknown(const std::string& origin, const std::string& block, const json& obj,
                    const std::vector<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      fail(origin, "unknown " + where(block, item.key()));
  }
}

void require_positive(const std::string& origin, const std::string& key, double v) {
  if (!(v > 0.0)) fail(origin, where("", key) + " must be positive, got " + std::to_string(v));
}

// 1-based line/column of a byte offset, for parse_error diagnostics.
std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

Config parse_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    std::ostringstream os;
    os << origin << ": line " << line << ", column " << col << ": " << e.what();
    throw ConfigError(os.str());
  }
  if (!root.is_object()) fail(origin, "top level must be a JSON object");

  std::vector<std::string> top;
  for (const auto& d : config_key_docs()) {
    if (d.key.find('.') == std::string::npos) top.push_back(d.key);
  }
  reject_unknown(origin, "", root, top);

  Config c;

  if (!root.contains("operator")) fail(origin, "key \"operator\" is required");
  {
    const json& op = root.at("operator");
    if (!op.is_object()) fail(origin, "key \"operator\" expects an object");
    c.op_kind = as_string(origin, "operator", op, "kind");
    if (c.op_kind == "power") {
      reject_unknown(origin, "operator", op, {"kind", "alpha"});
      c.alpha = number_or(origin, "operator", op, "alpha", -0.5);
    } else if (c.op_kind == "two_term") {
      reject_unknown(origin, "operator", op, {"kind", "beta", "gamma_c"});
      c.beta = as_number(origin, "operator", op, "beta");
      c.gamma_c = as_number(origin, "operator", op, "gamma_c");
    } else if (c.op_kind == "constant") {
      reject_unknown(origin, "operator", op, {"kind", "value"});
      c.a_value = number_or(origin, "operator", op, "value", 1.0);
    } else {
      fail(origin, "operator kind \"" + c.op_kind +
                       "\" is not one of power, two_term, constant");
    }
  }

  if (!root.contains("nonlinearity")) fail(origin, "key \"nonlinearity\" is required");
  {
    const json& nl = root.at("nonlinearity");
    if (!nl.is_object()) fail(origin, "key \"nonlinearity\" expects an object");
    c.nl_kind = as_string(origin, "nonlinearity", nl, "kind");
    if (c.nl_kind == "power") {
      reject_unknown(origin, "nonlinearity", nl, {"kind", "p"});
      c.p = as_number(origin, "nonlinearity", nl, "p");
      c.m = 0.0;
      c.gamma = c.p - 1.0;
    } else if (c.nl_kind == "power_minus_mass") {
      reject_unknown(origin, "nonlinearity", nl, {"kind", "m", "gamma", "p"});
      c.m = number_or(origin, "nonlinearity", nl, "m", 1.0);
      c.gamma = number_or(origin, "nonlinearity", nl, "gamma", 2.0);
      c.p = as_number(origin, "nonlinearity", nl, "p");
    } else {
      fail(origin, "nonlinearity kind \"" + c.nl_kind +
                       "\" is not one of power, power_minus_mass");
    }
    require_positive(origin, "p", c.p);
  }

  c.dim = as_integer(origin, root, "dim", 0);
  if (c.dim < 3) fail(origin, "key \"dim\" is required and must be an integer >= 3");

  c.theta1 = number_or(origin, "", root, "theta1", 0.5);
  if (!(c.theta1 > 0.0 && c.theta1 < 1.0))
    fail(origin, "key \"theta1\" must lie in (0, 1), got " + std::to_string(c.theta1));
  if (root.contains("theta")) {
    const double t = as_number(origin, "", root, "theta");
    if (!(t > 0.0 && t < 1.0))
      fail(origin, "key \"theta\" must lie in (0, 1), got " + std::to_string(t));
    c.theta = t;
  }
  c.max_stages = as_integer(origin, root, "max_stages", 8);
  if (c.max_stages < 1 || c.max_stages > 30)
    fail(origin, "key \"max_stages\" must lie in 1..30");
  c.allow_truncated_only = as_boolean(origin, root, "allow_truncated_only", false);

  c.path_nodes = as_integer(origin, root, "path_nodes", 24);
  if (c.path_nodes < 4) fail(origin, "key \"path_nodes\" must be >= 4");
  c.max_sweeps = as_integer(origin, root, "max_sweeps", 10000);
  if (c.max_sweeps < 1) fail(origin, "key \"max_sweeps\" must be >= 1");
  c.grad_tol = number_or(origin, "", root, "grad_tol", 1e-5);
  require_positive(origin, "grad_tol", c.grad_tol);
  c.cross_check = as_boolean(origin, root, "cross_check", true);
  c.xi_tol = number_or(origin, "", root, "xi_tol", 1e-12);
  require_positive(origin, "xi_tol", c.xi_tol);
  c.residual_tol = number_or(origin, "", root, "residual_tol", 1e-3);
  require_positive(origin, "residual_tol", c.residual_tol);
  c.el_tol = number_or(origin, "", root, "el_tol", 1e-6);
  require_positive(origin, "el_tol", c.el_tol);

  c.cells = as_integer(origin, root, "cells", 2048);
  if (c.cells < 16) fail(origin, "key \"cells\" must be >= 16");
  c.r_max = number_or(origin, "", root, "r_max", 40.0);
  require_positive(origin, "r_max", c.r_max);
  c.grading = number_or(origin, "", root, "grading", 1.5);
  if (!(c.grading >= 1.0)) fail(origin, "key \"grading\" must be >= 1");

  c.threads = as_integer(origin, root, "threads", 1);
  if (c.threads < 1) fail(origin, "key \"threads\" must be >= 1");

  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream body;
  body << in.rdbuf();
  return parse_config(body.str(), path);
}

OperatorFamily Config::make_operator() const {
  if (op_kind == "power") return OperatorFamily::power(alpha);
  if (op_kind == "two_term") return OperatorFamily::two_term(beta, gamma_c);
  return OperatorFamily::constant(a_value);
}

Nonlinearity Config::make_nonlinearity() const { return make_nonlinearity(p); }

Nonlinearity Config::make_nonlinearity(double p_override) const {
  if (nl_kind == "power") return Nonlinearity::power(p_override, dim);
  if (m == 0.0 && gamma != p_override - 1.0) {
    // A massless source with an explicitly declared gamma keeps that
    // declaration, so the small-argument limit screen can judge it instead of
    // the factory quietly re-deriving gamma from p.
    const double pe = p_override;
    std::ostringstream label;
    label << "power_minus_mass(m=0, gamma=" << gamma << ", p=" << pe << ")";
    return Nonlinearity::tabulated(
        [pe](double s) {
          return s == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(s), pe - 1.0), s);
        },
        0.0, gamma, pe, dim, label.str());
  }
  return Nonlinearity::power_minus_mass(m, gamma, p_override, dim);
}

std::shared_ptr<const RadialGrid> Config::make_grid() const {
  return RadialGrid::graded(dim, cells, r_max, grading);
}

SolveOptions Config::solve_options() const {
  SolveOptions opt;
  opt.max_stages = theta ? 1 : max_stages;
  opt.mp.path_nodes = path_nodes;
  opt.mp.max_sweeps = max_sweeps;
  opt.mp.grad_tol = grad_tol;
  opt.cross_check = cross_check;
  opt.shoot.xi_tol = xi_tol;
  opt.residual_tol = residual_tol;
  opt.el_tol = el_tol;
  opt.allow_truncated_only = allow_truncated_only;
  opt.grid = make_grid();
  return opt;
}

const std::vector<ConfigKeyDoc>& config_key_docs() {
  static const std::vector<ConfigKeyDoc> docs = {
      {"operator", "required", "object selecting the diffusion coefficient a(s)"},
      {"operator.kind", "required", "one of: power, two_term, constant"},
      {"operator.alpha", "-0.5", "power family a(s) = (1-s)^alpha"},
      {"operator.beta", "required", "two_term family a(s) = beta/sqrt(1-s) - gamma_c/sqrt(1+s)"},
      {"operator.gamma_c", "required", "second coefficient of the two_term family"},
      {"operator.value", "1.0", "constant family a(s) = value (validation mode, no truncation)"},
      {"nonlinearity", "required", "object selecting the source g(s)"},
      {"nonlinearity.kind", "required", "one of: power, power_minus_mass"},
      {"nonlinearity.p", "required", "power exponent: g gains the term |s|^{p-2} s"},
      {"nonlinearity.m", "1.0", "mass coefficient of power_minus_mass: -m|s|^{gamma-2} s"},
      {"nonlinearity.gamma", "2.0", "mass exponent of power_minus_mass"},
      {"dim", "required", "space dimension N >= 3"},
      {"theta1", "0.5", "first truncation level; the schedule halves from here"},
      {"theta", "unset", "freeze the schedule to this single truncation level"},
      {"max_stages", "8", "truncation stages before giving up"},
      {"allow_truncated_only", "false",
       "solve sources whose gamma misses the certified window (truncated problem only)"},
      {"path_nodes", "24", "nodes on the deformation path"},
      {"max_sweeps", "10000", "deformation sweep budget per stage"},
      {"grad_tol", "1e-05", "termination threshold on the (sigma,u)-gradient norm"},
      {"cross_check", "true", "run the shooting solver and compare u(0)"},
      {"xi_tol", "1e-12", "shooting bisection tolerance in the initial height"},
      {"residual_tol", "0.001", "certification threshold for the identity residuals"},
      {"el_tol", "1e-06", "certification threshold for the nodal equation residual"},
      {"cells", "2048", "radial cells"},
      {"r_max", "40.0", "domain radius"},
      {"grading", "1.5", "node clustering exponent r_i = r_max (i/cells)^grading"},
      {"threads", "1",
       "reserved for solver parallelism; the current solver runs sequentially"},
  };
  return docs;
}

}  // namespace bisolve
