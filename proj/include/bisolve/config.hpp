#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bisolve/nonlinearity.hpp"
#include "bisolve/operator_family.hpp"
#include "bisolve/pipeline.hpp"

namespace bisolve {

// Bad input file: parse failure, unknown key, wrong type, out-of-range value.
// The message carries the offending key (or line/column for syntax errors).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One JSON document describes the whole run: the operator and nonlinearity
// blocks plus flat solver/grid scalars.  Everything except `operator`,
// `nonlinearity` and `dim` has a default.
struct Config {
  // operator block
  std::string op_kind = "power";
  double alpha = -0.5;      // power
  double beta = 0.0;        // two_term
  double gamma_c = 0.0;     // two_term
  double a_value = 1.0;     // constant

  // nonlinearity block
  std::string nl_kind = "power_minus_mass";
  double m = 1.0;
  double gamma = 2.0;
  double p = 4.0;

  int dim = 3;

  // truncation schedule
  double theta1 = 0.5;
  std::optional<double> theta;  // fixed single-stage truncation when set
  int max_stages = 8;
  bool allow_truncated_only = false;

  // deformation / shooting
  int path_nodes = 24;
  int max_sweeps = 10000;
  double grad_tol = 1e-5;
  bool cross_check = true;
  double xi_tol = 1e-12;
  double residual_tol = 1e-3;
  double el_tol = 1e-6;

  // grid
  int cells = 2048;
  double r_max = 40.0;
  double grading = 1.5;

  int threads = 1;

  OperatorFamily make_operator() const;
  Nonlinearity make_nonlinearity() const;
  Nonlinearity make_nonlinearity(double p_override) const;
  std::shared_ptr<const RadialGrid> make_grid() const;
  SolveOptions solve_options() const;
  // theta when set, else theta1; the schedule start for solve_full.
  double schedule_start() const { return theta ? *theta : theta1; }
};

Config parse_config(const std::string& text, const std::string& origin);
Config load_config(const std::string& path);

struct ConfigKeyDoc {
  std::string key;
  std::string fallback;  // "required" when there is no default
  std::string doc;
};

// Table behind --help; parse_config rejects any key not listed here.
const std::vector<ConfigKeyDoc>& config_key_docs();

}  // namespace bisolve
