#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bisolve/energy.hpp"
#include "bisolve/mountain_pass.hpp"
#include "bisolve/nonlinearity.hpp"
#include "bisolve/radial_grid.hpp"
#include "bisolve/shooting.hpp"
#include "bisolve/truncated_operator.hpp"

namespace bisolve {

// Deformation endpoint: a plateau whose height steps down geometrically from
// 0.9 (1-theta1) sqrt(R) until both G(height) > 0 and the truncated energy is
// negative.  R is sized so plateau plus ramp fit inside the grid.  Throws
// NotFoundError when no admissible height exists.
RadialProfile build_ubar(const TruncatedOperator& trunc, const Nonlinearity& nl,
                         std::shared_ptr<const RadialGrid> grid);

struct CrossCheck {
  bool attempted = false;
  bool available = false;
  std::string note;
  double xi = 0;
  double u0_shoot = 0;
  double u0_rel_diff = 0;
  double flux_max = 0;
  double origin_flux_rel = 0;
};

struct StageRecord {
  double theta = 0;
  bool feasible = false;
  std::string note;
  double q = 0;
  bool solved = false;
  bool converged = false;
  int sweeps = 0;
  double grad_norm = 0;
  double m_theta = 0;
  double sigma_star = 0;
  double u0 = 0;
  double sup_slope = 0;
  double flux_bound = 0;  // max_r |a_theta(|u'|^2) u'|
  IdentityResiduals residuals{0, 0, 0};
  double el_sup = 0;
  bool level_bound_ok = false;
  bool certified = false;
  CrossCheck cross;
};

struct SolveReport {
  std::string operator_desc;
  std::string nonlinearity_desc;
  std::string regime;
  int dim = 0;
  bool bypass = false;
  double theta1 = 0;

  std::vector<StageRecord> stages;
  std::string status;  // "certified" | "schedule_exhausted" | "nonconvergence"
  std::string failure_reason;
  double theta_bar = 0;
  double level_cap = 0;  // ridge height along t * ubar at the first stage

  bool have_solution = false;
  RadialProfile profile;
  std::optional<TruncatedOperator> trunc;  // truncation behind the stored profile
  double m_theta = 0;
  IdentityResiduals residuals{0, 0, 0};
  EnergyBreakdown energy{};
  double int_A = 0;        // int A(|grad u|^2)
  double int_a_grad2 = 0;  // int a(|grad u|^2)|grad u|^2
  double int_abs_G = 0;    // int |G(u)|
  DecayFit decay{0, 0};
  double origin_flux_rel = 0;
  double flux_bound_overall = 0;  // max over the stage history
  double flux_bound_solution = 0;  // max_r |a_theta(|u'|^2) u'| of the stored profile
};

struct SolveOptions {
  int max_stages = 8;
  MountainPassOptions mp{};
  bool cross_check = true;
  GroundShootOptions shoot{};
  double residual_tol = 1e-3;  // certification threshold for the identities
  double el_tol = 1e-6;        // certification threshold for the nodal residual
  // Accept sources whose gamma misses the certified window and solve the
  // truncated problem anyway (no gradient-bound claim can follow).
  bool allow_truncated_only = false;
  std::shared_ptr<const RadialGrid> grid;  // graded(N) when unset
};

// Truncation schedule theta1, theta1/2, ...: select q, truncate, deform to
// the mountain-pass point (shooting cross-check optional), then test the
// gradient bound sup|u'| <= 1-theta.  The first stage that passes certifies;
// otherwise the report carries the per-stage flux-bound history.  A constant
// coefficient runs a single bypass stage with no slope condition.
SolveReport solve_full(const OperatorFamily& fam, const Nonlinearity& nl, double theta1,
                       const SolveOptions& opt = {});

// Recomputes the solution block of a report (level, residuals, energy
// integrals, decay fit, flux and origin checks) from a stored profile; the
// solver's own final block and `verify` both go through here, so a report is
// reproducible from solution.csv plus the config.
void fill_solution_block(SolveReport& rep, const TruncatedOperator& trunc,
                         const Nonlinearity& nl, const RadialProfile& profile);

}  // namespace bisolve
