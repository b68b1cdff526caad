#pragma once

#include <memory>
#include <vector>

#include "bisolve/energy.hpp"
#include "bisolve/nonlinearity.hpp"
#include "bisolve/radial_grid.hpp"
#include "bisolve/truncated_operator.hpp"

namespace bisolve {

enum class ShootOutcome { crossing, positive_floor, converged };
std::string to_string(ShootOutcome o);

struct ShootRecord {
  double xi = 0;
  ShootOutcome outcome = ShootOutcome::converged;
  double first_zero = 0;    // crossing radius (crossing outcome)
  double floor_value = 0;   // u at the sign flip of u' (positive-floor outcome)
  double reached_r = 0;
  RadialProfile trajectory;
  // Dense accepted-step samples of the integration, before any resampling.
  std::vector<double> r_dense, u_dense, w_dense;

  double flux_max() const;
};

struct ShootOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  std::shared_ptr<const RadialGrid> grid;  // resample target; default graded
};

// Integrates the radial system u' = flux_invert(w), w' = -((N-1)/r) w - g(u)
// from u(0) = xi, w(0) = 0, starting at r1 = 1e-6 r_max with the series
// w ~ -g(xi) r / N.  Adaptive embedded RK (Dormand-Prince 5(4)).
ShootRecord shoot(const TruncatedOperator& trunc, const Nonlinearity& nl, double xi,
                  double r_max, const ShootOptions& opt = {});

struct GroundShootResult {
  RadialProfile profile;
  double xi = 0;
  double flux_max = 0;         // max_r |w| along the trajectory
  double origin_flux_rel = 0;  // |r1^{N-1} w(r1)| / max |w|
  double tail_kappa = 0;       // fitted exponential rate (positive mass only)
  ShootRecord final_record;
};

struct GroundShootOptions {
  double xi_tol = 1e-12;
  double r_shoot_factor = 10.0;  // integrate to factor * R_max for tail discrimination
  double xi0_cap = 10.0;
  std::shared_ptr<const RadialGrid> grid;
};

// Bisection between a positive-floor witness and a crossing witness located
// by a geometric scan of xi in [xi0/8, 64 xi0]; the final trajectory is glued
// to an exponential (positive mass) or Dirichlet-consistent power (zero mass)
// tail and resampled on the grid.  Throws NotFoundError when the scan sees
// only one outcome type.
GroundShootResult ground_state_shoot_full(const TruncatedOperator& trunc, const Nonlinearity& nl,
                                          const GroundShootOptions& opt = {});
RadialProfile ground_state_shoot(const TruncatedOperator& trunc, const Nonlinearity& nl);

}  // namespace bisolve
