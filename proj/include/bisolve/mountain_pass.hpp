#pragma once

#include <vector>

#include "bisolve/nonlinearity.hpp"
#include "bisolve/radial_grid.hpp"
#include "bisolve/truncated_operator.hpp"

namespace bisolve {

// Discrete path from 0 to u_bar together with the per-node dilation
// offsets.  The level estimate is the maximum of J over the interior
// nodes and never increases across deformation sweeps.
struct MountainPassState {
  std::vector<double> sigma;                // one offset per path node
  std::vector<std::vector<double>> nodes;   // node values on the grid
  std::vector<double> level;                // cached J per node
  int max_index = 0;
  double m_theta = 0.0;
};

struct MountainPassOptions {
  int path_nodes = 24;      // K; path has K+1 nodes including endpoints
  int max_sweeps = 10000;
  double grad_tol = 1e-5;
  int polish_steps = 6;
  double sigma_clamp = 1.9;
};

struct MountainPassResult {
  RadialProfile profile;        // deformation limit pulled back to sigma = 0
  double m_theta = 0.0;
  double sigma_star = 0.0;
  double grad_norm = 0.0;       // (sigma,u)-gradient norm at the maximizer
  int sweeps = 0;
  bool converged = false;
  double initial_level_cap = 0.0;  // max of J over the initial segment path
  double path_end_level = 0.0;     // I(u_bar), fixed endpoint value
  MountainPassState state;         // final path with levels
};

// Deformation solver for the saddle level.  The path starts as the
// segment t_k * u_bar; each sweep takes a backtracked descent step in
// (sigma, u) at the path maximizer (ties break to the lowest index).
// Terminates when the gradient norm at the maximizer drops below
// grad_tol, then polishes the maximizer with a bordered Newton step and
// pulls the dilation back into the profile.
//
// warm_start, when given, seeds the initial ray direction (continuation
// between truncation stages); the level cap is always measured on the
// u_bar ray, and a warm ray without a ridge falls back to u_bar.
MountainPassResult mountain_pass_full(const TruncatedOperator& trunc, const Nonlinearity& nl,
                                      const RadialProfile& u_bar,
                                      const MountainPassOptions& opt = {},
                                      const RadialProfile* warm_start = nullptr);

std::pair<RadialProfile, double> mountain_pass(const TruncatedOperator& trunc,
                                               const Nonlinearity& nl,
                                               const RadialProfile& u_bar, int K = 24);

}  // namespace bisolve
