#pragma once

#include "bisolve/nonlinearity.hpp"
#include "bisolve/radial_grid.hpp"
#include "bisolve/truncated_operator.hpp"

namespace bisolve {

struct EnergyBreakdown {
  double kinetic = 0;      // (1/2) int A_theta(|grad u|^2)
  double G1_int = 0;       // int G1(u)
  double G2_int = 0;       // int G2(u)
  double total = 0;        // kinetic + G2_int - G1_int
  double a_grad_int = 0;   // int a_theta(|grad u|^2)|grad u|^2
  double nehari_residual = 0;    // relative
  double pohozaev_residual = 0;  // relative
  double el_residual_sup = 0;    // sup of the nodal Euler-Lagrange residual
};

struct JEval {
  double J;
  double dJ_dsigma;
};

struct SigmaCurvature {
  double J;
  double dJ;
  double d2J;
};

struct IdentityResiduals {
  double nehari;
  double pohozaev;
  double energy_id;
};

// All integrals use the grid's midpoint (gradients) / trapezoid (values)
// weights, so the algebraic identities below hold at quadrature level, not
// just up to discretization error.
EnergyBreakdown energy(const TruncatedOperator& trunc, const Nonlinearity& nl,
                       const RadialProfile& p);

// Dilation functional J(sigma, u) = e^{N sigma}[kinetic(e^{-2 sigma}) + G2 - G1]
// and its closed-form sigma derivative.  |sigma| <= 2.
JEval j_and_dsigma(const TruncatedOperator& trunc, const Nonlinearity& nl, double sigma,
                   const RadialProfile& p);

// Adds the closed-form second sigma derivative (for the Newton polish of the
// balanced pair).
SigmaCurvature j_sigma_curvature(const TruncatedOperator& trunc, const Nonlinearity& nl,
                                 double sigma, const RadialProfile& p);

// Nodal residual: variation of the discrete energy in u_i divided by the
// lumped volume weight; approximates -div(a_theta(|grad u|^2) grad u) - g(u).
// Boundary nodes carry 0.
RadialProfile el_gradient(const TruncatedOperator& trunc, const Nonlinearity& nl,
                          const RadialProfile& p);

// Damped Newton on the discrete Euler-Lagrange system (tridiagonal Jacobian,
// u_M = 0 fixed).  Sampled continuum solutions carry an O(1) nodal truncation
// residual at the first node; this projects them onto the discrete critical
// point, which moves u(0) only at discretization order.  Returns iterations
// used; converged when the sup residual falls below tol.
int el_polish(const TruncatedOperator& trunc, const Nonlinearity& nl, RadialProfile& p,
              int max_iter = 30, double tol = 1e-10);

// nehari = int a_theta |grad u|^2 + int g2 u - int g1 u  (== <grad I, u> by
// summation by parts); pohozaev = dJ/dsigma at 0; energy_id = int a_theta
// |grad u|^2 - N m_level.  Each is normalized by its largest constituent.
IdentityResiduals identity_residuals(const TruncatedOperator& trunc, const Nonlinearity& nl,
                                     const RadialProfile& p, double m_level);

// int a_theta(|grad u|^2)|grad u|^2, the strictly convex gradient functional.
double dirichlet_functional(const TruncatedOperator& trunc, const RadialProfile& p);

}  // namespace bisolve
