#pragma once

#include "bisolve/operator_family.hpp"

namespace bisolve {

struct TruncEval {
  double a_theta;
  double A_theta;
};

// Piecewise coefficient: a below the junction s = 1-theta, a matched power
// tail c * s^{(q-2)/2} above it.  The primitive is exact on both branches.
// Bypass instances (bounded families) skip the truncation entirely and
// evaluate the base family on all of [0, inf).
class TruncatedOperator {
 public:
  static TruncatedOperator build(OperatorFamily base, double theta, double theta1, double q);
  static TruncatedOperator bypass(OperatorFamily base);

  TruncEval eval(double s) const;
  double a_theta(double s) const;
  double A_theta(double s) const;
  double a_theta_prime(double s) const;

  // w = a_theta(x^2) x as a function of the slope x; odd, strictly increasing.
  double flux(double x) const;
  double flux_prime(double x) const;
  // Unique x with flux(x) = w, absolute tolerance 1e-12.
  double flux_invert(double w) const;

  const OperatorFamily& base() const { return base_; }
  bool is_bypass() const { return bypass_; }
  double theta() const { return theta_; }
  double theta1() const { return theta1_; }
  double q() const { return q_; }
  double junction_a() const { return junction_a_; }
  double junction_slope() const { return junction_slope_; }
  double tail_coefficient() const { return c_; }

 private:
  TruncatedOperator() = default;

  OperatorFamily base_ = OperatorFamily::power(-0.5);
  bool bypass_ = false;
  double theta_ = 0, theta1_ = 0, q_ = 0;
  double junction_a_ = 0;      // a(1-theta)
  double junction_slope_ = 0;  // a'(1-theta)
  double c_ = 0;               // (1-theta)^{-(q-2)/2} a(1-theta)
  double A_junction_ = 0;      // A(1-theta)
};

struct SandwichConstants {
  double c_bar;
  double c_bar_theta;
};

// Lower constant from the closed formula (theta1-based, theta-independent),
// upper constant by grid maximization of a_theta(x^2)x^2 / (x^2 + |x|^q)
// inflated 10%.  Both are re-verified on 10^3 sample slopes; a violated
// sample throws VerificationError.
SandwichConstants sandwich_constants(const TruncatedOperator& trunc);

}  // namespace bisolve
