#pragma once

#include <functional>
#include <string>

#include "bisolve/types.hpp"

namespace bisolve {

struct FamilyEval {
  double a;        // a(s)
  double a_prime;  // a'(s)
  double A;        // primitive int_0^s a(t) dt
};

// A diffusion coefficient family a(s), s = |grad u|^2.  Built-ins carry closed
// forms for a, a', A; tabulated families fall back to centered differences and
// adaptive quadrature.  Families are immutable and cheap to copy.
class OperatorFamily {
 public:
  enum class Kind { power, two_term, constant, tabulated };

  static OperatorFamily power(double alpha);
  static OperatorFamily two_term(double beta, double gamma_c);
  static OperatorFamily constant(double value);  // bounded; validation mode only
  static OperatorFamily tabulated(std::function<double(double)> a_fn, std::string label);

  FamilyEval eval(double s) const;
  double a(double s) const;
  double a_prime(double s) const;
  double primitive(double s) const;

  // Divergence screen for (a1): a(1-1e-8) > 1e3 * a(0).
  bool divergence_screen() const;
  // Positivity of a and strict midpoint convexity of s -> a(s)s on a sample of
  // [0, 1).  Throws AdmissibilityError on failure.
  void check_a0(int samples = 512) const;

  Kind kind() const { return kind_; }
  // True for families that blow up at s = 1 (domain restricted to [0,1)).
  bool singular_at_one() const { return kind_ != Kind::constant; }
  std::string describe() const;

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double gamma_c() const { return gamma_c_; }
  double value() const { return value_; }

 private:
  OperatorFamily() = default;

  Kind kind_ = Kind::power;
  double alpha_ = -0.5;           // power
  double beta_ = 0, gamma_c_ = 0; // two_term
  double value_ = 1.0;            // constant
  std::function<double(double)> a_fn_;  // tabulated
  std::string label_;
};

// Right-hand side of the q(theta) rule: 2(a'(1-t)(1-t) + a(1-t)) / a(1-t).
double q_lower_bound(const OperatorFamily& fam, double theta);

// Picks the truncation exponent for a stage.  Positive mass: max(qlb, N+1).
// Zero mass, gamma > N: midpoint of (max(qlb, N), gamma).  Zero mass,
// 2* < gamma <= N: midpoint of (max(qlb, N*gamma/(N+gamma)), N).  Throws
// InfeasibilityError when the interval is empty.
double select_q(const OperatorFamily& fam, double theta, MassRegime regime, double gamma,
                int N);

}  // namespace bisolve
