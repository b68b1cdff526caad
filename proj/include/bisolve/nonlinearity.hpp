#pragma once

#include <functional>
#include <string>

#include "bisolve/types.hpp"

namespace bisolve {

struct GEval {
  double g;
  double G;   // primitive of g, G(0) = 0
  double g1;  // nonnegative part of the splitting, odd extension for s < 0
  double g2;  // g1 - g
  double G1;
  double G2;
};

// Odd source term g with its mass-regime splitting g = g1 - g2.  Positive
// mass splits against the mass term (g1 = max(g + m|s|^{gamma-2}s, 0)); zero
// mass splits by sign (g1 = max(g, 0)).  Built-ins carry closed-form
// primitives; tabulated ones integrate adaptively.
class Nonlinearity {
 public:
  enum class Kind { power, power_minus_mass, tabulated };

  // g(s) = |s|^{p-2} s; zero mass with gamma = p - 1.
  static Nonlinearity power(double p, int N);
  // g(s) = -m |s|^{gamma-2} s + |s|^{p-2} s.
  static Nonlinearity power_minus_mass(double m, double gamma, double p, int N);
  // User-supplied odd evaluator; m and gamma must be given.
  static Nonlinearity tabulated(std::function<double(double)> g_fn, double m, double gamma,
                                double p, int N, std::string label);

  GEval eval(double s) const;
  double g(double s) const;
  double G(double s) const;
  double g_prime(double s) const;

  Kind kind() const { return kind_; }
  MassRegime regime() const { return regime_; }
  double m() const { return m_; }
  double gamma() const { return gamma_; }
  double p() const { return p_; }
  int dim() const { return N_; }
  double two_star() const { return 2.0 * N_ / (N_ - 2.0); }
  std::string describe() const;

 private:
  Nonlinearity() = default;
  void detect_regime();

  Kind kind_ = Kind::power;
  double m_ = 0, gamma_ = 2, p_ = 4;
  int N_ = 3;
  MassRegime regime_ = MassRegime::positive_mass;
  std::function<double(double)> g_fn_;
  std::string label_;
};

// Outcome of the small-s / large-s ratio scans that screen (g1)/(g1')/(g1'')
// before a solve.  accepted_truncated_only flags a source that passes the
// limit scans but misses the gamma window needed for the untruncated limit.
struct RegimeReport {
  enum class Verdict { accepted, accepted_truncated_only, rejected };
  Verdict verdict = Verdict::rejected;
  MassRegime regime = MassRegime::positive_mass;
  double m_detected = 0;
  double gamma = 0;
  double c1 = 0, c2 = 0, c3 = 0;
  double q_star = 0;  // only meaningful for zero mass with gamma <= N
  std::string reason;
};

std::string to_string(RegimeReport::Verdict v);

// Geometric grid scan s = 2^{-k}, k = 4..40, of g(s)/s^{gamma-1}; positive
// mass needs the last 8 ratios to agree to 1% with a negative limit matching
// -m, zero mass needs them to decay to 0.  Zero mass with gamma <= N also
// screens the large-s growth bound on s = 2^k, k = 1..20.
RegimeReport classify_regime(const Nonlinearity& nl);

// Smallest positive level with G > 0: scans a 1e4-point uniform grid of
// (0, s_max], refines the sign change by bisection, returns 1.1x the
// threshold (or the first grid point when G > 0 immediately).
double find_xi0(const Nonlinearity& nl, double s_max = 10.0);

}  // namespace bisolve
