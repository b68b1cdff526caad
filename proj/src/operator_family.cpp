#include "bisolve/operator_family.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "bisolve/numerics.hpp"

namespace bisolve {

std::string to_string(MassRegime r) {
  switch (r) {
    case MassRegime::positive_mass: return "positive mass";
    case MassRegime::zero_mass_large_gamma: return "zero mass (gamma > N)";
    case MassRegime::zero_mass_small_gamma: return "zero mass (gamma <= N)";
  }
  return "?";
}

OperatorFamily OperatorFamily::power(double alpha) {
  if (alpha >= 0.0) throw AdmissibilityError("power family requires alpha < 0");
  OperatorFamily f;
  f.kind_ = Kind::power;
  f.alpha_ = alpha;
  return f;
}

OperatorFamily OperatorFamily::two_term(double beta, double gamma_c) {
  if (beta <= 0.0 || gamma_c < 0.0)
    throw AdmissibilityError("two_term family requires beta > 0, gamma_c >= 0");
  if (beta - gamma_c <= 0.0)
    throw AdmissibilityError("two_term family has a(0) = beta - gamma_c <= 0");
  OperatorFamily f;
  f.kind_ = Kind::two_term;
  f.beta_ = beta;
  f.gamma_c_ = gamma_c;
  return f;
}

OperatorFamily OperatorFamily::constant(double value) {
  if (value <= 0.0) throw AdmissibilityError("constant family requires a > 0");
  OperatorFamily f;
  f.kind_ = Kind::constant;
  f.value_ = value;
  return f;
}

OperatorFamily OperatorFamily::tabulated(std::function<double(double)> a_fn, std::string label) {
  OperatorFamily f;
  f.kind_ = Kind::tabulated;
  f.a_fn_ = std::move(a_fn);
  f.label_ = std::move(label);
  return f;
}

FamilyEval OperatorFamily::eval(double s) const {
  if (s < 0.0) throw std::domain_error("a(s): s < 0");
  if (singular_at_one() && s >= 1.0) throw std::domain_error("a(s): s >= 1 outside family domain");
  FamilyEval e{};
  switch (kind_) {
    case Kind::power: {
      const double om = 1.0 - s;
      e.a = std::pow(om, alpha_);
      e.a_prime = -alpha_ * std::pow(om, alpha_ - 1.0);
      if (alpha_ == -1.0)
        e.A = -std::log1p(-s);
      else
        e.A = (1.0 - std::pow(om, alpha_ + 1.0)) / (alpha_ + 1.0);
      break;
    }
    case Kind::two_term: {
      const double om = 1.0 - s, op = 1.0 + s;
      e.a = beta_ / std::sqrt(om) - gamma_c_ / std::sqrt(op);
      e.a_prime = 0.5 * beta_ * std::pow(om, -1.5) + 0.5 * gamma_c_ * std::pow(op, -1.5);
      e.A = 2.0 * beta_ * (1.0 - std::sqrt(om)) - 2.0 * gamma_c_ * (std::sqrt(op) - 1.0);
      break;
    }
    case Kind::constant:
      e.a = value_;
      e.a_prime = 0.0;
      e.A = value_ * s;
      break;
    case Kind::tabulated: {
      e.a = a_fn_(s);
      const double h = 1e-6 * (1.0 - s);
      if (h > 0.0 && s - h >= 0.0)
        e.a_prime = (a_fn_(s + h) - a_fn_(s - h)) / (2.0 * h);
      else if (h > 0.0)
        e.a_prime = (a_fn_(s + h) - a_fn_(s)) / h;
      else
        e.a_prime = 0.0;
      e.A = adaptive_simpson([this](double t) { return a_fn_(t); }, 0.0, s, 1e-10);
      break;
    }
  }
  if (e.a <= 0.0) throw AdmissibilityError("a(s) <= 0 at s = " + std::to_string(s));
  return e;
}

double OperatorFamily::a(double s) const { return eval(s).a; }
double OperatorFamily::a_prime(double s) const { return eval(s).a_prime; }
double OperatorFamily::primitive(double s) const { return eval(s).A; }

bool OperatorFamily::divergence_screen() const {
  if (!singular_at_one()) return false;
  return a(1.0 - 1e-8) > 1e3 * a(0.0);
}

void OperatorFamily::check_a0(int samples) const {
  const double s_hi = singular_at_one() ? 1.0 - 1e-6 : 4.0;
  auto phi = [this](double s) { return a(s) * s; };
  std::mt19937 rng(20240811u);
  std::uniform_real_distribution<double> unif(0.0, s_hi);
  for (int i = 0; i < samples; ++i) {
    const double s = s_hi * (i + 0.5) / samples;
    if (a(s) <= 0.0) throw AdmissibilityError("a(s) <= 0 at s = " + std::to_string(s));
    double s1 = unif(rng), s2 = unif(rng);
    if (std::abs(s1 - s2) < 1e-9) continue;
    const double gap = 0.5 * (phi(s1) + phi(s2)) - phi(0.5 * (s1 + s2));
    if (!(gap > 0.0) && kind_ != Kind::constant)
      throw AdmissibilityError("a(s)s fails strict midpoint convexity near s = " +
                               std::to_string(0.5 * (s1 + s2)));
    if (kind_ == Kind::constant && gap < 0.0)
      throw AdmissibilityError("a(s)s fails midpoint convexity");
  }
}

std::string OperatorFamily::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::power: os << "power(alpha=" << alpha_ << ")"; break;
    case Kind::two_term: os << "two_term(beta=" << beta_ << ", gamma_c=" << gamma_c_ << ")"; break;
    case Kind::constant: os << "constant(" << value_ << ")"; break;
    case Kind::tabulated: os << "tabulated(" << label_ << ")"; break;
  }
  return os.str();
}

double q_lower_bound(const OperatorFamily& fam, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::domain_error("q_lower_bound: theta outside (0,1)");
  const FamilyEval e = fam.eval(1.0 - theta);
  if (e.a <= 0.0) throw AdmissibilityError("a(1-theta) <= 0");
  return 2.0 * (e.a_prime * (1.0 - theta) + e.a) / e.a;
}

double select_q(const OperatorFamily& fam, double theta, MassRegime regime, double gamma, int N) {
  if (N < 3) throw std::domain_error("select_q: N >= 3 required");
  const double qlb = q_lower_bound(fam, theta);
  switch (regime) {
    case MassRegime::positive_mass:
      return std::max(qlb, static_cast<double>(N + 1));
    case MassRegime::zero_mass_large_gamma: {
      const double lo = std::max(qlb, static_cast<double>(N));
      if (!(lo < gamma))
        throw InfeasibilityError("select_q: interval (max(qlb,N), gamma) = (" + std::to_string(lo) +
                                 ", " + std::to_string(gamma) + ") is empty at theta = " +
                                 std::to_string(theta));
      return 0.5 * (lo + gamma);
    }
    case MassRegime::zero_mass_small_gamma: {
      const double lo = std::max(qlb, static_cast<double>(N) * gamma / (N + gamma));
      if (!(lo < static_cast<double>(N)))
        throw InfeasibilityError("select_q: interval (max(qlb, N*gamma/(N+gamma)), N) empty at theta = " +
                                 std::to_string(theta));
      return 0.5 * (lo + static_cast<double>(N));
    }
  }
  throw std::logic_error("select_q: unknown regime");
}

}  // namespace bisolve
