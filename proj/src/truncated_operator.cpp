#include "bisolve/truncated_operator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bisolve {

TruncatedOperator TruncatedOperator::build(OperatorFamily base, double theta, double theta1,
                                           double q) {
  if (!(theta1 > 0.0 && theta1 < 1.0))
    throw std::domain_error("TruncatedOperator: theta1 outside (0,1)");
  if (!(theta > 0.0 && theta <= theta1))
    throw std::domain_error("TruncatedOperator: theta outside (0, theta1]");
  if (!(q > 2.0)) throw std::domain_error("TruncatedOperator: q <= 2");
  const double qlb = q_lower_bound(base, theta);
  if (q < qlb - 1e-9)
    throw InfeasibilityError("TruncatedOperator: q = " + std::to_string(q) +
                             " below the convexity threshold " + std::to_string(qlb) +
                             " at theta = " + std::to_string(theta));
  TruncatedOperator t;
  t.base_ = std::move(base);
  t.theta_ = theta;
  t.theta1_ = theta1;
  t.q_ = q;
  const FamilyEval j = t.base_.eval(1.0 - theta);
  t.junction_a_ = j.a;
  t.junction_slope_ = j.a_prime;
  t.A_junction_ = j.A;
  t.c_ = std::pow(1.0 - theta, -0.5 * (q - 2.0)) * j.a;
  return t;
}

TruncatedOperator TruncatedOperator::bypass(OperatorFamily base) {
  if (base.singular_at_one())
    throw std::logic_error("bypass mode requires a bounded family");
  TruncatedOperator t;
  t.base_ = std::move(base);
  t.bypass_ = true;
  return t;
}

double TruncatedOperator::a_theta(double s) const {
  if (bypass_ || s <= 1.0 - theta_) return base_.a(s);
  return c_ * std::pow(s, 0.5 * (q_ - 2.0));
}

double TruncatedOperator::A_theta(double s) const {
  if (bypass_ || s <= 1.0 - theta_) return base_.primitive(s);
  const double sj = 1.0 - theta_;
  return A_junction_ + c_ * (2.0 / q_) * (std::pow(s, 0.5 * q_) - std::pow(sj, 0.5 * q_));
}

double TruncatedOperator::a_theta_prime(double s) const {
  if (bypass_ || s <= 1.0 - theta_) return base_.a_prime(s);
  return c_ * 0.5 * (q_ - 2.0) * std::pow(s, 0.5 * (q_ - 4.0));
}

TruncEval TruncatedOperator::eval(double s) const {
  if (s < 0.0) throw std::domain_error("a_theta(s): s < 0");
  return TruncEval{a_theta(s), A_theta(s)};
}

double TruncatedOperator::flux(double x) const {
  return a_theta(x * x) * x;
}

double TruncatedOperator::flux_prime(double x) const {
  const double s = x * x;
  return a_theta(s) + 2.0 * s * a_theta_prime(s);
}

double TruncatedOperator::flux_invert(double w) const {
  if (w == 0.0) return 0.0;
  const double aw = std::abs(w);
  const double sign = w > 0.0 ? 1.0 : -1.0;

  double lo = 0.0, hi, x;
  if (bypass_) {
    x = aw / base_.a(0.0);
    hi = x;
    while (flux(hi) < aw) hi *= 2.0;
  } else {
    const double xj = std::sqrt(1.0 - theta_);
    const double wj = junction_a_ * xj;
    if (aw <= wj) {
      hi = xj;
      if (base_.kind() == OperatorFamily::Kind::power && base_.alpha() == -0.5)
        x = aw / std::sqrt(1.0 + aw * aw);
      else
        x = std::min(xj, aw / base_.a(0.0));
    } else {
      x = std::pow(aw / c_, 1.0 / (q_ - 1.0));
      lo = xj;
      hi = 2.0 * x;
      while (flux(hi) < aw) hi *= 2.0;
    }
  }

  for (int it = 0; it < 100; ++it) {
    const double f = flux(x) - aw;
    if (f > 0.0) hi = x; else lo = x;
    const double fp = flux_prime(x);
    double step = fp > 0.0 ? -f / fp : 0.0;
    double xn = x + step;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) < 1e-13 * std::max(1.0, std::abs(x))) { x = xn; break; }
    x = xn;
  }
  return sign * x;
}

SandwichConstants sandwich_constants(const TruncatedOperator& trunc) {
  if (trunc.is_bypass())
    throw std::logic_error("sandwich constants are undefined in bypass mode");
  const double q = trunc.q();
  const double theta1 = trunc.theta1();
  const double s1 = 1.0 - theta1;

  double min_a = trunc.base().a(0.0);
  const int mgrid = 4096;
  for (int i = 1; i <= mgrid; ++i)
    min_a = std::min(min_a, trunc.base().a(s1 * i / mgrid));
  const double p = std::pow(s1, 0.5 * (q - 2.0));
  const double c_bar = (2.0 / q) * p / (1.0 + p * p) * min_a;

  auto ratio = [&](double x) {
    const double s = x * x;
    return trunc.a_theta(s) * s / (s + std::pow(x, q));
  };
  double best = std::max(trunc.base().a(0.0), trunc.tail_coefficient());
  const int rgrid = 2048;
  for (int i = 0; i <= rgrid; ++i) {
    const double x = std::pow(10.0, -8.0 + 12.0 * i / rgrid);
    best = std::max(best, ratio(x));
  }
  const double c_bar_theta = 1.1 * best;

  auto check = [&](double x) {
    if (x <= 0.0) return;
    const double s = x * x;
    const double mid = trunc.a_theta(s) * s;
    const double env = s + std::pow(x, q);
    if (c_bar * env > mid * (1.0 + 1e-12) || mid > c_bar_theta * env * (1.0 + 1e-12))
      throw VerificationError("sandwich bound violated at slope " + std::to_string(x));
  };
  for (int i = 1; i <= 500; ++i) check(std::pow(10.0, -6.0 + 7.0 * (i - 1) / 499.0));
  for (int i = 1; i <= 498; ++i) check(4.0 * i / 498.0);
  check(std::sqrt(1.0 - trunc.theta()));
  check(1.0 - trunc.theta());
  return SandwichConstants{c_bar, c_bar_theta};
}

}  // namespace bisolve
