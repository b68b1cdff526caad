#include "bisolve/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "bisolve/numerics.hpp"

namespace bisolve {

namespace {
double odd_pow(double s, double e) {
  // |s|^{e-1} s, the odd power with exponent e
  if (s == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(s), e), s);
}
}  // namespace

Nonlinearity Nonlinearity::power(double p, int N) {
  if (N < 3) throw std::domain_error("Nonlinearity: N >= 3 required");
  if (!(p > 2.0)) throw std::domain_error("Nonlinearity: p > 2 required");
  Nonlinearity nl;
  nl.kind_ = Kind::power;
  nl.p_ = p;
  nl.gamma_ = p - 1.0;
  nl.m_ = 0.0;
  nl.N_ = N;
  nl.detect_regime();
  return nl;
}

Nonlinearity Nonlinearity::power_minus_mass(double m, double gamma, double p, int N) {
  if (N < 3) throw std::domain_error("Nonlinearity: N >= 3 required");
  if (!(p > 2.0) || !(gamma > 1.0) || m < 0.0)
    throw std::domain_error("Nonlinearity: need p > 2, gamma > 1, m >= 0");
  if (!(p > gamma))
    throw std::domain_error("Nonlinearity: power_minus_mass needs p > gamma");
  if (m == 0.0) return power(p, N);
  Nonlinearity nl;
  nl.kind_ = Kind::power_minus_mass;
  nl.m_ = m;
  nl.gamma_ = gamma;
  nl.p_ = p;
  nl.N_ = N;
  nl.detect_regime();
  return nl;
}

Nonlinearity Nonlinearity::tabulated(std::function<double(double)> g_fn, double m, double gamma,
                                     double p, int N, std::string label) {
  if (N < 3) throw std::domain_error("Nonlinearity: N >= 3 required");
  if (!(gamma > 1.0) || m < 0.0) throw std::domain_error("Nonlinearity: gamma > 1, m >= 0");
  Nonlinearity nl;
  nl.kind_ = Kind::tabulated;
  nl.g_fn_ = std::move(g_fn);
  nl.m_ = m;
  nl.gamma_ = gamma;
  nl.p_ = p;
  nl.N_ = N;
  nl.label_ = std::move(label);
  nl.detect_regime();
  return nl;
}

void Nonlinearity::detect_regime() {
  if (m_ > 0.0) {
    regime_ = MassRegime::positive_mass;
  } else {
    regime_ = gamma_ > static_cast<double>(N_) ? MassRegime::zero_mass_large_gamma
                                               : MassRegime::zero_mass_small_gamma;
  }
}

double Nonlinearity::g(double s) const {
  switch (kind_) {
    case Kind::power: return odd_pow(s, p_ - 1.0);
    case Kind::power_minus_mass: return -m_ * odd_pow(s, gamma_ - 1.0) + odd_pow(s, p_ - 1.0);
    case Kind::tabulated: return g_fn_(s);
  }
  return 0.0;
}

double Nonlinearity::G(double s) const {
  const double as = std::abs(s);
  switch (kind_) {
    case Kind::power: return std::pow(as, p_) / p_;
    case Kind::power_minus_mass:
      return -m_ / gamma_ * std::pow(as, gamma_) + std::pow(as, p_) / p_;
    case Kind::tabulated:
      if (s == 0.0) return 0.0;
      return adaptive_simpson([this](double t) { return g_fn_(t); }, 0.0, as, 1e-10);
  }
  return 0.0;
}

double Nonlinearity::g_prime(double s) const {
  const double as = std::abs(s);
  switch (kind_) {
    case Kind::power: return (p_ - 1.0) * std::pow(as, p_ - 2.0);
    case Kind::power_minus_mass:
      return -m_ * (gamma_ - 1.0) * std::pow(as, gamma_ - 2.0) +
             (p_ - 1.0) * std::pow(as, p_ - 2.0);
    case Kind::tabulated: {
      const double h = 1e-6 * std::max(1.0, as);
      return (g_fn_(s + h) - g_fn_(s - h)) / (2.0 * h);
    }
  }
  return 0.0;
}

GEval Nonlinearity::eval(double s) const {
  const double sign = s < 0.0 ? -1.0 : 1.0;
  const double as = std::abs(s);
  GEval e{};
  e.g = g(s);
  e.G = G(s);
  const double ga = sign * e.g;  // g(|s|)
  double g1_abs, G1_abs;
  if (regime_ == MassRegime::positive_mass) {
    const double shifted = ga + m_ * std::pow(as, gamma_ - 1.0);
    g1_abs = std::max(shifted, 0.0);
    if (kind_ == Kind::power_minus_mass) {
      G1_abs = std::pow(as, p_) / p_;
    } else {
      G1_abs = as == 0.0 ? 0.0
                         : adaptive_simpson(
                               [this](double t) {
                                 return std::max(g_fn_(t) + m_ * std::pow(t, gamma_ - 1.0), 0.0);
                               },
                               0.0, as, 1e-10);
    }
  } else {
    g1_abs = std::max(ga, 0.0);
    if (kind_ == Kind::power) {
      G1_abs = std::pow(as, p_) / p_;
    } else {
      G1_abs = as == 0.0 ? 0.0
                         : adaptive_simpson(
                               [this](double t) { return std::max(g_fn_(t), 0.0); }, 0.0, as,
                               1e-10);
    }
  }
  e.g1 = sign * g1_abs;
  e.g2 = e.g1 - e.g;
  e.G1 = G1_abs;
  e.G2 = e.G1 - e.G;
  return e;
}

std::string Nonlinearity::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::power: os << "power(p=" << p_ << ")"; break;
    case Kind::power_minus_mass:
      os << "power_minus_mass(m=" << m_ << ", gamma=" << gamma_ << ", p=" << p_ << ")";
      break;
    case Kind::tabulated: os << "tabulated(" << label_ << ")"; break;
  }
  os << " N=" << N_ << " [" << to_string(regime_) << "]";
  return os.str();
}

std::string to_string(RegimeReport::Verdict v) {
  switch (v) {
    case RegimeReport::Verdict::accepted: return "accepted";
    case RegimeReport::Verdict::accepted_truncated_only: return "accepted-truncated-only";
    case RegimeReport::Verdict::rejected: return "rejected";
  }
  return "?";
}

RegimeReport classify_regime(const Nonlinearity& nl) {
  RegimeReport rep;
  rep.gamma = nl.gamma();
  const double gamma = nl.gamma();
  const double two_star = nl.two_star();
  const int N = nl.dim();

  std::vector<double> ratios;
  for (int k = 4; k <= 40; ++k) {
    const double s = std::ldexp(1.0, -k);
    ratios.push_back(nl.g(s) / std::pow(s, gamma - 1.0));
  }
  const std::size_t n = ratios.size();
  double lo = ratios[n - 8], hi = ratios[n - 8];
  for (std::size_t i = n - 8; i < n; ++i) {
    lo = std::min(lo, ratios[i]);
    hi = std::max(hi, ratios[i]);
  }
  const double last = ratios[n - 1];
  const bool rel_settled = hi - lo <= 0.01 * std::max(1e-30, std::abs(last));
  const bool decayed = std::abs(last) < 1e-8 && std::abs(ratios[n - 2]) < 1e-8;

  if (rel_settled && last < 0.0) {
    rep.regime = MassRegime::positive_mass;
    rep.m_detected = -last;
    if (std::abs(rep.m_detected - nl.m()) > 1e-2 * std::max(1.0, nl.m())) {
      rep.verdict = RegimeReport::Verdict::rejected;
      rep.reason = "detected mass " + std::to_string(rep.m_detected) +
                   " disagrees with declared m = " + std::to_string(nl.m());
      return rep;
    }
    if (gamma >= 0.5 * two_star) {
      rep.verdict = RegimeReport::Verdict::accepted;
    } else {
      rep.verdict = RegimeReport::Verdict::accepted_truncated_only;
      rep.reason = "gamma = " + std::to_string(gamma) + " below 2*/2 = " +
                   std::to_string(0.5 * two_star) + "; untruncated limit not covered";
    }
  } else if (decayed) {
    rep.regime = gamma > static_cast<double>(N) ? MassRegime::zero_mass_large_gamma
                                                : MassRegime::zero_mass_small_gamma;
    rep.m_detected = 0.0;
    if (nl.m() > 0.0) {
      rep.verdict = RegimeReport::Verdict::rejected;
      rep.reason = "small-s ratios vanish but declared m = " + std::to_string(nl.m()) + " > 0";
      return rep;
    }
    if (gamma > two_star) {
      rep.verdict = RegimeReport::Verdict::accepted;
    } else {
      rep.verdict = RegimeReport::Verdict::accepted_truncated_only;
      rep.reason = "gamma = " + std::to_string(gamma) + " not above 2* = " +
                   std::to_string(two_star) + "; untruncated limit not covered";
    }
    if (rep.regime == MassRegime::zero_mass_small_gamma) {
      const double q_mid = 0.5 * (static_cast<double>(N) * gamma / (N + gamma) + N);
      rep.q_star = q_mid * N / (N - q_mid);
      double prev = 0.0;
      bool growing = false;
      for (int k = 1; k <= 20; ++k) {
        const double s = std::ldexp(1.0, k);
        const double rho = nl.g(s) / std::pow(s, rep.q_star - 1.0);
        rep.c3 = std::max(rep.c3, rho);
        if (k > 12 && rho > prev * (1.0 + 1e-9) && rho > 1e3) growing = true;
        prev = rho;
      }
      if (growing) {
        rep.verdict = RegimeReport::Verdict::rejected;
        rep.reason = "large-s growth exceeds the critical rate q* = " + std::to_string(rep.q_star);
        return rep;
      }
    }
  } else {
    rep.verdict = RegimeReport::Verdict::rejected;
    rep.reason = "g(s)/s^{gamma-1} neither settles to a negative limit nor decays to 0 "
                 "(last ratio " + std::to_string(last) + ")";
    return rep;
  }

  const double pexp = nl.p();
  for (int i = 1; i <= 200; ++i) {
    const double s = 10.0 * i / 200.0;
    const GEval e = nl.eval(s);
    rep.c1 = std::max(rep.c1, e.g1 / (std::pow(s, gamma - 1.0) + std::pow(s, pexp - 1.0)));
    rep.c2 = std::max(rep.c2, e.G1 / (std::pow(s, gamma) + std::pow(s, pexp)));
  }
  return rep;
}

double find_xi0(const Nonlinearity& nl, double s_max) {
  if (!(s_max > 0.0)) throw std::domain_error("find_xi0: s_max <= 0");
  const int M = 10000;
  int first = -1;
  for (int i = 1; i <= M; ++i) {
    if (nl.G(s_max * i / M) > 0.0) { first = i; break; }
  }
  if (first < 0)
    throw NotFoundError("find_xi0: G <= 0 on (0, " + std::to_string(s_max) + "]");
  if (first == 1) return s_max / M;
  double a = s_max * (first - 1) / M, b = s_max * first / M;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (a + b);
    (nl.G(mid) > 0.0 ? b : a) = mid;
  }
  return 1.1 * 0.5 * (a + b);
}

}  // namespace bisolve
