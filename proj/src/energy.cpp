#include "bisolve/energy.hpp"

#include <algorithm>
#include <cmath>

#include "bisolve/numerics.hpp"

namespace bisolve {

namespace {

struct Integrals {
  double A = 0;        // int A_theta(|grad u|^2)
  double a_grad = 0;   // int a_theta(|grad u|^2)|grad u|^2
  double G1 = 0, G2 = 0;
  double g1u = 0, g2u = 0;
};

Integrals collect(const TruncatedOperator& trunc, const Nonlinearity& nl,
                  const RadialProfile& p, double scale2) {
  // scale2 multiplies |grad u|^2 inside the operator (dilation factor).
  const RadialGrid& g = *p.grid;
  Integrals q;
  for (int i = 0; i < g.cells(); ++i) {
    const double du = p.derivative(i);
    const double s = scale2 * du * du;
    const TruncEval te = trunc.eval(s);
    q.A += te.A_theta * g.cell_weight(i);
    q.a_grad += te.a_theta * du * du * g.cell_weight(i);
  }
  for (int i = 0; i <= g.cells(); ++i) {
    const double w = g.node_weight(i);
    if (w == 0.0) continue;
    const GEval ge = nl.eval(p.u[i]);
    q.G1 += ge.G1 * w;
    q.G2 += ge.G2 * w;
    q.g1u += ge.g1 * p.u[i] * w;
    q.g2u += ge.g2 * p.u[i] * w;
  }
  return q;
}

double rel(double raw, std::initializer_list<double> parts) {
  double scale = 1e-300;
  for (double v : parts) scale = std::max(scale, std::abs(v));
  return raw == 0.0 ? 0.0 : raw / scale;
}

}  // namespace

RadialProfile el_gradient(const TruncatedOperator& trunc, const Nonlinearity& nl,
                          const RadialProfile& p) {
  const RadialGrid& g = *p.grid;
  const int M = g.cells();
  RadialProfile res = zero_profile(p.grid);
  std::vector<double> cflux(M);
  for (int j = 0; j < M; ++j) {
    const double du = p.derivative(j);
    cflux[j] = g.cell_weight(j) / g.cell_dr(j) * trunc.a_theta(du * du) * du;
  }
  for (int i = 1; i < M; ++i) {
    const double didu = cflux[i - 1] - cflux[i] - g.node_weight(i) * nl.g(p.u[i]);
    res.u[i] = didu / g.node_weight(i);
  }
  return res;
}

int el_polish(const TruncatedOperator& trunc, const Nonlinearity& nl, RadialProfile& p,
              int max_iter, double tol) {
  const RadialGrid& g = *p.grid;
  const int M = g.cells();
  const int n = M;  // unknowns u_0 .. u_{M-1}

  auto residual = [&](const std::vector<double>& u, std::vector<double>& F) {
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
      const double unext = i + 1 == M ? 0.0 : u[i + 1];
      const double du = (unext - u[i]) / g.cell_dr(i);
      const double cf = g.cell_weight(i) / g.cell_dr(i) * trunc.a_theta(du * du) * du;
      F[i] = prev - cf - g.node_weight(i) * nl.g(u[i]);
      prev = cf;
    }
  };
  // Newton progress is tracked in F-space; convergence is judged on the
  // volume-normalized residual so tiny near-origin weights cannot hide a
  // large pointwise defect.
  auto norm_sup = [&](const std::vector<double>& u, const std::vector<double>& F) {
    double s = std::abs(F[0]) / (g.cell_weight(0) / g.cell_dr(0));
    for (int i = 1; i < n; ++i) s = std::max(s, std::abs(F[i]) / g.node_weight(i));
    double gs = 1.0;
    for (int i = 0; i < n; ++i) gs = std::max(gs, std::abs(nl.g(u[i])));
    return s / gs;
  };
  auto sup = [](const std::vector<double>& F) {
    double s = 0;
    for (double v : F) s = std::max(s, std::abs(v));
    return s;
  };

  std::vector<double> u(p.u.begin(), p.u.begin() + n);
  std::vector<double> F(n), Fn(n), lower(n), diag(n), upper(n), rhs(n), trial(n);
  residual(u, F);
  double fnorm = sup(F);

  int it = 0;
  for (; it < max_iter && norm_sup(u, F) > tol; ++it) {
    std::vector<double> S(n);
    for (int i = 0; i < n; ++i) {
      const double unext = i + 1 == M ? 0.0 : u[i + 1];
      const double du = (unext - u[i]) / g.cell_dr(i);
      S[i] = g.cell_weight(i) / (g.cell_dr(i) * g.cell_dr(i)) * trunc.flux_prime(du);
    }
    for (int i = 0; i < n; ++i) {
      lower[i] = i > 0 ? -S[i - 1] : 0.0;
      diag[i] = (i > 0 ? S[i - 1] : 0.0) + S[i] - g.node_weight(i) * nl.g_prime(u[i]);
      upper[i] = i + 1 < n ? -S[i] : 0.0;
      rhs[i] = -F[i];
    }
    for (int i = 0; i < n; ++i)
      if (std::abs(diag[i]) < 1e-14 * S[i]) diag[i] += 1e-8 * S[i];
    tridiag_solve(lower, diag, upper, rhs);

    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls, t *= 0.5) {
      for (int i = 0; i < n; ++i) trial[i] = u[i] + t * rhs[i];
      residual(trial, Fn);
      const double fn = sup(Fn);
      if (std::isfinite(fn) && fn < fnorm) {
        u = trial;
        F = Fn;
        fnorm = fn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  std::copy(u.begin(), u.end(), p.u.begin());
  p.u[M] = 0.0;
  return it;
}

EnergyBreakdown energy(const TruncatedOperator& trunc, const Nonlinearity& nl,
                       const RadialProfile& p) {
  const Integrals q = collect(trunc, nl, p, 1.0);
  EnergyBreakdown e;
  e.kinetic = 0.5 * q.A;
  e.G1_int = q.G1;
  e.G2_int = q.G2;
  e.total = e.kinetic + e.G2_int - e.G1_int;
  e.a_grad_int = q.a_grad;

  e.nehari_residual = rel(q.a_grad + q.g2u - q.g1u, {q.a_grad, q.g1u, q.g2u});
  const int N = p.grid->dim();
  const double poho = 0.5 * N * q.A - q.a_grad + N * (q.G2 - q.G1);
  e.pohozaev_residual = rel(poho, {0.5 * N * q.A, q.a_grad, N * q.G1, N * q.G2});

  const RadialProfile r = el_gradient(trunc, nl, p);
  for (double v : r.u) e.el_residual_sup = std::max(e.el_residual_sup, std::abs(v));
  return e;
}

JEval j_and_dsigma(const TruncatedOperator& trunc, const Nonlinearity& nl, double sigma,
                   const RadialProfile& p) {
  if (!(std::abs(sigma) <= 2.0)) throw std::domain_error("j_and_dsigma: |sigma| > 2");
  const int N = p.grid->dim();
  const double eN = std::exp(N * sigma);
  const double eNm2 = std::exp((N - 2.0) * sigma);
  const Integrals q = collect(trunc, nl, p, std::exp(-2.0 * sigma));
  const double gnet = q.G2 - q.G1;
  JEval out;
  out.J = eN * (0.5 * q.A + gnet);
  out.dJ_dsigma = 0.5 * N * eN * q.A - eNm2 * q.a_grad + N * eN * gnet;
  return out;
}

SigmaCurvature j_sigma_curvature(const TruncatedOperator& trunc, const Nonlinearity& nl,
                                 double sigma, const RadialProfile& p) {
  if (!(std::abs(sigma) <= 2.0)) throw std::domain_error("j_sigma_curvature: |sigma| > 2");
  const RadialGrid& g = *p.grid;
  const int N = g.dim();
  const double eN = std::exp(N * sigma);
  const double eNm2 = std::exp((N - 2.0) * sigma);
  const double eNm4 = std::exp((N - 4.0) * sigma);
  const double sc = std::exp(-2.0 * sigma);

  double QA = 0, Qa = 0, Qb = 0;
  for (int i = 0; i < g.cells(); ++i) {
    const double du = p.derivative(i);
    const double du2 = du * du;
    const double s = sc * du2;
    QA += trunc.A_theta(s) * g.cell_weight(i);
    Qa += trunc.a_theta(s) * du2 * g.cell_weight(i);
    Qb += trunc.a_theta_prime(s) * du2 * du2 * g.cell_weight(i);
  }
  double Gnet = 0;
  for (int i = 0; i <= g.cells(); ++i) {
    const double w = g.node_weight(i);
    if (w == 0.0) continue;
    const GEval ge = nl.eval(p.u[i]);
    Gnet += (ge.G2 - ge.G1) * w;
  }
  SigmaCurvature out;
  out.J = eN * (0.5 * QA + Gnet);
  out.dJ = 0.5 * N * eN * QA - eNm2 * Qa + N * eN * Gnet;
  out.d2J = 0.5 * N * N * eN * QA - (2.0 * N - 2.0) * eNm2 * Qa + 2.0 * eNm4 * Qb +
            N * N * eN * Gnet;
  return out;
}

IdentityResiduals identity_residuals(const TruncatedOperator& trunc, const Nonlinearity& nl,
                                     const RadialProfile& p, double m_level) {
  const Integrals q = collect(trunc, nl, p, 1.0);
  const int N = p.grid->dim();
  IdentityResiduals out;
  out.nehari = rel(q.a_grad + q.g2u - q.g1u, {q.a_grad, q.g1u, q.g2u});
  const double poho = 0.5 * N * q.A - q.a_grad + N * (q.G2 - q.G1);
  out.pohozaev = rel(poho, {0.5 * N * q.A, q.a_grad, N * q.G1, N * q.G2});
  out.energy_id = rel(q.a_grad - N * m_level, {q.a_grad, N * m_level});
  return out;
}

double dirichlet_functional(const TruncatedOperator& trunc, const RadialProfile& p) {
  const RadialGrid& g = *p.grid;
  double s = 0;
  for (int i = 0; i < g.cells(); ++i) {
    const double du = p.derivative(i);
    s += trunc.a_theta(du * du) * du * du * g.cell_weight(i);
  }
  return s;
}

}  // namespace bisolve
