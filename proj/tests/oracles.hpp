#pragma once

// Reference computations the unit tests compare the library against.  These
// deliberately share no code with src/: quadrature is Romberg on uniform
// panels, the ODE oracle is fixed-step classical RK4 on the expanded scalar
// equation, and derivatives are plain centered differences.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

// Romberg integration on [a, b]; refines until two diagonal entries agree.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int max_level = 22) {
  std::vector<double> row(1, 0.5 * (b - a) * (f(a) + f(b)));
  double prev = row[0];
  for (int level = 1; level <= max_level; ++level) {
    const int panels = 1 << level;
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int i = 1; i < panels; i += 2) sum += f(a + i * h);
    std::vector<double> next(level + 1);
    next[0] = 0.5 * row[0] + h * sum;
    double pow4 = 1.0;
    for (int j = 1; j <= level; ++j) {
      pow4 *= 4.0;
      next[j] = next[j - 1] + (next[j - 1] - row[j - 1]) / (pow4 - 1.0);
    }
    if (level > 3 && std::abs(next[level] - prev) <= tol * std::max(1.0, std::abs(next[level])))
      return next[level];
    prev = next[level];
    row = std::move(next);
  }
  return prev;
}

inline double centered_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Classical scalar field equation u'' + ((N-1)/r) u' = -g(u) with a == 1,
// integrated by fixed-step RK4 from the origin series u ~ xi - g(xi) r^2 / (2N).
// Returns +1 when u crosses zero (overshoot), -1 when u' turns positive while
// u > 0 (undershoot), 0 when |u| + |u'| drops below 1e-10 (converged).
struct LaplacianShot {
  int outcome;
  double u_end;
  double r_end;
};

inline LaplacianShot laplacian_shoot(const std::function<double(double)>& g, int N, double xi,
                                     double r_max, double h) {
  double r = 1e-8;
  double u = xi - g(xi) * r * r / (2.0 * N);
  double v = -g(xi) * r / N;
  auto f = [&](double rr, double uu, double vv, double& du, double& dv) {
    du = vv;
    dv = -g(uu) - (N - 1) / rr * vv;
  };
  while (r < r_max) {
    double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
    f(r, u, v, k1u, k1v);
    f(r + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v, k2u, k2v);
    f(r + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v, k3u, k3v);
    f(r + h, u + h * k3u, v + h * k3v, k4u, k4v);
    u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    r += h;
    if (u <= 0.0) return {+1, u, r};
    if (v > 0.0) return {-1, u, r};
    if (std::abs(u) + std::abs(v) < 1e-10) return {0, u, r};
  }
  return {0, u, r};
}

// Ground-state height for the a == 1 equation by bisecting the shoot outcome.
inline double laplacian_ground_height(const std::function<double(double)>& g, int N,
                                      double xi_lo, double xi_hi, double r_max, double h,
                                      double tol = 1e-10) {
  int lo = laplacian_shoot(g, N, xi_lo, r_max, h).outcome;
  int hi = laplacian_shoot(g, N, xi_hi, r_max, h).outcome;
  if (lo != -1 || hi != +1) throw std::runtime_error("oracle bracket invalid");
  while (xi_hi - xi_lo > tol) {
    const double mid = 0.5 * (xi_lo + xi_hi);
    (laplacian_shoot(g, N, mid, r_max, h).outcome == +1 ? xi_hi : xi_lo) = mid;
  }
  return 0.5 * (xi_lo + xi_hi);
}

}  // namespace oracle
