#pragma once

// Small numeric kernels shared across modules: adaptive Simpson quadrature,
// monotone cubic (Fritsch-Carlson) interpolation, and a safeguarded
// bisection/secant root refiner.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace bisolve {

namespace detail {
template <class F>
double simpson_step(F&& f, double a, double fa, double b, double fb, double m, double fm,
                    double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

// Adaptive Simpson on [a,b]; tol is treated as relative to the running estimate
// with a small absolute floor.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double rel_tol = 1e-10) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b);
  const double m = 0.5 * (a + b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = rel_tol * std::max(std::abs(whole), 1e-30);
  return detail::simpson_step(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

// Monotone piecewise-cubic interpolant (Fritsch-Carlson slopes).
class Pchip {
 public:
  Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    d_.assign(n, 0.0);
    if (n < 2) return;
    std::vector<double> h(n - 1), s(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      s[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_[0] = s[0];
    d_[n - 1] = s[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (s[i - 1] * s[i] <= 0.0) {
        d_[i] = 0.0;
      } else {
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        d_[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
      }
    }
  }

  double operator()(double xq) const {
    const std::size_t n = x_.size();
    if (n == 0) return 0.0;
    if (xq <= x_.front()) return y_.front();
    if (xq >= x_.back()) return y_.back();
    std::size_t lo = std::upper_bound(x_.begin(), x_.end(), xq) - x_.begin() - 1;
    const double h = x_[lo + 1] - x_[lo];
    const double t = (xq - x_[lo]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * y_[lo] + h * h10 * d_[lo] + h01 * y_[lo + 1] + h * h11 * d_[lo + 1];
  }

 private:
  std::vector<double> x_, y_, d_;
};

// Thomas elimination for a diagonally dominant tridiagonal system; all
// arrays are modified, the solution lands in rhs.
inline void tridiag_solve(std::vector<double>& lower, std::vector<double>& diag,
                          std::vector<double>& upper, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = lower[i] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

// Tridiagonal solve with partial pivoting (fill-in limited to a second
// superdiagonal); safe for indefinite systems.  Returns false on a zero
// pivot.
inline bool tridiag_solve_pivot(std::vector<double> lower, std::vector<double> diag,
                                std::vector<double> upper, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  std::vector<double> upper2(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(lower[i + 1]) > std::abs(diag[i])) {
      std::swap(diag[i], lower[i + 1]);
      std::swap(upper[i], diag[i + 1]);
      if (i + 2 < n) std::swap(upper2[i], upper[i + 1]);
      std::swap(rhs[i], rhs[i + 1]);
    }
    if (diag[i] == 0.0) return false;
    const double m = lower[i + 1] / diag[i];
    diag[i + 1] -= m * upper[i];
    if (i + 2 < n) upper[i + 1] -= m * upper2[i];
    rhs[i + 1] -= m * rhs[i];
  }
  if (diag[n - 1] == 0.0) return false;
  for (std::size_t i = n; i-- > 0;) {
    double v = rhs[i];
    if (i + 1 < n) v -= upper[i] * rhs[i + 1];
    if (i + 2 < n) v -= upper2[i] * rhs[i + 2];
    rhs[i] = v / diag[i];
  }
  return true;
}

// Cubic Hermite evaluation on sorted sample points with known slopes; exact
// slopes (from an ODE right-hand side) make this one order better than
// estimating them from the data.  Queries outside the range clamp to the end
// values.
inline double hermite_eval(const std::vector<double>& x, const std::vector<double>& y,
                           const std::vector<double>& d, double xq) {
  if (x.empty()) return 0.0;
  if (xq <= x.front()) return y.front();
  if (xq >= x.back()) return y.back();
  std::size_t lo = std::upper_bound(x.begin(), x.end(), xq) - x.begin() - 1;
  const double h = x[lo + 1] - x[lo];
  const double t = (xq - x[lo]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y[lo] + h * (t3 - 2 * t2 + t) * d[lo] +
         (-2 * t3 + 3 * t2) * y[lo + 1] + h * (t3 - t2) * d[lo + 1];
}

// Root of f on a bracket [lo, hi] with f(lo) <= 0 <= f(hi): bisection with
// secant acceleration, absolute tolerance in the argument.
template <class F>
double bracketed_root(F&& f, double lo, double hi, double flo, double fhi, double x_tol) {
  for (int it = 0; it < 200 && hi - lo > x_tol; ++it) {
    double mid;
    if (fhi != flo) {
      mid = lo - flo * (hi - lo) / (fhi - flo);  // secant
      const double margin = 0.01 * (hi - lo);
      if (!(mid > lo + margin && mid < hi - margin)) mid = 0.5 * (lo + hi);
    } else {
      mid = 0.5 * (lo + hi);
    }
    const double fm = f(mid);
    if (fm <= 0.0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace bisolve
