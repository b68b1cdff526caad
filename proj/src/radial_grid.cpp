#include "bisolve/radial_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "bisolve/numerics.hpp"

namespace bisolve {

RadialGrid::RadialGrid(int N, int M, double R_max, double grading)
    : N_(N), M_(M), grading_(grading) {
  if (N < 3) throw std::domain_error("RadialGrid: N >= 3 required");
  if (M < 256) throw std::domain_error("RadialGrid: M >= 256 required");
  if (R_max < 10.0) throw std::domain_error("RadialGrid: R_max >= 10 required");
  if (!(grading >= 1.0)) throw std::domain_error("RadialGrid: grading >= 1 required");
  nodes_.resize(M + 1);
  for (int i = 0; i <= M; ++i)
    nodes_[i] = R_max * std::pow(static_cast<double>(i) / M, grading);
  nodes_[M] = R_max;
  init_weights();
}

void RadialGrid::init_weights() {
  const int M = M_;
  omega_ = 2.0 * std::pow(M_PI, 0.5 * N_) / std::tgamma(0.5 * N_);
  cell_w_.resize(M);
  for (int i = 0; i < M; ++i)
    cell_w_[i] = omega_ * std::pow(cell_mid(i), N_ - 1) * cell_dr(i);
  node_w_.resize(M + 1);
  for (int i = 0; i <= M; ++i) {
    const double left = i > 0 ? nodes_[i] - nodes_[i - 1] : 0.0;
    const double right = i < M ? nodes_[i + 1] - nodes_[i] : 0.0;
    node_w_[i] = omega_ * std::pow(nodes_[i], N_ - 1) * 0.5 * (left + right);
  }
}

std::shared_ptr<const RadialGrid> RadialGrid::from_nodes(int N, std::vector<double> nodes) {
  if (N < 3) throw std::domain_error("RadialGrid: N >= 3 required");
  if (nodes.size() < 2 || nodes.front() != 0.0)
    throw std::domain_error("RadialGrid: nodes must start at 0");
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (!(nodes[i] > nodes[i - 1]))
      throw std::domain_error("RadialGrid: nodes must be strictly increasing");
  auto g = std::shared_ptr<RadialGrid>(new RadialGrid());
  g->N_ = N;
  g->M_ = static_cast<int>(nodes.size()) - 1;
  g->grading_ = 0.0;
  g->nodes_ = std::move(nodes);
  g->init_weights();
  return g;
}

std::shared_ptr<const RadialGrid> RadialGrid::graded(int N, int M, double R_max, double grading) {
  return std::make_shared<const RadialGrid>(N, M, R_max, grading);
}

std::shared_ptr<const RadialGrid> RadialGrid::uniform(int N, int M, double R_max) {
  return std::make_shared<const RadialGrid>(N, M, R_max, 1.0);
}

double RadialProfile::sup_slope() const {
  double s = 0.0;
  for (int i = 0; i < grid->cells(); ++i) s = std::max(s, std::abs(derivative(i)));
  return s;
}

double RadialProfile::max_abs() const {
  double s = 0.0;
  for (double v : u) s = std::max(s, std::abs(v));
  return s;
}

RadialProfile zero_profile(std::shared_ptr<const RadialGrid> grid) {
  RadialProfile p;
  p.u.assign(grid->cells() + 1, 0.0);
  p.grid = std::move(grid);
  return p;
}

std::map<double, NormPair> norms(const RadialProfile& p, const std::vector<double>& exponents) {
  const RadialGrid& g = *p.grid;
  std::map<double, NormPair> out;
  for (double e : exponents) {
    if (!(e >= 1.0)) throw std::domain_error("norms: exponent < 1");
    double sg = 0.0, sv = 0.0;
    for (int i = 0; i < g.cells(); ++i)
      sg += std::pow(std::abs(p.derivative(i)), e) * g.cell_weight(i);
    for (int i = 0; i <= g.cells(); ++i)
      sv += std::pow(std::abs(p.u[i]), e) * g.node_weight(i);
    out[e] = NormPair{std::pow(sg, 1.0 / e), std::pow(sv, 1.0 / e)};
  }
  return out;
}

double norm_gradient_pair(const RadialProfile& p, double q) {
  auto n = norms(p, {2.0, q});
  const double g2 = n[2.0].grad, gq = n[q].grad;
  return std::sqrt(g2 * g2 + gq * gq);
}

double norm_with_weight(const RadialProfile& p, double q, double gamma) {
  auto n = norms(p, {2.0, q, gamma});
  const double g2 = n[2.0].grad, gq = n[q].grad, vg = n[gamma].val;
  return std::sqrt(g2 * g2 + gq * gq + vg * vg);
}

RadialProfile dilate(const RadialProfile& p, double sigma, bool* support_overflow) {
  if (!(std::abs(sigma) <= 2.0)) throw std::domain_error("dilate: |sigma| > 2");
  const RadialGrid& g = *p.grid;
  const double scale = std::exp(-sigma);

  if (support_overflow) {
    *support_overflow = false;
    const double cap = 1e-14 * p.max_abs();
    for (int i = g.cells(); i >= 0; --i) {
      if (std::abs(p.u[i]) > cap) {
        if (g.r(i) / scale > g.r_max() * (1.0 + 1e-12)) *support_overflow = true;
        break;
      }
    }
  }

  Pchip interp(g.nodes(), p.u);
  RadialProfile out;
  out.grid = p.grid;
  out.u.resize(g.cells() + 1);
  for (int i = 0; i <= g.cells(); ++i) {
    const double arg = scale * g.r(i);
    out.u[i] = arg >= g.r_max() ? 0.0 : interp(arg);
  }
  out.u[g.cells()] = 0.0;
  return out;
}

RadialProfile build_plateau(double xi0, double R, std::shared_ptr<const RadialGrid> grid) {
  if (!(R > 0.0)) throw std::domain_error("build_plateau: R <= 0");
  const double ramp_end = R + std::sqrt(R);
  if (!(ramp_end < grid->r_max()))
    throw std::domain_error("build_plateau: ramp exits the grid (R + sqrt(R) >= R_max)");
  RadialProfile p;
  p.u.resize(grid->cells() + 1);
  for (int i = 0; i <= grid->cells(); ++i) {
    const double r = grid->r(i);
    if (r <= R)
      p.u[i] = xi0;
    else if (r < ramp_end)
      p.u[i] = xi0 * (ramp_end - r) / std::sqrt(R);
    else
      p.u[i] = 0.0;
  }
  p.grid = std::move(grid);
  return p;
}

DecayFit decay_check(const RadialProfile& p, double exponent) {
  if (!(exponent >= 2.0)) throw std::domain_error("decay_check: exponent < 2");
  const RadialGrid& g = *p.grid;
  const double peak = p.max_abs();
  double r_support = 0.0;
  for (int i = g.cells(); i >= 0; --i) {
    if (std::abs(p.u[i]) > 1e-12 * peak) { r_support = g.r(i); break; }
  }
  if (peak == 0.0 || r_support < g.r_max() / 10.0)
    throw NotFoundError("decay_check: insufficient support (profile vanishes before R_max/10)");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int i = 0; i <= g.cells(); ++i) {
    const double r = g.r(i);
    if (r < r_support / 10.0 || r > r_support || !(std::abs(p.u[i]) > 0.0)) continue;
    const double x = std::log(r), y = std::log(std::abs(p.u[i]));
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  if (n < 2) throw NotFoundError("decay_check: fewer than two usable nodes in the outer decade");
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

  const double grad_p = norms(p, {exponent}).at(exponent).grad;
  const double ex = (g.dim() - exponent) / exponent;
  double c = 0.0;
  for (int i = 1; i <= g.cells(); ++i)
    c = std::max(c, std::abs(p.u[i]) * std::pow(g.r(i), ex));
  return DecayFit{c / grad_p, slope};
}

void write_profile_csv(const std::string& path, const RadialProfile& p,
                       const TruncatedOperator& trunc) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  std::fprintf(f, "r,u,du,flux\n");
  const RadialGrid& g = *p.grid;
  for (int i = 0; i <= g.cells(); ++i) {
    const double du = i < g.cells() ? p.derivative(i) : 0.0;
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", g.r(i), p.u[i], du, trunc.flux(du));
  }
  std::fclose(f);
}

RadialProfile read_profile_csv(const std::string& path, int N) {
  std::FILE* f = std::fopen(path.c_str(), "r");
  if (!f) throw std::runtime_error("cannot open " + path);
  char line[512];
  if (!std::fgets(line, sizeof line, f)) {
    std::fclose(f);
    throw std::runtime_error(path + ": empty file");
  }
  std::vector<double> rs, us;
  while (std::fgets(line, sizeof line, f)) {
    double r, u, du, flux;
    if (std::sscanf(line, "%lf,%lf,%lf,%lf", &r, &u, &du, &flux) != 4) continue;
    rs.push_back(r);
    us.push_back(u);
  }
  std::fclose(f);
  if (rs.size() < 2) throw std::runtime_error(path + ": no data rows");
  RadialProfile p;
  p.grid = RadialGrid::from_nodes(N, std::move(rs));
  p.u = std::move(us);
  return p;
}

}  // namespace bisolve
