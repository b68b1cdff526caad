#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bisolve/truncated_operator.hpp"
#include "bisolve/types.hpp"

namespace bisolve {

// Nodes r_i = R_max (i/M)^grading, i = 0..M, with the N-dimensional surface
// weight omega r^{N-1} baked into every integral.  Immutable; profiles hold
// it by shared pointer so copies stay cheap.
class RadialGrid {
 public:
  RadialGrid(int N, int M, double R_max, double grading);

  static std::shared_ptr<const RadialGrid> graded(int N, int M = 2048, double R_max = 40.0,
                                                  double grading = 1.5);
  static std::shared_ptr<const RadialGrid> uniform(int N, int M, double R_max);
  // Explicit node list (CSV ingest); only monotonicity is enforced.
  static std::shared_ptr<const RadialGrid> from_nodes(int N, std::vector<double> nodes);

  int dim() const { return N_; }
  int cells() const { return M_; }
  double r(int i) const { return nodes_[i]; }
  double r_max() const { return nodes_.back(); }
  double grading() const { return grading_; }
  const std::vector<double>& nodes() const { return nodes_; }

  double omega() const { return omega_; }              // |S^{N-1}|
  double cell_mid(int i) const { return 0.5 * (nodes_[i] + nodes_[i + 1]); }
  double cell_dr(int i) const { return nodes_[i + 1] - nodes_[i]; }
  // Midpoint-rule weight for gradient integrals over cell i.
  double cell_weight(int i) const { return cell_w_[i]; }
  // Trapezoid weight for value integrals at node i.
  double node_weight(int i) const { return node_w_[i]; }

 private:
  RadialGrid() = default;
  void init_weights();

  int N_ = 3, M_ = 0;
  double grading_;
  double omega_;
  std::vector<double> nodes_, cell_w_, node_w_;
};

struct RadialProfile {
  std::shared_ptr<const RadialGrid> grid;
  std::vector<double> u;  // size M+1; u[M] = 0

  double derivative(int cell) const {
    return (u[cell + 1] - u[cell]) / grid->cell_dr(cell);
  }
  double sup_slope() const;
  double max_abs() const;
};

RadialProfile zero_profile(std::shared_ptr<const RadialGrid> grid);

struct NormPair {
  double grad;  // |grad u|_e
  double val;   // |u|_e
};

// Weighted Lebesgue norms: gradients by midpoint rule on cells, values by
// trapezoid on nodes, both over R^N.
std::map<double, NormPair> norms(const RadialProfile& p, const std::vector<double>& exponents);
// (|grad u|_2^2 + |grad u|_q^2)^{1/2}
double norm_gradient_pair(const RadialProfile& p, double q);
// (|grad u|_2^2 + |grad u|_q^2 + |u|_gamma^2)^{1/2}
double norm_with_weight(const RadialProfile& p, double q, double gamma);

// u(e^{-sigma} r) resampled on the same grid by monotone cubic interpolation.
// |sigma| <= 2; sets *support_overflow when the dilated support would exceed
// R_max.
RadialProfile dilate(const RadialProfile& p, double sigma, bool* support_overflow = nullptr);

// Flat level xi0 out to R, linear ramp to 0 over [R, R + sqrt(R)].
RadialProfile build_plateau(double xi0, double R, std::shared_ptr<const RadialGrid> grid);

struct DecayFit {
  double C_fit;
  double slope;
};

// Least-squares slope of log|u| against log r over the outer decade of the
// support, plus the constant in the pointwise decay bound
// |u(r)| <= C r^{-(N-p)/p} |grad u|_p.
DecayFit decay_check(const RadialProfile& p, double exponent);

// CSV rows "r,u,du,flux" with du the cell slope below each node's row and
// flux = a_theta(du^2) du; %.17g so a read/write cycle is byte-identical.
void write_profile_csv(const std::string& path, const RadialProfile& p,
                       const TruncatedOperator& trunc);
RadialProfile read_profile_csv(const std::string& path, int N);

}  // namespace bisolve
