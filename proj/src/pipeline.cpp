#include "bisolve/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "bisolve/types.hpp"

namespace bisolve {

namespace {

double flux_bound_of(const TruncatedOperator& trunc, const RadialProfile& p) {
  double m = 0.0;
  for (int j = 0; j < p.grid->cells(); ++j) {
    const double du = p.derivative(j);
    m = std::max(m, std::abs(trunc.a_theta(du * du) * du));
  }
  return m;
}

double origin_flux_of(const TruncatedOperator& trunc, const RadialProfile& p) {
  const RadialGrid& g = *p.grid;
  const double du0 = p.derivative(0);
  const double w0 = trunc.a_theta(du0 * du0) * du0;
  const double wmax = flux_bound_of(trunc, p);
  if (!(wmax > 0.0)) return 0.0;
  return std::abs(std::pow(g.cell_mid(0), g.dim() - 1) * w0) / wmax;
}

}  // namespace

RadialProfile build_ubar(const TruncatedOperator& trunc, const Nonlinearity& nl,
                         std::shared_ptr<const RadialGrid> grid) {
  const double r_max = grid->r_max();
  const double x = 0.5 * (-1.0 + std::sqrt(1.0 + 3.8 * r_max));
  const double R = x * x;
  const double window = trunc.is_bypass() ? 1.0 : 1.0 - trunc.theta1();
  const double cap = 0.9 * window * std::sqrt(R);
  const double xi0 = find_xi0(nl, std::max(10.0, 2.0 * cap));
  for (double h = cap; h > 0.9 * xi0; h *= 0.85) {
    if (!(nl.G(h) > 0.0)) continue;
    RadialProfile cand = build_plateau(h, R, grid);
    if (energy(trunc, nl, cand).total < 0.0) return cand;
  }
  throw NotFoundError(
      "build_ubar: no plateau height with positive G and negative truncated energy");
}

SolveReport solve_full(const OperatorFamily& fam, const Nonlinearity& nl, double theta1,
                       const SolveOptions& opt) {
  SolveReport rep;
  rep.operator_desc = fam.describe();
  rep.nonlinearity_desc = nl.describe();
  rep.dim = nl.dim();
  rep.theta1 = theta1;
  rep.bypass = !fam.singular_at_one();

  const RegimeReport rr = classify_regime(nl);
  if (rr.verdict == RegimeReport::Verdict::rejected)
    throw AdmissibilityError("solve_full: source rejected: " + rr.reason);
  if (rr.verdict == RegimeReport::Verdict::accepted_truncated_only && !rep.bypass &&
      !opt.allow_truncated_only)
    throw AdmissibilityError(
        "solve_full: gamma outside the certified window (truncated-only source): " + rr.reason);
  rep.regime = to_string(nl.regime());
  fam.check_a0();
  if (!rep.bypass && !fam.divergence_screen())
    throw AdmissibilityError("solve_full: coefficient fails the divergence screen (a1)");

  auto grid = opt.grid ? opt.grid : RadialGrid::graded(nl.dim());

  RadialProfile ubar;
  bool have_ubar = false;
  bool have_cap = false;
  RadialProfile prev_profile;
  bool have_prev = false;

  std::optional<RadialProfile> final_profile;
  std::optional<TruncatedOperator> final_trunc;
  bool certified = false;

  const int nstages = rep.bypass ? 1 : opt.max_stages;
  for (int k = 0; k < nstages && !certified; ++k) {
    StageRecord st;
    st.theta = rep.bypass ? 0.0 : theta1 / double(1 << k);

    std::optional<TruncatedOperator> trunc;
    if (rep.bypass) {
      trunc = TruncatedOperator::bypass(fam);
      st.q = nl.p();
    } else {
      try {
        st.q = select_q(fam, st.theta, nl.regime(), nl.gamma(), nl.dim());
      } catch (const InfeasibilityError& e) {
        st.note = e.what();
        rep.stages.push_back(st);
        continue;
      }
      trunc = TruncatedOperator::build(fam, st.theta, theta1, st.q);
    }
    st.feasible = true;

    if (!have_ubar) {
      ubar = build_ubar(*trunc, nl, grid);
      have_ubar = true;
    }

    // Continuation pays off only when the previous stage's solution lies in
    // the region where the new truncation still coincides with the base
    // operator; otherwise the cold plateau ray reaches the saddle faster.
    const bool warm =
        have_prev && prev_profile.sup_slope() <= std::sqrt(1.0 - trunc->theta());
    MountainPassResult mp;
    try {
      mp = mountain_pass_full(*trunc, nl, ubar, opt.mp, warm ? &prev_profile : nullptr);
    } catch (const std::exception& e) {
      st.note = std::string("mountain pass failed: ") + e.what();
      rep.stages.push_back(st);
      continue;
    }
    prev_profile = mp.profile;
    have_prev = true;
    if (!have_cap) {
      rep.level_cap = mp.initial_level_cap;
      have_cap = true;
    }

    st.solved = true;
    st.converged = mp.converged;
    st.sweeps = mp.sweeps;
    st.grad_norm = mp.grad_norm;
    st.m_theta = mp.m_theta;
    st.sigma_star = mp.sigma_star;
    st.u0 = mp.profile.u[0];
    st.sup_slope = mp.profile.sup_slope();
    st.flux_bound = flux_bound_of(*trunc, mp.profile);
    st.residuals = identity_residuals(*trunc, nl, mp.profile, mp.m_theta);
    st.el_sup = energy(*trunc, nl, mp.profile).el_residual_sup;
    st.level_bound_ok = st.m_theta > 0.0 && st.m_theta <= rep.level_cap * (1.0 + 1e-3);

    if (opt.cross_check) {
      st.cross.attempted = true;
      try {
        GroundShootOptions so = opt.shoot;
        so.grid = grid;
        const GroundShootResult gs = ground_state_shoot_full(*trunc, nl, so);
        st.cross.available = true;
        st.cross.xi = gs.xi;
        st.cross.u0_shoot = gs.profile.u[0];
        st.cross.flux_max = gs.flux_max;
        st.cross.origin_flux_rel = gs.origin_flux_rel;
        st.cross.u0_rel_diff =
            std::abs(st.u0 - st.cross.u0_shoot) / std::max(1e-300, std::abs(st.cross.u0_shoot));
      } catch (const std::exception& e) {
        st.cross.note = e.what();
      }
    }

    const bool slope_ok = rep.bypass || st.sup_slope <= 1.0 - st.theta;
    const bool resid_ok = std::abs(st.residuals.nehari) < opt.residual_tol &&
                          std::abs(st.residuals.pohozaev) < opt.residual_tol &&
                          std::abs(st.residuals.energy_id) < opt.residual_tol &&
                          st.el_sup < opt.el_tol;
    st.certified = st.converged && slope_ok && resid_ok;

    final_profile = mp.profile;
    final_trunc = trunc;
    if (st.certified) {
      certified = true;
      rep.theta_bar = st.theta;
    }
    rep.stages.push_back(st);
  }

  for (const StageRecord& st : rep.stages)
    rep.flux_bound_overall = std::max(rep.flux_bound_overall, st.flux_bound);

  if (certified) {
    rep.status = "certified";
  } else if (final_profile) {
    rep.status = "schedule_exhausted";
    rep.failure_reason =
        "no stage passed the gradient bound and residual thresholds; "
        "see the per-stage flux-bound history";
  } else {
    rep.status = "nonconvergence";
    rep.failure_reason = rep.stages.empty() ? "empty schedule" : rep.stages.back().note;
  }

  if (final_profile) fill_solution_block(rep, *final_trunc, nl, *final_profile);

  return rep;
}

void fill_solution_block(SolveReport& rep, const TruncatedOperator& trunc,
                         const Nonlinearity& nl, const RadialProfile& profile) {
  rep.have_solution = true;
  rep.profile = profile;
  rep.trunc = trunc;
  rep.energy = energy(trunc, nl, rep.profile);
  // The headline level is the energy of the stored profile, not the level at
  // the path maximizer, so every report number is recomputable from
  // solution.csv alone.  The two agree to the line-search tolerance; the
  // per-stage records keep the path-level value.
  rep.m_theta = rep.energy.total;
  rep.residuals = identity_residuals(trunc, nl, rep.profile, rep.m_theta);
  const RadialGrid& g = *rep.profile.grid;
  double iA = 0, ia = 0, iG = 0;
  for (int j = 0; j < g.cells(); ++j) {
    const double du = rep.profile.derivative(j);
    const double s = du * du;
    iA += g.cell_weight(j) * trunc.A_theta(s);
    ia += g.cell_weight(j) * trunc.a_theta(s) * s;
  }
  for (int i = 0; i < g.cells(); ++i)
    iG += g.node_weight(i) * std::abs(nl.G(rep.profile.u[i]));
  rep.int_A = iA;
  rep.int_a_grad2 = ia;
  rep.int_abs_G = iG;
  try {
    rep.decay = decay_check(rep.profile, 2.0);
  } catch (const std::exception&) {
    rep.decay = DecayFit{0, 0};  // support too short for a tail fit
  }
  rep.origin_flux_rel = origin_flux_of(trunc, rep.profile);
  rep.flux_bound_solution = flux_bound_of(trunc, rep.profile);
}

}  // namespace bisolve
