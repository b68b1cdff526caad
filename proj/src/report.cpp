#include "bisolve/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "json.hpp"

namespace bisolve {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

std::string report_json(const SolveReport& rep, bool stamp) {
  ordered_json j;
  j["schema"] = report_schema;
  if (stamp) j["generated_at"] = utc_now();

  j["problem"] = {{"operator", rep.operator_desc},
                  {"nonlinearity", rep.nonlinearity_desc},
                  {"dim", rep.dim},
                  {"regime", rep.regime},
                  {"theta1", rep.theta1},
                  {"bypass", rep.bypass}};

  j["status"] = rep.status;
  if (!rep.failure_reason.empty()) j["failure_reason"] = rep.failure_reason;
  j["theta_bar"] = rep.theta_bar;

  j["residuals"] = {{"nehari", rep.residuals.nehari},
                    {"pohozaev", rep.residuals.pohozaev},
                    {"energy_id", rep.residuals.energy_id},
                    {"el_sup", rep.energy.el_residual_sup}};

  j["energies"] = {{"level", rep.m_theta},
                   {"kinetic", rep.energy.kinetic},
                   {"G1", rep.energy.G1_int},
                   {"G2", rep.energy.G2_int},
                   {"int_A", rep.int_A},
                   {"int_a_grad2", rep.int_a_grad2},
                   {"int_abs_G", rep.int_abs_G}};

  if (rep.have_solution) {
    ordered_json s = {{"u0", rep.profile.u.empty() ? 0.0 : rep.profile.u[0]},
                      {"max_abs", rep.profile.max_abs()},
                      {"sup_slope", rep.profile.sup_slope()},
                      {"flux_bound", rep.flux_bound_solution},
                      {"origin_flux_rel", rep.origin_flux_rel},
                      {"decay_C", rep.decay.C_fit},
                      {"decay_slope", rep.decay.slope}};
    if (rep.trunc) s["q"] = rep.trunc->q();
    j["solution"] = std::move(s);
  }

  return j.dump(2) + "\n";
}

std::string stages_csv(const SolveReport& rep) {
  std::ostringstream os;
  os << "stage,theta,feasible,q,solved,converged,sweeps,grad_norm,m_theta,sigma_star,"
        "u0,sup_slope,flux_bound,nehari,pohozaev,energy_id,el_sup,level_bound_ok,"
        "level_cap,certified,cross_xi,cross_u0,cross_u0_rel_diff,cross_flux_max,"
        "cross_origin_flux_rel,note\n";
  int k = 0;
  for (const StageRecord& st : rep.stages) {
    std::string note = st.note;
    if (st.cross.attempted && !st.cross.available && !st.cross.note.empty()) {
      if (!note.empty()) note += "; ";
      note += "cross-check: " + st.cross.note;
    }
    os << k++ << ',' << num(st.theta) << ',' << int(st.feasible) << ',' << num(st.q) << ','
       << int(st.solved) << ',' << int(st.converged) << ',' << st.sweeps << ','
       << num(st.grad_norm) << ',' << num(st.m_theta) << ',' << num(st.sigma_star) << ','
       << num(st.u0) << ',' << num(st.sup_slope) << ',' << num(st.flux_bound) << ','
       << num(st.residuals.nehari) << ',' << num(st.residuals.pohozaev) << ','
       << num(st.residuals.energy_id) << ',' << num(st.el_sup) << ','
       << int(st.level_bound_ok) << ',' << num(rep.level_cap) << ',' << int(st.certified)
       << ',' << num(st.cross.xi) << ',' << num(st.cross.u0_shoot) << ','
       << num(st.cross.u0_rel_diff) << ',' << num(st.cross.flux_max) << ','
       << num(st.cross.origin_flux_rel) << ',' << csv_quote(note) << '\n';
  }
  return os.str();
}

void write_report(const SolveReport& rep, const std::string& dir) {
  if (rep.stages.empty())
    throw VerificationError("write_report: stage list is empty; report invariant violated");
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  write_text((d / "report.json").string(), report_json(rep));
  write_text((d / "stages.csv").string(), stages_csv(rep));
  if (rep.have_solution && rep.trunc)
    write_profile_csv((d / "solution.csv").string(), rep.profile, *rep.trunc);
}

SolveReport verify_report(const Config& cfg, const RadialProfile& profile) {
  const OperatorFamily fam = cfg.make_operator();
  const Nonlinearity nl = cfg.make_nonlinearity();

  SolveReport rep;
  rep.operator_desc = fam.describe();
  rep.nonlinearity_desc = nl.describe();
  rep.dim = nl.dim();
  rep.regime = to_string(nl.regime());
  rep.bypass = !fam.singular_at_one();
  rep.theta1 = cfg.theta1;

  if (profile.max_abs() == 0.0) {
    rep.status = "trivial solution";
    rep.have_solution = true;
    rep.profile = profile;
    return rep;
  }

  const double slope = profile.sup_slope();
  std::optional<TruncatedOperator> trunc;
  double theta_hat = 0.0;
  if (rep.bypass) {
    trunc = TruncatedOperator::bypass(fam);
  } else if (cfg.theta) {
    theta_hat = *cfg.theta;
    const double q = select_q(fam, theta_hat, nl.regime(), nl.gamma(), nl.dim());
    trunc = TruncatedOperator::build(fam, theta_hat, cfg.theta1, q);
  } else {
    // Recover the stage from the profile itself: the first schedule level
    // whose gradient bound the profile satisfies.  Any such level leaves the
    // truncation inactive along the profile, so the recomputed numbers do not
    // depend on which passing level is picked; when none passes (an
    // uncertified report), the last feasible level is the one the solver
    // stopped at.
    std::optional<double> chosen, last_feasible;
    for (int k = 0; k < cfg.max_stages; ++k) {
      const double th = cfg.theta1 / double(1 << k);
      try {
        select_q(fam, th, nl.regime(), nl.gamma(), nl.dim());
      } catch (const InfeasibilityError&) {
        continue;
      }
      last_feasible = th;
      if (slope <= 1.0 - th) {
        chosen = th;
        break;
      }
    }
    if (!chosen) chosen = last_feasible;
    if (!chosen)
      throw InfeasibilityError("verify: no feasible truncation stage in the schedule");
    theta_hat = *chosen;
    const double q = select_q(fam, theta_hat, nl.regime(), nl.gamma(), nl.dim());
    trunc = TruncatedOperator::build(fam, theta_hat, cfg.theta1, q);
  }

  fill_solution_block(rep, *trunc, nl, profile);
  rep.theta_bar = rep.bypass ? 0.0 : theta_hat;
  rep.flux_bound_overall = rep.flux_bound_solution;

  const bool slope_ok = rep.bypass || slope <= 1.0 - theta_hat;
  const bool resid_ok = std::abs(rep.residuals.nehari) < cfg.residual_tol &&
                        std::abs(rep.residuals.pohozaev) < cfg.residual_tol &&
                        std::abs(rep.residuals.energy_id) < cfg.residual_tol &&
                        rep.energy.el_residual_sup < cfg.el_tol;
  if (slope_ok && resid_ok) {
    rep.status = "certified";
  } else {
    rep.status = "uncertified";
    std::ostringstream why;
    if (!slope_ok)
      why << "sup|u'| = " << slope << " exceeds 1 - theta = " << 1.0 - theta_hat;
    if (!resid_ok) {
      if (!slope_ok) why << "; ";
      why << "residuals above thresholds";
    }
    rep.failure_reason = why.str();
  }
  return rep;
}

}  // namespace bisolve
