#include "bisolve/cli.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bisolve/config.hpp"
#include "bisolve/report.hpp"

namespace bisolve {

namespace {

constexpr int kExitPass = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRejected = 2;
constexpr int kExitNoConverge = 3;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string key_table() {
  std::ostringstream os;
  os << "Config keys (JSON document):\n";
  for (const auto& d : config_key_docs()) {
    os << "  " << d.key;
    for (std::size_t i = d.key.size(); i < 26; ++i) os << ' ';
    os << "[" << d.fallback << "] " << d.doc << "\n";
  }
  return os.str();
}

// Uniform exception-to-exit-code mapping for the subcommand bodies.
template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const AdmissibilityError& e) {
    std::cerr << "rejected: " << e.what() << "\n";
    return kExitRejected;
  } catch (const InfeasibilityError& e) {
    std::cerr << "rejected: " << e.what() << "\n";
    return kExitRejected;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConverge;
  }
}

int do_solve(const std::string& config_path, const std::string& out_dir) {
  const Config cfg = load_config(config_path);
  const OperatorFamily fam = cfg.make_operator();
  const Nonlinearity nl = cfg.make_nonlinearity();

  const SolveReport rep = solve_full(fam, nl, cfg.schedule_start(), cfg.solve_options());
  write_report(rep, out_dir);

  std::cout << "operator:      " << rep.operator_desc << "\n"
            << "nonlinearity:  " << rep.nonlinearity_desc << "\n"
            << "status:        " << rep.status << "\n";
  if (rep.status == "certified")
    std::cout << "theta_bar:     " << num(rep.theta_bar) << "\n";
  if (!rep.failure_reason.empty())
    std::cout << "reason:        " << rep.failure_reason << "\n";
  if (rep.have_solution) {
    std::cout << "level:         " << num(rep.m_theta) << "\n"
              << "u(0):          " << num(rep.profile.u.empty() ? 0.0 : rep.profile.u[0])
              << "\n"
              << "sup|u'|:       " << num(rep.profile.sup_slope()) << "\n"
              << "residuals:     nehari " << num(rep.residuals.nehari) << ", pohozaev "
              << num(rep.residuals.pohozaev) << ", energy_id " << num(rep.residuals.energy_id)
              << ", el_sup " << num(rep.energy.el_residual_sup) << "\n";
  }
  std::cout << "report:        " << out_dir << "/report.json\n";
  return rep.status == "certified" ? kExitPass : kExitNoConverge;
}

int do_verify(const std::string& profile_path, const std::string& config_path) {
  const Config cfg = load_config(config_path);
  const RadialProfile profile = read_profile_csv(profile_path, cfg.dim);
  const SolveReport rep = verify_report(cfg, profile);
  std::cout << report_json(rep, false);
  const bool pass = rep.status == "certified" || rep.status == "trivial solution";
  return pass ? kExitPass : kExitNoConverge;
}

struct SweepRange {
  double lo = 0, hi = 0;
  int n = 0;
};

SweepRange parse_range(const std::string& text) {
  SweepRange r;
  char extra;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d%c", &r.lo, &r.hi, &r.n, &extra) != 3 || r.n < 1)
    throw ConfigError("--range expects a:b:n with n >= 1, got \"" + text + "\"");
  return r;
}

int do_sweep(const std::string& config_path, const std::string& param,
             const std::string& range_text) {
  const Config cfg = load_config(config_path);
  const SweepRange range = parse_range(range_text);
  const OperatorFamily fam = cfg.make_operator();

  std::cout << "param,value,status,level,u0,sup_slope,flux_bound,nehari,pohozaev,"
               "energy_id,note\n";
  int successes = 0;
  for (int i = 0; i < range.n; ++i) {
    const double v = range.n == 1
                         ? range.lo
                         : range.lo + (range.hi - range.lo) * double(i) / double(range.n - 1);
    std::string status = "ok", note;
    SolveReport rep;
    bool have = false;
    try {
      if (param == "theta") {
        SolveOptions opt = cfg.solve_options();
        opt.max_stages = 1;
        opt.cross_check = false;
        rep = solve_full(fam, cfg.make_nonlinearity(), v, opt);
        have = rep.have_solution;
        status = rep.status;
        if (!have) note = rep.failure_reason;
      } else if (param == "p") {
        SolveOptions opt = cfg.solve_options();
        opt.max_stages = 1;
        opt.cross_check = false;
        rep = solve_full(fam, cfg.make_nonlinearity(v), cfg.schedule_start(), opt);
        have = rep.have_solution;
        status = rep.status;
        if (!have) note = rep.failure_reason;
      } else {  // xi
        const Nonlinearity nl = cfg.make_nonlinearity();
        const double th = cfg.schedule_start();
        std::optional<TruncatedOperator> trunc;
        if (!fam.singular_at_one()) {
          trunc = TruncatedOperator::bypass(fam);
        } else {
          const double q = select_q(fam, th, nl.regime(), nl.gamma(), nl.dim());
          trunc = TruncatedOperator::build(fam, th, cfg.theta1, q);
        }
        ShootOptions so;
        so.grid = cfg.make_grid();
        const ShootRecord rec = shoot(*trunc, nl, v, cfg.r_max, so);
        status = to_string(rec.outcome);
        fill_solution_block(rep, *trunc, nl, rec.trajectory);
        have = true;
      }
    } catch (const std::exception& e) {
      status = "error";
      note = e.what();
    }
    std::cout << param << ',' << num(v) << ',' << status << ',';
    if (have) {
      std::cout << num(rep.m_theta) << ',' << num(rep.profile.u.empty() ? 0.0 : rep.profile.u[0])
                << ',' << num(rep.profile.sup_slope()) << ',' << num(rep.flux_bound_solution)
                << ',' << num(rep.residuals.nehari) << ',' << num(rep.residuals.pohozaev) << ','
                << num(rep.residuals.energy_id);
      ++successes;
    } else {
      std::cout << ",,,,,,";
    }
    std::cout << ',' << '"';
    for (char c : note) {
      if (c == '"') std::cout << '"';
      std::cout << c;
    }
    std::cout << '"' << '\n';
  }
  return successes > 0 ? kExitPass : kExitNoConverge;
}

int do_check(const std::string& config_path) {
  const Config cfg = load_config(config_path);
  const OperatorFamily fam = cfg.make_operator();
  const Nonlinearity nl = cfg.make_nonlinearity();

  std::cout << "operator: " << fam.describe() << "\n";
  try {
    fam.check_a0();
    std::cout << "(a0) positivity and midpoint convexity: pass\n";
  } catch (const AdmissibilityError& e) {
    std::cout << "(a0) violated: " << e.what() << "\nverdict: rejected\n";
    return kExitRejected;
  }
  if (fam.singular_at_one()) {
    if (fam.divergence_screen()) {
      std::cout << "(a1) divergence at the gradient bound: pass\n";
    } else {
      std::cout << "(a1) violated: coefficient stays bounded approaching s = 1\n"
                   "verdict: rejected\n";
      return kExitRejected;
    }
  } else {
    std::cout << "(a1) skipped: bounded coefficient, truncation bypass\n";
  }

  std::cout << "source: " << nl.describe() << "\n";
  const RegimeReport rr = classify_regime(nl);
  if (rr.verdict == RegimeReport::Verdict::rejected) {
    const bool large_s = rr.reason.find("large-s growth") != std::string::npos;
    std::cout << (large_s ? "(g1'') violated: " : "(g1') violated: ") << rr.reason << "\n"
              << "verdict: rejected\n";
    return kExitRejected;
  }
  std::cout << "regime: " << to_string(rr.regime) << "\n";
  std::cout << "(g1') small-argument limit scan: pass";
  if (rr.regime == MassRegime::positive_mass)
    std::cout << " (detected mass " << num(rr.m_detected) << ")";
  std::cout << "\n";
  if (rr.regime == MassRegime::zero_mass_small_gamma)
    std::cout << "(g1'') large-argument growth below q* = " << num(rr.q_star) << ": pass\n";
  try {
    const double xi0 = find_xi0(nl);
    std::cout << "(g2) positive level of G: pass (xi0 = " << num(xi0) << ")\n";
  } catch (const NotFoundError& e) {
    std::cout << "(g2) violated: " << e.what() << "\nverdict: rejected\n";
    return kExitRejected;
  }
  std::cout << "verdict: " << to_string(rr.verdict) << "\n";
  if (rr.verdict == RegimeReport::Verdict::accepted_truncated_only)
    std::cout << "note: " << rr.reason << "\n";
  return kExitPass;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{
      "bisolve: radial solutions of -div(a(|grad u|^2) grad u) = g(u) on R^N\n"
      "through truncation, mountain-pass deformation and gradient-bound\n"
      "certification, with machine-checkable residual reports."};
  app.require_subcommand(1);
  app.footer(key_table());

  std::string config_path, out_dir, profile_path, param, range_text;

  CLI::App* solve = app.add_subcommand(
      "solve", "Run the truncation schedule, write report.json/solution.csv/stages.csv");
  solve->add_option("--config", config_path, "JSON config file")->required();
  solve->add_option("--out-dir", out_dir, "output directory")->required();

  CLI::App* verify = app.add_subcommand(
      "verify", "Recompute every residual of a stored profile; prints the report JSON");
  verify->add_option("--profile", profile_path, "solution.csv to re-evaluate")->required();
  verify->add_option("--config", config_path, "JSON config file")->required();

  CLI::App* sweep = app.add_subcommand(
      "sweep",
      "Scan theta, the shooting height xi, or the source exponent p; CSV on stdout.  "
      "theta and p rows solve one truncation stage each; xi rows integrate a single shoot");
  sweep->add_option("--config", config_path, "JSON config file")->required();
  sweep->add_option("--param", param, "one of: theta, xi, p")
      ->required()
      ->check(CLI::IsMember({"theta", "xi", "p"}));
  sweep->add_option("--range", range_text, "a:b:n — n uniform values from a to b")->required();

  CLI::App* check = app.add_subcommand(
      "check", "Admissibility screens only: (a0), (a1), (g1'), (g1''), (g2)");
  check->add_option("--config", config_path, "JSON config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitConfig;
  }

  if (solve->parsed()) return guarded([&] { return do_solve(config_path, out_dir); });
  if (verify->parsed()) return guarded([&] { return do_verify(profile_path, config_path); });
  if (sweep->parsed()) return guarded([&] { return do_sweep(config_path, param, range_text); });
  if (check->parsed()) return guarded([&] { return do_check(config_path); });
  return kExitConfig;
}

}  // namespace bisolve
