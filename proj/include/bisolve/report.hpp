#pragma once

#include <string>

#include "bisolve/config.hpp"
#include "bisolve/pipeline.hpp"

namespace bisolve {

// report.json text.  The generated_at line is the only nondeterministic part
// and is omitted when stamp is false; everything else is byte-stable for a
// given report.
std::string report_json(const SolveReport& rep, bool stamp = true);

// One CSV row per truncation stage: solver diagnostics, identity residuals,
// the flux bound max_r |a_theta(|u'|^2) u'|, and the cross-check columns.
std::string stages_csv(const SolveReport& rep);

// Writes report.json, stages.csv and (when a solution is present)
// solution.csv into dir.  Throws VerificationError on an empty stage list and
// std::runtime_error with the path on I/O failure.
void write_report(const SolveReport& rep, const std::string& dir);

// Rebuilds every report number from a stored profile and the config: infers
// the truncation stage from the gradient bound (or takes the fixed `theta`
// key), recomputes residuals, energies and decay through the same code path
// as the solver.  Status is "trivial solution" for u == 0, "certified" when
// the gradient bound and residual thresholds pass, "uncertified" otherwise.
SolveReport verify_report(const Config& cfg, const RadialProfile& profile);

}  // namespace bisolve
