#pragma once

#include <stdexcept>
#include <string>

namespace bisolve {

enum class MassRegime {
  positive_mass,
  zero_mass_large_gamma,  // gamma > N
  zero_mass_small_gamma,  // 2* < gamma <= N
};

std::string to_string(MassRegime r);

// Thrown when (a0)/(a1) or the (g*) screens fail for a configured family.
struct AdmissibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a required open parameter interval (e.g. for q) is empty.
struct InfeasibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a search (xi0 grid scan, shooting bracket) finds nothing.
struct NotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a computed certificate or bound check fails.
struct VerificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown on solver breakdown (step underflow, sweep exhaustion).
struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* report_schema = "bisolve-report-1";

}  // namespace bisolve
