#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epshape/control.hpp"

namespace epshape {

/// Options for the self-certification suite. mutation flips one control term
/// before the matching properties run, to demonstrate that they catch wrong
/// implementations; the filter keeps only properties whose name contains the
/// substring.
struct VerifyOptions {
  unsigned seed = 42;
  std::string filter;
  ControlMutation mutation = ControlMutation::None;
};

/// One certified property. For most properties pass means measured stays
/// below tolerance; detection properties invert this (detail says so).
struct PropertyResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerificationReport {
  unsigned seed = 42;
  ControlMutation mutation = ControlMutation::None;
  std::vector<PropertyResult> properties;
  /// True when at least one property ran and every one passed.
  bool all_pass = false;
};

/// Run the full property suite (matching identities, bracket/equation
/// agreement, Casimir conservation, equilibrium and spectral checks,
/// transport consistency, integrator order, Jacobi probes). Deterministic
/// for a fixed seed; each property draws from its own stream so filtering
/// never changes another property's values.
VerificationReport run_verification(const VerifyOptions& opts = {});

std::string verification_report_json(const VerificationReport& rep);

const char* to_string(ControlMutation m);

/// Parse the CLI spelling of a mutation ("weight_term", "drift_force_term",
/// ...). Empty or "none" maps to None; unknown spellings map to nullopt.
std::optional<ControlMutation> mutation_from_string(const std::string& s);

}  // namespace epshape
