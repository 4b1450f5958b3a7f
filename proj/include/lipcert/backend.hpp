#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lipcert/conic_program.hpp"

namespace lipcert {

struct SolveSettings {
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
  int max_iters = 50000;
  bool verbose = false;
};

enum class SolveStatus {
  kOptimal,
  kNearOptimal,
  kInfeasible,
  kUnbounded,
  kNumericalFailure,
};

std::string_view to_string(SolveStatus status);

struct NamedValue {
  std::string name;
  double value = 0.0;
};

/// Independent check of a candidate point against every constraint.
/// Violations are absolute; `pass` compares each against tol scaled by
/// (1 + size of the constraint's constant part).
struct ResidualReport {
  std::vector<NamedValue> constraint_violation;  // per linear constraint
  std::vector<NamedValue> lmi_min_eigenvalue;
  std::vector<NamedValue> psd_min_eigenvalue;    // per PSD matrix variable
  double sign_violation = 0.0;                   // nonneg / entrywise cones
  double max_violation = 0.0;
  bool pass = false;
};

struct Solution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  double objective = 0.0;
  std::map<std::string, Vector> variable_values;
  double solve_time_s = 0.0;
  int iterations = 0;
  /// Infeasible / unbounded backed by a diverging certificate direction.
  bool certificate = false;
  ResidualReport residuals;

  bool ok() const {
    return status == SolveStatus::kOptimal || status == SolveStatus::kNearOptimal;
  }
};

/// Solves a canonicalized program (canonicalizes a copy otherwise). Every
/// optimal / near-optimal result has passed verify_residuals.
Solution solve(const ConicProgram& program, const SolveSettings& settings = {});

ResidualReport verify_residuals(const ConicProgram& program,
                                const Solution& solution, double tol);

/// Entry values of every variable in declaration order (pinned entries 0).
VariableValues values_of(const ConicProgram& program, const Solution& solution);

}  // namespace lipcert
