#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lipcert/backend.hpp"
#include "lipcert/multipliers.hpp"
#include "lipcert/reduction.hpp"

namespace lipcert {

struct UpperBound {
  double gamma = 0.0;
  ReducedModel rm;
  Solution primal;
};

/// gamma = sqrt of the primal optimum. Before assembly the ball is recentred
/// (w = w0 + eps u, |u| <= 1) and the outputs are divided by eps; `primal`
/// refers to that program, whose optimum is (gamma / eps)^2.
/// Solver failure throws ErrorCode::kSolver; the message names the file the
/// failing program was written to.
UpperBound upper_bound(const FnnModel& model, const TargetSpec& target,
                       MultiplierClass cls, bool reduce,
                       const SolveSettings& settings = {});

struct RankOneFactor {
  Vector h2;
  Vector h3;
};

/// lambda_2 / lambda_1 of a symmetric matrix (0 for 1x1).
double rank_ratio(const Matrix& h);

/// Rank-1 test on a dual optimum with H_11 = 1 in [1; w; p] coordinates
/// (w of length m). Returns the split of the first column when
/// lambda_2 / lambda_1 <= rank_tol.
std::optional<RankOneFactor> exactness_check(const Matrix& h, int m,
                                             double rank_tol = 1e-6);

bool verify_worst_case(const FnnModel& model, const TargetSpec& target,
                       const Vector& w_star, double gamma, double tol);

struct LowerBound {
  double value = 0.0;
  Vector w;
};

/// Multi-start projected gradient ascent on |G(w) - G(w0)|^2 over the ball.
/// Extra starting points are projected onto the ball first.
LowerBound lower_bound_pgd(const FnnModel& model, const TargetSpec& target,
                           int restarts = 50, int steps = 200,
                           std::uint64_t seed = 0,
                           const std::vector<Vector>& warm_starts = {});

struct Timings {
  double reduce_s = 0.0;
  double primal_s = 0.0;
  double dual_s = 0.0;
  double lower_bound_s = 0.0;
  double total_s = 0.0;
};

enum class Verdict { kCertifiedRobust, kNotCertified };

std::string_view to_string(Verdict verdict);

struct Certificate {
  double gamma_upper = 0.0;
  std::optional<double> gamma_dual;
  std::optional<double> duality_gap;  // gamma_upper - gamma_dual
  bool exact = false;
  std::optional<Vector> w_star;
  std::optional<double> lower_bound;
  int n_r = 0;
  MultiplierClass multiplier_class = MultiplierClass::kNN;
  std::optional<double> margin_value;  // absent when l = 1
  Verdict robust_verdict = Verdict::kNotCertified;
  Timings timings;
  std::optional<double> rank_ratio;
  SolveStatus primal_status = SolveStatus::kOptimal;
  std::optional<SolveStatus> dual_status;
};

struct CertifyOptions {
  MultiplierClass cls = MultiplierClass::kNN;
  bool reduce = true;
  SolveSettings solver;
  double rank_tol = 1e-6;
  double worst_case_tol = 1e-4;
  int pgd_restarts = 50;
  int pgd_steps = 200;
  std::uint64_t seed = 0;
  bool lower_bound = true;
  /// Writes {"primal": ..., "dual": ...} in recentred coordinates.
  std::string dump_sdp_path;
};

/// Upper bound, dual exactness test and margin verdict. The dual program
/// exists for the NN class only; other classes report no dual and exact =
/// false. Requires l >= 2.
Certificate robustness_certificate(const FnnModel& model,
                                   const TargetSpec& target,
                                   const CertifyOptions& options = {});

/// Same pipeline without the l >= 2 requirement; margin_value stays empty
/// when l = 1.
Certificate analyze(const FnnModel& model, const TargetSpec& target,
                    const CertifyOptions& options = {});

}  // namespace lipcert
