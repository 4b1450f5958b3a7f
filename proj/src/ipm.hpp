#pragma once

// Primal-dual interior-point method for
//
//   (P)  min <C, X>  s.t. <A_i, X> = b_i,  X in K
//   (D)  max b'y     s.t. C - sum_i y_i A_i = Z in K
//
// with K a product of PSD blocks and one nonnegative orthant. Constraint
// matrices in PSD blocks are dense and/or low-rank over a per-block pool of
// vectors, which keeps the Schur complement assembly at O(K^2) per entry.

#include <vector>

#include <Eigen/Sparse>

#include "lipcert/conic_program.hpp"

namespace lipcert::ipm {

struct BlockData {
  Matrix dense;  // 0x0 when absent
  std::vector<LowRankTerm> terms;
};

struct PsdBlock {
  int size = 0;
  Matrix pool;
  BlockData c;
  /// (constraint index, data), sorted by constraint index.
  std::vector<std::pair<int, BlockData>> a;
};

struct LpBlock {
  int size = 0;
  Vector c;
  /// (row = constraint index, col = lp coordinate, value)
  std::vector<Eigen::Triplet<double>> a;
};

struct Problem {
  int num_constraints = 0;
  Vector b;
  std::vector<PsdBlock> psd;
  LpBlock lp;
};

struct Options {
  double tol_feas = 1e-8;
  double tol_gap = 1e-8;
  int max_iters = 100;
  bool verbose = false;
};

enum class Status {
  kOptimal,
  kNearOptimal,
  kPrimalInfeasible,
  kDualInfeasible,
  kFailure,
};

struct Result {
  Status status = Status::kFailure;
  std::vector<Matrix> x;
  std::vector<Matrix> z;
  Vector x_lp;
  Vector z_lp;
  Vector y;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
};

Result solve(const Problem& problem, const Options& options);

}  // namespace lipcert::ipm
