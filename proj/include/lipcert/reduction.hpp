#pragma once

#include <utility>
#include <vector>

#include "lipcert/model.hpp"

namespace lipcert {

/// Split of the hidden neurons by their sign behaviour on the eps-ball.
/// Indices are 0-based and sorted; the three sets partition {0..n-1}.
struct IndexPartition {
  std::vector<int> n_plus;  // never rectified on the ball
  std::vector<int> n_zero;  // always rectified on the ball
  std::vector<int> n_res;   // undecided, kept as ReLUs
};

/// Reduced network
///   z = w_out_t (w_in_t w + b_in_t) + w_out_h relu(w_in_h w + b_in_h)
/// which coincides with the parent network on the eps-ball around w0.
/// Empty selections are 0-row (or 0-column) matrices.
struct ReducedModel {
  Matrix w_in_t;
  Vector b_in_t;
  Matrix w_out_t;
  Matrix w_in_h;
  Vector b_in_h;
  Matrix w_out_h;
  IndexPartition partition;
  int m = 0;
  int l = 0;
  /// w_out_t * b_in_t, the constant part of the affine branch.
  Vector c0;

  int n_r() const { return static_cast<int>(w_in_h.rows()); }
  /// w_out_t * w_in_t (l x m), the linear part of the affine branch.
  Matrix affine_gain() const { return w_out_t * w_in_t; }
};

/// Interval [q0_i - eps |row_i|, q0_i + eps |row_i|] of every preactivation
/// over the ball.
std::pair<Vector, Vector> preactivation_bounds(const FnnModel& model,
                                               const TargetSpec& target);

IndexPartition partition_indices(const FnnModel& model,
                                 const TargetSpec& target);

ReducedModel reduce(const FnnModel& model, const TargetSpec& target);

/// Builds the reduced model for an explicit partition. The trivial partition
/// (everything residual) reproduces the full network.
ReducedModel reduce_with_partition(const FnnModel& model,
                                   IndexPartition partition);

IndexPartition trivial_partition(int n);

Vector reduced_forward(const ReducedModel& rm, const Vector& w);

}  // namespace lipcert
