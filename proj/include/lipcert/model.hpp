#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace lipcert {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Single hidden-layer ReLU network z = W_out * relu(W_in * w + b_in) + b_out.
///
/// Dimensions: n hidden ReLUs, m inputs, l outputs. Immutable once built; the
/// constructor rejects inconsistent shapes and non-finite entries.
class FnnModel {
 public:
  FnnModel(Matrix w_in, Vector b_in, Matrix w_out, Vector b_out);

  const Matrix& w_in() const { return w_in_; }
  const Vector& b_in() const { return b_in_; }
  const Matrix& w_out() const { return w_out_; }
  const Vector& b_out() const { return b_out_; }

  int n() const { return static_cast<int>(w_in_.rows()); }
  int m() const { return static_cast<int>(w_in_.cols()); }
  int l() const { return static_cast<int>(w_out_.rows()); }

  /// Copy of this model with the output bias set to zero.
  FnnModel without_output_bias() const;

 private:
  Matrix w_in_;
  Vector b_in_;
  Matrix w_out_;
  Vector b_out_;
};

/// Target input and l2 perturbation radius.
struct TargetSpec {
  Vector w0;
  double eps = 0.0;

  TargetSpec() = default;
  TargetSpec(Vector w0_in, double eps_in);
};

Vector relu(const Vector& q);

/// Algebraic ReLU characterization p - q >= 0, p >= 0, (p - q) .* p = 0,
/// checked entrywise up to `tol`.
bool relu_triple_check(const Vector& p, const Vector& q, double tol);

Vector forward(const FnnModel& model, const Vector& w);

/// 1-based argmax of the output; ties go to the smallest index.
int classify(const FnnModel& model, const Vector& w);

/// Classification margin (1/sqrt 2) * min_{j != i*} (z_{i*} - z_j), clamped at 0.
double margin(const FnnModel& model, const Vector& w0);

/// Entries i.i.d. uniform in [-scale, scale]; b_out = 0. Deterministic in `seed`.
FnnModel gen_random(int n, int m, int l, std::uint64_t seed, double scale = 1.0);

}  // namespace lipcert
