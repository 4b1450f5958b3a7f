#include "lipcert/reduction.hpp"

#include <string>

#include "lipcert/error.hpp"

namespace lipcert {

namespace {

void check_target(const FnnModel& model, const TargetSpec& target) {
  if (target.w0.size() != model.m()) {
    throw_dimension("target input has length " +
                    std::to_string(target.w0.size()) + ", model expects m = " +
                    std::to_string(model.m()));
  }
}

// Rows of `a` listed in `idx`, i.e. E * a with E the stacked unit rows.
Matrix select_rows(const Matrix& a, const std::vector<int>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), a.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(k) = a.row(idx[k]);
  return out;
}

Matrix select_cols(const Matrix& a, const std::vector<int>& idx) {
  Matrix out(a.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(k) = a.col(idx[k]);
  return out;
}

Vector select(const Vector& v, const std::vector<int>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = v[idx[k]];
  return out;
}

}  // namespace

std::pair<Vector, Vector> preactivation_bounds(const FnnModel& model,
                                               const TargetSpec& target) {
  check_target(model, target);
  const Vector q0 = model.w_in() * target.w0 + model.b_in();
  const Vector radius = target.eps * model.w_in().rowwise().norm();
  return {q0 - radius, q0 + radius};
}

IndexPartition partition_indices(const FnnModel& model,
                                 const TargetSpec& target) {
  const auto [lo, hi] = preactivation_bounds(model, target);
  IndexPartition part;
  for (int i = 0; i < model.n(); ++i) {
    // lo_i = hi_i = 0 satisfies both conditions; it lands in n_plus.
    if (lo[i] >= 0.0) {
      part.n_plus.push_back(i);
    } else if (hi[i] <= 0.0) {
      part.n_zero.push_back(i);
    } else {
      part.n_res.push_back(i);
    }
  }
  return part;
}

IndexPartition trivial_partition(int n) {
  IndexPartition part;
  part.n_res.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) part.n_res[static_cast<std::size_t>(i)] = i;
  return part;
}

ReducedModel reduce_with_partition(const FnnModel& model,
                                   IndexPartition partition) {
  std::vector<bool> seen(static_cast<std::size_t>(model.n()), false);
  for (const auto* set : {&partition.n_plus, &partition.n_zero,
                          &partition.n_res}) {
    for (int i : *set) {
      if (i < 0 || i >= model.n() || seen[static_cast<std::size_t>(i)]) {
        throw_domain("index partition is not a partition of the neurons");
      }
      seen[static_cast<std::size_t>(i)] = true;
    }
  }
  for (bool s : seen) {
    if (!s) throw_domain("index partition does not cover every neuron");
  }

  ReducedModel rm;
  rm.m = model.m();
  rm.l = model.l();
  rm.w_in_t = select_rows(model.w_in(), partition.n_plus);
  rm.b_in_t = select(model.b_in(), partition.n_plus);
  rm.w_out_t = select_cols(model.w_out(), partition.n_plus);
  rm.w_in_h = select_rows(model.w_in(), partition.n_res);
  rm.b_in_h = select(model.b_in(), partition.n_res);
  rm.w_out_h = select_cols(model.w_out(), partition.n_res);
  rm.c0 = rm.w_out_t * rm.b_in_t;
  rm.partition = std::move(partition);
  return rm;
}

ReducedModel reduce(const FnnModel& model, const TargetSpec& target) {
  return reduce_with_partition(model, partition_indices(model, target));
}

Vector reduced_forward(const ReducedModel& rm, const Vector& w) {
  if (w.size() != rm.m) {
    throw_dimension("reduced_forward: input has length " +
                    std::to_string(w.size()) + ", expected m = " +
                    std::to_string(rm.m));
  }
  Vector z = rm.w_out_t * (rm.w_in_t * w + rm.b_in_t);
  if (rm.n_r() > 0) {
    z += rm.w_out_h * relu(rm.w_in_h * w + rm.b_in_h);
  }
  return z;
}

}  // namespace lipcert
