#include "lipcert/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "lipcert/error.hpp"

namespace lipcert {

namespace {

void require_finite(const Eigen::Ref<const Matrix>& a, const char* name) {
  if (!a.allFinite()) {
    throw_domain(std::string(name) + " contains NaN or Inf");
  }
}

}  // namespace

FnnModel::FnnModel(Matrix w_in, Vector b_in, Matrix w_out, Vector b_out)
    : w_in_(std::move(w_in)),
      b_in_(std::move(b_in)),
      w_out_(std::move(w_out)),
      b_out_(std::move(b_out)) {
  if (w_in_.rows() < 1 || w_in_.cols() < 1 || w_out_.rows() < 1) {
    throw_dimension("model dimensions must be positive");
  }
  if (b_in_.size() != w_in_.rows()) {
    throw_dimension("b_in has length " + std::to_string(b_in_.size()) +
                    ", expected n = " + std::to_string(w_in_.rows()));
  }
  if (w_out_.cols() != w_in_.rows()) {
    throw_dimension("w_out has " + std::to_string(w_out_.cols()) +
                    " columns, expected n = " + std::to_string(w_in_.rows()));
  }
  if (b_out_.size() != w_out_.rows()) {
    throw_dimension("b_out has length " + std::to_string(b_out_.size()) +
                    ", expected l = " + std::to_string(w_out_.rows()));
  }
  require_finite(w_in_, "w_in");
  require_finite(b_in_, "b_in");
  require_finite(w_out_, "w_out");
  require_finite(b_out_, "b_out");
}

FnnModel FnnModel::without_output_bias() const {
  return FnnModel(w_in_, b_in_, w_out_, Vector::Zero(w_out_.rows()));
}

TargetSpec::TargetSpec(Vector w0_in, double eps_in)
    : w0(std::move(w0_in)), eps(eps_in) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw_domain("eps must be a finite nonnegative number");
  }
  if (!w0.allFinite()) {
    throw_domain("w0 contains NaN or Inf");
  }
}

Vector relu(const Vector& q) { return q.cwiseMax(0.0); }

bool relu_triple_check(const Vector& p, const Vector& q, double tol) {
  if (p.size() != q.size()) {
    throw_dimension("relu_triple_check: p and q differ in length");
  }
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double slack = p[i] - q[i];
    if (slack < -tol || p[i] < -tol || std::abs(slack * p[i]) > tol) {
      return false;
    }
  }
  return true;
}

Vector forward(const FnnModel& model, const Vector& w) {
  if (w.size() != model.m()) {
    throw_dimension("forward: input has length " + std::to_string(w.size()) +
                    ", model expects m = " + std::to_string(model.m()));
  }
  return model.w_out() * relu(model.w_in() * w + model.b_in()) +
         model.b_out();
}

int classify(const FnnModel& model, const Vector& w) {
  const Vector z = forward(model, w);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < z.size(); ++i) {
    if (z[i] > z[best]) best = i;
  }
  return static_cast<int>(best) + 1;
}

double margin(const FnnModel& model, const Vector& w0) {
  if (model.l() < 2) {
    throw_domain("margin requires at least two outputs");
  }
  const Vector z = forward(model, w0);
  const int top = classify(model, w0) - 1;
  double gap = std::numeric_limits<double>::infinity();
  for (int j = 0; j < model.l(); ++j) {
    if (j != top) gap = std::min(gap, z[top] - z[j]);
  }
  return std::max(0.0, gap / std::sqrt(2.0));
}

FnnModel gen_random(int n, int m, int l, std::uint64_t seed, double scale) {
  if (n < 1 || m < 1 || l < 1) {
    throw_dimension("gen_random: dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  auto fill = [&](Matrix& a) {
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = dist(rng);
  };
  Matrix w_in(n, m), w_out(l, n), b_in(n, 1);
  fill(w_in);
  fill(b_in);
  fill(w_out);
  return FnnModel(std::move(w_in), b_in.col(0), std::move(w_out),
                  Vector::Zero(l));
}

}  // namespace lipcert
