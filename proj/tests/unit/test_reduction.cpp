#include <doctest.h>

#include <algorithm>
#include <random>

#include "helpers.hpp"
#include "lipcert/reduction.hpp"

using namespace lipcert;

namespace {

bool is_partition(const IndexPartition& p, int n) {
  std::vector<int> all;
  for (const auto* s : {&p.n_plus, &p.n_zero, &p.n_res}) {
    if (!std::is_sorted(s->begin(), s->end())) return false;
    all.insert(all.end(), s->begin(), s->end());
  }
  std::sort(all.begin(), all.end());
  if (static_cast<int>(all.size()) != n) return false;
  for (int i = 0; i < n; ++i) {
    if (all[static_cast<std::size_t>(i)] != i) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("preactivation bounds") {
  Matrix w_in(1, 2);
  w_in << 1.0, 0.0;
  Vector b_in(1);
  b_in << 0.5;
  FnnModel model(w_in, b_in, Matrix::Ones(1, 1), Vector::Zero(1));
  auto [lo, hi] = preactivation_bounds(model, TargetSpec(Vector::Zero(2), 1.0));
  CHECK(lo(0) == doctest::Approx(-0.5));
  CHECK(hi(0) == doctest::Approx(1.5));

  FnnModel toy = testing::toy_model();
  Vector w0 = testing::toy_w0();
  auto [lo0, hi0] = preactivation_bounds(toy, TargetSpec(w0, 0.0));
  Vector q0 = toy.w_in() * w0 + toy.b_in();
  CHECK(lo0 == q0);
  CHECK(hi0 == q0);

  Matrix zr = toy.w_in();
  zr.row(2).setZero();
  FnnModel zrow(zr, toy.b_in(), toy.w_out(), toy.b_out());
  auto [lz, hz] = preactivation_bounds(zrow, TargetSpec(w0, 0.4));
  CHECK(lz(2) == toy.b_in()(2));
  CHECK(hz(2) == toy.b_in()(2));
}

TEST_CASE("partition at the extremes") {
  FnnModel toy = testing::toy_model();
  Vector w0 = testing::toy_w0();
  Vector q0 = toy.w_in() * w0 + toy.b_in();
  IndexPartition p0 = partition_indices(toy, TargetSpec(w0, 0.0));
  CHECK(p0.n_res.empty());
  for (int i : p0.n_plus) CHECK(q0(i) >= 0.0);
  for (int i : p0.n_zero) CHECK(q0(i) < 0.0);
  IndexPartition big = partition_indices(toy, TargetSpec(w0, 1e6));
  CHECK(big.n_res.size() == 6);
}

TEST_CASE("boundary tie goes to n_plus") {
  Matrix w_in = Matrix::Zero(2, 2);
  w_in(1, 0) = 1.0;
  FnnModel model(w_in, Vector::Zero(2), Matrix::Ones(1, 2), Vector::Zero(1));
  IndexPartition p = partition_indices(model, TargetSpec(Vector::Zero(2), 0.3));
  CHECK(p.n_plus == std::vector<int>{0});
  CHECK(p.n_res == std::vector<int>{1});
}

TEST_CASE("reduced model equals the network on the ball") {
  for (int seed = 1; seed <= 10; ++seed) {
    FnnModel model = gen_random(20, 4, 3, static_cast<std::uint64_t>(seed));
    Vector w0 = testing::uniform_vector(4, -1, 1, static_cast<std::uint64_t>(seed));
    TargetSpec t(w0, 0.2);
    ReducedModel rm = reduce(model, t);
    CHECK(is_partition(rm.partition, 20));
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    for (int k = 0; k < 1000; ++k) {
      Vector w = testing::ball_sample(w0, 0.2, rng);
      Vector g = forward(model, w);
      CHECK((g - reduced_forward(rm, w)).cwiseAbs().maxCoeff() <=
            1e-12 * (1 + g.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("trivial and empty residual sets") {
  FnnModel toy = testing::toy_model();
  Vector w0 = testing::toy_w0();
  ReducedModel full = reduce_with_partition(toy, trivial_partition(6));
  CHECK(full.n_r() == 6);
  CHECK(full.w_in_t.rows() == 0);
  Vector w = testing::uniform_vector(3, -3, 3, 2);
  CHECK((reduced_forward(full, w) - forward(toy, w)).norm() <= 1e-14);

  ReducedModel aff = reduce(toy, TargetSpec(w0, 0.0));
  CHECK(aff.n_r() == 0);
  // affine everywhere: second differences vanish
  Vector d = testing::uniform_vector(3, -1, 1, 5);
  Vector f0 = reduced_forward(aff, w), f1 = reduced_forward(aff, w + d),
         f2 = reduced_forward(aff, w + 2 * d);
  CHECK((f2 - 2 * f1 + f0).norm() <= 1e-12);
}

TEST_CASE("reduction is not exact far outside the ball") {
  // neuron 0 is in n_plus at eps = 0.1 but rectified at w = -5
  Matrix w_in(1, 1);
  w_in << 1.0;
  Vector b_in(1);
  b_in << 1.0;
  FnnModel model(w_in, b_in, Matrix::Ones(1, 1), Vector::Zero(1));
  ReducedModel rm = reduce(model, TargetSpec(Vector::Zero(1), 0.1));
  REQUIRE(rm.partition.n_plus.size() == 1);
  Vector far(1);
  far << -5.0;
  CHECK(forward(model, far)(0) == 0.0);
  CHECK(reduced_forward(rm, far)(0) == -4.0);
}

TEST_CASE("residual set grows with eps") {
  FnnModel model = gen_random(40, 5, 3, 17);
  Vector w0 = testing::uniform_vector(5, -1, 1, 17);
  std::vector<int> prev;
  for (int k = 0; k <= 20; ++k) {
    IndexPartition p = partition_indices(model, TargetSpec(w0, 0.05 * k));
    CHECK(std::includes(p.n_res.begin(), p.n_res.end(), prev.begin(), prev.end()));
    prev = p.n_res;
  }
}
