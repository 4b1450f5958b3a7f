#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "lipcert/error.hpp"

using namespace lipcert;

TEST_CASE("relu") {
  Vector q(3);
  q << 1.5, -2.0, 0.0;
  Vector p = relu(q);
  CHECK(p(0) == 1.5);
  CHECK(p(1) == 0.0);
  CHECK(p(2) == 0.0);
  CHECK(relu(Vector::Constant(4, -1.0)).isZero());
  Vector pos = Vector::LinSpaced(5, 0.0, 2.0);
  CHECK(relu(pos) == pos);
}

TEST_CASE("relu triple characterization") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vector q(7);
    for (auto& x : q) x = g(rng);
    CHECK(relu_triple_check(relu(q), q, 0.0));
  }
  Vector zero = Vector::Zero(1);
  CHECK_FALSE(relu_triple_check(zero.array() + 1.0, zero, 0.0));
  Vector p(1), q(1);
  p << 1.0;
  q << 2.0;
  CHECK_FALSE(relu_triple_check(p, q, 0.0));
  CHECK_THROWS_AS(relu_triple_check(Vector::Zero(2), Vector::Zero(3), 0.0), Error);
}

TEST_CASE("toy forward pass") {
  FnnModel model = testing::toy_model();
  Vector z0 = forward(model, testing::toy_w0());
  Vector paper(3);
  paper << 0.3632, 0.2584, -0.7510;
  CHECK((z0 - paper).cwiseAbs().maxCoeff() <= 5e-4);
  CHECK(classify(model, testing::toy_w0()) == 1);
  CHECK(margin(model, testing::toy_w0()) ==
        doctest::Approx((z0(0) - z0(1)) / std::sqrt(2.0)));
}

TEST_CASE("degenerate models") {
  FnnModel zero(Matrix::Zero(4, 2), Vector::Zero(4), Matrix::Zero(2, 4),
                Vector::Constant(2, 0.7));
  CHECK(forward(zero, Vector::Constant(2, 3.0)) == Vector::Constant(2, 0.7));
  CHECK(classify(zero, Vector::Zero(2)) == 1);

  FnnModel rectified(Matrix::Ones(3, 2), Vector::Constant(3, -10.0),
                     Matrix::Ones(2, 3), Vector::Constant(2, -1.0));
  CHECK(forward(rectified, Vector::Zero(2)) == Vector::Constant(2, -1.0));

  FnnModel single = gen_random(3, 2, 1, 4);
  CHECK(classify(single, Vector::Zero(2)) == 1);
  CHECK_THROWS_AS(margin(single, Vector::Zero(2)), Error);
}

TEST_CASE("margin formula") {
  FnnModel m2(Matrix::Identity(2, 2), Vector::Zero(2), Matrix::Identity(2, 2),
              Vector::Zero(2));
  Vector w(2);
  w << 1.0, 0.0;
  CHECK(margin(m2, w) == doctest::Approx(1.0 / std::sqrt(2.0)));
  w << 1.0, 1.0;
  CHECK(margin(m2, w) == 0.0);
}

TEST_CASE("margin on a printed score vector") {
  // scores whose top two are 0.7448 and 0.5347
  Matrix w_out = Matrix::Identity(3, 3);
  FnnModel model(Matrix::Identity(3, 3), Vector::Zero(3), w_out, Vector::Zero(3));
  Vector w(3);
  w << 0.7448, 0.5347, 0.1;
  CHECK(std::abs(margin(model, w) - 0.1485) <= 1e-4);
}

TEST_CASE("gen_random") {
  FnnModel a = gen_random(6, 3, 3, 1);
  FnnModel b = gen_random(6, 3, 3, 1);
  FnnModel c = gen_random(6, 3, 3, 2);
  CHECK(a.w_in() == b.w_in());
  CHECK(a.w_out() == b.w_out());
  CHECK(a.b_in() == b.b_in());
  CHECK(a.w_in() != c.w_in());
  CHECK(a.n() == 6);
  CHECK(a.m() == 3);
  CHECK(a.l() == 3);
  CHECK(a.b_out().isZero());
  FnnModel s = gen_random(20, 5, 4, 9, 0.25);
  CHECK(s.w_in().cwiseAbs().maxCoeff() <= 0.25);
}

TEST_CASE("invalid models are rejected") {
  CHECK_THROWS_AS(FnnModel(Matrix::Zero(3, 2), Vector::Zero(2),
                           Matrix::Zero(1, 3), Vector::Zero(1)),
                  Error);
  Matrix bad = Matrix::Zero(3, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(FnnModel(bad, Vector::Zero(3), Matrix::Zero(1, 3),
                           Vector::Zero(1)),
                  Error);
  CHECK_THROWS_AS(TargetSpec(Vector::Zero(2), -0.1), Error);
}

TEST_CASE("forward is piecewise affine") {
  FnnModel model = gen_random(15, 4, 3, 21);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vector w(4), d(4);
    for (auto& x : w) x = g(rng);
    for (auto& x : d) x = g(rng);
    Vector q = model.w_in() * w + model.b_in();
    double gap = q.cwiseAbs().minCoeff();
    double h = 0.1 * gap / (model.w_in() * d).cwiseAbs().maxCoeff();
    Vector f0 = forward(model, w);
    Vector f1 = forward(model, w + h * d);
    Vector f2 = forward(model, w + 2 * h * d);
    CHECK((f2 - f0 - 2.0 * (f1 - f0)).norm() <= 1e-12 * (1 + f0.norm()));
  }
}

TEST_CASE("classify ignores a common output shift") {
  FnnModel model = gen_random(10, 3, 4, 8);
  for (int s = 0; s < 10; ++s) {
    Vector w = testing::uniform_vector(3, -1, 1, s);
    FnnModel shifted(model.w_in(), model.b_in(), model.w_out(),
                     Vector::Constant(4, 2.5));
    CHECK(classify(model, w) == classify(shifted, w));
  }
}
