#include <doctest.h>

#include "helpers.hpp"
#include "lipcert/certify.hpp"
#include "lipcert/error.hpp"

using namespace lipcert;

TEST_CASE("toy upper bound, full and reduced") {
  FnnModel model = testing::toy_model();
  TargetSpec t(testing::toy_w0(), 0.1);
  UpperBound full = upper_bound(model, t, MultiplierClass::kNN, false);
  UpperBound red = upper_bound(model, t, MultiplierClass::kNN, true);
  CHECK(std::abs(full.gamma - 0.1088) <= 1e-3);
  CHECK(std::abs(red.gamma - full.gamma) <= 1e-4);
  CHECK(full.rm.n_r() == 6);
  CHECK(red.rm.n_r() < 6);
}

TEST_CASE("upper bound at eps = 0 is zero") {
  FnnModel model = testing::toy_model();
  UpperBound ub = upper_bound(model, TargetSpec(testing::toy_w0(), 0.0),
                              MultiplierClass::kNN, true);
  CHECK(ub.gamma == 0.0);
  CHECK(ub.rm.n_r() == 0);
}

TEST_CASE("exactness_check on constructed matrices") {
  Vector v(3);
  v << 1.0, 0.3, -0.2;
  auto f = exactness_check(v * v.transpose(), 1);
  REQUIRE(f.has_value());
  CHECK(f->h2.size() == 1);
  CHECK(f->h2(0) == doctest::Approx(0.3));
  CHECK(f->h3(0) == doctest::Approx(-0.2));

  CHECK_FALSE(exactness_check(Matrix::Identity(3, 3), 1).has_value());
  CHECK_THROWS_AS(exactness_check(Matrix::Zero(3, 3), 1), Error);
  Matrix neg = -Matrix::Identity(3, 3);
  neg(0, 0) = 1.0;
  neg(1, 1) = -5.0;
  CHECK_FALSE(exactness_check(neg, 1).has_value());
}

TEST_CASE("rank_ratio rejects nonpositive spectra") {
  Matrix h = Matrix::Zero(2, 2);
  h(0, 0) = -1.0;
  CHECK_THROWS_AS(rank_ratio(h), Error);
}

TEST_CASE("verify_worst_case on the toy numbers") {
  FnnModel model = testing::toy_model();
  Vector w0 = testing::toy_w0();
  TargetSpec t(w0, 0.1);
  Vector w_star(3);
  w_star << 0.5115, -0.0648, -0.1217;
  CHECK(std::abs((w_star - w0).norm() - 0.1) <= 1e-4);
  CHECK(std::abs((forward(model, w_star) - forward(model, w0)).norm() -
                 0.1088) <= 1e-3);
  CHECK(verify_worst_case(model, t, w_star, 0.1088, 1e-3));
  CHECK_FALSE(verify_worst_case(model, t, w0, 0.1088, 1e-3));
  CHECK(verify_worst_case(model, t, w0, 0.0, 1e-3));
}

TEST_CASE("pgd lower bound") {
  FnnModel model = testing::toy_model();
  TargetSpec t(testing::toy_w0(), 0.1);
  LowerBound lb = lower_bound_pgd(model, t, 50, 200, 1);
  CHECK(lb.value >= 0.1078);
  CHECK(lb.value <= 0.1088 + 1e-6);
  CHECK((lb.w - t.w0).norm() <= 0.1 * (1 + 1e-12));
  CHECK(lower_bound_pgd(model, TargetSpec(t.w0, 0.0), 5, 5, 1).value == 0.0);
  CHECK_THROWS_AS(lower_bound_pgd(model, t, 0, 5, 1), Error);
}

TEST_CASE("pgd on an affine model matches the SVD bound") {
  // preactivations stay positive on the ball, so G is affine there
  Matrix w_in = Matrix::Random(8, 4);
  Vector b_in = Vector::Constant(8, 20.0);
  Matrix w_out = Matrix::Random(3, 8);
  FnnModel model(w_in, b_in, w_out, Vector::Zero(3));
  TargetSpec t(Vector::Zero(4), 0.3);
  double oracle = 0.3 * Eigen::JacobiSVD<Matrix>(w_out * w_in).singularValues()(0);
  CHECK(std::abs(lower_bound_pgd(model, t, 50, 200, 3).value - oracle) <= 1e-4);
}

TEST_CASE("toy certificate") {
  FnnModel model = testing::toy_model();
  TargetSpec t(testing::toy_w0(), 0.1);
  Certificate c = robustness_certificate(model, t);
  CHECK(c.exact);
  REQUIRE(c.w_star.has_value());
  Vector expected(3);
  expected << 0.5115, -0.0648, -0.1217;
  CHECK((*c.w_star - expected).cwiseAbs().maxCoeff() <= 1e-2);
  CHECK(*c.rank_ratio <= 1e-6);
  CHECK(std::abs(c.gamma_upper - *c.gamma_dual) <= 1e-4 * (1 + c.gamma_upper));
  CHECK(*c.lower_bound <= c.gamma_upper + 1e-6);
  CHECK(c.gamma_upper - *c.lower_bound <= 1e-3 * (1 + c.gamma_upper));
  CHECK(*c.margin_value == doctest::Approx(0.0741).epsilon(1e-2));
  CHECK(c.robust_verdict == Verdict::kNotCertified);

  Certificate small = robustness_certificate(model, TargetSpec(t.w0, 0.01));
  CHECK(small.robust_verdict == Verdict::kCertifiedRobust);
}

TEST_CASE("certificate for non-NN classes has no dual") {
  FnnModel model = testing::toy_model();
  CertifyOptions o;
  o.cls = MultiplierClass::kFAZ;
  Certificate c = robustness_certificate(model, TargetSpec(testing::toy_w0(), 0.1), o);
  CHECK_FALSE(c.gamma_dual.has_value());
  CHECK_FALSE(c.exact);
  CHECK(c.gamma_upper >= 0.1088 - 1e-3);
}

TEST_CASE("tied argmax is never certified") {
  Matrix w_in = Matrix::Identity(2, 2);
  Vector b_in = Vector::Constant(2, 1.0);
  Matrix w_out = Matrix::Identity(2, 2);
  FnnModel model(w_in, b_in, w_out, Vector::Zero(2));
  Certificate c = robustness_certificate(model, TargetSpec(Vector::Zero(2), 1e-3));
  CHECK(*c.margin_value == 0.0);
  CHECK(c.robust_verdict == Verdict::kNotCertified);
}

TEST_CASE("robustness_certificate needs two outputs") {
  FnnModel model = gen_random(4, 2, 1, 5);
  CHECK_THROWS_AS(robustness_certificate(model, TargetSpec(Vector::Zero(2), 0.1)), Error);
  Certificate c = analyze(model, TargetSpec(Vector::Zero(2), 0.1));
  CHECK_FALSE(c.margin_value.has_value());
}

TEST_CASE("verdict is monotone in eps") {
  FnnModel model = gen_random(10, 3, 3, 11);
  Vector w0 = testing::uniform_vector(3, -0.5, 0.5, 11);
  bool was_certified = true;
  double last_gamma = 0.0;
  for (double eps : {0.001, 0.01, 0.03, 0.1, 0.3}) {
    CertifyOptions o;
    o.lower_bound = false;
    Certificate c = robustness_certificate(model, TargetSpec(w0, eps), o);
    bool now = c.robust_verdict == Verdict::kCertifiedRobust;
    CHECK(!(now && !was_certified));
    CHECK(c.gamma_upper >= last_gamma - 1e-6);
    was_certified = now;
    last_gamma = c.gamma_upper;
  }
}
