#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "lipcert/error.hpp"
#include "lipcert/multipliers.hpp"

using namespace lipcert;

using testing::random_faz;
using testing::random_nn;
using testing::random_ozf;

TEST_CASE("E matrix") {
  Matrix e1 = e_matrix(1);
  Matrix expected(3, 3);
  expected << 1, 0, 0, 0, -1, 1, 0, 0, 1;
  CHECK(e1 == expected);
  for (int n = 1; n <= 6; ++n) {
    Matrix e = e_matrix(n);
    CHECK(e.determinant() == doctest::Approx(n % 2 ? -1.0 : 1.0));
    CHECK((e.inverse() * e - Matrix::Identity(2 * n + 1, 2 * n + 1)).norm() <= 1e-14);
  }
}

TEST_CASE("assemble_pi examples") {
  const int n = 3;
  NnParam zero{Matrix::Zero(7, 7), Vector::Zero(3)};
  CHECK(assemble_pi(zero, n).isZero());

  Matrix pi = assemble_pi(OzfParam{Matrix::Identity(n, n)}, n);
  CHECK(pi.block(1, 4, n, n) == Matrix::Identity(n, n));
  CHECK(pi.block(4, 1, n, n) == Matrix::Identity(n, n));
  CHECK(pi.block(4, 4, n, n) == -2.0 * Matrix::Identity(n, n));
  CHECK(pi.block(0, 0, 4, 4).isZero());
  CHECK_THROWS_AS(assemble_pi(OzfParam{Matrix::Identity(2, 2)}, n), Error);
}

TEST_CASE("NN assembly follows E' (Q + J) E") {
  std::mt19937_64 rng(5);
  const int n = 4;
  NnParam p = random_nn(n, rng);
  Matrix qj = p.q;
  for (int i = 0; i < n; ++i) {
    qj(1 + i, 1 + n + i) += p.j(i);
    qj(1 + n + i, 1 + i) += p.j(i);
  }
  Matrix e = e_matrix(n);
  CHECK((assemble_pi(p, n) - e.transpose() * qj * e).norm() <= 1e-12);
}

TEST_CASE("assembled multipliers pass the sampling membership test") {
  std::mt19937_64 rng(7);
  for (int n : {1, 3, 6}) {
    for (int k = 0; k < 5; ++k) {
      CHECK(membership_test(assemble_pi(random_nn(n, rng), n), n, 10000, k));
      CHECK(membership_test(assemble_pi(random_ozf(n, rng), n), n, 10000, k));
      CHECK(membership_test(assemble_pi(random_faz(n, rng), n), n, 10000, k));
    }
  }
  CHECK(membership_test(Matrix::Zero(5, 5), 2, 100, 1));
  Matrix bad = Matrix::Zero(5, 5);
  bad(0, 0) = -1.0;
  CHECK_FALSE(membership_test(bad, 2, 100, 1));
}

TEST_CASE("assemble_pi is linear") {
  std::mt19937_64 rng(9);
  const int n = 4;
  FazParam a = random_faz(n, rng), b = random_faz(n, rng);
  FazParam c{2.0 * a.nu + 3.0 * b.nu, 2.0 * a.eta + 3.0 * b.eta,
             2.0 * a.lambda + 3.0 * b.lambda, 2.0 * a.t + 3.0 * b.t};
  CHECK((assemble_pi(c, n) - 2.0 * assemble_pi(a, n) - 3.0 * assemble_pi(b, n))
            .norm() <= 1e-12);
  OzfParam x = random_ozf(n, rng), y = random_ozf(n, rng);
  CHECK((assemble_pi(OzfParam{0.5 * x.m - 1.5 * y.m}, n) -
         0.5 * assemble_pi(x, n) + 1.5 * assemble_pi(y, n))
            .norm() <= 1e-12);
}

TEST_CASE("embedding into the NN class") {
  std::mt19937_64 rng(11);
  const int n = 3;
  NnParam from_i = embed_inclusion(OzfParam{Matrix::Identity(n, n)}, n);
  CHECK(from_i.j == -Vector::Ones(n));
  CHECK(from_i.q.block(1, 1 + n, n, n).isZero());

  FazParam lam{Vector::Zero(n), Vector::Zero(n), Vector::Ones(n),
               Vector::Zero(n * (n - 1) / 2)};
  NnParam from_lam = embed_inclusion(lam, n);
  CHECK(from_lam.j == -Vector::Ones(n));
  CHECK((assemble_pi(from_lam, n) - assemble_pi(lam, n)).norm() <= 1e-12);

  NnParam from_zero = embed_inclusion(OzfParam{Matrix::Zero(n, n)}, n);
  CHECK(from_zero.q.isZero());
  CHECK(from_zero.j.isZero());
  CHECK_THROWS_AS(embed_inclusion(random_nn(n, rng), n), Error);

  for (int k = 0; k < 100; ++k) {
    int nk = 1 + k % 7;
    OzfParam o = random_ozf(nk, rng);
    FazParam f = random_faz(nk, rng);
    NnParam eo = embed_inclusion(o, nk), ef = embed_inclusion(f, nk);
    CHECK(is_valid(eo, nk));
    CHECK(is_valid(ef, nk));
    CHECK((assemble_pi(eo, nk) - assemble_pi(o, nk)).norm() <= 1e-12);
    CHECK((assemble_pi(ef, nk) - assemble_pi(f, nk)).norm() <= 1e-12);
  }
}

TEST_CASE("validity checks") {
  std::mt19937_64 rng(13);
  CHECK(is_valid(random_ozf(4, rng), 4));
  Matrix bad = Matrix::Identity(3, 3);
  bad(0, 1) = 0.5;
  CHECK_FALSE(is_valid(OzfParam{bad}, 3));
  FazParam f = random_faz(3, rng);
  f.nu(0) = -0.1;
  CHECK_FALSE(is_valid(f, 3));
  NnParam q = random_nn(2, rng);
  q.q(0, 1) = q.q(1, 0) = -1e-3;
  CHECK_FALSE(is_valid(q, 2));
  CHECK(is_valid(q, 2, 1e-2));
}

TEST_CASE("structure description reproduces assemble_pi") {
  std::mt19937_64 rng(15);
  const int n = 4;
  std::vector<MultiplierParam> params{random_nn(n, rng), random_ozf(n, rng),
                                      random_faz(n, rng)};
  for (const auto& p : params) {
    MultiplierStructure s = multiplier_structure(class_of(p), n);
    MultiplierValues v = flatten(s, p);
    Matrix direct = assemble_pi(p, n);
    Matrix via = assemble_from_structure(s, v);
    CHECK((direct - via).norm() <= 1e-12);
    CHECK((assemble_pi(unflatten(s, v), n) - direct).norm() <= 1e-12);
  }
}

TEST_CASE("class names") {
  CHECK(parse_multiplier_class("nn") == MultiplierClass::kNN);
  CHECK(parse_multiplier_class("ozf") == MultiplierClass::kOZF);
  CHECK(parse_multiplier_class("faz") == MultiplierClass::kFAZ);
  CHECK(to_string(MultiplierClass::kOZF) == "ozf");
  CHECK_THROWS_AS(parse_multiplier_class("cop"), Error);
}
