#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "lipcert/backend.hpp"
#include "lipcert/certify.hpp"
#include "lipcert/sdp.hpp"

using namespace lipcert;

namespace {

double gamma_of(const Solution& s) { return std::sqrt(std::max(0.0, s.objective)); }

FnnModel affine_model(int n, int m, int l, std::uint64_t seed) {
  FnnModel r = gen_random(n, m, l, seed);
  return FnnModel(r.w_in(), Vector::Constant(n, 10.0), r.w_out(), Vector::Zero(l));
}

}  // namespace

TEST_CASE("program sizes") {
  FnnModel model = testing::toy_model();
  TargetSpec t(testing::toy_w0(), 0.1);
  ReducedModel rm = reduce(model, t);
  Vector z0 = forward(model, t.w0);
  for (auto cls : {MultiplierClass::kNN, MultiplierClass::kOZF, MultiplierClass::kFAZ}) {
    ConicProgram p = build_primal(rm, t, z0, cls);
    REQUIRE(p.lmis().size() == 1);
    CHECK(p.lmis()[0].size == 1 + 3 + rm.n_r());
  }
  ConicProgram d = build_dual(rm, t, z0);
  CHECK(d.variable("H").dim == 1 + 3 + rm.n_r());
  CHECK(frame_matrix(rm, PiFrame::kReluGraph).rows() == 2 * rm.n_r() + 1);
  CHECK_THROWS(build_primal(rm, t, Vector::Zero(2), MultiplierClass::kNN));
}

TEST_CASE("toy primal and dual, all classes") {
  FnnModel model = testing::toy_model();
  TargetSpec t(testing::toy_w0(), 0.1);
  Vector z0 = forward(model, t.w0);
  ReducedModel full = reduce_with_partition(model, trivial_partition(6));
  double nn = gamma_of(solve(build_primal(full, t, z0, MultiplierClass::kNN)));
  double ozf = gamma_of(solve(build_primal(full, t, z0, MultiplierClass::kOZF)));
  double faz = gamma_of(solve(build_primal(full, t, z0, MultiplierClass::kFAZ)));
  double dual = gamma_of(solve(build_dual(full, t, z0)));
  CHECK(std::abs(nn - 0.1088) <= 1e-3);
  CHECK(std::abs(nn - dual) <= 1e-4 * (1 + nn));
  CHECK(nn <= ozf * (1 + 1e-6));
  CHECK(nn <= faz * (1 + 1e-6));
}

TEST_CASE("affine reduced model matches the SVD oracle") {
  for (std::uint64_t seed : {2, 3, 4}) {
    FnnModel model = affine_model(12, 4, 3, seed);
    Vector w0 = testing::uniform_vector(4, -0.5, 0.5, seed);
    TargetSpec t(w0, 0.2);
    ReducedModel rm = reduce(model, t);
    REQUIRE(rm.n_r() == 0);
    double oracle = 0.2 * Eigen::JacobiSVD<Matrix>(rm.affine_gain()).singularValues()(0);
    Vector z0 = forward(model, w0);
    CHECK(std::abs(gamma_of(solve(build_primal(rm, t, z0, MultiplierClass::kNN))) - oracle) <= 1e-6);
    CHECK(std::abs(gamma_of(solve(build_dual(rm, t, z0))) - oracle) <= 1e-6);
  }
}

TEST_CASE("eps = 0 programs") {
  FnnModel model = testing::toy_model();
  TargetSpec t(testing::toy_w0(), 0.0);
  ReducedModel rm = reduce(model, t);
  Vector z0 = forward(model, t.w0);
  Solution p = solve(build_primal(rm, t, z0, MultiplierClass::kNN));
  REQUIRE(p.ok());
  CHECK(std::abs(p.objective) <= 1e-6);
  Solution d = solve(build_dual(rm, t, z0));
  REQUIRE(d.ok());
  CHECK(std::abs(d.objective) <= 1e-6);
}

TEST_CASE("weak duality and soundness on random models") {
  for (int seed = 1; seed <= 5; ++seed) {
    auto inst = testing::ensemble_instance(seed);
    TargetSpec t(inst.w0, 0.1);
    UpperBound ub = upper_bound(inst.model, t, MultiplierClass::kNN, true);
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    Vector z0 = forward(inst.model, inst.w0);
    for (int k = 0; k < 100; ++k) {
      Vector w = testing::ball_sample(inst.w0, 0.1, rng);
      CHECK((forward(inst.model, w) - z0).norm() <= ub.gamma + 1e-6);
    }
  }
}
