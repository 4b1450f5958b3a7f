#include <doctest.h>

#include "helpers.hpp"
#include "lipcert/backend.hpp"
#include "lipcert/error.hpp"
#include "lipcert/sdp.hpp"

using namespace lipcert;

namespace {

LinearExpr expr(std::vector<std::pair<EntryRef, double>> e, double c = 0.0) {
  LinearExpr out;
  out.entries = std::move(e);
  out.constant = c;
  return out;
}

}  // namespace

TEST_CASE("canonicalize is idempotent and drops duplicates") {
  ConicProgram p;
  int x = p.add_vector("x", 2, Sign::kNonneg);
  p.add_constraint({"a", expr({{{x, 0}, 1.0}, {{x, 1}, 1.0}}, -1.0), Relation::kEq});
  p.add_constraint({"a_copy", expr({{{x, 1}, 1.0}, {{x, 0}, 1.0}}, -1.0), Relation::kEq});
  p.add_constraint({"zero", expr({{{x, 0}, 0.0}}, 0.0), Relation::kGe});
  p.add_constraint({"le", expr({{{x, 0}, 1.0}}, -5.0), Relation::kLe});
  p.set_objective({Sense::kMin, expr({{{x, 0}, 1.0}, {{x, 1}, 3.0}})});

  ConicProgram c1 = canonicalize(p);
  ConicProgram c2 = canonicalize(c1);
  CHECK(c1.canonical());
  CHECK(c1.constraints().size() == 2);
  CHECK(to_json(c1) == to_json(c2));
  for (const auto& c : c1.constraints()) CHECK(c.rel != Relation::kLe);

  Solution s = solve(c1);
  REQUIRE(s.ok());
  CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("canonicalize rejects unknown variables") {
  ConicProgram p;
  p.add_vector("x", 1, Sign::kFree);
  ConicProgram q = p;
  p.add_constraint({"bad", expr({{{3, 0}, 1.0}}), Relation::kGe});
  q.add_constraint({"bad2", expr({{{0, 4}, 1.0}}), Relation::kGe});
  CHECK_THROWS_AS(canonicalize(p), Error);
  CHECK_THROWS_AS(q.validate(), Error);
}

TEST_CASE("toy primal gives the same optimum before and after canonicalize") {
  FnnModel model = testing::toy_model();
  Vector w0 = testing::toy_w0();
  TargetSpec t(w0, 0.1);
  ReducedModel rm = reduce(model, t);
  ConicProgram raw = build_primal(rm, t, forward(model, w0), MultiplierClass::kNN);
  ConicProgram canon = canonicalize(raw);
  Solution a = solve(raw);
  Solution b = solve(canon);
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(std::abs(a.objective - b.objective) <= 1e-9);
}

TEST_CASE("symmetric packing round trip") {
  Matrix a = Matrix::Random(5, 5);
  a = (a + a.transpose()).eval();
  CHECK(unpack_symmetric(pack_symmetric(a), 5) == a);
  CHECK_THROWS_AS(unpack_symmetric(Vector::Zero(4), 3), Error);
}

TEST_CASE("json dump names every variable") {
  FnnModel model = testing::toy_model();
  TargetSpec t(testing::toy_w0(), 0.1);
  ReducedModel rm = reduce(model, t);
  std::string j = to_json(build_dual(rm, t, forward(model, t.w0)));
  CHECK(j.find("\"H\"") != std::string::npos);
  CHECK(j.find("h11") != std::string::npos);
}
