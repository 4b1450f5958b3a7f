#include "lipcert/sdp.hpp"

#include <string>

#include "lipcert/error.hpp"

namespace lipcert {

namespace {

void check_inputs(const ReducedModel& rm, const TargetSpec& target,
                  const Vector& z0) {
  if (target.w0.size() != rm.m) {
    throw_dimension("w0 has length " + std::to_string(target.w0.size()) +
                    ", the model expects " + std::to_string(rm.m));
  }
  if (z0.size() != rm.l) {
    throw_dimension("z0 has length " + std::to_string(z0.size()) +
                    ", the model has " + std::to_string(rm.l) + " outputs");
  }
}

}  // namespace

Matrix frame_matrix(const ReducedModel& rm, PiFrame frame) {
  const int m = rm.m;
  const int r = rm.n_r();
  Matrix a = Matrix::Zero(2 * r + 1, 1 + m + r);
  a(0, 0) = 1.0;
  const double s = frame == PiFrame::kSlackGraph ? -1.0 : 1.0;
  if (r > 0) {
    a.block(1, 0, r, 1) = s * rm.b_in_h;
    a.block(1, 1, r, m) = s * rm.w_in_h;
    if (frame == PiFrame::kSlackGraph) a.block(1, 1 + m, r, r).setIdentity();
    a.block(1 + r, 1 + m, r, r).setIdentity();
  }
  return a;
}

Matrix output_matrix(const ReducedModel& rm, const Vector& z0) {
  const int m = rm.m;
  const int r = rm.n_r();
  Matrix b(1 + m + r, rm.l);
  b.row(0) = (rm.c0 - z0).transpose();
  b.middleRows(1, m) = rm.affine_gain().transpose();
  if (r > 0) b.bottomRows(r) = rm.w_out_h.transpose();
  return b;
}

Matrix ball_matrix(const TargetSpec& target, int n_r) {
  const auto m = target.w0.size();
  Matrix t = Matrix::Zero(1 + m + n_r, 1 + m + n_r);
  t(0, 0) = target.eps * target.eps - target.w0.squaredNorm();
  t.block(0, 1, 1, m) = target.w0.transpose();
  t.block(1, 0, m, 1) = target.w0;
  t.block(1, 1, m, m) = -Matrix::Identity(m, m);
  return t;
}

ConicProgram build_primal(const ReducedModel& rm, const TargetSpec& target,
                          const Vector& z0, MultiplierClass cls) {
  check_inputs(rm, target, z0);
  const int r = rm.n_r();
  const int size = 1 + rm.m + r;
  const MultiplierStructure s = multiplier_structure(cls, r);

  ConicProgram p;
  const int l_sq = p.add_vector("l_sq", 1, Sign::kNonneg);
  const int tau = p.add_vector("tau", 1, Sign::kNonneg);
  std::vector<int> var_index;
  for (const auto& v : s.variables) {
    if (v.symmetric) {
      var_index.push_back(p.add_matrix(
          v.name, v.dim, v.nonneg ? MatrixCone::kEntrywiseNonneg : MatrixCone::kFreeSymmetric));
    } else {
      var_index.push_back(p.add_vector(v.name, v.dim, v.nonneg ? Sign::kNonneg : Sign::kFree));
    }
  }

  for (std::size_t k = 0; k < s.inequalities.size(); ++k) {
    LinearConstraint c;
    c.name = "multiplier_" + std::to_string(k);
    c.rel = Relation::kGe;
    for (const auto& coef : s.inequalities[k].coefs) {
      c.expr.entries.push_back({{var_index[static_cast<std::size_t>(coef.variable)], coef.entry}, coef.value});
    }
    p.add_constraint(std::move(c));
  }

  LmiConstraint lmi;
  lmi.name = "lipschitz_lmi";
  lmi.size = size;
  // Frame rows as pool vectors; row 0 is e1.
  lmi.pool = frame_matrix(rm, s.frame).transpose();
  const Matrix b = output_matrix(rm, z0);
  lmi.constant.dense = -b * b.transpose();
  lmi.coeffs.push_back({{l_sq, 0}, SymCoeff{Matrix(), {{0, 0, 1.0}}}});
  lmi.coeffs.push_back({{tau, 0}, SymCoeff{-ball_matrix(target, r), {}}});
  for (const auto& e : s.basis) {
    SymCoeff coeff;
    for (const auto& t : e.terms) coeff.terms.push_back({t.a, t.b, -t.coef});
    lmi.coeffs.push_back({{var_index[static_cast<std::size_t>(e.variable)], e.entry}, std::move(coeff)});
  }
  p.add_lmi(std::move(lmi));

  Objective obj;
  obj.sense = Sense::kMin;
  obj.expr.entries.push_back({{l_sq, 0}, 1.0});
  p.set_objective(std::move(obj));
  return p;
}

ConicProgram build_dual(const ReducedModel& rm, const TargetSpec& target,
                        const Vector& z0) {
  check_inputs(rm, target, z0);
  const int r = rm.n_r();
  const int size = 1 + rm.m + r;
  const int k = 2 * r + 1;

  ConicProgram p;
  const int h = p.add_matrix("H", size, MatrixCone::kPsd,
                             frame_matrix(rm, PiFrame::kSlackGraph).transpose());

  auto term = [&](int a, int b, double coef) {
    LinearExpr e;
    e.functionals.push_back({h, SymCoeff{Matrix(), {{a, b, coef}}}});
    return e;
  };

  LinearConstraint h11{"h11", term(0, 0, 1.0), Relation::kEq};
  h11.expr.constant = -1.0;
  p.add_constraint(std::move(h11));

  LinearConstraint ball;
  ball.name = "ball";
  ball.rel = Relation::kGe;
  ball.expr.functionals.push_back({h, SymCoeff{ball_matrix(target, r), {}}});
  p.add_constraint(std::move(ball));

  for (int i = 0; i < r; ++i) {
    p.add_constraint({"relu_" + std::to_string(i), term(1 + i, 1 + r + i, 1.0), Relation::kEq});
  }
  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) {
      p.add_constraint({"nonneg_" + std::to_string(a) + "_" + std::to_string(b),
                        term(a, b, 1.0), Relation::kGe});
    }
  }

  const Matrix bm = output_matrix(rm, z0);
  Objective obj;
  obj.sense = Sense::kMax;
  obj.expr.functionals.push_back({h, SymCoeff{bm * bm.transpose(), {}}});
  p.set_objective(std::move(obj));
  return p;
}

}  // namespace lipcert
