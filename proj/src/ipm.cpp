#include "ipm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace lipcert::ipm {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }

// U' W U
Matrix gram(const Matrix& pool, const Matrix& w) {
  if (pool.cols() == 0) return Matrix(0, 0);
  return pool.transpose() * (w * pool);
}

// <A, W> for symmetric W, with P = U' W U precomputed.
double inner(const BlockData& d, const Matrix& w, const Matrix& p) {
  double v = 0.0;
  if (d.dense.size() > 0) v += (d.dense.array() * w.array()).sum();
  for (const auto& t : d.terms) v += t.coef * p(t.a, t.b);
  return v;
}

// sum_i y_i A_i restricted to one block.
Matrix adjoint(const PsdBlock& blk, const Vector& y) {
  Matrix out = Matrix::Zero(blk.size, blk.size);
  const auto k = blk.pool.cols();
  Matrix s = Matrix::Zero(k, k);
  for (const auto& [i, d] : blk.a) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    if (d.dense.size() > 0) out += yi * d.dense;
    for (const auto& t : d.terms) {
      s(t.a, t.b) += 0.5 * yi * t.coef;
      s(t.b, t.a) += 0.5 * yi * t.coef;
    }
  }
  if (k > 0) out += blk.pool * s * blk.pool.transpose();
  return out;
}

Matrix block_c(const PsdBlock& blk) {
  Matrix out = blk.c.dense.size() > 0 ? blk.c.dense
                                      : Matrix::Zero(blk.size, blk.size);
  if (!blk.c.terms.empty()) {
    const auto k = blk.pool.cols();
    Matrix s = Matrix::Zero(k, k);
    for (const auto& t : blk.c.terms) {
      s(t.a, t.b) += 0.5 * t.coef;
      s(t.b, t.a) += 0.5 * t.coef;
    }
    out += blk.pool * s * blk.pool.transpose();
  }
  return out;
}

// A(W) accumulated into `out` for a symmetric W.
void apply(const PsdBlock& blk, const Matrix& w, Vector& out) {
  const Matrix p = gram(blk.pool, w);
  for (const auto& [i, d] : blk.a) out[i] += inner(d, w, p);
}

double frobenius(const BlockData& d, const Matrix& uu) {
  double n2 = 0.0;
  if (d.dense.size() > 0) n2 += d.dense.squaredNorm();
  // cross terms with the dense part are ignored; only a scale estimate
  for (const auto& s : d.terms) {
    for (const auto& t : d.terms) {
      n2 += 0.5 * s.coef * t.coef *
            (uu(s.a, t.a) * uu(s.b, t.b) + uu(s.a, t.b) * uu(s.b, t.a));
    }
  }
  return std::sqrt(std::max(n2, 0.0));
}

// tr(sym(a b') X sym(c d') Y)
inline double lowrank_pair(const LowRankTerm& s, const LowRankTerm& t,
                           const Matrix& gx, const Matrix& gy) {
  const int a = s.a, b = s.b, c = t.a, d = t.b;
  return 0.25 * s.coef * t.coef *
         (gx(b, c) * gy(d, a) + gx(b, d) * gy(c, a) + gx(a, c) * gy(d, b) +
          gx(a, d) * gy(c, b));
}

double max_step_psd(const Matrix& x, const Matrix& dx) {
  Eigen::LLT<Matrix> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const auto l = llt.matrixL();
  Matrix w = l.solve(dx);
  w = l.solve(Matrix(w.transpose()));
  w = sym(w);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(w, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues()(0);
  return lmin >= 0.0 ? kInf : -1.0 / lmin;
}

double max_step_lp(const Vector& x, const Vector& dx) {
  double step = kInf;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (dx[i] < 0.0) step = std::min(step, -x[i] / dx[i]);
  }
  return step;
}

struct Direction {
  std::vector<Matrix> dx, dz;
  Vector dx_lp, dz_lp, dy;
};

Result solve_scaled(const Problem& problem, const Options& options);

}  // namespace

// Rows are normalized to unit norm, then b and C to norm at most one; the
// solution is mapped back to the original scaling.
Result solve(const Problem& input, const Options& options) {
  Problem p = input;
  const int m = p.num_constraints;
  Vector row_norm2 = Vector::Zero(m);
  for (auto& blk : p.psd) {
    const Matrix uu = gram(blk.pool, Matrix::Identity(blk.size, blk.size));
    for (const auto& [i, d] : blk.a) row_norm2[i] += std::pow(frobenius(d, uu), 2);
  }
  for (const auto& t : p.lp.a) row_norm2[t.row()] += t.value() * t.value();
  Vector d(m);
  for (int i = 0; i < m; ++i) d[i] = row_norm2[i] > 0.0 ? 1.0 / std::sqrt(row_norm2[i]) : 1.0;
  for (auto& blk : p.psd) {
    for (auto& [i, data] : blk.a) {
      if (data.dense.size() > 0) data.dense *= d[i];
      for (auto& t : data.terms) t.coef *= d[i];
    }
  }
  for (auto& t : p.lp.a) t = Eigen::Triplet<double>(t.row(), t.col(), t.value() * d[t.row()]);
  p.b = p.b.cwiseProduct(d);

  double c2 = p.lp.c.squaredNorm();
  for (const auto& blk : p.psd) c2 += block_c(blk).squaredNorm();
  const double b_scale = std::max(1.0, p.b.norm());
  const double c_scale = std::max(1.0, std::sqrt(c2));
  p.b /= b_scale;
  p.lp.c /= c_scale;
  for (auto& blk : p.psd) {
    if (blk.c.dense.size() > 0) blk.c.dense /= c_scale;
    for (auto& t : blk.c.terms) t.coef /= c_scale;
  }

  Result r = solve_scaled(p, options);
  for (auto& x : r.x) x *= b_scale;
  for (auto& z : r.z) z *= c_scale;
  r.x_lp *= b_scale;
  r.z_lp *= c_scale;
  r.y = c_scale * r.y.cwiseProduct(d);
  r.primal_objective *= b_scale * c_scale;
  r.dual_objective *= b_scale * c_scale;
  return r;
}

namespace {

Result solve_scaled(const Problem& problem, const Options& options) {
  const int m = problem.num_constraints;
  const auto nb = problem.psd.size();
  const int nlp = problem.lp.size;

  SparseMatrix a_lp(m, nlp);
  a_lp.setFromTriplets(problem.lp.a.begin(), problem.lp.a.end());
  a_lp.makeCompressed();

  std::vector<Matrix> c_blocks;
  double norm_c2 = problem.lp.c.squaredNorm();
  for (const auto& blk : problem.psd) {
    c_blocks.push_back(block_c(blk));
    norm_c2 += c_blocks.back().squaredNorm();
  }
  const double norm_c = std::sqrt(norm_c2);
  const double norm_b = problem.b.norm();

  int n_total = nlp;
  for (const auto& blk : problem.psd) n_total += blk.size;

  // Starting point in the style of SDPT3's infeasible start.
  Result res;
  res.y = Vector::Zero(m);
  for (std::size_t k = 0; k < nb; ++k) {
    const auto& blk = problem.psd[k];
    const Matrix uu = gram(blk.pool, Matrix::Identity(blk.size, blk.size));
    const double rn = std::sqrt(static_cast<double>(blk.size));
    double xi = std::max(10.0, rn), eta = std::max({10.0, rn, c_blocks[k].norm()});
    for (const auto& [i, d] : blk.a) {
      const double an = frobenius(d, uu);
      xi = std::max(xi, rn * (1.0 + std::abs(problem.b[i])) / (1.0 + an));
      eta = std::max(eta, an);
    }
    res.x.push_back(xi * Matrix::Identity(blk.size, blk.size));
    res.z.push_back(eta * Matrix::Identity(blk.size, blk.size));
  }
  {
    double xi = 10.0, eta = std::max(10.0, problem.lp.c.size() > 0
                                               ? problem.lp.c.cwiseAbs().maxCoeff()
                                               : 0.0);
    Vector col_norm = Vector::Zero(nlp);
    for (int k = 0; k < a_lp.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(a_lp, k); it; ++it) {
        col_norm[k] += it.value() * it.value();
        xi = std::max(xi, (1.0 + std::abs(problem.b[it.row()])) /
                              (1.0 + std::abs(it.value())));
        eta = std::max(eta, std::abs(it.value()));
      }
    }
    res.x_lp = Vector::Constant(nlp, xi);
    res.z_lp = Vector::Constant(nlp, eta);
  }

  auto& x = res.x;
  auto& z = res.z;
  auto& x_lp = res.x_lp;
  auto& z_lp = res.z_lp;
  auto& y = res.y;

  std::vector<Matrix> zinv(nb), rd(nb), xrdy(nb);
  int stalled = 0;
  double last_sp = 0.0, last_sd = 0.0;

  auto finish_loose = [&]() {
    const double loose = 1e3;
    if (res.primal_infeasibility <= loose * options.tol_feas &&
        res.dual_infeasibility <= loose * options.tol_feas &&
        res.relative_gap <= loose * options.tol_gap) {
      res.status = Status::kNearOptimal;
    } else {
      res.status = Status::kFailure;
    }
  };

  res.status = Status::kFailure;
  bool done = false;
  // Best iterate by max(pinf, dinf, gap); restored if the run ends without
  // converging (late iterations can lose accuracy near a degenerate optimum).
  Result best;
  double best_merit = kInf;
  int best_iter = 0;
  for (int iter = 0; iter <= options.max_iters; ++iter) {
    res.iterations = iter;

    bool factored = true;
    for (std::size_t k = 0; k < nb; ++k) {
      Eigen::LLT<Matrix> llt(z[k]);
      if (llt.info() != Eigen::Success) {
        if (options.verbose) std::fprintf(stderr, "ipm: dual slack lost definiteness\n");
        factored = false;
        break;
      }
      zinv[k] = llt.solve(Matrix::Identity(z[k].rows(), z[k].cols()));
      zinv[k] = sym(zinv[k]);
    }

    // Residuals and progress measures.
    Vector ax = Vector::Zero(m);
    for (std::size_t k = 0; k < nb; ++k) apply(problem.psd[k], x[k], ax);
    if (nlp > 0) ax += a_lp * x_lp;
    const Vector rp = problem.b - ax;
    double rd_norm2 = 0.0, xz = 0.0, pobj = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      rd[k] = c_blocks[k] - adjoint(problem.psd[k], y) - z[k];
      rd_norm2 += rd[k].squaredNorm();
      xz += (x[k].array() * z[k].array()).sum();
      pobj += (c_blocks[k].array() * x[k].array()).sum();
    }
    Vector rd_lp = problem.lp.c - z_lp;
    if (nlp > 0) rd_lp -= a_lp.transpose() * y;
    rd_norm2 += rd_lp.squaredNorm();
    xz += x_lp.dot(z_lp);
    pobj += problem.lp.c.dot(x_lp);
    const double dobj = problem.b.dot(y);
    const double mu = xz / std::max(n_total, 1);

    res.primal_objective = pobj;
    res.dual_objective = dobj;
    res.primal_infeasibility = rp.norm() / (1.0 + norm_b);
    res.dual_infeasibility = std::sqrt(rd_norm2) / (1.0 + norm_c);
    res.relative_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

    if (options.verbose) {
      std::fprintf(stderr,
                   "ipm %3d  pobj % .9e  dobj % .9e  pinf %.2e  dinf %.2e  gap %.2e  mu %.2e  step %.2f %.2f\n",
                   iter, pobj, dobj, res.primal_infeasibility,
                   res.dual_infeasibility, res.relative_gap, mu, last_sp, last_sd);
    }

    if (res.primal_infeasibility <= options.tol_feas &&
        res.dual_infeasibility <= options.tol_feas &&
        res.relative_gap <= options.tol_gap) {
      res.status = Status::kOptimal;
      done = true;
      break;
    }
    if (dobj > 1e8 * (1.0 + norm_c) && res.dual_infeasibility < 1e-3) {
      res.status = Status::kPrimalInfeasible;
      done = true;
      break;
    }
    if (pobj < -1e8 * (1.0 + norm_b) && res.primal_infeasibility < 1e-3) {
      res.status = Status::kDualInfeasible;
      done = true;
      break;
    }
    const double merit = std::max({res.primal_infeasibility, res.dual_infeasibility, res.relative_gap});
    if (merit < best_merit) {
      best_merit = merit;
      best_iter = iter;
      best = res;
    }
    if (!factored || iter == options.max_iters || stalled >= 3 ||
        (best_merit < 1e-4 && iter - best_iter >= 8)) {
      break;
    }

    // Schur complement M_ij = sum_k tr(A_i X A_j Z^-1) + lp part.
    Matrix schur = Matrix::Zero(m, m);
    for (std::size_t k = 0; k < nb; ++k) {
      const auto& blk = problem.psd[k];
      const Matrix gx = gram(blk.pool, x[k]);
      const Matrix gy = gram(blk.pool, zinv[k]);
      // Y D_i X and its pool projection for constraints with dense parts.
      std::vector<Matrix> r(blk.a.size()), ur(blk.a.size());
      for (std::size_t ii = 0; ii < blk.a.size(); ++ii) {
        const auto& d = blk.a[ii].second;
        if (d.dense.size() == 0) continue;
        r[ii] = zinv[k] * d.dense * x[k];
        ur[ii] = gram(blk.pool, r[ii]);
      }
      for (std::size_t ii = 0; ii < blk.a.size(); ++ii) {
        const auto& [ci, di] = blk.a[ii];
        const bool dense_i = di.dense.size() > 0;
        for (std::size_t jj = ii; jj < blk.a.size(); ++jj) {
          const auto& [cj, dj] = blk.a[jj];
          double v = 0.0;
          for (const auto& s : di.terms) {
            for (const auto& t : dj.terms) v += lowrank_pair(s, t, gx, gy);
          }
          if (dense_i) {
            for (const auto& t : dj.terms) {
              v += 0.5 * t.coef * (ur[ii](t.b, t.a) + ur[ii](t.a, t.b));
            }
          }
          if (dj.dense.size() > 0) {
            for (const auto& s : di.terms) {
              v += 0.5 * s.coef * (ur[jj](s.a, s.b) + ur[jj](s.b, s.a));
            }
            if (dense_i) v += (di.dense.array() * r[jj].array()).sum();
          }
          schur(std::min(ci, cj), std::max(ci, cj)) += v;
        }
      }
    }
    for (int col = 0; col < a_lp.outerSize(); ++col) {
      const double w = x_lp[col] / z_lp[col];
      for (SparseMatrix::InnerIterator it(a_lp, col); it; ++it) {
        for (SparseMatrix::InnerIterator jt = it; jt; ++jt) {
          const auto r0 = std::min(it.row(), jt.row());
          const auto r1 = std::max(it.row(), jt.row());
          schur(r0, r1) += w * it.value() * jt.value();
        }
      }
    }
    schur.triangularView<Eigen::StrictlyLower>() = schur.transpose();

    Eigen::LLT<Matrix> schur_llt(schur);
    if (schur_llt.info() != Eigen::Success) {
      const double shift = 1e-13 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
      schur.diagonal().array() += shift;
      schur_llt.compute(schur);
      if (schur_llt.info() != Eigen::Success) {
        if (options.verbose) std::fprintf(stderr, "ipm: Schur complement factorization failed\n");
        break;
      }
    }

    for (std::size_t k = 0; k < nb; ++k) xrdy[k] = x[k] * rd[k] * zinv[k];

    // target * Z^-1 - X - corr Z^-1 - X Rd Z^-1, then the Newton step.
    auto direction = [&](double target, const Direction* corr) {
      Vector rhs = rp;
      std::vector<Matrix> g(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        g[k] = target * zinv[k] - x[k] - xrdy[k];
        if (corr) g[k] -= corr->dx[k] * corr->dz[k] * zinv[k];
        g[k] = sym(g[k]);
        Vector tmp = Vector::Zero(m);
        apply(problem.psd[k], g[k], tmp);
        rhs -= tmp;
      }
      Vector g_lp(nlp);
      for (int i = 0; i < nlp; ++i) {
        double num = target - x_lp[i] * z_lp[i] - x_lp[i] * rd_lp[i];
        if (corr) num -= corr->dx_lp[i] * corr->dz_lp[i];
        g_lp[i] = num / z_lp[i];
      }
      if (nlp > 0) rhs -= a_lp * g_lp;

      Direction dir;
      dir.dy = schur_llt.solve(rhs);
      for (int refine = 0; refine < 2; ++refine) {
        dir.dy += schur_llt.solve(rhs - schur * dir.dy);
      }
      dir.dx.resize(nb);
      dir.dz.resize(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        dir.dz[k] = rd[k] - adjoint(problem.psd[k], dir.dy);
        Matrix dx = target * zinv[k] - x[k] - x[k] * dir.dz[k] * zinv[k];
        if (corr) dx -= corr->dx[k] * corr->dz[k] * zinv[k];
        dir.dx[k] = sym(dx);
      }
      dir.dz_lp = rd_lp;
      if (nlp > 0) dir.dz_lp -= a_lp.transpose() * dir.dy;
      dir.dx_lp.resize(nlp);
      for (int i = 0; i < nlp; ++i) {
        double num = target - x_lp[i] * z_lp[i] - x_lp[i] * dir.dz_lp[i];
        if (corr) num -= corr->dx_lp[i] * corr->dz_lp[i];
        dir.dx_lp[i] = num / z_lp[i];
      }
      return dir;
    };

    auto steps = [&](const Direction& dir) {
      double ap = max_step_lp(x_lp, dir.dx_lp);
      double ad = max_step_lp(z_lp, dir.dz_lp);
      for (std::size_t k = 0; k < nb; ++k) {
        ap = std::min(ap, max_step_psd(x[k], dir.dx[k]));
        ad = std::min(ad, max_step_psd(z[k], dir.dz[k]));
      }
      return std::pair{ap, ad};
    };

    const Direction pred = direction(0.0, nullptr);
    auto [ap, ad] = steps(pred);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double xz_aff = (x_lp + ap * pred.dx_lp).dot(z_lp + ad * pred.dz_lp);
    for (std::size_t k = 0; k < nb; ++k) {
      xz_aff += ((x[k] + ap * pred.dx[k]).array() * (z[k] + ad * pred.dz[k]).array()).sum();
    }
    const double mu_aff = xz_aff / std::max(n_total, 1);
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    const Direction dir = direction(sigma * mu, &pred);
    auto [sp, sd] = steps(dir);
    const double gamma = 0.9 + 0.09 * std::min({1.0, sp, sd});
    sp = std::min(1.0, gamma * sp);
    sd = std::min(1.0, gamma * sd);

    for (std::size_t k = 0; k < nb; ++k) {
      x[k] = sym(x[k] + sp * dir.dx[k]);
      z[k] = sym(z[k] + sd * dir.dz[k]);
    }
    x_lp += sp * dir.dx_lp;
    z_lp += sd * dir.dz_lp;
    y += sd * dir.dy;

    stalled = std::max(sp, sd) < 1e-6 ? stalled + 1 : 0;
    last_sp = sp;
    last_sd = sd;
  }

  if (!done) {
    if (best_merit < kInf) {
      const int iterations = res.iterations;
      res = std::move(best);
      res.iterations = iterations;
    }
    finish_loose();
  }
  return res;
}

}  // namespace

}  // namespace lipcert::ipm
