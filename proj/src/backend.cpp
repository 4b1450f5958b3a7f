#include "lipcert/backend.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>

#include <Eigen/Eigenvalues>

#include "ipm.hpp"
#include "lipcert/error.hpp"
#include "lipcert/triangular.hpp"

namespace lipcert {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kNearOptimal: return "near_optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kNumericalFailure: return "numerical_failure";
  }
  return "numerical_failure";
}

namespace {

using Clock = std::chrono::steady_clock;

struct Layout {
  std::vector<int> offset;
  int total = 0;
  std::vector<bool> pinned;
  std::vector<bool> used;

  int flat(const EntryRef& r) const { return offset[static_cast<std::size_t>(r.var)] + r.entry; }
};

// Functionals on entrywise variables become plain entry coefficients.
LinearExpr lower_functionals(const ConicProgram& p, const LinearExpr& in) {
  LinearExpr e = in;
  e.functionals.clear();
  for (const auto& [var, coeff] : in.functionals) {
    const auto& v = p.variables()[static_cast<std::size_t>(var)];
    if (!v.entrywise()) {
      e.functionals.emplace_back(var, coeff);
      continue;
    }
    const Matrix a = to_dense(coeff, v.pool, v.dim);
    for (int i = 0; i < v.dim; ++i) {
      for (int j = i; j < v.dim; ++j) {
        const double c = i == j ? a(i, i) : a(i, j) + a(j, i);
        if (c != 0.0) e.entries.push_back({{var, sym_entry_index(i, j, v.dim)}, c});
      }
    }
  }
  return e;
}

Layout make_layout(const ConicProgram& p, const std::vector<LinearExpr>& rows,
                   const LinearExpr& objective) {
  Layout lay;
  for (const auto& v : p.variables()) {
    lay.offset.push_back(lay.total);
    lay.total += v.entry_count();
  }
  lay.pinned.assign(static_cast<std::size_t>(lay.total), false);
  lay.used.assign(static_cast<std::size_t>(lay.total), false);
  for (const auto& r : p.pinned()) lay.pinned[static_cast<std::size_t>(lay.flat(r))] = true;
  auto mark = [&](const LinearExpr& e) {
    for (const auto& [ref, c] : e.entries) lay.used[static_cast<std::size_t>(lay.flat(ref))] = true;
  };
  for (const auto& r : rows) mark(r);
  mark(objective);
  for (const auto& lmi : p.lmis()) {
    for (const auto& [ref, c] : lmi.coeffs) lay.used[static_cast<std::size_t>(lay.flat(ref))] = true;
  }
  return lay;
}

ipm::BlockData block_data(const SymCoeff& c, double scale) {
  ipm::BlockData d;
  if (c.dense.size() > 0) d.dense = scale * c.dense;
  d.terms = c.terms;
  for (auto& t : d.terms) t.coef *= scale;
  return d;
}

void append(ipm::BlockData& dst, const ipm::BlockData& src) {
  if (src.dense.size() > 0) {
    if (dst.dense.size() == 0) dst.dense = src.dense;
    else dst.dense += src.dense;
  }
  dst.terms.insert(dst.terms.end(), src.terms.begin(), src.terms.end());
}

ipm::Options ipm_options(const SolveSettings& s) {
  ipm::Options o;
  o.tol_feas = s.abs_tol;
  o.tol_gap = s.rel_tol;
  o.max_iters = s.max_iters;
  const char* env = std::getenv("LIPCERT_SOLVER_VERBOSE");
  o.verbose = s.verbose || (env != nullptr && std::string_view(env) == "1");
  return o;
}

struct Mapped {
  ipm::Result result;
  VariableValues values;
  bool flipped = false;  // program is the IPM's dual side
};

// Program as the IPM dual: y = free entries, nonneg entries, Ge rows and
// LMIs all become slack cones.
Mapped solve_dform(const ConicProgram& p, const SolveSettings& settings) {
  std::vector<LinearExpr> rows;
  for (const auto& c : p.constraints()) {
    if (c.rel == Relation::kEq) {
      throw Error(ErrorCode::kUnsupported,
                  "equality '" + c.name + "' in a program with LMIs");
    }
    rows.push_back(lower_functionals(p, c.expr));
    if (!rows.back().functionals.empty()) {
      throw Error(ErrorCode::kUnsupported, "PSD matrix variable in a program with LMIs");
    }
  }
  const LinearExpr obj = lower_functionals(p, p.objective().expr);
  if (!obj.functionals.empty()) {
    throw Error(ErrorCode::kUnsupported, "PSD matrix variable in a program with LMIs");
  }
  for (const auto& v : p.variables()) {
    if (!v.entrywise()) {
      throw Error(ErrorCode::kUnsupported,
                  "PSD matrix variable '" + v.name + "' in a program with LMIs");
    }
  }
  const Layout lay = make_layout(p, rows, obj);

  std::vector<int> yidx(static_cast<std::size_t>(lay.total), -1);
  int m = 0;
  ipm::Problem prob;
  std::vector<double> lp_c;
  for (std::size_t vi = 0; vi < p.variables().size(); ++vi) {
    const auto& v = p.variables()[vi];
    for (int e = 0; e < v.entry_count(); ++e) {
      const auto f = static_cast<std::size_t>(lay.offset[vi] + e);
      if (lay.pinned[f]) continue;
      if (!lay.used[f] && !v.entry_nonneg()) continue;
      yidx[f] = m++;
      if (v.entry_nonneg()) {
        prob.lp.a.emplace_back(yidx[f], static_cast<int>(lp_c.size()), -1.0);
        lp_c.push_back(0.0);
      }
    }
  }
  prob.num_constraints = m;
  prob.b = Vector::Zero(m);
  const double sense = p.objective().sense == Sense::kMin ? -1.0 : 1.0;
  for (const auto& [ref, c] : obj.entries) prob.b[yidx[static_cast<std::size_t>(lay.flat(ref))]] += sense * c;
  for (const auto& r : rows) {
    const int col = static_cast<int>(lp_c.size());
    for (const auto& [ref, c] : r.entries) {
      prob.lp.a.emplace_back(yidx[static_cast<std::size_t>(lay.flat(ref))], col, -c);
    }
    lp_c.push_back(r.constant);
  }
  prob.lp.size = static_cast<int>(lp_c.size());
  prob.lp.c = Eigen::Map<Vector>(lp_c.data(), prob.lp.size);

  for (const auto& lmi : p.lmis()) {
    ipm::PsdBlock blk;
    blk.size = lmi.size;
    blk.pool = lmi.pool;
    blk.c = block_data(lmi.constant, 1.0);
    std::map<int, ipm::BlockData> by_row;
    for (const auto& [ref, coeff] : lmi.coeffs) {
      append(by_row[yidx[static_cast<std::size_t>(lay.flat(ref))]], block_data(coeff, -1.0));
    }
    for (auto& [row, d] : by_row) blk.a.emplace_back(row, std::move(d));
    prob.psd.push_back(std::move(blk));
  }

  Mapped out;
  out.flipped = true;
  out.result = ipm::solve(prob, ipm_options(settings));
  out.values.resize(p.variables().size());
  for (std::size_t vi = 0; vi < p.variables().size(); ++vi) {
    const auto& v = p.variables()[vi];
    out.values[vi] = Vector::Zero(v.entry_count());
    for (int e = 0; e < v.entry_count(); ++e) {
      const int k = yidx[static_cast<std::size_t>(lay.offset[vi] + e)];
      if (k >= 0) out.values[vi][e] = out.result.y[k];
    }
  }
  return out;
}

// Program as the IPM primal: PSD variables are blocks, entries live in the
// orthant (free ones split), Ge rows get slacks.
Mapped solve_pform(const ConicProgram& p, const SolveSettings& settings) {
  std::vector<LinearExpr> rows;
  std::vector<bool> is_ge;
  for (const auto& c : p.constraints()) {
    rows.push_back(lower_functionals(p, c.expr));
    is_ge.push_back(c.rel != Relation::kEq);
  }
  const LinearExpr obj = lower_functionals(p, p.objective().expr);
  const Layout lay = make_layout(p, rows, obj);
  const double sense = p.objective().sense == Sense::kMin ? 1.0 : -1.0;

  std::vector<int> block_of(p.variables().size(), -1);
  std::vector<std::vector<Vector>> extra_pool;
  std::vector<std::map<int, int>> unit_col;
  ipm::Problem prob;
  for (std::size_t vi = 0; vi < p.variables().size(); ++vi) {
    const auto& v = p.variables()[vi];
    if (v.entrywise()) continue;
    block_of[vi] = static_cast<int>(prob.psd.size());
    ipm::PsdBlock blk;
    blk.size = v.dim;
    prob.psd.push_back(std::move(blk));
    extra_pool.emplace_back();
    unit_col.emplace_back();
  }
  auto unit = [&](int blk, int i) {
    auto& cols = unit_col[static_cast<std::size_t>(blk)];
    if (auto it = cols.find(i); it != cols.end()) return it->second;
    const auto& v = p.variables()[static_cast<std::size_t>(
        std::find(block_of.begin(), block_of.end(), blk) - block_of.begin())];
    const int idx = static_cast<int>(v.pool.cols() + extra_pool[static_cast<std::size_t>(blk)].size());
    extra_pool[static_cast<std::size_t>(blk)].push_back(Vector::Unit(v.dim, i));
    cols.emplace(i, idx);
    return idx;
  };

  // LP columns: pos (and neg for free entries).
  std::vector<int> pos(static_cast<std::size_t>(lay.total), -1);
  std::vector<int> neg(static_cast<std::size_t>(lay.total), -1);
  int nlp = 0;
  for (std::size_t vi = 0; vi < p.variables().size(); ++vi) {
    const auto& v = p.variables()[vi];
    if (!v.entrywise()) continue;
    for (int e = 0; e < v.entry_count(); ++e) {
      const auto f = static_cast<std::size_t>(lay.offset[vi] + e);
      if (lay.pinned[f] || !lay.used[f]) continue;
      pos[f] = nlp++;
      if (!v.entry_nonneg()) neg[f] = nlp++;
    }
  }
  const int n_entry_cols = nlp;
  for (bool ge : is_ge) nlp += ge ? 1 : 0;

  const int m = static_cast<int>(rows.size());
  prob.num_constraints = m;
  prob.b = Vector::Zero(m);
  prob.lp.size = nlp;
  prob.lp.c = Vector::Zero(nlp);
  std::vector<std::map<int, ipm::BlockData>> block_rows(prob.psd.size());
  std::vector<ipm::BlockData> block_c(prob.psd.size());

  // Adds coef * entry to row `row` (-1 = objective).
  auto add_entry = [&](int row, const EntryRef& ref, double coef) {
    const auto f = static_cast<std::size_t>(lay.flat(ref));
    const int blk = block_of[static_cast<std::size_t>(ref.var)];
    if (blk >= 0) {
      const auto& v = p.variables()[static_cast<std::size_t>(ref.var)];
      const auto [i, j] = sym_entry_pair(ref.entry, v.dim);
      ipm::BlockData d;
      d.terms.push_back({unit(blk, i), unit(blk, j), coef});
      append(row < 0 ? block_c[static_cast<std::size_t>(blk)]
                     : block_rows[static_cast<std::size_t>(blk)][row], d);
      return;
    }
    if (row < 0) {
      prob.lp.c[pos[f]] += coef;
      if (neg[f] >= 0) prob.lp.c[neg[f]] -= coef;
      return;
    }
    prob.lp.a.emplace_back(row, pos[f], coef);
    if (neg[f] >= 0) prob.lp.a.emplace_back(row, neg[f], -coef);
  };

  int slack = n_entry_cols;
  for (int r = 0; r < m; ++r) {
    const auto& e = rows[static_cast<std::size_t>(r)];
    prob.b[r] = -e.constant;
    for (const auto& [ref, c] : e.entries) add_entry(r, ref, c);
    for (const auto& [var, coeff] : e.functionals) {
      const int blk = block_of[static_cast<std::size_t>(var)];
      append(block_rows[static_cast<std::size_t>(blk)][r], block_data(coeff, 1.0));
    }
    if (is_ge[static_cast<std::size_t>(r)]) prob.lp.a.emplace_back(r, slack++, -1.0);
  }
  for (const auto& [ref, c] : obj.entries) add_entry(-1, ref, sense * c);
  for (const auto& [var, coeff] : obj.functionals) {
    append(block_c[static_cast<std::size_t>(block_of[static_cast<std::size_t>(var)])],
           block_data(coeff, sense));
  }

  for (std::size_t vi = 0; vi < p.variables().size(); ++vi) {
    const int blk = block_of[vi];
    if (blk < 0) continue;
    auto& b = prob.psd[static_cast<std::size_t>(blk)];
    const auto& v = p.variables()[vi];
    const auto& extra = extra_pool[static_cast<std::size_t>(blk)];
    b.pool.resize(v.dim, v.pool.cols() + static_cast<Eigen::Index>(extra.size()));
    if (v.pool.cols() > 0) b.pool.leftCols(v.pool.cols()) = v.pool;
    for (std::size_t k = 0; k < extra.size(); ++k) b.pool.col(v.pool.cols() + static_cast<Eigen::Index>(k)) = extra[k];
    b.c = std::move(block_c[static_cast<std::size_t>(blk)]);
    for (auto& [row, d] : block_rows[static_cast<std::size_t>(blk)]) b.a.emplace_back(row, std::move(d));
  }

  Mapped out;
  out.result = ipm::solve(prob, ipm_options(settings));
  out.values.resize(p.variables().size());
  for (std::size_t vi = 0; vi < p.variables().size(); ++vi) {
    const auto& v = p.variables()[vi];
    const int blk = block_of[vi];
    if (blk >= 0) {
      out.values[vi] = pack_symmetric(out.result.x[static_cast<std::size_t>(blk)]);
      continue;
    }
    out.values[vi] = Vector::Zero(v.entry_count());
    for (int e = 0; e < v.entry_count(); ++e) {
      const auto f = static_cast<std::size_t>(lay.offset[vi] + e);
      if (pos[f] < 0) continue;
      double x = out.result.x_lp[pos[f]];
      if (neg[f] >= 0) x -= out.result.x_lp[neg[f]];
      out.values[vi][e] = x;
    }
  }
  return out;
}

double min_eigenvalue(const Matrix& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

}  // namespace

VariableValues values_of(const ConicProgram& program, const Solution& solution) {
  VariableValues values;
  for (const auto& v : program.variables()) {
    auto it = solution.variable_values.find(v.name);
    if (it == solution.variable_values.end()) {
      values.push_back(Vector::Zero(v.entry_count()));
    } else {
      if (it->second.size() != v.entry_count()) {
        throw_dimension("value of '" + v.name + "' has the wrong length");
      }
      values.push_back(it->second);
    }
  }
  for (const auto& r : program.pinned()) values[static_cast<std::size_t>(r.var)][r.entry] = 0.0;
  return values;
}

ResidualReport verify_residuals(const ConicProgram& program,
                                const Solution& solution, double tol) {
  const VariableValues values = values_of(program, solution);
  ResidualReport rep;
  bool pass = true;
  auto record = [&](double violation, double scale) {
    rep.max_violation = std::max(rep.max_violation, violation);
    if (!(violation <= tol * (1.0 + scale))) pass = false;
  };

  for (const auto& c : program.constraints()) {
    const double v = evaluate(program, c.expr, values);
    double viol = 0.0;
    switch (c.rel) {
      case Relation::kEq: viol = std::abs(v); break;
      case Relation::kGe: viol = std::max(0.0, -v); break;
      case Relation::kLe: viol = std::max(0.0, v); break;
    }
    if (!std::isfinite(v)) viol = std::numeric_limits<double>::infinity();
    rep.constraint_violation.push_back({c.name, viol});
    record(viol, std::abs(c.expr.constant));
  }
  for (const auto& lmi : program.lmis()) {
    const Matrix a = evaluate_lmi(lmi, values);
    const double lmin = a.allFinite() ? min_eigenvalue(a)
                                      : -std::numeric_limits<double>::infinity();
    rep.lmi_min_eigenvalue.push_back({lmi.name, lmin});
    record(std::max(0.0, -lmin), to_dense(lmi.constant, lmi.pool, lmi.size).norm());
  }
  for (std::size_t vi = 0; vi < program.variables().size(); ++vi) {
    const auto& v = program.variables()[vi];
    if (!v.entrywise()) {
      const double lmin = min_eigenvalue(unpack_symmetric(values[vi], v.dim));
      rep.psd_min_eigenvalue.push_back({v.name, lmin});
      record(std::max(0.0, -lmin), 0.0);
    } else if (v.entry_nonneg() && values[vi].size() > 0) {
      rep.sign_violation = std::max(rep.sign_violation, std::max(0.0, -values[vi].minCoeff()));
    }
  }
  record(rep.sign_violation, 0.0);
  rep.pass = pass;
  return rep;
}

Solution solve(const ConicProgram& input, const SolveSettings& settings) {
  if (!(settings.abs_tol > 0.0) || !(settings.rel_tol > 0.0)) {
    throw_domain("solver tolerances must be positive");
  }
  if (settings.max_iters < 1) throw_domain("max_iters must be at least 1");
  const ConicProgram program = input.canonical() ? input : canonicalize(input);

  const auto start = Clock::now();
  bool has_psd_var = false;
  bool has_eq = false;
  for (const auto& v : program.variables()) has_psd_var = has_psd_var || !v.entrywise();
  for (const auto& c : program.constraints()) has_eq = has_eq || c.rel == Relation::kEq;
  const bool pform = program.lmis().empty() && (has_psd_var || has_eq);
  Mapped mapped = pform ? solve_pform(program, settings) : solve_dform(program, settings);

  Solution sol;
  sol.iterations = mapped.result.iterations;
  switch (mapped.result.status) {
    case ipm::Status::kOptimal: sol.status = SolveStatus::kOptimal; break;
    case ipm::Status::kNearOptimal: sol.status = SolveStatus::kNearOptimal; break;
    case ipm::Status::kPrimalInfeasible:
      sol.status = mapped.flipped ? SolveStatus::kUnbounded : SolveStatus::kInfeasible;
      sol.certificate = true;
      break;
    case ipm::Status::kDualInfeasible:
      sol.status = mapped.flipped ? SolveStatus::kInfeasible : SolveStatus::kUnbounded;
      sol.certificate = true;
      break;
    case ipm::Status::kFailure: sol.status = SolveStatus::kNumericalFailure; break;
  }

  if (sol.ok()) {
    for (std::size_t vi = 0; vi < program.variables().size(); ++vi) {
      sol.variable_values.emplace(program.variables()[vi].name, mapped.values[vi]);
    }
    sol.objective = evaluate(program, program.objective().expr, mapped.values);
    sol.residuals = verify_residuals(program, sol, 10.0 * settings.abs_tol);
    if (!sol.residuals.pass) {
      sol.status = SolveStatus::kNearOptimal;
      sol.residuals = verify_residuals(program, sol, 1e4 * settings.abs_tol);
      if (!sol.residuals.pass) {
        sol.status = SolveStatus::kNumericalFailure;
        sol.variable_values.clear();
      }
    }
  }
  sol.solve_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  return sol;
}

}  // namespace lipcert
