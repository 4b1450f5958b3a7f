#include "lipcert/conic_program.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "lipcert/error.hpp"
#include "lipcert/triangular.hpp"

namespace lipcert {

int ConicProgram::add_vector(std::string name, int dim, Sign sign) {
  if (dim < 0) throw_dimension("variable '" + name + "' has negative length");
  if (find_variable(name)) throw_domain("duplicate variable name '" + name + "'");
  Variable v;
  v.name = std::move(name);
  v.dim = dim;
  v.sign = sign;
  variables_.push_back(std::move(v));
  canonical_ = false;
  return static_cast<int>(variables_.size()) - 1;
}

int ConicProgram::add_matrix(std::string name, int dim, MatrixCone cone,
                             Matrix pool) {
  if (dim < 0) throw_dimension("variable '" + name + "' has negative size");
  if (find_variable(name)) throw_domain("duplicate variable name '" + name + "'");
  if (pool.size() > 0 && pool.rows() != dim) {
    throw_dimension("pool of '" + name + "' must have " + std::to_string(dim) +
                    " rows");
  }
  Variable v;
  v.name = std::move(name);
  v.symmetric = true;
  v.dim = dim;
  v.cone = cone;
  v.pool = pool.size() > 0 ? std::move(pool) : Matrix(dim, 0);
  variables_.push_back(std::move(v));
  canonical_ = false;
  return static_cast<int>(variables_.size()) - 1;
}

void ConicProgram::add_constraint(LinearConstraint c) {
  constraints_.push_back(std::move(c));
  canonical_ = false;
}

void ConicProgram::add_lmi(LmiConstraint lmi) {
  if (lmi.pool.size() == 0) lmi.pool = Matrix(lmi.size, 0);
  lmis_.push_back(std::move(lmi));
  canonical_ = false;
}

std::optional<int> ConicProgram::find_variable(const std::string& name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

const Variable& ConicProgram::variable(const std::string& name) const {
  const auto idx = find_variable(name);
  if (!idx) throw_domain("unknown variable '" + name + "'");
  return variables_[static_cast<std::size_t>(*idx)];
}

namespace {

void check_coeff(const SymCoeff& c, const Matrix& pool, int size,
                 const std::string& where) {
  if (c.dense.size() > 0 && (c.dense.rows() != size || c.dense.cols() != size)) {
    throw_domain(where + ": dense coefficient has the wrong shape");
  }
  for (const auto& t : c.terms) {
    if (t.a < 0 || t.b < 0 || t.a >= pool.cols() || t.b >= pool.cols()) {
      throw_domain(where + ": low-rank term references a missing pool vector");
    }
  }
}

}  // namespace

void ConicProgram::validate() const {
  const auto nvars = static_cast<int>(variables_.size());
  auto check_ref = [&](const EntryRef& r, const std::string& where) {
    if (r.var < 0 || r.var >= nvars) {
      throw_domain(where + ": reference to an undeclared variable");
    }
    const auto& v = variables_[static_cast<std::size_t>(r.var)];
    if (r.entry < 0 || r.entry >= v.entry_count()) {
      throw_domain(where + ": entry out of range for '" + v.name + "'");
    }
  };
  auto check_expr = [&](const LinearExpr& e, const std::string& where) {
    for (const auto& [ref, coef] : e.entries) check_ref(ref, where);
    for (const auto& [var, coeff] : e.functionals) {
      if (var < 0 || var >= nvars || !variables_[static_cast<std::size_t>(var)].symmetric) {
        throw_domain(where + ": functional on a non-matrix variable");
      }
      const auto& v = variables_[static_cast<std::size_t>(var)];
      check_coeff(coeff, v.pool, v.dim, where);
    }
  };
  for (const auto& c : constraints_) check_expr(c.expr, "constraint '" + c.name + "'");
  check_expr(objective_.expr, "objective");
  for (const auto& lmi : lmis_) {
    const std::string where = "lmi '" + lmi.name + "'";
    if (lmi.pool.rows() != lmi.size) throw_domain(where + ": pool has the wrong row count");
    check_coeff(lmi.constant, lmi.pool, lmi.size, where);
    for (const auto& [ref, coeff] : lmi.coeffs) {
      check_ref(ref, where);
      check_coeff(coeff, lmi.pool, lmi.size, where);
    }
  }
  for (const auto& r : pinned_) check_ref(r, "pinned entry");
}

// ---------------------------------------------------------------------------
// Canonicalization

namespace {

// Byte-level keys make exact comparisons of coefficient structures cheap and
// give a deterministic ordering.
void put(std::string& key, double x) {
  if (x == 0.0) x = 0.0;  // fold -0.0
  char buf[sizeof(double)];
  std::memcpy(buf, &x, sizeof(double));
  key.append(buf, sizeof(double));
}

void put(std::string& key, int x) {
  char buf[sizeof(int)];
  std::memcpy(buf, &x, sizeof(int));
  key.append(buf, sizeof(int));
}

void put(std::string& key, const SymCoeff& c) {
  put(key, static_cast<int>(c.terms.size()));
  for (const auto& t : c.terms) {
    put(key, t.a);
    put(key, t.b);
    put(key, t.coef);
  }
  put(key, static_cast<int>(c.dense.rows()));
  for (Eigen::Index j = 0; j < c.dense.cols(); ++j)
    for (Eigen::Index i = 0; i <= j; ++i) put(key, c.dense(i, j));
}

std::string linear_key(const LinearExpr& e) {
  std::string key;
  put(key, static_cast<int>(e.entries.size()));
  for (const auto& [ref, coef] : e.entries) {
    put(key, ref.var);
    put(key, ref.entry);
    put(key, coef);
  }
  put(key, static_cast<int>(e.functionals.size()));
  for (const auto& [var, coeff] : e.functionals) {
    put(key, var);
    put(key, coeff);
  }
  return key;
}

void normalize(SymCoeff& c) {
  if (c.dense.size() > 0) {
    c.dense = 0.5 * (c.dense + c.dense.transpose());
    if (c.dense.isZero(0.0)) c.dense.resize(0, 0);
  }
  for (auto& t : c.terms) {
    if (t.a > t.b) std::swap(t.a, t.b);
  }
  std::sort(c.terms.begin(), c.terms.end(), [](const auto& x, const auto& y) {
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });
  std::vector<LowRankTerm> merged;
  for (const auto& t : c.terms) {
    if (!merged.empty() && merged.back().a == t.a && merged.back().b == t.b) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const auto& t) { return t.coef == 0.0; });
  c.terms = std::move(merged);
}

void add_into(SymCoeff& dst, const SymCoeff& src) {
  if (src.dense.size() > 0) {
    if (dst.dense.size() == 0) {
      dst.dense = src.dense;
    } else {
      dst.dense += src.dense;
    }
  }
  dst.terms.insert(dst.terms.end(), src.terms.begin(), src.terms.end());
}

void scale(SymCoeff& c, double s) {
  if (c.dense.size() > 0) c.dense *= s;
  for (auto& t : c.terms) t.coef *= s;
}

void normalize(LinearExpr& e, const std::vector<bool>& pinned_mask,
               const std::vector<int>& entry_offset) {
  auto is_pinned = [&](const EntryRef& r) {
    return pinned_mask[static_cast<std::size_t>(entry_offset[static_cast<std::size_t>(r.var)] + r.entry)];
  };
  std::map<EntryRef, double> entries;
  for (const auto& [ref, coef] : e.entries) {
    if (!is_pinned(ref)) entries[ref] += coef;
  }
  e.entries.clear();
  for (const auto& [ref, coef] : entries) {
    if (coef != 0.0) e.entries.emplace_back(ref, coef);
  }
  std::map<int, SymCoeff> funcs;
  for (const auto& [var, coeff] : e.functionals) add_into(funcs[var], coeff);
  e.functionals.clear();
  for (auto& [var, coeff] : funcs) {
    normalize(coeff);
    if (!coeff.empty()) e.functionals.emplace_back(var, std::move(coeff));
  }
}

void negate(LinearExpr& e) {
  for (auto& [ref, coef] : e.entries) coef = -coef;
  for (auto& [var, coeff] : e.functionals) scale(coeff, -1.0);
  e.constant = -e.constant;
}

// Sign of the first coefficient in canonical order.
double leading_sign(const LinearExpr& e) {
  if (!e.entries.empty()) return e.entries.front().second > 0 ? 1.0 : -1.0;
  for (const auto& [var, coeff] : e.functionals) {
    if (!coeff.terms.empty()) return coeff.terms.front().coef > 0 ? 1.0 : -1.0;
    for (Eigen::Index j = 0; j < coeff.dense.cols(); ++j)
      for (Eigen::Index i = 0; i <= j; ++i)
        if (coeff.dense(i, j) != 0.0) return coeff.dense(i, j) > 0 ? 1.0 : -1.0;
  }
  return 1.0;
}

}  // namespace

ConicProgram canonicalize(const ConicProgram& program) {
  program.validate();
  ConicProgram out = program;

  std::vector<int> offset;
  int total = 0;
  for (const auto& v : out.variables_) {
    offset.push_back(total);
    total += v.entry_count();
  }
  std::vector<bool> pinned(static_cast<std::size_t>(total), false);
  for (const auto& r : out.pinned_) {
    pinned[static_cast<std::size_t>(offset[static_cast<std::size_t>(r.var)] + r.entry)] = true;
  }
  auto flat = [&](const EntryRef& r) {
    return static_cast<std::size_t>(offset[static_cast<std::size_t>(r.var)] + r.entry);
  };

  for (bool changed = true; changed;) {
    changed = false;

    // Coefficient normalization; pinned entries vanish everywhere.
    normalize(out.objective_.expr, pinned, offset);
    for (auto& c : out.constraints_) {
      normalize(c.expr, pinned, offset);
      if (c.rel == Relation::kLe) {
        negate(c.expr);
        c.rel = Relation::kGe;
      }
      if (c.rel == Relation::kEq && leading_sign(c.expr) < 0) negate(c.expr);
    }
    for (auto& lmi : out.lmis_) {
      normalize(lmi.constant);
      std::map<EntryRef, SymCoeff> merged;
      for (auto& [ref, coeff] : lmi.coeffs) {
        if (!pinned[flat(ref)]) add_into(merged[ref], coeff);
      }
      lmi.coeffs.clear();
      for (auto& [ref, coeff] : merged) {
        normalize(coeff);
        if (!coeff.empty()) lmi.coeffs.emplace_back(ref, std::move(coeff));
      }
    }

    // Zero rows.
    std::vector<LinearConstraint> kept;
    for (auto& c : out.constraints_) {
      if (c.expr.has_variables()) {
        kept.push_back(std::move(c));
        continue;
      }
      const bool ok = c.rel == Relation::kEq ? c.expr.constant == 0.0
                                             : c.expr.constant >= 0.0;
      if (!ok) {
        throw Error(ErrorCode::kDomain,
                    "constraint '" + c.name + "' has no variables and is violated");
      }
    }

    // Sort, deduplicate, drop inequalities implied by equalities.
    struct Keyed {
      std::string key;
      LinearConstraint c;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(kept.size());
    for (auto& c : kept) keyed.push_back({linear_key(c.expr), std::move(c)});
    std::stable_sort(keyed.begin(), keyed.end(), [](const Keyed& x, const Keyed& y) {
      if (x.c.rel != y.c.rel) return x.c.rel == Relation::kEq;
      if (x.key != y.key) return x.key < y.key;
      return x.c.expr.constant < y.c.expr.constant;
    });
    std::unordered_map<std::string, double> eq_constant;
    std::unordered_map<std::string, double> ge_seen;
    out.constraints_.clear();
    for (auto& k : keyed) {
      if (k.c.rel == Relation::kEq) {
        if (auto it = eq_constant.find(k.key); it != eq_constant.end()) {
          if (it->second != k.c.expr.constant) {
            throw Error(ErrorCode::kDomain, "contradictory equalities on '" + k.c.name + "'");
          }
          continue;
        }
        eq_constant.emplace(k.key, k.c.expr.constant);
        out.constraints_.push_back(std::move(k.c));
        continue;
      }
      // L + c >= 0 against L + c_eq = 0 (or -L + ...)
      bool implied = false;
      if (auto it = eq_constant.find(k.key); it != eq_constant.end()) {
        implied = k.c.expr.constant - it->second >= 0.0;
      } else {
        LinearExpr neg = k.c.expr;
        negate(neg);
        if (auto it2 = eq_constant.find(linear_key(neg)); it2 != eq_constant.end()) {
          implied = neg.constant - it2->second <= 0.0;
        }
      }
      if (implied) continue;
      // Sorted by constant, so the first copy of a form is the tightest.
      if (ge_seen.count(k.key)) continue;
      ge_seen.emplace(k.key, k.c.expr.constant);
      out.constraints_.push_back(std::move(k.c));
    }

    // Footprints of entrywise entries: objective coefficient, every linear
    // constraint coefficient, every LMI coefficient.
    std::vector<std::string> footprint(static_cast<std::size_t>(total));
    auto note = [&](const EntryRef& r, int where, const auto& coef) {
      auto& f = footprint[flat(r)];
      put(f, where);
      put(f, coef);
    };
    for (const auto& [ref, coef] : out.objective_.expr.entries) note(ref, -1, coef);
    for (std::size_t ci = 0; ci < out.constraints_.size(); ++ci) {
      for (const auto& [ref, coef] : out.constraints_[ci].expr.entries) {
        note(ref, static_cast<int>(ci), coef);
      }
    }
    for (std::size_t li = 0; li < out.lmis_.size(); ++li) {
      for (const auto& [ref, coeff] : out.lmis_[li].coeffs) {
        note(ref, -2 - static_cast<int>(li), coeff);
      }
    }
    std::vector<bool> in_functional(out.variables_.size(), false);
    auto mark = [&](const LinearExpr& e) {
      for (const auto& [var, coeff] : e.functionals) {
        in_functional[static_cast<std::size_t>(var)] = true;
      }
    };
    mark(out.objective_.expr);
    for (const auto& c : out.constraints_) mark(c.expr);
    std::unordered_map<std::string, EntryRef> first_seen;
    for (int vi = 0; vi < static_cast<int>(out.variables_.size()); ++vi) {
      const auto& var = out.variables_[static_cast<std::size_t>(vi)];
      if (!var.entrywise() || in_functional[static_cast<std::size_t>(vi)]) continue;
      for (int e = 0; e < var.entry_count(); ++e) {
        const EntryRef ref{vi, e};
        if (pinned[flat(ref)]) continue;
        const auto& f = footprint[flat(ref)];
        if (f.empty()) continue;  // unused entries stay as declared
        auto [it, inserted] = first_seen.emplace(f, ref);
        if (inserted) continue;
        // Keep a free copy if there is one; the sum of the two is then free.
        const auto& other = out.variables_[static_cast<std::size_t>(it->second.var)];
        EntryRef drop = ref;
        if (other.entry_nonneg() && !var.entry_nonneg()) {
          drop = it->second;
          it->second = ref;
        }
        pinned[flat(drop)] = true;
        changed = true;
      }
    }
  }

  out.pinned_.clear();
  for (int vi = 0; vi < static_cast<int>(out.variables_.size()); ++vi) {
    for (int e = 0; e < out.variables_[static_cast<std::size_t>(vi)].entry_count(); ++e) {
      if (pinned[flat({vi, e})]) out.pinned_.push_back({vi, e});
    }
  }
  out.canonical_ = true;
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

Matrix to_dense(const SymCoeff& coeff, const Matrix& pool, int size) {
  Matrix out = coeff.dense.size() > 0 ? coeff.dense : Matrix::Zero(size, size);
  if (!coeff.terms.empty()) {
    Matrix s = Matrix::Zero(pool.cols(), pool.cols());
    for (const auto& t : coeff.terms) {
      s(t.a, t.b) += 0.5 * t.coef;
      s(t.b, t.a) += 0.5 * t.coef;
    }
    out += pool * s * pool.transpose();
  }
  return out;
}

Matrix unpack_symmetric(const Vector& flat, int dim) {
  if (flat.size() != sym_entry_count(dim)) {
    throw_dimension("unpack_symmetric: wrong number of entries");
  }
  Matrix a(dim, dim);
  int k = 0;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j, ++k) a(i, j) = a(j, i) = flat[k];
  }
  return a;
}

Vector pack_symmetric(const Matrix& a) {
  const int dim = static_cast<int>(a.rows());
  Vector flat(sym_entry_count(dim));
  int k = 0;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j, ++k) flat[k] = a(i, j);
  }
  return flat;
}

namespace {

double functional_value(const SymCoeff& coeff, const Matrix& pool,
                        const Matrix& x) {
  double v = 0.0;
  if (coeff.dense.size() > 0) v += (coeff.dense.array() * x.array()).sum();
  if (!coeff.terms.empty()) {
    const Matrix g = pool.transpose() * x * pool;
    for (const auto& t : coeff.terms) v += t.coef * g(t.a, t.b);
  }
  return v;
}

}  // namespace

double evaluate(const ConicProgram& program, const LinearExpr& expr,
                const VariableValues& values) {
  double v = expr.constant;
  for (const auto& [ref, coef] : expr.entries) {
    v += coef * values[static_cast<std::size_t>(ref.var)][ref.entry];
  }
  for (const auto& [var, coeff] : expr.functionals) {
    const auto& decl = program.variables()[static_cast<std::size_t>(var)];
    const Matrix x = unpack_symmetric(values[static_cast<std::size_t>(var)], decl.dim);
    v += functional_value(coeff, decl.pool, x);
  }
  return v;
}

Matrix evaluate_lmi(const LmiConstraint& lmi, const VariableValues& values) {
  Matrix dense = lmi.constant.dense.size() > 0 ? lmi.constant.dense
                                               : Matrix::Zero(lmi.size, lmi.size);
  Matrix s = Matrix::Zero(lmi.pool.cols(), lmi.pool.cols());
  auto add_terms = [&](const SymCoeff& c, double scale_by) {
    for (const auto& t : c.terms) {
      s(t.a, t.b) += 0.5 * scale_by * t.coef;
      s(t.b, t.a) += 0.5 * scale_by * t.coef;
    }
  };
  add_terms(lmi.constant, 1.0);
  for (const auto& [ref, coeff] : lmi.coeffs) {
    const double x = values[static_cast<std::size_t>(ref.var)][ref.entry];
    if (x == 0.0) continue;
    if (coeff.dense.size() > 0) dense += x * coeff.dense;
    add_terms(coeff, x);
  }
  return dense + lmi.pool * s * lmi.pool.transpose();
}

// ---------------------------------------------------------------------------
// JSON dump

namespace {

using nlohmann::json;

constexpr int kExplicitLimit = 200;

json matrix_json(const Matrix& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json coeff_json(const SymCoeff& c, const Matrix& pool, int size) {
  json j;
  json terms = json::array();
  for (const auto& t : c.terms) terms.push_back({t.a, t.b, t.coef});
  j["terms"] = std::move(terms);
  if (c.dense.size() > 0) j["dense"] = matrix_json(c.dense);
  if (size <= kExplicitLimit) j["matrix"] = matrix_json(to_dense(c, pool, size));
  return j;
}

json expr_json(const ConicProgram& p, const LinearExpr& e) {
  json j;
  json entries = json::array();
  for (const auto& [ref, coef] : e.entries) {
    entries.push_back({{"var", p.variables()[static_cast<std::size_t>(ref.var)].name},
                       {"entry", ref.entry},
                       {"coef", coef}});
  }
  j["entries"] = std::move(entries);
  json funcs = json::array();
  for (const auto& [var, coeff] : e.functionals) {
    const auto& decl = p.variables()[static_cast<std::size_t>(var)];
    funcs.push_back({{"var", decl.name}, {"coef", coeff_json(coeff, decl.pool, decl.dim)}});
  }
  j["functionals"] = std::move(funcs);
  j["constant"] = e.constant;
  return j;
}

std::string_view rel_name(Relation r) {
  switch (r) {
    case Relation::kEq:
      return "eq";
    case Relation::kGe:
      return "ge";
    case Relation::kLe:
      return "le";
  }
  return "?";
}

std::string_view cone_name(const Variable& v) {
  if (!v.symmetric) return v.sign == Sign::kNonneg ? "nonneg" : "free";
  switch (v.cone) {
    case MatrixCone::kPsd:
      return "psd";
    case MatrixCone::kEntrywiseNonneg:
      return "entrywise_nonneg";
    case MatrixCone::kFreeSymmetric:
      return "free_symmetric";
  }
  return "?";
}

}  // namespace

std::string to_json(const ConicProgram& program) {
  json j;
  json vars = json::array();
  for (const auto& v : program.variables()) {
    json jv{{"name", v.name},
            {"kind", v.symmetric ? "symmetric" : "vector"},
            {"dim", v.dim},
            {"cone", cone_name(v)}};
    if (v.symmetric && v.pool.cols() > 0) jv["pool"] = matrix_json(v.pool);
    vars.push_back(std::move(jv));
  }
  j["variables"] = std::move(vars);
  json cons = json::array();
  for (const auto& c : program.constraints()) {
    cons.push_back({{"name", c.name}, {"relation", rel_name(c.rel)},
                    {"expr", expr_json(program, c.expr)}});
  }
  j["linear_constraints"] = std::move(cons);
  json lmis = json::array();
  for (const auto& lmi : program.lmis()) {
    json jl{{"name", lmi.name}, {"size", lmi.size}};
    jl["pool"] = matrix_json(lmi.pool);
    jl["constant"] = coeff_json(lmi.constant, lmi.pool, lmi.size);
    json coeffs = json::array();
    for (const auto& [ref, coeff] : lmi.coeffs) {
      coeffs.push_back({{"var", program.variables()[static_cast<std::size_t>(ref.var)].name},
                        {"entry", ref.entry},
                        {"coef", coeff_json(coeff, lmi.pool, lmi.size)}});
    }
    jl["coeffs"] = std::move(coeffs);
    lmis.push_back(std::move(jl));
  }
  j["lmis"] = std::move(lmis);
  j["objective"] = {{"sense", program.objective().sense == Sense::kMin ? "min" : "max"},
                    {"expr", expr_json(program, program.objective().expr)}};
  json pinned = json::array();
  for (const auto& r : program.pinned()) {
    pinned.push_back({program.variables()[static_cast<std::size_t>(r.var)].name, r.entry});
  }
  j["pinned_zero"] = std::move(pinned);
  j["canonical"] = program.canonical();
  return j.dump();
}

}  // namespace lipcert
