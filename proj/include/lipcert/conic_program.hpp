#pragma once

#include <compare>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lipcert/model.hpp"

namespace lipcert {

enum class Sign { kFree, kNonneg };
enum class MatrixCone { kPsd, kEntrywiseNonneg, kFreeSymmetric };

/// A decision variable: either a vector of scalars sharing a sign, or a
/// symmetric matrix stored as its upper triangle (see triangular.hpp).
///
/// Matrix variables carry a `pool` (dim x K) of vectors u_k; linear
/// functionals on the matrix are written as sums of coef * u_a' X u_b so that
/// large structured constraints stay cheap to store and to evaluate.
struct Variable {
  std::string name;
  bool symmetric = false;
  int dim = 0;
  Sign sign = Sign::kFree;
  MatrixCone cone = MatrixCone::kFreeSymmetric;
  Matrix pool;

  int entry_count() const { return symmetric ? dim * (dim + 1) / 2 : dim; }
  /// Every entry lives in its own scalar cone (everything except PSD).
  bool entrywise() const { return !symmetric || cone != MatrixCone::kPsd; }
  bool entry_nonneg() const {
    return symmetric ? cone == MatrixCone::kEntrywiseNonneg
                     : sign == Sign::kNonneg;
  }
};

struct EntryRef {
  int var = 0;
  int entry = 0;
  auto operator<=>(const EntryRef&) const = default;
};

/// coef * (u_a u_b' + u_b u_a') / 2 over some pool of vectors u.
struct LowRankTerm {
  int a = 0;
  int b = 0;
  double coef = 0.0;
};

/// Symmetric matrix dense + sum of low-rank terms. `dense` is 0x0 if absent.
struct SymCoeff {
  Matrix dense;
  std::vector<LowRankTerm> terms;

  bool empty() const { return dense.size() == 0 && terms.empty(); }
};

/// sum_e coef_e x_e + sum_k <A_k, X_{var_k}> + constant
struct LinearExpr {
  std::vector<std::pair<EntryRef, double>> entries;
  std::vector<std::pair<int, SymCoeff>> functionals;
  double constant = 0.0;

  bool has_variables() const { return !entries.empty() || !functionals.empty(); }
};

enum class Relation { kEq, kGe, kLe };

/// expr (= | >= | <=) 0
struct LinearConstraint {
  std::string name;
  LinearExpr expr;
  Relation rel = Relation::kGe;
};

/// constant + sum_e x_e * coeff_e is positive semidefinite.
/// Low-rank terms index the columns of `pool` (size x K).
struct LmiConstraint {
  std::string name;
  int size = 0;
  Matrix pool;
  SymCoeff constant;
  std::vector<std::pair<EntryRef, SymCoeff>> coeffs;
};

enum class Sense { kMin, kMax };

struct Objective {
  Sense sense = Sense::kMin;
  LinearExpr expr;
};

/// Flat entry values, one vector per variable.
using VariableValues = std::vector<Vector>;

/// Solver-agnostic conic program: declared variables with their cones,
/// affine equalities/inequalities, LMIs and a linear objective.
class ConicProgram {
 public:
  int add_vector(std::string name, int dim, Sign sign);
  int add_matrix(std::string name, int dim, MatrixCone cone, Matrix pool = {});
  void add_constraint(LinearConstraint c);
  void add_lmi(LmiConstraint lmi);
  void set_objective(Objective obj) { objective_ = std::move(obj); }

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<LinearConstraint>& constraints() const {
    return constraints_;
  }
  const std::vector<LmiConstraint>& lmis() const { return lmis_; }
  const Objective& objective() const { return objective_; }
  /// Entries fixed to zero (merged duplicates), sorted.
  const std::vector<EntryRef>& pinned() const { return pinned_; }
  bool canonical() const { return canonical_; }

  std::optional<int> find_variable(const std::string& name) const;
  const Variable& variable(const std::string& name) const;

  /// Throws Error(kDomain) on references to undeclared variables or entries,
  /// pool indices out of range, or shape mismatches.
  void validate() const;

 private:
  friend ConicProgram canonicalize(const ConicProgram& program);

  std::vector<Variable> variables_;
  std::vector<LinearConstraint> constraints_;
  std::vector<LmiConstraint> lmis_;
  Objective objective_;
  std::vector<EntryRef> pinned_;
  bool canonical_ = false;
};

/// Normal form: Le turned into Ge, coefficients merged and sorted, zero rows
/// dropped, constraints sorted and deduplicated, inequalities implied by an
/// equality on the same linear form removed, and entries with identical
/// coefficient footprints merged (the redundant one pinned to zero).
/// Idempotent.
ConicProgram canonicalize(const ConicProgram& program);

/// Dense value of a SymCoeff over `pool` (size x size).
Matrix to_dense(const SymCoeff& coeff, const Matrix& pool, int size);

Matrix unpack_symmetric(const Vector& flat, int dim);
Vector pack_symmetric(const Matrix& a);

double evaluate(const ConicProgram& program, const LinearExpr& expr,
                const VariableValues& values);
Matrix evaluate_lmi(const LmiConstraint& lmi, const VariableValues& values);

/// Debug dump with structured and (for small blocks) explicit matrices.
std::string to_json(const ConicProgram& program);

}  // namespace lipcert
