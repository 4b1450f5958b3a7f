#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lipcert/model.hpp"

namespace lipcert {

/// Multiplier families describing the ReLU graph {(q, p) : p = relu(q)}.
///  kNN  - nonnegative-matrix inner approximation of the copositive family
///  kOZF - static O'Shea-Zames-Falb (doubly hyperdominant M)
///  kFAZ - nonnegative / diagonal / T-matrix family of Fazlyab et al.
enum class MultiplierClass { kNN, kOZF, kFAZ };

std::string_view to_string(MultiplierClass cls);
MultiplierClass parse_multiplier_class(std::string_view text);

struct NnParam {
  Matrix q;  // symmetric (2n+1) x (2n+1), entrywise >= 0
  Vector j;  // diagonal of J, free
};

struct OzfParam {
  Matrix m;  // n x n doubly hyperdominant
};

struct FazParam {
  Vector nu;      // >= 0
  Vector eta;     // >= 0
  Vector lambda;  // diagonal of Lambda, free
  Vector t;       // weights lambda_ij >= 0 for i < j, row-major pair order
};

using MultiplierParam = std::variant<NnParam, OzfParam, FazParam>;

MultiplierClass class_of(const MultiplierParam& param);

/// Checks shapes against n and the sign / hyperdominance constraints of the
/// class, with slack `tol`.
bool is_valid(const MultiplierParam& param, int n, double tol = 0.0);

/// Index of the pair (i, j), i < j, in the T-matrix weight vector.
int t_pair_index(int i, int j, int n);

/// E = [1 0 0; 0 -I I; 0 0 I], mapping [1; q; p] to [1; p - q; p].
Matrix e_matrix(int n);

/// The multiplier matrix Pi (size 2n+1) in [1; q; p] coordinates, assembled
/// from the explicit block formulas of each class.
Matrix assemble_pi(const MultiplierParam& param, int n);

/// Sampling check of [1; q; p]' Pi [1; q; p] >= 0 on the ReLU graph. This is
/// a necessary condition only. The threshold is -tol * (1 + |[1; q; p]|^2)
/// so that heavy-tailed draws are not flagged for rounding error.
bool membership_test(const Matrix& pi, int n, int samples, std::uint64_t seed,
                     double tol = 1e-9);

/// Rewrites an OZF or FAZ multiplier as an NN multiplier with the same Pi:
/// J takes the diagonal of the (2,3) coupling, Q23 the off-diagonal part.
NnParam embed_inclusion(const MultiplierParam& from, int n);

// ---------------------------------------------------------------------------
// Decision-variable layout used when the multiplier enters an SDP.

/// Coordinates in which basis terms are expressed.
///   kReluGraph:  x  = [1; q; p]
///   kSlackGraph: Ex = [1; p - q; p]   (Pi = E' S E)
enum class PiFrame { kReluGraph, kSlackGraph };

/// coef * (e_a e_b' + e_b e_a') / 2
struct PiTerm {
  int a = 0;
  int b = 0;
  double coef = 0.0;
};

struct MultiplierVariable {
  std::string name;
  bool symmetric = false;  // symmetric dim x dim matrix, else a vector
  int dim = 0;
  bool nonneg = false;

  int entry_count() const { return symmetric ? dim * (dim + 1) / 2 : dim; }
};

/// Contribution of one scalar decision entry to the frame matrix.
struct PiBasisElement {
  int variable = 0;
  int entry = 0;
  std::vector<PiTerm> terms;
};

/// sum_k coef_k * value(variable_k, entry_k) >= 0
struct MultiplierInequality {
  struct Coef {
    int variable;
    int entry;
    double value;
  };
  std::vector<Coef> coefs;
};

struct MultiplierStructure {
  MultiplierClass cls = MultiplierClass::kNN;
  int n = 0;
  PiFrame frame = PiFrame::kReluGraph;
  std::vector<MultiplierVariable> variables;
  std::vector<PiBasisElement> basis;
  std::vector<MultiplierInequality> inequalities;
};

MultiplierStructure multiplier_structure(MultiplierClass cls, int n);

/// Flattened entry values per variable, in the order of `variables`.
using MultiplierValues = std::vector<Vector>;

MultiplierValues flatten(const MultiplierStructure& s,
                         const MultiplierParam& param);
MultiplierParam unflatten(const MultiplierStructure& s,
                          const MultiplierValues& values);

/// Pi rebuilt from the basis description (second route to assemble_pi).
Matrix assemble_from_structure(const MultiplierStructure& s,
                               const MultiplierValues& values);

}  // namespace lipcert
