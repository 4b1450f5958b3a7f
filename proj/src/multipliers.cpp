#include "lipcert/multipliers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "lipcert/error.hpp"
#include "lipcert/triangular.hpp"

namespace lipcert {

std::string_view to_string(MultiplierClass cls) {
  switch (cls) {
    case MultiplierClass::kNN:
      return "nn";
    case MultiplierClass::kOZF:
      return "ozf";
    case MultiplierClass::kFAZ:
      return "faz";
  }
  return "?";
}

MultiplierClass parse_multiplier_class(std::string_view text) {
  if (text == "nn" || text == "NN") return MultiplierClass::kNN;
  if (text == "ozf" || text == "OZF") return MultiplierClass::kOZF;
  if (text == "faz" || text == "FAZ") return MultiplierClass::kFAZ;
  throw_domain("unknown multiplier class '" + std::string(text) +
               "' (expected nn, ozf or faz)");
}

MultiplierClass class_of(const MultiplierParam& param) {
  return static_cast<MultiplierClass>(param.index());
}

int t_pair_index(int i, int j, int n) {
  if (i > j) std::swap(i, j);
  // pairs (0,1) .. (0,n-1), (1,2) .. : offset of row i plus column shift
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

namespace {

bool nonneg(const Eigen::Ref<const Matrix>& a, double tol) {
  return a.size() == 0 || a.minCoeff() >= -tol;
}

void require_valid_shape(const MultiplierParam& param, int n) {
  if (!is_valid(param, n, std::numeric_limits<double>::infinity())) {
    throw_dimension("multiplier parameter does not match n = " +
                    std::to_string(n));
  }
}

// T = sum_{i<j} t_ij (e_i - e_j)(e_i - e_j)'
Matrix t_matrix(const Vector& t, int n) {
  Matrix out = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double w = t[t_pair_index(i, j, n)];
      out(i, i) += w;
      out(j, j) += w;
      out(i, j) -= w;
      out(j, i) -= w;
    }
  }
  return out;
}

}  // namespace

bool is_valid(const MultiplierParam& param, int n, double tol) {
  const int s = 2 * n + 1;
  if (const auto* p = std::get_if<NnParam>(&param)) {
    if (p->q.rows() != s || p->q.cols() != s || p->j.size() != n) return false;
    if (!std::isinf(tol) && !(p->q - p->q.transpose()).isZero(1e-12)) {
      return false;
    }
    return std::isinf(tol) || nonneg(p->q, tol);
  }
  if (const auto* p = std::get_if<OzfParam>(&param)) {
    if (p->m.rows() != n || p->m.cols() != n) return false;
    if (std::isinf(tol)) return true;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j && p->m(i, j) > tol) return false;
      }
    }
    return nonneg(p->m.rowwise().sum(), tol) &&
           nonneg(p->m.colwise().sum(), tol);
  }
  const auto& p = std::get<FazParam>(param);
  if (p.nu.size() != n || p.eta.size() != n || p.lambda.size() != n ||
      p.t.size() != n * (n - 1) / 2) {
    return false;
  }
  return std::isinf(tol) ||
         (nonneg(p.nu, tol) && nonneg(p.eta, tol) && nonneg(p.t, tol));
}

Matrix e_matrix(int n) {
  if (n < 0) throw_domain("e_matrix: n must be nonnegative");
  Matrix e = Matrix::Zero(2 * n + 1, 2 * n + 1);
  e(0, 0) = 1.0;
  e.block(1, 1, n, n) = -Matrix::Identity(n, n);
  e.block(1, 1 + n, n, n) = Matrix::Identity(n, n);
  e.block(1 + n, 1 + n, n, n) = Matrix::Identity(n, n);
  return e;
}

Matrix assemble_pi(const MultiplierParam& param, int n) {
  require_valid_shape(param, n);
  const int s = 2 * n + 1;
  Matrix pi = Matrix::Zero(s, s);
  if (const auto* p = std::get_if<NnParam>(&param)) {
    const Matrix& q = p->q;
    const Matrix jd = p->j.asDiagonal();
    const auto q12 = q.block(0, 1, 1, n);
    const auto q13 = q.block(0, 1 + n, 1, n);
    const auto q22 = q.block(1, 1, n, n);
    const auto q23 = q.block(1, 1 + n, n, n);
    const auto q33 = q.block(1 + n, 1 + n, n, n);
    pi(0, 0) = q(0, 0);
    pi.block(0, 1, 1, n) = -q12;
    pi.block(0, 1 + n, 1, n) = q12 + q13;
    pi.block(1, 1, n, n) = q22;
    pi.block(1, 1 + n, n, n) = -q22 - q23 - jd;
    pi.block(1 + n, 1 + n, n, n) =
        q22 + q33 + q23 + q23.transpose() + 2.0 * jd;
  } else if (const auto* p = std::get_if<OzfParam>(&param)) {
    pi.block(1, 1 + n, n, n) = p->m;
    pi.block(1 + n, 1 + n, n, n) = -p->m - p->m.transpose();
  } else {
    const auto& faz = std::get<FazParam>(param);
    const Matrix lt = Matrix(faz.lambda.asDiagonal()) + t_matrix(faz.t, n);
    pi.block(0, 1, 1, n) = -faz.nu.transpose();
    pi.block(0, 1 + n, 1, n) = (faz.nu + faz.eta).transpose();
    pi.block(1, 1 + n, n, n) = lt;
    pi.block(1 + n, 1 + n, n, n) = -2.0 * lt;
  }
  // mirror the upper blocks
  pi.block(1, 0, 2 * n, 1) = pi.block(0, 1, 1, 2 * n).transpose();
  pi.block(1 + n, 1, n, n) = pi.block(1, 1 + n, n, n).transpose();
  return pi;
}

bool membership_test(const Matrix& pi, int n, int samples, std::uint64_t seed,
                     double tol) {
  if (pi.rows() != 2 * n + 1 || pi.cols() != 2 * n + 1) {
    throw_dimension("membership_test: Pi must be (2n+1) x (2n+1)");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::cauchy_distribution<double> cauchy(0.0, 1.0);
  std::uniform_int_distribution<int> kind(0, 3);
  Vector x(2 * n + 1);
  for (int k = 0; k < samples; ++k) {
    x[0] = 1.0;
    // mixture: standard normal, scaled normal, Cauchy, sparse-sign patterns
    const int mode = kind(rng);
    for (int i = 0; i < n; ++i) {
      double qi = 0.0;
      switch (mode) {
        case 0:
          qi = normal(rng);
          break;
        case 1:
          qi = 100.0 * normal(rng);
          break;
        case 2:
          qi = cauchy(rng);
          break;
        default:
          qi = (normal(rng) > 0.0 ? 1.0 : -1.0) * std::abs(cauchy(rng));
          break;
      }
      x[1 + i] = qi;
      x[1 + n + i] = std::max(qi, 0.0);
    }
    const double form = x.dot(pi * x);
    if (form < -tol * (1.0 + x.squaredNorm())) return false;
  }
  return true;
}

NnParam embed_inclusion(const MultiplierParam& from, int n) {
  require_valid_shape(from, n);
  const int s = 2 * n + 1;
  NnParam out{Matrix::Zero(s, s), Vector::Zero(n)};
  Matrix coupling;  // Q23 + J must equal -coupling
  if (const auto* p = std::get_if<OzfParam>(&from)) {
    coupling = p->m;
  } else if (const auto* p = std::get_if<FazParam>(&from)) {
    out.q.block(0, 1, 1, n) = p->nu.transpose();
    out.q.block(0, 1 + n, 1, n) = p->eta.transpose();
    coupling = Matrix(p->lambda.asDiagonal()) + t_matrix(p->t, n);
  } else {
    throw_domain("embed_inclusion: source must be an OZF or FAZ multiplier");
  }
  out.j = -coupling.diagonal();
  Matrix q23 = -coupling;
  q23.diagonal().setZero();
  out.q.block(1, 1 + n, n, n) = q23;
  // symmetric completion of Q
  out.q.block(1, 0, 2 * n, 1) = out.q.block(0, 1, 1, 2 * n).transpose();
  out.q.block(1 + n, 1, n, n) = q23.transpose();
  return out;
}

MultiplierStructure multiplier_structure(MultiplierClass cls, int n) {
  if (n < 0) throw_domain("multiplier_structure: n must be nonnegative");
  MultiplierStructure s;
  s.cls = cls;
  s.n = n;
  const int p0 = 1;      // first q (or p - q) coordinate
  const int p1 = 1 + n;  // first p coordinate
  auto add = [&](int var, int entry, std::vector<PiTerm> terms) {
    s.basis.push_back({var, entry, std::move(terms)});
  };

  switch (cls) {
    case MultiplierClass::kNN: {
      const int dim = 2 * n + 1;
      s.frame = PiFrame::kSlackGraph;
      s.variables = {{"Q", true, dim, true}, {"J", false, n, false}};
      for (int e = 0; e < sym_entry_count(dim); ++e) {
        const auto [a, b] = sym_entry_pair(e, dim);
        add(0, e, {{a, b, a == b ? 1.0 : 2.0}});
      }
      for (int i = 0; i < n; ++i) add(1, i, {{p0 + i, p1 + i, 2.0}});
      break;
    }
    case MultiplierClass::kOZF: {
      s.frame = PiFrame::kReluGraph;
      s.variables = {{"M", false, n * n, false}};
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          add(0, i * n + j,
              {{p0 + i, p1 + j, 2.0},
               {p1 + i, p1 + j, -2.0}});
        }
      }
      for (int i = 0; i < n; ++i) {
        MultiplierInequality row_sum, col_sum;
        for (int j = 0; j < n; ++j) {
          row_sum.coefs.push_back({0, i * n + j, 1.0});
          col_sum.coefs.push_back({0, j * n + i, 1.0});
          if (i != j) s.inequalities.push_back({{{0, i * n + j, -1.0}}});
        }
        s.inequalities.push_back(std::move(row_sum));
        s.inequalities.push_back(std::move(col_sum));
      }
      break;
    }
    case MultiplierClass::kFAZ: {
      s.frame = PiFrame::kReluGraph;
      s.variables = {{"nu", false, n, true},
                     {"eta", false, n, true},
                     {"lambda", false, n, false},
                     {"t", false, n * (n - 1) / 2, true}};
      for (int i = 0; i < n; ++i) {
        add(0, i, {{0, p0 + i, -2.0}, {0, p1 + i, 2.0}});
        add(1, i, {{0, p1 + i, 2.0}});
        add(2, i, {{p0 + i, p1 + i, 2.0}, {p1 + i, p1 + i, -2.0}});
      }
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          add(3, t_pair_index(i, j, n),
              {{p0 + i, p1 + i, 2.0},
               {p0 + j, p1 + j, 2.0},
               {p0 + i, p1 + j, -2.0},
               {p0 + j, p1 + i, -2.0},
               {p1 + i, p1 + i, -2.0},
               {p1 + j, p1 + j, -2.0},
               {p1 + i, p1 + j, 4.0}});
        }
      }
      break;
    }
  }
  return s;
}

MultiplierValues flatten(const MultiplierStructure& s,
                         const MultiplierParam& param) {
  if (class_of(param) != s.cls) {
    throw_domain("flatten: parameter class does not match the structure");
  }
  require_valid_shape(param, s.n);
  const int n = s.n;
  if (const auto* p = std::get_if<NnParam>(&param)) {
    const int dim = 2 * n + 1;
    Vector q(sym_entry_count(dim));
    for (int e = 0; e < q.size(); ++e) {
      const auto [a, b] = sym_entry_pair(e, dim);
      q[e] = p->q(a, b);
    }
    return {q, p->j};
  }
  if (const auto* p = std::get_if<OzfParam>(&param)) {
    Vector m(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m[i * n + j] = p->m(i, j);
    return {m};
  }
  const auto& p = std::get<FazParam>(param);
  return {p.nu, p.eta, p.lambda, p.t};
}

MultiplierParam unflatten(const MultiplierStructure& s,
                          const MultiplierValues& values) {
  if (values.size() != s.variables.size()) {
    throw_dimension("unflatten: wrong number of variable blocks");
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k].size() != s.variables[k].entry_count()) {
      throw_dimension("unflatten: variable '" + s.variables[k].name +
                      "' has the wrong number of entries");
    }
  }
  const int n = s.n;
  switch (s.cls) {
    case MultiplierClass::kNN: {
      const int dim = 2 * n + 1;
      Matrix q(dim, dim);
      for (int e = 0; e < values[0].size(); ++e) {
        const auto [a, b] = sym_entry_pair(e, dim);
        q(a, b) = q(b, a) = values[0][e];
      }
      return NnParam{q, values[1]};
    }
    case MultiplierClass::kOZF: {
      Matrix m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = values[0][i * n + j];
      return OzfParam{m};
    }
    case MultiplierClass::kFAZ:
      return FazParam{values[0], values[1], values[2], values[3]};
  }
  throw_domain("unflatten: unknown class");
}

Matrix assemble_from_structure(const MultiplierStructure& s,
                               const MultiplierValues& values) {
  const int dim = 2 * s.n + 1;
  Matrix frame = Matrix::Zero(dim, dim);
  for (const auto& el : s.basis) {
    const double v = values[static_cast<std::size_t>(el.variable)][el.entry];
    for (const auto& t : el.terms) {
      frame(t.a, t.b) += 0.5 * t.coef * v;
      frame(t.b, t.a) += 0.5 * t.coef * v;
    }
  }
  if (s.frame == PiFrame::kReluGraph) return frame;
  const Matrix e = e_matrix(s.n);
  return e.transpose() * frame * e;
}

}  // namespace lipcert
