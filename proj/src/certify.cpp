#include "lipcert/certify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <unistd.h>

#include "lipcert/error.hpp"
#include "lipcert/sdp.hpp"

namespace lipcert {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_target(const FnnModel& model, const TargetSpec& target) {
  if (target.w0.size() != model.m()) {
    throw_dimension("w0 has length " + std::to_string(target.w0.size()) +
                    ", model expects " + std::to_string(model.m()));
  }
}

// w = w0 + eps u and outputs divided by eps: same preactivations, unit ball
// centred at 0, gamma divided by eps.
FnnModel recentred(const FnnModel& model, const TargetSpec& target) {
  return FnnModel(model.w_in() * target.eps,
                  model.b_in() + model.w_in() * target.w0,
                  model.w_out() / target.eps, Vector::Zero(model.l()));
}

TargetSpec unit_target(int m) { return TargetSpec(Vector::Zero(m), 1.0); }

std::string write_failed_program(const ConicProgram& program,
                                 const std::string& which) {
  static std::atomic<int> counter{0};
  auto path = std::filesystem::temp_directory_path() /
              ("lipcert_failed_" + which + "_" + std::to_string(::getpid()) +
               "_" + std::to_string(counter++) + ".json");
  std::ofstream out(path);
  out << to_json(program);
  return out ? path.string() : std::string("<unwritable>");
}

[[noreturn]] void throw_solver(const ConicProgram& program,
                               const Solution& sol, const std::string& which) {
  std::string path = write_failed_program(program, which);
  throw Error(ErrorCode::kSolver, which + " solve ended with status " +
                                      std::string(to_string(sol.status)) +
                                      "; program written to " + path);
}

struct Recentred {
  FnnModel model;
  TargetSpec unit;
  IndexPartition partition;
  ReducedModel rm_work;  // recentred coordinates
  ReducedModel rm;       // original coordinates, same partition
  Vector z0;             // recentred output at u = 0
  double eps = 0.0;
};

Recentred prepare(const FnnModel& model, const TargetSpec& target,
                  bool reduce) {
  FnnModel base = model.without_output_bias();
  IndexPartition part =
      reduce ? partition_indices(base, target) : trivial_partition(base.n());
  FnnModel work = recentred(base, target);
  ReducedModel rm_work = reduce_with_partition(work, part);
  ReducedModel rm = reduce_with_partition(base, part);
  Vector z0 = forward(work, Vector::Zero(model.m()));
  return {std::move(work), unit_target(model.m()), std::move(part),
          std::move(rm_work), std::move(rm), std::move(z0), target.eps};
}

UpperBound upper_bound_prepared(const Recentred& r, MultiplierClass cls,
                                const SolveSettings& settings,
                                ConicProgram* keep = nullptr) {
  ConicProgram program = build_primal(r.rm_work, r.unit, r.z0, cls);
  Solution sol = solve(program, settings);
  if (!sol.ok()) throw_solver(program, sol, "primal");
  if (keep) *keep = std::move(program);
  double gamma = r.eps * std::sqrt(std::max(0.0, sol.objective));
  return {gamma, r.rm, std::move(sol)};
}

// H in [1; w; p] from H' in [1; u; p], w = w0 + eps u.
Matrix to_original_coordinates(const Matrix& h_u, const Vector& w0,
                               double eps) {
  const int m = static_cast<int>(w0.size());
  const int dim = static_cast<int>(h_u.rows());
  Matrix k = Matrix::Identity(dim, dim);
  k.block(1, 0, m, 1) = w0;
  k.block(1, 1, m, m) *= eps;
  return k * h_u * k.transpose();
}

}  // namespace

UpperBound upper_bound(const FnnModel& model, const TargetSpec& target,
                       MultiplierClass cls, bool reduce,
                       const SolveSettings& settings) {
  check_target(model, target);
  if (target.eps == 0.0) {
    FnnModel base = model.without_output_bias();
    UpperBound ub;
    ub.rm = reduce ? lipcert::reduce(base, target)
                   : reduce_with_partition(base, trivial_partition(base.n()));
    ub.primal.status = SolveStatus::kOptimal;
    ub.primal.residuals.pass = true;
    return ub;
  }
  return upper_bound_prepared(prepare(model, target, reduce), cls, settings);
}

double rank_ratio(const Matrix& h) {
  if (h.rows() < 2) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.transpose()),
                                           Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  const double l1 = ev(ev.size() - 1);
  if (!(l1 > 0.0)) {
    throw Error(ErrorCode::kNumerical,
                "degenerate dual matrix: largest eigenvalue is not positive");
  }
  return std::max(0.0, ev(ev.size() - 2)) / l1;
}

std::optional<RankOneFactor> exactness_check(const Matrix& h, int m,
                                             double rank_tol) {
  if (h.rows() != h.cols() || h.rows() < 1 + m || m < 0) {
    throw_dimension("exactness_check expects a square matrix of size >= 1 + m");
  }
  if (std::abs(h(0, 0) - 1.0) > 1e-6) {
    throw_domain("exactness_check expects H_11 = 1, got " +
                 std::to_string(h(0, 0)));
  }
  if (rank_ratio(h) > rank_tol) return std::nullopt;
  Vector v = h.col(0) / h(0, 0);
  if ((h - v * v.transpose()).norm() > 10.0 * rank_tol * h.norm()) {
    return std::nullopt;
  }
  return RankOneFactor{v.segment(1, m).eval(),
                       v.tail(h.rows() - 1 - m).eval()};
}

bool verify_worst_case(const FnnModel& model, const TargetSpec& target,
                       const Vector& w_star, double gamma, double tol) {
  if (w_star.size() != model.m() || target.w0.size() != model.m()) {
    return false;
  }
  if ((w_star - target.w0).norm() > target.eps * (1.0 + tol)) return false;
  double reach = (forward(model, w_star) - forward(model, target.w0)).norm();
  return std::abs(reach - gamma) <= tol * (1.0 + gamma);
}

LowerBound lower_bound_pgd(const FnnModel& model, const TargetSpec& target,
                           int restarts, int steps, std::uint64_t seed,
                           const std::vector<Vector>& warm_starts) {
  check_target(model, target);
  if (restarts < 1 || steps < 1) {
    throw_domain("lower_bound_pgd needs restarts >= 1 and steps >= 1");
  }
  const Vector& w0 = target.w0;
  const double eps = target.eps;
  const Vector z0 = forward(model, w0);
  LowerBound best{0.0, w0};
  if (eps == 0.0) return best;

  auto project = [&](Vector w) {
    Vector d = w - w0;
    double r = d.norm();
    if (r > eps) w = w0 + d * (eps / r);
    return w;
  };
  auto value = [&](const Vector& w) { return (forward(model, w) - z0).norm(); };
  auto gradient = [&](const Vector& w) {
    Vector q = model.w_in() * w + model.b_in();
    Vector r = model.w_out() * relu(q) + model.b_out() - z0;
    Vector back = model.w_out().transpose() * r;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
      if (q(i) < 0.0) back(i) = 0.0;
    }
    return Vector(model.w_in().transpose() * back);
  };

  auto ascend = [&](Vector w) {
    double f = value(w);
    double step = eps / 10.0;
    for (int k = 0; k < steps && step > 1e-12 * eps; ++k) {
      Vector g = gradient(w);
      double gn = g.norm();
      if (gn == 0.0) break;
      Vector cand = project(w + g * (step / gn));
      double fc = value(cand);
      if (fc > f) {
        w = std::move(cand);
        f = fc;
      } else {
        step *= 0.5;
      }
    }
    if (f > best.value) best = {f, w};
  };

  for (const Vector& start : warm_starts) {
    if (start.size() == model.m()) ascend(project(start));
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int r = 0; r < restarts; ++r) {
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(r));
    Vector d(model.m());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = normal(rng);
    double dn = d.norm();
    if (dn == 0.0) continue;
    // even restarts start on the sphere, odd ones inside the ball
    double radius = r % 2 == 0 ? eps : eps * std::pow(unit(rng), 1.0 / model.m());
    ascend(w0 + d * (radius / dn));
  }
  return best;
}

std::string_view to_string(Verdict verdict) {
  return verdict == Verdict::kCertifiedRobust ? "certified_robust"
                                              : "not_certified";
}

Certificate analyze(const FnnModel& model, const TargetSpec& target,
                    const CertifyOptions& options) {
  check_target(model, target);
  const auto t_start = Clock::now();
  Certificate cert;
  cert.multiplier_class = options.cls;
  FnnModel base = model.without_output_bias();

  if (target.eps == 0.0) {
    auto t0 = Clock::now();
    ReducedModel rm = options.reduce
                          ? reduce(base, target)
                          : reduce_with_partition(base, trivial_partition(base.n()));
    cert.timings.reduce_s = seconds_since(t0);
    cert.n_r = rm.n_r();
    cert.gamma_upper = 0.0;
    if (options.cls == MultiplierClass::kNN) {
      cert.gamma_dual = 0.0;
      cert.duality_gap = 0.0;
      cert.rank_ratio = 0.0;
      cert.exact = true;
      cert.w_star = target.w0;
      cert.dual_status = SolveStatus::kOptimal;
    }
    if (options.lower_bound) cert.lower_bound = 0.0;
  } else {
    auto t0 = Clock::now();
    Recentred r = prepare(model, target, options.reduce);
    cert.timings.reduce_s = seconds_since(t0);
    cert.n_r = r.rm.n_r();

    t0 = Clock::now();
    ConicProgram primal_program;
    UpperBound ub = upper_bound_prepared(r, options.cls, options.solver,
                                         &primal_program);
    cert.timings.primal_s = seconds_since(t0);
    cert.gamma_upper = ub.gamma;
    cert.primal_status = ub.primal.status;

    std::optional<ConicProgram> dual_program;
    if (options.cls == MultiplierClass::kNN) {
      dual_program = build_dual(r.rm_work, r.unit, r.z0);
    }
    if (!options.dump_sdp_path.empty()) {
      std::ofstream out(options.dump_sdp_path);
      out << "{\"coordinates\":\"w = w0 + eps*u, outputs divided by eps\",\"primal\":"
          << to_json(primal_program) << ",\"dual\":"
          << (dual_program ? to_json(*dual_program) : std::string("null"))
          << "}\n";
      if (!out) {
        throw Error(ErrorCode::kIo,
                    "cannot write SDP dump to " + options.dump_sdp_path);
      }
    }

    std::vector<Vector> warm;
    if (dual_program) {
      t0 = Clock::now();
      Solution dual = solve(*dual_program, options.solver);
      cert.timings.dual_s = seconds_since(t0);
      if (!dual.ok()) throw_solver(*dual_program, dual, "dual");
      cert.dual_status = dual.status;
      cert.gamma_dual = r.eps * std::sqrt(std::max(0.0, dual.objective));
      cert.duality_gap = cert.gamma_upper - *cert.gamma_dual;

      const int dim = 1 + base.m() + r.rm.n_r();
      Matrix h = to_original_coordinates(
          unpack_symmetric(dual.variable_values.at("H"), dim), target.w0,
          target.eps);
      cert.rank_ratio = rank_ratio(h);
      if (auto factor = exactness_check(h, base.m(), options.rank_tol)) {
        Vector w_star = factor->h2;
        warm.push_back(w_star);
        bool tight = std::abs(*cert.duality_gap) <=
                     1e-4 * (1.0 + cert.gamma_upper);
        if (tight && verify_worst_case(base, target, w_star, cert.gamma_upper,
                                       options.worst_case_tol)) {
          cert.exact = true;
          cert.w_star = w_star;
        }
      }
    }

    if (options.lower_bound) {
      t0 = Clock::now();
      LowerBound lb = lower_bound_pgd(base, target, options.pgd_restarts,
                                      options.pgd_steps, options.seed, warm);
      cert.timings.lower_bound_s = seconds_since(t0);
      cert.lower_bound = lb.value;
    }
  }

  if (base.l() >= 2) {
    cert.margin_value = margin(base, target.w0);
    if (cert.gamma_upper <= *cert.margin_value && *cert.margin_value > 0.0) {
      cert.robust_verdict = Verdict::kCertifiedRobust;
    }
  }
  cert.timings.total_s = seconds_since(t_start);
  return cert;
}

Certificate robustness_certificate(const FnnModel& model,
                                   const TargetSpec& target,
                                   const CertifyOptions& options) {
  if (model.l() < 2) {
    throw_domain("robustness_certificate needs at least two outputs");
  }
  return analyze(model, target, options);
}

}  // namespace lipcert
