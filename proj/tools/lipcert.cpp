// Command-line front end. Talks to the library only through lipcert.h.
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "lipcert/lipcert.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNotCertified = 1;
constexpr int kExitFailure = 2;

struct Failure {
  std::string what;
};

void check(lipcert_status status, const char* stage) {
  if (status != LIPCERT_OK) {
    throw Failure{std::string(stage) + ": " + lipcert_last_error()};
  }
}

struct ModelDeleter {
  void operator()(lipcert_model* m) const { lipcert_model_free(m); }
};
struct CertDeleter {
  void operator()(lipcert_certificate* c) const { lipcert_certificate_free(c); }
};
struct CFree {
  void operator()(void* p) const { lipcert_free(p); }
};
using ModelPtr = std::unique_ptr<lipcert_model, ModelDeleter>;
using CertPtr = std::unique_ptr<lipcert_certificate, CertDeleter>;

std::string take(char* s) {
  std::unique_ptr<char, CFree> guard(s);
  return s ? std::string(s) : std::string();
}

std::string g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string vec6(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += g6(v[i]);
  }
  return out + "]";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure{"cannot write " + path};
}

ModelPtr load_model(const std::string& path) {
  lipcert_model* raw = nullptr;
  char* warnings = nullptr;
  check(lipcert_model_load(path.c_str(), &raw, &warnings), "loading model");
  std::string w = take(warnings);
  if (!w.empty()) std::cerr << "warning: " << w;
  return ModelPtr(raw);
}

std::vector<double> load_input(const std::string& path) {
  double* raw = nullptr;
  int m = 0;
  check(lipcert_input_load(path.c_str(), &raw, &m), "loading input");
  std::vector<double> w(raw, raw + m);
  lipcert_free(raw);
  return w;
}

struct Common {
  std::string model_path;
  std::string input_path;
  double eps = 0.0;
  std::string multiplier = "nn";
  bool no_reduce = false;
  std::string report_path;
  std::string dump_sdp_path;
  double tol = 1e-8;
  int max_iters = 50000;
  std::uint64_t seed = 0;
  int restarts = 50;
  int steps = 200;
};

lipcert_options make_options(const Common& c) {
  lipcert_options o;
  lipcert_options_default(&o);
  check(lipcert_multiplier_parse(c.multiplier.c_str(), &o.multiplier),
        "--multiplier");
  o.reduce = c.no_reduce ? 0 : 1;
  o.tol = c.tol;
  o.max_iters = c.max_iters;
  const char* verbose = std::getenv("LIPCERT_SOLVER_VERBOSE");
  o.verbose = verbose && std::string(verbose) == "1";
  o.seed = c.seed;
  o.pgd_restarts = c.restarts;
  o.pgd_steps = c.steps;
  o.dump_sdp_path = c.dump_sdp_path.empty() ? nullptr : c.dump_sdp_path.c_str();
  return o;
}

CertPtr run_certify(const Common& c, const lipcert_model* model,
                    const std::vector<double>& w0, bool require_margin) {
  lipcert_options o = make_options(c);
  lipcert_certificate* raw = nullptr;
  check(lipcert_certify(model, w0.data(), static_cast<int>(w0.size()), c.eps,
                        &o, require_margin, &raw),
        "certify");
  CertPtr cert(raw);
  if (!c.report_path.empty()) {
    char* json = nullptr;
    check(lipcert_certificate_to_json(cert.get(), &json), "report");
    write_text(c.report_path, take(json));
  }
  return cert;
}

void print_summary(const lipcert_certificate* cert, int m) {
  lipcert_summary s;
  check(lipcert_certificate_summary(cert, &s), "summary");
  std::cout << "gamma " << g6(s.gamma_upper) << "\n";
  if (s.has_gamma_dual) {
    std::cout << "gamma_dual " << g6(s.gamma_dual) << "\n";
    std::cout << "duality_gap " << g6(s.duality_gap) << "\n";
  }
  std::cout << "n_r " << s.n_r << "\n";
  if (s.has_rank_ratio) std::cout << "rank_ratio " << g6(s.rank_ratio) << "\n";
  std::cout << "exact " << (s.exact ? "true" : "false") << "\n";
  if (s.exact) {
    std::vector<double> w(static_cast<std::size_t>(m));
    check(lipcert_certificate_w_star(cert, w.data(), m), "w_star");
    std::cout << "w_star " << vec6(w) << "\n";
  }
  if (s.has_lower_bound) {
    std::cout << "lower_bound " << g6(s.lower_bound) << "\n";
  }
}

int cmd_bound(const Common& c) {
  ModelPtr model = load_model(c.model_path);
  std::vector<double> w0 = load_input(c.input_path);
  CertPtr cert = run_certify(c, model.get(), w0, false);
  print_summary(cert.get(), static_cast<int>(w0.size()));
  return kExitOk;
}

int cmd_certify(const Common& c) {
  ModelPtr model = load_model(c.model_path);
  std::vector<double> w0 = load_input(c.input_path);
  CertPtr cert = run_certify(c, model.get(), w0, true);
  print_summary(cert.get(), static_cast<int>(w0.size()));
  lipcert_summary s;
  check(lipcert_certificate_summary(cert.get(), &s), "summary");
  std::cout << "margin " << g6(s.margin_value) << "\n";
  std::cout << "verdict "
            << (s.certified_robust ? "certified_robust" : "not_certified")
            << "\n";
  return s.certified_robust ? kExitOk : kExitNotCertified;
}

int cmd_reduce(const Common& c, const std::string& out_path) {
  ModelPtr model = load_model(c.model_path);
  std::vector<double> w0 = load_input(c.input_path);
  char* json = nullptr;
  int np = 0, nz = 0, nr = 0;
  check(lipcert_reduce(model.get(), w0.data(), static_cast<int>(w0.size()),
                       c.eps, &json, &np, &nz, &nr),
        "reduce");
  std::string text = take(json);
  std::string stats = "n_plus " + std::to_string(np) + " n_zero " +
                      std::to_string(nz) + " n_r " + std::to_string(nr);
  if (out_path.empty()) {
    std::cout << text;
    std::cerr << stats << "\n";
  } else {
    write_text(out_path, text);
    std::cout << stats << "\n";
  }
  return kExitOk;
}

int cmd_lower_bound(const Common& c) {
  ModelPtr model = load_model(c.model_path);
  std::vector<double> w0 = load_input(c.input_path);
  std::vector<double> w(w0.size());
  double lb = 0.0;
  check(lipcert_lower_bound(model.get(), w0.data(), static_cast<int>(w0.size()),
                            c.eps, c.restarts, c.steps, c.seed, &lb, w.data()),
        "lower-bound");
  std::cout << "lower_bound " << g6(lb) << "\n";
  std::cout << "w_lb " << vec6(w) << "\n";
  return kExitOk;
}

int cmd_gen_random(int n, int m, int l, std::uint64_t seed, double scale,
                   const std::string& out_path) {
  lipcert_model* raw = nullptr;
  check(lipcert_model_gen_random(n, m, l, seed, scale, &raw), "gen-random");
  ModelPtr model(raw);
  char* json = nullptr;
  check(lipcert_model_to_json(model.get(), &json), "gen-random");
  std::string text = take(json);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text(out_path, text);
  }
  return kExitOk;
}

struct BenchArgs {
  std::string seeds = "1-20";
  int n = 20;
  int m = 5;
  int l = 3;
  std::vector<double> eps{0.1};
  std::vector<std::string> classes{"nn"};
  int jobs = 0;
  std::string out_path;
  std::string curve_path;
  double eps_max = 1.0;
  int points = 20;
};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    auto dash = part.find('-');
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoull(part));
      } else {
        std::uint64_t a = std::stoull(part.substr(0, dash));
        std::uint64_t b = std::stoull(part.substr(dash + 1));
        for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
      }
    } catch (const std::exception&) {
      throw Failure{"--seeds: cannot parse '" + part + "'"};
    }
  }
  return out;
}

// Target input for bench instance `seed`: uniform in [-0.5, 0.5]^m.
std::vector<double> bench_input(std::uint64_t seed, int m) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<double> w(static_cast<std::size_t>(m));
  for (double& x : w) x = u(rng);
  return w;
}

int cmd_bench(const Common& c, const BenchArgs& b) {
  struct Job {
    std::uint64_t seed;
    double eps;
    std::string cls;
  };
  std::vector<Job> jobs;
  for (std::uint64_t s : parse_seeds(b.seeds)) {
    for (double e : b.eps) {
      for (const auto& k : b.classes) jobs.push_back({s, e, k});
    }
  }
  std::vector<std::string> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  std::mutex err_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& j = jobs[i];
      try {
        lipcert_model* raw = nullptr;
        check(lipcert_model_gen_random(b.n, b.m, b.l, j.seed, 1.0, &raw),
              "gen-random");
        ModelPtr model(raw);
        Common ci = c;
        ci.eps = j.eps;
        ci.multiplier = j.cls;
        ci.seed = j.seed;
        ci.report_path.clear();
        ci.dump_sdp_path.clear();
        std::vector<double> w0 = bench_input(j.seed, b.m);
        CertPtr cert = run_certify(ci, model.get(), w0, false);
        lipcert_summary s;
        check(lipcert_certificate_summary(cert.get(), &s), "summary");
        std::ostringstream row;
        row << j.seed << "," << b.n << "," << b.m << "," << b.l << ","
            << g6(j.eps) << "," << j.cls << "," << g6(s.gamma_upper) << ","
            << (s.has_gamma_dual ? g6(s.duality_gap) : std::string()) << ","
            << s.n_r << "," << (s.exact ? 1 : 0) << "," << g6(s.total_s);
        rows[i] = row.str();
      } catch (const Failure& f) {
        ++failures;
        std::lock_guard<std::mutex> lock(err_mutex);
        std::cerr << "seed " << j.seed << " eps " << g6(j.eps) << " " << j.cls
                  << ": " << f.what << "\n";
      }
    }
  };
  int n_jobs = b.jobs > 0 ? b.jobs
                          : std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (int t = 0; t < n_jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "seed,n,m,l,eps,class,gamma,gap,n_r,exact,time_s\n";
  for (const auto& r : rows) {
    if (!r.empty()) csv << r << "\n";
  }
  if (b.out_path.empty()) {
    std::cout << csv.str();
  } else {
    write_text(b.out_path, csv.str());
  }

  if (!b.curve_path.empty()) {
    if (c.model_path.empty() || c.input_path.empty()) {
      throw Failure{"--curve needs --model and --input"};
    }
    ModelPtr model = load_model(c.model_path);
    std::vector<double> w0 = load_input(c.input_path);
    std::ostringstream curve;
    curve << "eps,n_r\n";
    for (int k = 0; k < b.points; ++k) {
      double e = b.points == 1 ? b.eps_max
                               : b.eps_max * k / (b.points - 1);
      int nr = 0;
      check(lipcert_reduce(model.get(), w0.data(), static_cast<int>(w0.size()),
                           e, nullptr, nullptr, nullptr, &nr),
            "reduce");
      curve << g6(e) << "," << nr << "\n";
    }
    write_text(b.curve_path, curve.str());
  }
  return failures > 0 ? kExitFailure : kExitOk;
}

void add_target_options(CLI::App* app, Common& c) {
  app->add_option("--model", c.model_path, "Model JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  app->add_option("--input", c.input_path, "Input JSON file {\"w0\": [...]}")
      ->required()
      ->check(CLI::ExistingFile);
  app->add_option("--eps", c.eps, "Perturbation radius")
      ->required()
      ->check(CLI::NonNegativeNumber);
}

void add_solver_options(CLI::App* app, Common& c) {
  app->add_option("--multiplier", c.multiplier, "nn, ozf or faz")
      ->check(CLI::IsMember({"nn", "ozf", "faz"}, CLI::ignore_case));
  app->add_flag("--no-reduce", c.no_reduce, "Solve the full-size programs");
  app->add_option("--report", c.report_path, "Write the JSON report here");
  app->add_option("--dump-sdp", c.dump_sdp_path, "Write the assembled programs");
  app->add_option("--tol", c.tol, "Solver tolerance")->check(CLI::PositiveNumber);
  app->add_option("--max-iters", c.max_iters, "Solver iteration cap")
      ->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "Seed of the lower-bound search");
  app->add_option("--restarts", c.restarts, "Lower-bound restarts")
      ->check(CLI::PositiveNumber);
  app->add_option("--steps", c.steps, "Lower-bound steps per restart")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified local Lipschitz bounds for single-layer ReLU networks"};
  app.require_subcommand(1);
  Common c;

  auto* bound = app.add_subcommand("bound", "Upper bound and exactness test");
  add_target_options(bound, c);
  add_solver_options(bound, c);

  auto* certify = app.add_subcommand("certify", "Classifier robustness verdict");
  add_target_options(certify, c);
  add_solver_options(certify, c);

  std::string reduce_out;
  auto* reduce = app.add_subcommand("reduce", "Exact model reduction");
  add_target_options(reduce, c);
  reduce->add_option("--out", reduce_out, "Reduced model JSON path");

  auto* lower = app.add_subcommand("lower-bound", "Projected gradient lower bound");
  add_target_options(lower, c);
  lower->add_option("--restarts", c.restarts)->check(CLI::PositiveNumber);
  lower->add_option("--steps", c.steps)->check(CLI::PositiveNumber);
  lower->add_option("--seed", c.seed);

  int gn = 0, gm = 0, gl = 0;
  double scale = 1.0;
  std::uint64_t gseed = 0;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-random", "Random model JSON");
  gen->add_option("--n", gn)->required()->check(CLI::PositiveNumber);
  gen->add_option("--m", gm)->required()->check(CLI::PositiveNumber);
  gen->add_option("--l", gl)->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", gseed);
  gen->add_option("--scale", scale)->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out);

  BenchArgs b;
  auto* bench = app.add_subcommand("bench", "Random-model benchmark CSV");
  bench->add_option("--seeds", b.seeds, "e.g. 1-20 or 1,4,7");
  bench->add_option("--n", b.n)->check(CLI::PositiveNumber);
  bench->add_option("--m", b.m)->check(CLI::PositiveNumber);
  bench->add_option("--l", b.l)->check(CLI::PositiveNumber);
  bench->add_option("--eps", b.eps)->check(CLI::NonNegativeNumber);
  bench->add_option("--multiplier", b.classes)
      ->check(CLI::IsMember({"nn", "ozf", "faz"}, CLI::ignore_case));
  bench->add_option("--jobs", b.jobs);
  bench->add_option("--out", b.out_path, "CSV path (stdout if omitted)");
  bench->add_option("--curve", b.curve_path, "Reduction-curve CSV path");
  bench->add_option("--model", c.model_path)->check(CLI::ExistingFile);
  bench->add_option("--input", c.input_path)->check(CLI::ExistingFile);
  bench->add_option("--eps-max", b.eps_max)->check(CLI::NonNegativeNumber);
  bench->add_option("--points", b.points)->check(CLI::PositiveNumber);
  bench->add_flag("--no-reduce", c.no_reduce);
  bench->add_option("--restarts", c.restarts, "Lower-bound restarts")
      ->check(CLI::PositiveNumber);
  bench->add_option("--tol", c.tol)->check(CLI::PositiveNumber);
  bench->add_option("--max-iters", c.max_iters)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFailure;
  }

  try {
    if (*bound) return cmd_bound(c);
    if (*certify) return cmd_certify(c);
    if (*reduce) return cmd_reduce(c, reduce_out);
    if (*lower) return cmd_lower_bound(c);
    if (*gen) return cmd_gen_random(gn, gm, gl, gseed, scale, gen_out);
    if (*bench) return cmd_bench(c, b);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.what << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
