#include "lipcert/lipcert.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "lipcert/certify.hpp"
#include "lipcert/error.hpp"
#include "lipcert/io.hpp"

struct lipcert_model {
  lipcert::FnnModel model;
};

struct lipcert_certificate {
  lipcert::Certificate cert;
};

namespace {

thread_local std::string last_error;

lipcert_status fail(lipcert_status status, const std::string& what) {
  last_error = what;
  return status;
}

template <class F>
lipcert_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return LIPCERT_OK;
  } catch (const lipcert::Error& e) {
    return fail(static_cast<lipcert_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(LIPCERT_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LIPCERT_E_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

lipcert::TargetSpec make_target(const lipcert_model* model, const double* w0,
                                int m, double eps) {
  if (m != model->model.m()) {
    lipcert::throw_dimension("w0 has length " + std::to_string(m) +
                             ", model expects " +
                             std::to_string(model->model.m()));
  }
  return lipcert::TargetSpec(Eigen::Map<const lipcert::Vector>(w0, m), eps);
}

lipcert_status model_out(lipcert_model** out, lipcert::FnnModel model) {
  *out = new lipcert_model{std::move(model)};
  return LIPCERT_OK;
}

void emit_warnings(const std::vector<std::string>& warnings, char** out) {
  if (!out) return;
  *out = nullptr;
  if (warnings.empty()) return;
  std::string joined;
  for (const auto& w : warnings) joined += w + "\n";
  *out = dup_string(joined);
}

}  // namespace

#define REQUIRE(cond)                                              \
  do {                                                             \
    if (!(cond)) return fail(LIPCERT_E_ARGUMENT, "null argument"); \
  } while (0)

extern "C" {

const char* lipcert_last_error(void) { return last_error.c_str(); }

void lipcert_free(void* p) { std::free(p); }

const char* lipcert_version(void) { return "0.1.0"; }

lipcert_status lipcert_multiplier_parse(const char* text, int* out) {
  REQUIRE(text && out);
  return guarded([&] {
    *out = static_cast<int>(lipcert::parse_multiplier_class(text));
  });
}

lipcert_status lipcert_model_load(const char* path, lipcert_model** out,
                                  char** warnings) {
  REQUIRE(path && out);
  return guarded([&] {
    std::vector<std::string> w;
    lipcert::FnnModel model = lipcert::load_model(path, &w);
    emit_warnings(w, warnings);
    model_out(out, std::move(model));
  });
}

lipcert_status lipcert_model_parse(const char* json_text, lipcert_model** out,
                                   char** warnings) {
  REQUIRE(json_text && out);
  return guarded([&] {
    std::vector<std::string> w;
    lipcert::FnnModel model = lipcert::parse_model(json_text, "<string>", &w);
    emit_warnings(w, warnings);
    model_out(out, std::move(model));
  });
}

lipcert_status lipcert_model_gen_random(int n, int m, int l, uint64_t seed,
                                        double scale, lipcert_model** out) {
  REQUIRE(out);
  return guarded([&] {
    if (n < 1 || m < 1 || l < 1) {
      lipcert::throw_domain("dimensions must be positive");
    }
    model_out(out, lipcert::gen_random(n, m, l, seed, scale));
  });
}

void lipcert_model_free(lipcert_model* model) { delete model; }

lipcert_status lipcert_model_dims(const lipcert_model* model, int* n, int* m,
                                  int* l) {
  REQUIRE(model);
  if (n) *n = model->model.n();
  if (m) *m = model->model.m();
  if (l) *l = model->model.l();
  return LIPCERT_OK;
}

lipcert_status lipcert_model_to_json(const lipcert_model* model, char** out) {
  REQUIRE(model && out);
  return guarded([&] { *out = dup_string(lipcert::model_to_json(model->model)); });
}

lipcert_status lipcert_forward(const lipcert_model* model, const double* w,
                               int m, double* z) {
  REQUIRE(model && w && z);
  return guarded([&] {
    lipcert::TargetSpec t = make_target(model, w, m, 0.0);
    lipcert::Vector out = lipcert::forward(model->model, t.w0);
    std::memcpy(z, out.data(), sizeof(double) * out.size());
  });
}

lipcert_status lipcert_input_load(const char* path, double** w0, int* m) {
  REQUIRE(path && w0 && m);
  return guarded([&] {
    lipcert::Vector v = lipcert::load_input(path);
    auto* buf = static_cast<double*>(std::malloc(sizeof(double) * v.size()));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, v.data(), sizeof(double) * v.size());
    *w0 = buf;
    *m = static_cast<int>(v.size());
  });
}

lipcert_status lipcert_reduce(const lipcert_model* model, const double* w0,
                              int m, double eps, char** json_out, int* n_plus,
                              int* n_zero, int* n_res) {
  REQUIRE(model && w0);
  return guarded([&] {
    lipcert::TargetSpec t = make_target(model, w0, m, eps);
    lipcert::ReducedModel rm =
        lipcert::reduce(model->model.without_output_bias(), t);
    if (n_plus) *n_plus = static_cast<int>(rm.partition.n_plus.size());
    if (n_zero) *n_zero = static_cast<int>(rm.partition.n_zero.size());
    if (n_res) *n_res = static_cast<int>(rm.partition.n_res.size());
    if (json_out) *json_out = dup_string(lipcert::reduced_model_to_json(rm));
  });
}

void lipcert_options_default(lipcert_options* options) {
  if (!options) return;
  lipcert::CertifyOptions d;
  options->multiplier = LIPCERT_MULTIPLIER_NN;
  options->reduce = 1;
  options->tol = d.solver.abs_tol;
  options->max_iters = d.solver.max_iters;
  options->verbose = 0;
  options->lower_bound = 1;
  options->pgd_restarts = d.pgd_restarts;
  options->pgd_steps = d.pgd_steps;
  options->seed = 0;
  options->rank_tol = d.rank_tol;
  options->dump_sdp_path = nullptr;
}

lipcert_status lipcert_certify(const lipcert_model* model, const double* w0,
                               int m, double eps,
                               const lipcert_options* options,
                               int require_margin,
                               lipcert_certificate** out) {
  REQUIRE(model && w0 && out);
  return guarded([&] {
    lipcert_options o;
    lipcert_options_default(&o);
    if (options) o = *options;
    if (o.multiplier < 0 || o.multiplier > 2) {
      lipcert::throw_domain("unknown multiplier class");
    }
    lipcert::CertifyOptions co;
    co.cls = static_cast<lipcert::MultiplierClass>(o.multiplier);
    co.reduce = o.reduce != 0;
    co.solver.abs_tol = o.tol;
    co.solver.rel_tol = o.tol;
    co.solver.max_iters = o.max_iters;
    co.solver.verbose = o.verbose != 0;
    co.lower_bound = o.lower_bound != 0;
    co.pgd_restarts = o.pgd_restarts;
    co.pgd_steps = o.pgd_steps;
    co.seed = o.seed;
    co.rank_tol = o.rank_tol;
    if (o.dump_sdp_path) co.dump_sdp_path = o.dump_sdp_path;
    lipcert::TargetSpec t = make_target(model, w0, m, eps);
    lipcert::Certificate cert =
        require_margin ? lipcert::robustness_certificate(model->model, t, co)
                       : lipcert::analyze(model->model, t, co);
    *out = new lipcert_certificate{std::move(cert)};
  });
}

void lipcert_certificate_free(lipcert_certificate* cert) { delete cert; }

lipcert_status lipcert_certificate_summary(const lipcert_certificate* cert,
                                           lipcert_summary* out) {
  REQUIRE(cert && out);
  const lipcert::Certificate& c = cert->cert;
  *out = lipcert_summary{};
  out->gamma_upper = c.gamma_upper;
  out->has_gamma_dual = c.gamma_dual.has_value();
  out->gamma_dual = c.gamma_dual.value_or(0.0);
  out->duality_gap = c.duality_gap.value_or(0.0);
  out->exact = c.exact;
  out->n_r = c.n_r;
  out->m = c.w_star ? static_cast<int>(c.w_star->size()) : 0;
  out->has_lower_bound = c.lower_bound.has_value();
  out->lower_bound = c.lower_bound.value_or(0.0);
  out->has_margin = c.margin_value.has_value();
  out->margin_value = c.margin_value.value_or(0.0);
  out->certified_robust =
      c.robust_verdict == lipcert::Verdict::kCertifiedRobust;
  out->has_rank_ratio = c.rank_ratio.has_value();
  out->rank_ratio = c.rank_ratio.value_or(0.0);
  out->total_s = c.timings.total_s;
  return LIPCERT_OK;
}

lipcert_status lipcert_certificate_w_star(const lipcert_certificate* cert,
                                          double* out, int m) {
  REQUIRE(cert && out);
  const auto& w = cert->cert.w_star;
  if (!w) return fail(LIPCERT_E_DOMAIN, "no certified worst-case input");
  if (w->size() != m) return fail(LIPCERT_E_DIMENSION, "w_star length mismatch");
  std::memcpy(out, w->data(), sizeof(double) * m);
  return LIPCERT_OK;
}

lipcert_status lipcert_certificate_to_json(const lipcert_certificate* cert,
                                           char** out) {
  REQUIRE(cert && out);
  return guarded(
      [&] { *out = dup_string(lipcert::certificate_to_json(cert->cert)); });
}

lipcert_status lipcert_lower_bound(const lipcert_model* model, const double* w0,
                                   int m, double eps, int restarts, int steps,
                                   uint64_t seed, double* lb, double* w_lb) {
  REQUIRE(model && w0 && lb);
  return guarded([&] {
    lipcert::TargetSpec t = make_target(model, w0, m, eps);
    lipcert::LowerBound r =
        lipcert::lower_bound_pgd(model->model, t, restarts, steps, seed);
    *lb = r.value;
    if (w_lb) std::memcpy(w_lb, r.w.data(), sizeof(double) * m);
  });
}

}  // extern "C"
