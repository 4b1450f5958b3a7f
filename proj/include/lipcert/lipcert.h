/* C interface to the lipcert library. All functions return a lipcert_status;
 * on failure lipcert_last_error() describes the problem (per thread). Strings
 * and arrays handed out by the library are released with lipcert_free. */
#ifndef LIPCERT_H
#define LIPCERT_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define LIPCERT_API __declspec(dllexport)
#else
#define LIPCERT_API __attribute__((visibility("default")))
#endif

typedef enum {
  LIPCERT_OK = 0,
  LIPCERT_E_DIMENSION = 1,
  LIPCERT_E_DOMAIN = 2,
  LIPCERT_E_PARSE = 3,
  LIPCERT_E_IO = 4,
  LIPCERT_E_SOLVER = 5,
  LIPCERT_E_UNSUPPORTED = 6,
  LIPCERT_E_NUMERICAL = 7,
  LIPCERT_E_ARGUMENT = 8,
  LIPCERT_E_INTERNAL = 99
} lipcert_status;

typedef enum {
  LIPCERT_MULTIPLIER_NN = 0,
  LIPCERT_MULTIPLIER_OZF = 1,
  LIPCERT_MULTIPLIER_FAZ = 2
} lipcert_multiplier;

typedef struct lipcert_model lipcert_model;
typedef struct lipcert_certificate lipcert_certificate;

typedef struct {
  int multiplier;       /* lipcert_multiplier */
  int reduce;           /* nonzero: eliminate stable ReLUs first */
  double tol;           /* solver tolerance */
  int max_iters;
  int verbose;
  int lower_bound;      /* nonzero: run the PGD oracle */
  int pgd_restarts;
  int pgd_steps;
  uint64_t seed;
  double rank_tol;
  const char* dump_sdp_path; /* NULL or path */
} lipcert_options;

typedef struct {
  double gamma_upper;
  int has_gamma_dual;
  double gamma_dual;
  double duality_gap;
  int exact;
  int n_r;
  int m;
  int has_lower_bound;
  double lower_bound;
  int has_margin;
  double margin_value;
  int certified_robust;
  int has_rank_ratio;
  double rank_ratio;
  double total_s;
} lipcert_summary;

LIPCERT_API const char* lipcert_last_error(void);
LIPCERT_API void lipcert_free(void* p);
LIPCERT_API const char* lipcert_version(void);

LIPCERT_API lipcert_status lipcert_multiplier_parse(const char* text,
                                                    int* out);

/* warnings (may be NULL) receives newline-separated load warnings or NULL. */
LIPCERT_API lipcert_status lipcert_model_load(const char* path,
                                              lipcert_model** out,
                                              char** warnings);
LIPCERT_API lipcert_status lipcert_model_parse(const char* json_text,
                                               lipcert_model** out,
                                               char** warnings);
LIPCERT_API lipcert_status lipcert_model_gen_random(int n, int m, int l,
                                                    uint64_t seed,
                                                    double scale,
                                                    lipcert_model** out);
LIPCERT_API void lipcert_model_free(lipcert_model* model);
LIPCERT_API lipcert_status lipcert_model_dims(const lipcert_model* model,
                                              int* n, int* m, int* l);
LIPCERT_API lipcert_status lipcert_model_to_json(const lipcert_model* model,
                                                 char** out);
/* z must hold l entries. */
LIPCERT_API lipcert_status lipcert_forward(const lipcert_model* model,
                                           const double* w, int m, double* z);

/* *w0 is allocated by the library. */
LIPCERT_API lipcert_status lipcert_input_load(const char* path, double** w0,
                                              int* m);

/* counts may be NULL; json_out may be NULL. */
LIPCERT_API lipcert_status lipcert_reduce(const lipcert_model* model,
                                          const double* w0, int m, double eps,
                                          char** json_out, int* n_plus,
                                          int* n_zero, int* n_res);

LIPCERT_API void lipcert_options_default(lipcert_options* options);

/* require_margin nonzero enforces l >= 2. */
LIPCERT_API lipcert_status lipcert_certify(const lipcert_model* model,
                                           const double* w0, int m, double eps,
                                           const lipcert_options* options,
                                           int require_margin,
                                           lipcert_certificate** out);
LIPCERT_API void lipcert_certificate_free(lipcert_certificate* cert);
LIPCERT_API lipcert_status lipcert_certificate_summary(
    const lipcert_certificate* cert, lipcert_summary* out);
/* Fails with LIPCERT_E_DOMAIN when no worst-case input was certified. */
LIPCERT_API lipcert_status lipcert_certificate_w_star(
    const lipcert_certificate* cert, double* out, int m);
LIPCERT_API lipcert_status lipcert_certificate_to_json(
    const lipcert_certificate* cert, char** out);

/* w_lb (may be NULL) must hold m entries. */
LIPCERT_API lipcert_status lipcert_lower_bound(const lipcert_model* model,
                                               const double* w0, int m,
                                               double eps, int restarts,
                                               int steps, uint64_t seed,
                                               double* lb, double* w_lb);

#ifdef __cplusplus
}
#endif

#endif
