/* Streaming robust PCA: C interface to the implicit-regularization engine
 * and the explicit-penalty baseline. Handles are opaque; all functions
 * return ORPCA_OK or a negative error code unless stated otherwise. */
#ifndef ORPCA_H
#define ORPCA_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define ORPCA_OK 0
#define ORPCA_ERR_ARG (-1)       /* null pointer / invalid configuration */
#define ORPCA_ERR_DIM (-2)       /* dimension mismatch */
#define ORPCA_ERR_NONFINITE (-3) /* NaN or Inf in input */
#define ORPCA_ERR_INTERNAL (-4)

typedef struct orpca_engine orpca_engine;
typedef struct orpca_baseline orpca_baseline;

/* Zero learning rates mean "automatic"; zero iteration budgets mean
 * "budget formula / default". These are the tuning-free defaults. */
typedef struct orpca_params {
    double alpha_e;
    double alpha_r;
    double g0;
    double mu;
    double eta_e;  /* 0 = auto */
    double eta_r;  /* 0 = auto */
    double eta_l;  /* 0 = auto */
    int32_t t_e;   /* 0 = formula */
    int32_t t_r;   /* 0 = formula */
    int32_t t_l;   /* 0 = default 50 */
    int32_t t0;    /* alternation cap */
    int32_t budget_cap;
    double conv_tol;
    double loss_exit_low;
    double loss_exit_high;
} orpca_params;

void orpca_default_params(orpca_params* out);

/* ---- implicit-regularization engine ---- */

/* params may be NULL for defaults. Returns NULL on invalid configuration. */
orpca_engine* orpca_engine_create(int32_t p, int32_t rank,
                                  const orpca_params* params);
void orpca_engine_destroy(orpca_engine* eng);

/* Processes one sample of length p. r_out (length rank) and e_out (length p)
 * receive the decomposition; either may be NULL. iters_out, when non-NULL,
 * receives the alternation count, negated if a solver diverged and the
 * previous estimate was kept (the stream stays usable). */
int orpca_engine_process(orpca_engine* eng, const double* z, int32_t p,
                         double* r_out, double* e_out, int32_t* iters_out);

/* Derived basis, column-major p x rank. */
int orpca_engine_basis(const orpca_engine* eng, double* out);

int32_t orpca_engine_dim(const orpca_engine* eng);
int32_t orpca_engine_rank(const orpca_engine* eng);
int64_t orpca_engine_samples(const orpca_engine* eng);
int64_t orpca_engine_divergences(const orpca_engine* eng);

/* ---- explicit-penalty baseline ---- */

orpca_baseline* orpca_baseline_create(int32_t p, int32_t rank, double lambda1,
                                      double lambda2);
void orpca_baseline_destroy(orpca_baseline* b);
int orpca_baseline_process(orpca_baseline* b, const double* z, int32_t p,
                           double* r_out, double* e_out, int32_t* iters_out);
int orpca_baseline_basis(const orpca_baseline* b, double* out);

/* ---- misc ---- */

const char* orpca_version(void);
const char* orpca_strerror(int code);

#ifdef __cplusplus
}
#endif

#endif /* ORPCA_H */
