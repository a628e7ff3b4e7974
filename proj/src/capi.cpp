#include "orpca.h"

#include <cstring>
#include <new>
#include "baseline.hpp"
#include "engine.hpp"

using orpca::MatrixXd;
using orpca::VectorXd;

struct orpca_engine {
    orpca::engine impl;
};

struct orpca_baseline {
    orpca::baseline impl;
};

namespace {

orpca::engine_config to_config(int32_t rank, const orpca_params* p) {
    orpca::engine_config cfg;
    cfg.rank = rank;
    if (!p) return cfg;
    cfg.hyper.alpha_e = p->alpha_e;
    cfg.hyper.alpha_r = p->alpha_r;
    cfg.hyper.g0 = p->g0;
    cfg.hyper.mu = p->mu;
    cfg.hyper.eta_e = p->eta_e;
    cfg.hyper.eta_r = p->eta_r;
    cfg.hyper.eta_L = p->eta_l;
    cfg.hyper.T_e = p->t_e;
    cfg.hyper.T_r = p->t_r;
    cfg.hyper.T_L = p->t_l;
    cfg.hyper.budget_cap = p->budget_cap;
    cfg.hyper.loss_exit_low = p->loss_exit_low;
    cfg.hyper.loss_exit_high = p->loss_exit_high;
    cfg.T0 = p->t0;
    cfg.conv_tol = p->conv_tol;
    return cfg;
}

}  // namespace

extern "C" {

void orpca_default_params(orpca_params* out) {
    if (!out) return;
    orpca::engine_config cfg;
    out->alpha_e = cfg.hyper.alpha_e;
    out->alpha_r = cfg.hyper.alpha_r;
    out->g0 = cfg.hyper.g0;
    out->mu = cfg.hyper.mu;
    out->eta_e = cfg.hyper.eta_e;
    out->eta_r = cfg.hyper.eta_r;
    out->eta_l = cfg.hyper.eta_L;
    out->t_e = cfg.hyper.T_e;
    out->t_r = cfg.hyper.T_r;
    out->t_l = cfg.hyper.T_L;
    out->t0 = cfg.T0;
    out->budget_cap = cfg.hyper.budget_cap;
    out->conv_tol = cfg.conv_tol;
    out->loss_exit_low = cfg.hyper.loss_exit_low;
    out->loss_exit_high = cfg.hyper.loss_exit_high;
}

orpca_engine* orpca_engine_create(int32_t p, int32_t rank,
                                  const orpca_params* params) {
    try {
        return new orpca_engine{orpca::engine(p, to_config(rank, params))};
    } catch (...) {
        return nullptr;
    }
}

void orpca_engine_destroy(orpca_engine* eng) { delete eng; }

int orpca_engine_process(orpca_engine* eng, const double* z, int32_t p,
                         double* r_out, double* e_out, int32_t* iters_out) {
    if (!eng || !z) return ORPCA_ERR_ARG;
    if (p != eng->impl.dim()) return ORPCA_ERR_DIM;
    VectorXd zv = Eigen::Map<const VectorXd>(z, p);
    if (!zv.allFinite()) return ORPCA_ERR_NONFINITE;
    try {
        orpca::sample_result res = eng->impl.process(zv);
        if (r_out)
            std::memcpy(r_out, res.r_coef.data(),
                        sizeof(double) * size_t(eng->impl.rank()));
        if (e_out)
            std::memcpy(e_out, res.e.data(), sizeof(double) * size_t(p));
        if (iters_out) *iters_out = res.inner_iters;
        return ORPCA_OK;
    } catch (const std::invalid_argument&) {
        return ORPCA_ERR_DIM;
    } catch (...) {
        return ORPCA_ERR_INTERNAL;
    }
}

int orpca_engine_basis(const orpca_engine* eng, double* out) {
    if (!eng || !out) return ORPCA_ERR_ARG;
    MatrixXd L = eng->impl.basis();
    std::memcpy(out, L.data(), sizeof(double) * size_t(L.size()));
    return ORPCA_OK;
}

int32_t orpca_engine_dim(const orpca_engine* eng) {
    return eng ? eng->impl.dim() : 0;
}

int32_t orpca_engine_rank(const orpca_engine* eng) {
    return eng ? eng->impl.rank() : 0;
}

int64_t orpca_engine_samples(const orpca_engine* eng) {
    return eng ? eng->impl.samples() : 0;
}

int64_t orpca_engine_divergences(const orpca_engine* eng) {
    return eng ? eng->impl.divergences() : 0;
}

orpca_baseline* orpca_baseline_create(int32_t p, int32_t rank, double lambda1,
                                      double lambda2) {
    try {
        return new orpca_baseline{orpca::baseline(p, rank, lambda1, lambda2)};
    } catch (...) {
        return nullptr;
    }
}

void orpca_baseline_destroy(orpca_baseline* b) { delete b; }

int orpca_baseline_process(orpca_baseline* b, const double* z, int32_t p,
                           double* r_out, double* e_out, int32_t* iters_out) {
    if (!b || !z) return ORPCA_ERR_ARG;
    if (p != b->impl.dim()) return ORPCA_ERR_DIM;
    VectorXd zv = Eigen::Map<const VectorXd>(z, p);
    if (!zv.allFinite()) return ORPCA_ERR_NONFINITE;
    try {
        orpca::sample_result res = b->impl.process(zv);
        if (r_out)
            std::memcpy(r_out, res.r_coef.data(),
                        sizeof(double) * size_t(b->impl.rank()));
        if (e_out)
            std::memcpy(e_out, res.e.data(), sizeof(double) * size_t(p));
        if (iters_out) *iters_out = res.inner_iters;
        return ORPCA_OK;
    } catch (const std::invalid_argument&) {
        return ORPCA_ERR_DIM;
    } catch (...) {
        return ORPCA_ERR_INTERNAL;
    }
}

int orpca_baseline_basis(const orpca_baseline* b, double* out) {
    if (!b || !out) return ORPCA_ERR_ARG;
    std::memcpy(out, b->impl.basis().data(),
                sizeof(double) * size_t(b->impl.basis().size()));
    return ORPCA_OK;
}

const char* orpca_version(void) { return "1.0.0"; }

const char* orpca_strerror(int code) {
    switch (code) {
        case ORPCA_OK: return "ok";
        case ORPCA_ERR_ARG: return "invalid argument or configuration";
        case ORPCA_ERR_DIM: return "dimension mismatch";
        case ORPCA_ERR_NONFINITE: return "non-finite input";
        case ORPCA_ERR_INTERNAL: return "internal error";
        default: return "unknown error";
    }
}

}  // extern "C"
