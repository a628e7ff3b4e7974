#pragma once
#include "model.hpp"

namespace orpca {

// Iteration budget ceil((15/16) * p_dim * log2((max_abs - a^2)/(a*eta))),
// floored at 1 and capped. eta here is the effective per-coordinate rate.
int hp_grad_budget(double max_abs, int p_dim, double eta, double alpha,
                   int cap);

// Auto rates keep the multiplicative step eta*|delta| <= 1/2 at the start.
double auto_eta_e(const VectorXd& target);

// Sparse recovery by a multiplicative factor race: e = m^2 - n^2 from
// m = n = alpha, descending (1/p)||target - e||^2. Large entries of target
// outgrow the budget, small ones stay near the alpha^2 floor.
VectorXd hp_grad(const VectorXd& target, int T_e, double eta, double alpha);

// Loss and analytic factor gradients of the race objective, for testing the
// update direction against finite differences.
double hp_grad_loss(const VectorXd& target, const VectorXd& m,
                    const VectorXd& n);
void hp_grad_gradients(const VectorXd& target, const VectorXd& m,
                       const VectorXd& n, VectorXd& grad_m, VectorXd& grad_n);

// Ridge-like coefficient fit with heavy-ball momentum on the same
// parametrization: r = u^2 - v^2. Early stopping at budget T_r corresponds
// to an implicit ridge weight of about 2/T_r^2.
VectorXd hp_mom_grad(const VectorXd& target, const MatrixXd& L, double mu,
                     int T_r, double eta, double alpha);

double hp_mom_grad_loss(const VectorXd& target, const MatrixXd& L,
                        const VectorXd& u, const VectorXd& v);
void hp_mom_grad_gradients(const VectorXd& target, const MatrixXd& L,
                           const VectorXd& u, const VectorXd& v,
                           VectorXd& grad_u, VectorXd& grad_v);

// Curvature-aware auto rate for hp_mom_grad: the plain first-step bound
// p/(16(max|L^T target|+1)) under-damps when L^T L is ill conditioned, so the
// scale also covers lmax(L^T L)*|r_hat|_inf at the ridge estimate r_hat.
// Equals the plain bound for orthonormal L.
double auto_eta_r(const MatrixXd& L, const VectorXd& target);

// Cheap regularized least-squares coefficient, used by auto_eta_r and as the
// alternation warm start right after a basis column is seeded.
VectorXd ridge_projection(const MatrixXd& L, const VectorXd& target);

// Basis update on the row-coupled factors (g, V), L = (g^2) ⊙ V rows.
// Repeats gradient steps until the fidelity 0.5||target - L r||^2 leaves
// (exit_low, exit_high) or T_L iterations. Factors persist across calls.
struct group_options {
    bool auto_step = false;  // Cauchy step + trust region + residual clipping
    double rel_cap = 0.5;    // max relative motion per factor and per call
};

int hp_group_grad(const VectorXd& target, const VectorXd& r_coef, int T_L,
                  double eta_L, VectorXd& g, MatrixXd& V, double exit_low,
                  double exit_high, const group_options& opt = {});

// Spec-shaped convenience wrapper with an explicit rate.
subspace_state hp_group_grad(const VectorXd& target, const VectorXd& r_coef,
                             int T_L, double eta_L, subspace_state state,
                             double exit_low = 1e-2, double exit_high = 1e2);

double hp_group_loss(const VectorXd& target, const VectorXd& r_coef,
                     const VectorXd& g, const MatrixXd& V);
void hp_group_gradients(const VectorXd& target, const VectorXd& r_coef,
                        const VectorXd& g, const MatrixXd& V,
                        VectorXd& grad_g, MatrixXd& grad_V);

// Median / robust scale helpers (averaged middle order statistics).
double median(VectorXd v);
double mad_sigma(const VectorXd& v, double med);  // 1.4826 * MAD

// Sample with gross outliers replaced by the median (beyond 5 robust sigmas).
VectorXd robust_clean(const VectorXd& z);

// Normalized participation ratio (sum|w|)^2 / (p * sum w^2) in [1/p, 1]:
// near 1 for spread-out content, near support/p for localized content.
double density(const VectorXd& w);

}  // namespace orpca
