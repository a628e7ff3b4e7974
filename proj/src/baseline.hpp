#pragma once
#include "model.hpp"

namespace orpca {

// Elementwise sign(x)*max(|x|-tau, 0): exact minimizer of
// 0.5(x-e)^2 + tau|e| per coordinate.
VectorXd soft_threshold(const VectorXd& x, double tau);

// Exact minimizer of 0.5||y - L r||^2 + (lambda1/2)||r||^2.
VectorXd solve_r_ridge(const VectorXd& y, const MatrixXd& L, double lambda1);

// Explicit-penalty streaming decomposition: per sample, alternate the ridge
// coefficient and the soft-thresholded sparse part, then refresh the basis
// with one block-coordinate pass over accumulated second moments.
class baseline {
public:
    baseline(int p, int rank, double lambda1, double lambda2,
             double conv_tol = 1e-3, int T0 = 50, uint64_t init_seed = 999);

    sample_result process(const VectorXd& z);

    const MatrixXd& basis() const { return L_; }
    int dim() const { return p_; }
    int rank() const { return r_; }
    long samples() const { return t_; }

    // one block-coordinate refresh of L from the accumulators; exposed for
    // direct testing against closed forms
    void update_basis(const VectorXd& z_minus_e, const VectorXd& r_coef);

    MatrixXd& mutable_basis() { return L_; }

private:
    int p_, r_;
    double lambda1_, lambda2_, conv_tol_;
    int T0_;
    MatrixXd L_;
    MatrixXd A_;  // accumulated r r^T
    MatrixXd B_;  // accumulated (z-e) r^T
    VectorXd prev_e_;
    long t_ = 0;
};

}  // namespace orpca
