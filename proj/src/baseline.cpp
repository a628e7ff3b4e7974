#include "baseline.hpp"
#include <cmath>
#include "rng.hpp"

namespace orpca {

VectorXd soft_threshold(const VectorXd& x, double tau) {
    if (tau < 0.0) throw std::invalid_argument("soft_threshold: tau < 0");
    return x.array().sign() * (x.array().abs() - tau).max(0.0);
}

VectorXd solve_r_ridge(const VectorXd& y, const MatrixXd& L, double lambda1) {
    if (!(lambda1 > 0.0))
        throw std::invalid_argument("solve_r_ridge: lambda1 must be > 0");
    const Eigen::Index r = L.cols();
    MatrixXd G = L.transpose() * L + lambda1 * MatrixXd::Identity(r, r);
    return G.ldlt().solve(L.transpose() * y);
}

baseline::baseline(int p, int rank, double lambda1, double lambda2,
                   double conv_tol, int T0, uint64_t init_seed)
    : p_(p), r_(rank), lambda1_(lambda1), lambda2_(lambda2),
      conv_tol_(conv_tol), T0_(T0) {
    if (p < 1 || rank < 1 || rank > p)
        throw std::invalid_argument("baseline: rank must be in [1, p]");
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
        throw std::invalid_argument("baseline: penalties must be > 0");
    // a zero basis is a fixed point of the whole alternation (coefficients
    // and accumulators stay zero), so start from a seeded random draw
    rng gen(init_seed, rng::stream_init);
    L_.resize(p, rank);
    for (Eigen::Index j = 0; j < L_.cols(); ++j)
        for (Eigen::Index i = 0; i < L_.rows(); ++i)
            L_(i, j) = gen.next_normal();
    A_ = MatrixXd::Zero(rank, rank);
    B_ = MatrixXd::Zero(p, rank);
    prev_e_ = VectorXd::Zero(p);
}

void baseline::update_basis(const VectorXd& z_minus_e,
                            const VectorXd& r_coef) {
    A_ += r_coef * r_coef.transpose();
    B_ += z_minus_e * r_coef.transpose();
    MatrixXd At = A_ + lambda1_ * MatrixXd::Identity(r_, r_);
    for (int j = 0; j < r_; ++j)
        L_.col(j) += (B_.col(j) - L_ * At.col(j)) / At(j, j);
}

sample_result baseline::process(const VectorXd& z) {
    if (z.size() != p_)
        throw std::invalid_argument("baseline: sample length mismatch");
    if (!all_finite(z))
        throw std::invalid_argument("baseline: non-finite sample entries");
    double zn = z.norm();
    if (zn == 0.0) zn = 1.0;
    VectorXd e = prev_e_;
    VectorXd r_ref = VectorXd::Zero(r_), e_ref = prev_e_;
    VectorXd rc(r_);
    int k = 0;
    while (true) {
        rc = solve_r_ridge(z - e, L_, lambda1_);
        e = soft_threshold(z - L_ * rc, lambda2_);
        double eps = std::max((rc - r_ref).norm(), (e - e_ref).norm()) / zn;
        r_ref = rc;
        e_ref = e;
        ++k;
        if (eps < conv_tol_ || k >= T0_) break;
    }
    update_basis(z - e, rc);
    prev_e_ = e;
    ++t_;

    sample_result res;
    res.r_coef = rc;
    res.e = e;
    res.inner_iters = k;
    res.fidelity = fidelity_loss(z, L_ * rc, e);
    return res;
}

}  // namespace orpca
