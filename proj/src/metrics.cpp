#include "metrics.hpp"
#include <cmath>

namespace orpca {

namespace {

// thin Q spanning the numerically nonzero directions of A
MatrixXd orth(const MatrixXd& A) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(A);
    VectorXd diag = qr.matrixR()
                        .topLeftCorner(std::min(A.rows(), A.cols()),
                                       std::min(A.rows(), A.cols()))
                        .diagonal()
                        .cwiseAbs();
    double lead = std::max(diag.size() > 0 ? diag(0) : 0.0, 1e-300);
    Eigen::Index keep = 0;
    while (keep < diag.size() && diag(keep) > 1e-10 * lead) ++keep;
    MatrixXd Q = qr.householderQ() * MatrixXd::Identity(A.rows(), keep);
    return Q;
}

}  // namespace

double explained_variance(const MatrixXd& L_est, const MatrixXd& U_true,
                          bool* degenerate) {
    if (L_est.rows() != U_true.rows())
        throw std::invalid_argument("explained_variance: row mismatch");
    if (degenerate) *degenerate = false;
    if (L_est.size() == 0 || L_est.isZero(0.0)) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    MatrixXd Qe = orth(L_est), Qt = orth(U_true);
    if (Qt.cols() == 0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return (Qe.transpose() * Qt).squaredNorm() / double(U_true.cols());
}

double support_f1(const MatrixXd& est, const MatrixXd& truth,
                  double threshold) {
    if (est.rows() != truth.rows() || est.cols() != truth.cols())
        throw std::invalid_argument("support_f1: shape mismatch");
    long tp = 0, fp = 0, fn = 0;
    for (Eigen::Index j = 0; j < est.cols(); ++j)
        for (Eigen::Index i = 0; i < est.rows(); ++i) {
            bool hit = std::abs(est(i, j)) > threshold;
            bool truly = truth(i, j) != 0.0;
            tp += hit && truly;
            fp += hit && !truly;
            fn += !hit && truly;
        }
    long denom = 2 * tp + fp + fn;
    return denom == 0 ? 1.0 : 2.0 * double(tp) / double(denom);
}

std::vector<double> mean_trace(
    const std::vector<std::vector<double>>& traces) {
    if (traces.empty())
        throw std::invalid_argument("mean_trace: no traces");
    size_t n = traces.front().size();
    for (const auto& t : traces)
        if (t.size() != n)
            throw std::invalid_argument("mean_trace: length mismatch");
    std::vector<double> out(n, 0.0);
    for (const auto& t : traces)
        for (size_t i = 0; i < n; ++i) out[i] += t[i];
    for (double& v : out) v /= double(traces.size());
    return out;
}

}  // namespace orpca
