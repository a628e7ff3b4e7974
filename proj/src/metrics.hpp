#pragma once
#include <vector>
#include "model.hpp"

namespace orpca {

// Subspace overlap in [0,1]: orthonormalize both factors (thin QR, dropping
// numerically null columns at 1e-10 of the leading diagonal) and return
// ||Q_est^T Q_true||_F^2 / r_true. 1 means exact recovery. An all-zero
// estimate yields 0 and sets *degenerate when provided.
double explained_variance(const MatrixXd& L_est, const MatrixXd& U_true,
                          bool* degenerate = nullptr);

// F1 of {|est| > threshold} against {truth != 0}; two empty supports count
// as a perfect match.
double support_f1(const MatrixXd& est, const MatrixXd& truth,
                  double threshold);

std::vector<double> mean_trace(const std::vector<std::vector<double>>& traces);

}  // namespace orpca
