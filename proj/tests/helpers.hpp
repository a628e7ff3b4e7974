#pragma once
#include <Eigen/Dense>
#include "rng.hpp"

// deterministic random fixtures for tests
inline Eigen::MatrixXd random_matrix(int rows, int cols, uint64_t seed,
                                     double scale = 1.0) {
    orpca::rng gen(seed, orpca::rng::stream_init);
    Eigen::MatrixXd m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = scale * gen.next_normal();
    return m;
}

inline Eigen::VectorXd random_vector(int n, uint64_t seed,
                                     double scale = 1.0) {
    orpca::rng gen(seed, orpca::rng::stream_init);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = scale * gen.next_normal();
    return v;
}

inline Eigen::MatrixXd orthonormal_cols(int p, int r, uint64_t seed) {
    Eigen::MatrixXd a = random_matrix(p, r, seed);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ() * Eigen::MatrixXd::Identity(p, r);
}

inline bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (a(i, j) != b(i, j)) return false;
    return true;
}
