#pragma once
#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace orpca {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Raised when a solver's iterates blow up; the engine converts this into a
// keep-previous-estimate fallback instead of killing the stream.
struct divergence_error : std::runtime_error {
    int iteration;
    double last_loss;
    divergence_error(const std::string& what, int iter, double loss)
        : std::runtime_error(what), iteration(iter), last_loss(loss) {}
};

// Solver hyperparameters. A zero learning rate means "choose automatically";
// a zero iteration budget means "use the budget formula / default cap".
struct hyper_params {
    double alpha_e = 1e-2;        // initial scale of the sparse-part factors
    double alpha_r = 1e-2;        // initial scale of the coefficient factors
    double g0 = 1e-1;             // initial row-coupling value
    double mu = 0.9;              // heavy-ball momentum
    double eta_e = 0.0;           // 0 = auto
    double eta_r = 0.0;           // 0 = auto
    double eta_L = 0.0;           // 0 = auto
    int T_e = 0;                  // 0 = budget formula
    int T_r = 0;                  // 0 = budget formula
    int T_L = 0;                  // 0 = default 50
    int budget_cap = 2000;        // hard bound on formula budgets
    double loss_exit_low = 1e-2;  // basis-update loss exit band
    double loss_exit_high = 1e2;
};

// Persistent basis factors. The basis L is always derived, never stored as
// independent truth, so warm starts cannot drift.
struct subspace_state {
    VectorXd g;  // row-coupling factor, length p
    MatrixXd V;  // element factor, p x r

    MatrixXd basis() const {
        return V.array().colwise() * g.array().square();
    }
};

inline MatrixXd derive_basis(const subspace_state& s) { return s.basis(); }

// Per-sample output: coefficient, sparse part, alternation count and the
// achieved data fidelity. A negative iteration count marks a sample where a
// solver diverged and the previous estimate was kept.
struct sample_result {
    VectorXd r_coef;
    VectorXd e;
    int inner_iters = 0;
    double fidelity = 0.0;
};

inline double fidelity_loss(const VectorXd& z, const VectorXd& x,
                            const VectorXd& e) {
    if (z.size() != x.size() || z.size() != e.size())
        throw std::invalid_argument("fidelity_loss: length mismatch");
    return 0.5 * (z - x - e).squaredNorm();
}

inline bool all_finite(const VectorXd& v) { return v.allFinite(); }

}  // namespace orpca
