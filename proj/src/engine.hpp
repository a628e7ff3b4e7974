#pragma once
#include <vector>
#include "model.hpp"
#include "solvers.hpp"

namespace orpca {

struct engine_config {
    int rank = 10;
    hyper_params hyper;
    double conv_tol = 1e-3;  // alternation exit threshold
    int T0 = 50;             // alternation cap
    bool accumulate = false; // retain full R and E histories
};

// Streaming decomposition driver: per revealed sample, alternate the sparse
// and coefficient solvers to convergence, then advance the persistent basis
// factors. Strictly sequential; owns all of its state; no randomness.
class engine {
public:
    engine(int p, const engine_config& cfg);

    sample_result process(const VectorXd& z);

    const subspace_state& state() const { return state_; }
    MatrixXd basis() const { return state_.basis(); }
    int dim() const { return p_; }
    int rank() const { return cfg_.rank; }
    long samples() const { return t_; }
    long divergences() const { return diverged_; }

    // available when cfg.accumulate is set; rows of R are samples
    const std::vector<VectorXd>& history_r() const { return hist_r_; }
    const std::vector<VectorXd>& history_e() const { return hist_e_; }

private:
    int p_;
    engine_config cfg_;
    subspace_state state_;
    VectorXd prev_r_, prev_e_;
    long t_ = 0;
    long diverged_ = 0;
    int seeded_ = 0;
    std::vector<VectorXd> hist_r_, hist_e_;

    bool try_seed_column(const VectorXd& z, VectorXd& warm_r);
};

struct stream_report {
    MatrixXd basis;                 // final derived basis
    MatrixXd R;                     // n x r accumulated coefficients
    MatrixXd E;                     // p x n accumulated sparse parts
    std::vector<double> ev;         // per-sample EV when truth given
    std::vector<int> inner_iters;   // per-sample alternation counts
    std::vector<double> fidelity;   // per-sample data fidelity
    long diverged = 0;
    double wall_seconds = 0.0;
};

// Fold process() over the columns of Z in order. When truth has columns, the
// subspace overlap against it is recorded after every sample.
stream_report run_stream(const MatrixXd& Z, const engine_config& cfg,
                         const MatrixXd* truth = nullptr);

}  // namespace orpca
