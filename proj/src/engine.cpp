#include "engine.hpp"
#include <chrono>
#include <cmath>
#include "metrics.hpp"

namespace orpca {

engine::engine(int p, const engine_config& cfg) : p_(p), cfg_(cfg) {
    if (p < 1) throw std::invalid_argument("engine: dimension must be >= 1");
    if (cfg.rank < 1 || cfg.rank > p)
        throw std::invalid_argument("engine: rank must be in [1, p]");
    if (!(cfg.conv_tol > 0.0) || cfg.T0 < 1)
        throw std::invalid_argument("engine: bad alternation settings");
    const hyper_params& h = cfg.hyper;
    if (!(h.alpha_e > 0.0) || !(h.alpha_r > 0.0) || !(h.g0 > 0.0) ||
        h.mu < 0.0 || h.mu >= 1.0 ||
        !(h.loss_exit_low < h.loss_exit_high))
        throw std::invalid_argument("engine: bad hyperparameters");
    state_.g = VectorXd::Constant(p, h.g0);
    state_.V = MatrixXd::Zero(p, cfg.rank);
    prev_r_ = VectorXd::Zero(cfg.rank);
    prev_e_ = VectorXd::Zero(p);
}

// While the basis still has unseeded columns, adopt the spread-out part of
// the (outlier-cleaned) sample that the basis cannot express. Unit-norm
// orthogonal-ish columns keep the auto rate and budget rules in their
// intended regime; localized content fails the density gate and is left for
// the sparse stage.
bool engine::try_seed_column(const VectorXd& z, VectorXd& warm_r) {
    VectorXd zc = robust_clean(z);
    double zcn = zc.norm();
    if (!(zcn > 0.0)) return false;
    MatrixXd L = state_.basis();
    VectorXd w = zc - L * (L.transpose() * zc);
    if (w.norm() < 0.1 * zcn || density(w) < 0.1) return false;
    // gs balances the g- and V-gradient magnitudes so both factors stay
    // trainable after seeding
    double gs = std::cbrt(2.0 / std::sqrt(double(p_)));
    if (seeded_ == 0) {
        state_.g = VectorXd::Constant(p_, gs);
    } else {
        state_.V.array().colwise() *=
            state_.g.array().square() / (gs * gs);
        state_.g = VectorXd::Constant(p_, gs);
    }
    VectorXd wd = w / w.cwiseAbs().maxCoeff();  // overflow-safe normalization
    state_.V.col(seeded_) = wd / (wd.norm() * gs * gs);
    ++seeded_;
    warm_r = ridge_projection(state_.basis(), zc);
    return true;
}

sample_result engine::process(const VectorXd& z) {
    if (z.size() != p_)
        throw std::invalid_argument("process: sample length mismatch");
    if (!all_finite(z))
        throw std::invalid_argument("process: non-finite sample entries");
    const hyper_params& h = cfg_.hyper;
    const double p = double(p_);

    VectorXd rt = prev_r_;
    if (seeded_ < cfg_.rank) try_seed_column(z, rt);
    MatrixXd L = state_.basis();

    double zn = z.norm();
    if (zn == 0.0) zn = 1.0;
    VectorXd r_ref = prev_r_, e_ref = prev_e_;
    VectorXd e = prev_e_;
    int k = 0;
    bool fell_back = false;
    try {
        while (true) {
            // sparse part first: its target uses the current coefficient so
            // a fresh outlier cannot smear into the basis fit below
            VectorXd tgt_e = z - L * rt;
            double eta_e = h.eta_e > 0.0 ? h.eta_e : auto_eta_e(tgt_e);
            int T_e = h.T_e > 0
                          ? h.T_e
                          : hp_grad_budget(tgt_e.cwiseAbs().maxCoeff(), p_,
                                           4.0 * eta_e / p, h.alpha_e,
                                           h.budget_cap);
            e = hp_grad(tgt_e, T_e, eta_e, h.alpha_e);

            VectorXd tgt_r = z - e;
            double eta_r = h.eta_r > 0.0 ? h.eta_r : auto_eta_r(L, tgt_r);
            int T_r = h.T_r > 0
                          ? h.T_r
                          : hp_grad_budget(
                                (L.transpose() * tgt_r).cwiseAbs().maxCoeff(),
                                p_, 4.0 * eta_r / p, h.alpha_r, h.budget_cap);
            rt = hp_mom_grad(tgt_r, L, h.mu, T_r, eta_r, h.alpha_r);

            double eps = std::max((rt - r_ref).norm(), (e - e_ref).norm()) / zn;
            r_ref = rt;
            e_ref = e;
            ++k;
            if (eps < cfg_.conv_tol || k >= cfg_.T0) break;
        }
    } catch (const divergence_error&) {
        // keep the previous decomposition; basis stays untouched
        fell_back = true;
        ++diverged_;
        rt = prev_r_;
        e = prev_e_;
    }

    if (!fell_back) {
        VectorXd d = z - e;
        group_options opt;
        opt.auto_step = h.eta_L <= 0.0;
        opt.rel_cap = std::min(0.5, 2.0 / double(std::max<long>(t_, 1)));
        int T_L = h.T_L > 0 ? h.T_L : 50;
        double eta_L = h.eta_L;  // ignored in auto mode
        hp_group_grad(d, rt, T_L, eta_L, state_.g, state_.V, h.loss_exit_low,
                      h.loss_exit_high, opt);
        prev_r_ = rt;
        prev_e_ = e;
    }
    ++t_;

    sample_result res;
    res.r_coef = rt;
    res.e = e;
    res.inner_iters = fell_back ? -k : k;
    res.fidelity = fidelity_loss(z, state_.basis() * rt, e);
    if (cfg_.accumulate) {
        hist_r_.push_back(rt);
        hist_e_.push_back(e);
    }
    return res;
}

stream_report run_stream(const MatrixXd& Z, const engine_config& cfg,
                         const MatrixXd* truth) {
    auto t0 = std::chrono::steady_clock::now();
    stream_report rep;
    if (Z.cols() == 0) throw std::invalid_argument("run_stream: empty stream");
    engine eng(int(Z.rows()), cfg);
    rep.R.resize(Z.cols(), cfg.rank);
    rep.E.resize(Z.rows(), Z.cols());
    for (Eigen::Index t = 0; t < Z.cols(); ++t) {
        sample_result sr = eng.process(Z.col(t));
        rep.R.row(t) = sr.r_coef.transpose();
        rep.E.col(t) = sr.e;
        rep.inner_iters.push_back(sr.inner_iters);
        rep.fidelity.push_back(sr.fidelity);
        if (truth) rep.ev.push_back(explained_variance(eng.basis(), *truth));
    }
    rep.basis = eng.basis();
    rep.diverged = eng.divergences();
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return rep;
}

}  // namespace orpca
