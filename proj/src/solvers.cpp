#include "solvers.hpp"
#include <algorithm>
#include <cmath>
#include <limits>

namespace orpca {

int hp_grad_budget(double max_abs, int p_dim, double eta, double alpha,
                   int cap) {
    double a2 = alpha * alpha;
    if (!(max_abs > a2)) return 1;
    double arg = (max_abs - a2) / (alpha * eta);
    if (!(arg > 1.0)) return 1;
    double t = std::ceil((15.0 / 16.0) * double(p_dim) * std::log2(arg));
    if (t < 1.0) return 1;
    if (t >= double(cap)) return cap;
    return int(t);
}

double auto_eta_e(const VectorXd& target) {
    double p = double(target.size());
    return p / (8.0 * (target.cwiseAbs().maxCoeff() + 1.0));
}

VectorXd hp_grad(const VectorXd& target, int T_e, double eta, double alpha) {
    const Eigen::Index p = target.size();
    Eigen::ArrayXd m = Eigen::ArrayXd::Constant(p, alpha);
    Eigen::ArrayXd n = Eigen::ArrayXd::Constant(p, alpha);
    Eigen::ArrayXd e = Eigen::ArrayXd::Zero(p);
    const double scale = 4.0 / double(p);
    for (int i = 0; i < T_e; ++i) {
        Eigen::ArrayXd step = (eta * scale) * (target.array() - e);
        m *= 1.0 + step;
        n *= 1.0 - step;
        e = m * m - n * n;
        if (!e.isFinite().all())
            throw divergence_error("hp_grad: non-finite iterate", i,
                                   std::numeric_limits<double>::quiet_NaN());
    }
    return e.matrix();
}

double hp_grad_loss(const VectorXd& target, const VectorXd& m,
                    const VectorXd& n) {
    VectorXd e = (m.array().square() - n.array().square()).matrix();
    return (target - e).squaredNorm() / double(target.size());
}

void hp_grad_gradients(const VectorXd& target, const VectorXd& m,
                       const VectorXd& n, VectorXd& grad_m, VectorXd& grad_n) {
    Eigen::ArrayXd e = m.array().square() - n.array().square();
    Eigen::ArrayXd delta = (4.0 / double(target.size())) * (target.array() - e);
    grad_m = (-delta * m.array()).matrix();
    grad_n = (delta * n.array()).matrix();
}

VectorXd hp_mom_grad(const VectorXd& target, const MatrixXd& L, double mu,
                     int T_r, double eta, double alpha) {
    const Eigen::Index p = L.rows(), r = L.cols();
    Eigen::ArrayXd u = Eigen::ArrayXd::Constant(r, alpha);
    Eigen::ArrayXd v = Eigen::ArrayXd::Constant(r, alpha);
    Eigen::ArrayXd vel_u = Eigen::ArrayXd::Zero(r);
    Eigen::ArrayXd vel_v = Eigen::ArrayXd::Zero(r);
    Eigen::ArrayXd rc = Eigen::ArrayXd::Zero(r);  // u^2 - v^2 from equal init
    VectorXd resid = target;                      // target - L*0
    const double loss0 = resid.squaredNorm() / double(p);
    const double scale = 4.0 / double(p);
    for (int i = 0; i < T_r; ++i) {
        Eigen::ArrayXd delta = scale * (L.transpose() * resid).array();
        vel_u = mu * vel_u + eta * u * delta;
        u += vel_u;
        vel_v = mu * vel_v - eta * v * delta;
        v += vel_v;
        rc = u * u - v * v;
        resid.noalias() = target - L * rc.matrix();
        double loss = rc.isFinite().all()
                          ? resid.squaredNorm() / double(p)
                          : std::numeric_limits<double>::infinity();
        if (!std::isfinite(loss) || loss > 100.0 * (loss0 + 1.0))
            throw divergence_error("hp_mom_grad: loss blow-up", i, loss);
    }
    return rc.matrix();
}

double hp_mom_grad_loss(const VectorXd& target, const MatrixXd& L,
                        const VectorXd& u, const VectorXd& v) {
    VectorXd rc = (u.array().square() - v.array().square()).matrix();
    return (target - L * rc).squaredNorm() / double(L.rows());
}

void hp_mom_grad_gradients(const VectorXd& target, const MatrixXd& L,
                           const VectorXd& u, const VectorXd& v,
                           VectorXd& grad_u, VectorXd& grad_v) {
    VectorXd rc = (u.array().square() - v.array().square()).matrix();
    VectorXd resid = target - L * rc;
    Eigen::ArrayXd delta =
        (4.0 / double(L.rows())) * (L.transpose() * resid).array();
    grad_u = (-delta * u.array()).matrix();
    grad_v = (delta * v.array()).matrix();
}

VectorXd ridge_projection(const MatrixXd& L, const VectorXd& target) {
    const Eigen::Index r = L.cols();
    MatrixXd G = L.transpose() * L;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(G, Eigen::EigenvaluesOnly);
    double lmax = es.eigenvalues().maxCoeff();
    if (!(lmax > 0.0)) return VectorXd::Zero(r);
    MatrixXd Greg = G + (1e-12 * lmax) * MatrixXd::Identity(r, r);
    return Greg.ldlt().solve(L.transpose() * target);
}

double auto_eta_r(const MatrixXd& L, const VectorXd& target) {
    const double p = double(L.rows());
    MatrixXd G = L.transpose() * L;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(G, Eigen::EigenvaluesOnly);
    double lmax = es.eigenvalues().maxCoeff();
    if (!(lmax > 0.0)) return p / 16.0;
    VectorXd b = L.transpose() * target;
    MatrixXd Greg =
        G + (1e-12 * lmax) * MatrixXd::Identity(G.rows(), G.cols());
    VectorXd rhat = Greg.ldlt().solve(b);
    double scale =
        std::max(lmax * rhat.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
    return p / (16.0 * (scale + 1.0));
}

double hp_group_loss(const VectorXd& target, const VectorXd& r_coef,
                     const VectorXd& g, const MatrixXd& V) {
    VectorXd recon =
        (V.array().colwise() * g.array().square()).matrix() * r_coef;
    return 0.5 * (target - recon).squaredNorm();
}

void hp_group_gradients(const VectorXd& target, const VectorXd& r_coef,
                        const VectorXd& g, const MatrixXd& V,
                        VectorXd& grad_g, MatrixXd& grad_V) {
    const double p = double(g.size());
    MatrixXd L = (V.array().colwise() * g.array().square()).matrix();
    VectorXd s = L * r_coef - target;
    MatrixXd G = s * r_coef.transpose();
    // gradients of (1/(2p))||target - L r||^2 in (g, V)
    grad_g = (2.0 / p) * (g.array() * (G.array() * V.array()).rowwise().sum())
                 .matrix();
    grad_V = (1.0 / p) * (G.array().colwise() * g.array().square()).matrix();
}

double median(VectorXd v) {
    const Eigen::Index n = v.size();
    if (n == 0) return 0.0;
    double* b = v.data();
    double* mid = b + n / 2;
    std::nth_element(b, mid, b + n);
    double hi = *mid;
    if (n % 2 == 1) return hi;
    double lo = *std::max_element(b, mid);
    return 0.5 * (lo + hi);
}

double mad_sigma(const VectorXd& v, double med) {
    return 1.4826 * median((v.array() - med).abs().matrix());
}

VectorXd robust_clean(const VectorXd& z) {
    double med = median(z);
    double sig = mad_sigma(z, med);
    double lo = med - 5.0 * sig, hi = med + 5.0 * sig;
    return (z.array() < lo || z.array() > hi)
        .select(VectorXd::Constant(z.size(), med), z);
}

double density(const VectorXd& w) {
    double mx = w.cwiseAbs().maxCoeff();
    if (!(mx > 0.0)) return 0.0;
    VectorXd s = w / mx;  // the ratio is scale-free; avoid overflow in s1^2
    double s1 = s.lpNorm<1>();
    return s1 * s1 / (s.squaredNorm() * double(w.size()));
}

namespace {

// residual of the derived basis applied to r_coef, optionally clipped
inline VectorXd group_residual(const VectorXd& g, const MatrixXd& V,
                               const VectorXd& r_coef, const VectorXd& target) {
    return (V.array().colwise() * g.array().square()).matrix() * r_coef -
           target;
}

}  // namespace

int hp_group_grad(const VectorXd& target, const VectorXd& r_coef, int T_L,
                  double eta_L, VectorXd& g, MatrixXd& V, double exit_low,
                  double exit_high, const group_options& opt) {
    const double p = double(g.size());
    const VectorXd g_in = g;
    const MatrixXd V_in = V;
    int iters = 0;
    while (true) {
        VectorXd s = group_residual(g, V, r_coef, target);
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        if (opt.auto_step) {
            // an unexplained outlier that the sparse stage missed must not
            // steer the basis: clip the residual at a robust scale
            double med = median(s);
            double sig = mad_sigma(s, med) + 1e-30;
            lo = med - 5.0 * sig;
            hi = med + 5.0 * sig;
            s = s.cwiseMax(lo).cwiseMin(hi);
        }
        MatrixXd G = s * r_coef.transpose();
        double loss0 = 0.5 * s.squaredNorm();
        VectorXd dir_g =
            (1.0 / p) *
            (g.array() * (G.array() * V.array()).rowwise().sum()).matrix();
        MatrixXd dir_V =
            (1.0 / p) * (G.array().colwise() * g.array().square()).matrix();
        double step = eta_L;
        if (opt.auto_step) {
            // damped Cauchy step along the update direction, then clamped so
            // neither factor moves more than rel_cap of its own scale
            MatrixXd Ldot =
                (V.array().colwise() * (2.0 * g.array() * (-dir_g).array()))
                    .matrix() +
                ((-dir_V).array().colwise() * g.array().square()).matrix();
            VectorXd ldr = Ldot * r_coef;
            double num = -(G.array() * Ldot.array()).sum();
            double den = ldr.squaredNorm();
            if (!(den > 0.0) || !std::isfinite(num) || num <= 0.0) {
                step = 0.0;
            } else {
                step = 0.5 * num / den;
                double ng = dir_g.norm(), nV = dir_V.norm();
                if (ng > 0.0)
                    step = std::min(step, opt.rel_cap * g.norm() / ng);
                if (nV > 0.0)
                    step = std::min(step,
                                    opt.rel_cap * (V.norm() + 1e-30) / nV);
            }
        }
        VectorXd g2;
        MatrixXd V2;
        while (true) {
            g2 = g - step * dir_g;
            V2 = V - step * dir_V;
            if (!opt.auto_step) break;
            VectorXd s2 = group_residual(g2, V2, r_coef, target)
                              .cwiseMax(lo)
                              .cwiseMin(hi);
            if (0.5 * s2.squaredNorm() <= loss0 || step <= 1e-30) break;
            step *= 0.5;  // keep halving until the clipped loss is monotone
        }
        g = g2;
        V = V2;
        ++iters;
        double loss = hp_group_loss(target, r_coef, g, V);
        if (!std::isfinite(loss))
            throw divergence_error("hp_group_grad: non-finite loss", iters,
                                   loss0);
        if (loss <= exit_low || loss >= exit_high || iters >= T_L) break;
        if (opt.auto_step &&
            ((g - g_in).norm() >= opt.rel_cap * (g_in.norm() + 1e-30) ||
             (V - V_in).norm() >= opt.rel_cap * (V_in.norm() + 1e-30)))
            break;  // total per-call motion is bounded, not just per step
    }
    return iters;
}

subspace_state hp_group_grad(const VectorXd& target, const VectorXd& r_coef,
                             int T_L, double eta_L, subspace_state state,
                             double exit_low, double exit_high) {
    hp_group_grad(target, r_coef, T_L, eta_L, state.g, state.V, exit_low,
                  exit_high, group_options{});
    return state;
}

}  // namespace orpca
