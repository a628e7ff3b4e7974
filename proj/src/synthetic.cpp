#include "synthetic.hpp"
#include <cmath>
#include <numeric>
#include <vector>
#include "rng.hpp"

namespace orpca {

synthetic_dataset generate(const synthetic_config& cfg) {
    if (cfg.p < 1 || cfg.n < 1)
        throw std::invalid_argument("generate: dimensions must be >= 1");
    if (cfg.rho < 0.0 || cfg.rho > 1.0)
        throw std::invalid_argument("generate: rho must be in [0, 1]");
    if (cfg.r_true < 1 || cfg.r_true > std::min(cfg.p, cfg.n))
        throw std::invalid_argument("generate: rank must be <= min(p, n)");
    if (!(cfg.magnitude > 0.0))
        throw std::invalid_argument("generate: magnitude must be > 0");

    synthetic_dataset ds;
    ds.seed = cfg.seed;
    const double sd = 1.0 / std::sqrt(double(cfg.n));

    rng gu(cfg.seed, rng::stream_u);
    ds.U.resize(cfg.p, cfg.r_true);
    for (Eigen::Index j = 0; j < ds.U.cols(); ++j)
        for (Eigen::Index i = 0; i < ds.U.rows(); ++i)
            ds.U(i, j) = sd * gu.next_normal();

    rng gv(cfg.seed, rng::stream_vcoef);
    ds.Vc.resize(cfg.n, cfg.r_true);
    for (Eigen::Index j = 0; j < ds.Vc.cols(); ++j)
        for (Eigen::Index i = 0; i < ds.Vc.rows(); ++i)
            ds.Vc(i, j) = sd * gv.next_normal();

    ds.X = ds.U * ds.Vc.transpose();

    ds.E = MatrixXd::Zero(cfg.p, cfg.n);
    const uint64_t cells = uint64_t(cfg.p) * uint64_t(cfg.n);
    const uint64_t nnz =
        uint64_t(std::llround(cfg.rho * double(cfg.p) * double(cfg.n)));
    if (nnz > 0) {
        // exact nonzero count: partial Fisher-Yates over all cells
        std::vector<uint64_t> idx(cells);
        std::iota(idx.begin(), idx.end(), 0);
        rng gs(cfg.seed, rng::stream_support);
        rng gval(cfg.seed, rng::stream_values);
        for (uint64_t i = 0; i < nnz; ++i) {
            uint64_t j = i + gs.next_below(cells - i);
            std::swap(idx[i], idx[j]);
            double val = 0.0;
            while (val == 0.0)  // keep the nonzero count exact
                val = -cfg.magnitude + 2.0 * cfg.magnitude * gval.next_double();
            ds.E(Eigen::Index(idx[i] % uint64_t(cfg.p)),
                 Eigen::Index(idx[i] / uint64_t(cfg.p))) = val;
        }
    }
    ds.Z = ds.X + ds.E;
    return ds;
}

synthetic_config preset(const std::string& name) {
    synthetic_config cfg;
    if (name == "small") {
        cfg.p = 40;
        cfg.n = 200;
    } else if (name == "mid") {
        cfg.p = 400;
        cfg.n = 1000;
    } else {
        throw std::invalid_argument("preset: unknown name '" + name + "'");
    }
    cfg.r_true = 10;
    cfg.rho = 0.01;
    cfg.magnitude = 1000.0;
    return cfg;
}

}  // namespace orpca
