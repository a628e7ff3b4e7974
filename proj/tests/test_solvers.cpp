#include <cmath>
#include "doctest.h"
#include "helpers.hpp"
#include "solvers.hpp"

using namespace orpca;

TEST_CASE("iteration budget formula") {
    // 37.5 * log2(~1e8) rounds up to 997
    CHECK(hp_grad_budget(1000.0, 40, 1e-3, 1e-2, 1000000) == 997);
    SUBCASE("cap binds") { CHECK(hp_grad_budget(1000.0, 40, 1e-3, 1e-2, 100) == 100); }
    SUBCASE("signal below the parametrization floor") {
        CHECK(hp_grad_budget(1e-4, 40, 1e-3, 1e-2, 2000) == 1);
        CHECK(hp_grad_budget(5e-5, 40, 1e-3, 1e-2, 2000) == 1);
        CHECK(hp_grad_budget(0.0, 40, 1e-3, 1e-2, 2000) == 1);
    }
    SUBCASE("log argument at or below one") {
        // (max_abs - a^2)/(a*eta) = 0.99... -> floor value
        CHECK(hp_grad_budget(1e-4 + 0.99e-5, 40, 1e-3, 1e-2, 2000) == 1);
    }
}

TEST_CASE("auto rate keeps the first multiplicative step small") {
    VectorXd t = random_vector(16, 21, 3.0);
    double eta = auto_eta_e(t);
    CHECK(eta == doctest::Approx(16.0 / (8.0 * (t.cwiseAbs().maxCoeff() + 1.0)))
                     .epsilon(1e-15));
    double step = eta * (4.0 / 16.0) * t.cwiseAbs().maxCoeff();
    CHECK(step < 0.5);
}

TEST_CASE("sparse race: zero target stays zero") {
    VectorXd z = VectorXd::Zero(6);
    for (int T : {0, 1, 7, 50}) {
        VectorXd e = hp_grad(z, T, 0.1, 1e-2);
        CHECK(e.isZero(0.0));
    }
}

TEST_CASE("sparse race: single-step scalar recursion") {
    VectorXd t(1);
    t << 1.0;
    VectorXd e = hp_grad(t, 1, 0.1, 0.1);
    // m = 0.1*1.4, n = 0.1*0.6, e = m^2 - n^2
    CHECK(e(0) == doctest::Approx(0.016).epsilon(1e-12));
}

TEST_CASE("sparse race: support recovery under auto settings") {
    VectorXd t(4);
    t << 5.0, 0.0, 0.0, 0.0;
    double alpha = 1e-2;
    double eta = auto_eta_e(t);
    int T = hp_grad_budget(5.0, 4, 4.0 * eta / 4.0, alpha, 2000);
    VectorXd e = hp_grad(t, T, eta, alpha);
    CHECK(std::abs(e(0) - 5.0) <= 0.02 * 5.0);
    for (int i = 1; i < 4; ++i) CHECK(std::abs(e(i)) <= 10.0 * alpha * alpha);
}

TEST_CASE("sparse race: zero budget returns the initialization") {
    VectorXd t = random_vector(5, 33, 2.0);
    CHECK(hp_grad(t, 0, 0.1, 1e-2).isZero(0.0));
}

TEST_CASE("sparse race: overflow raises a divergence error") {
    VectorXd t(1);
    t << 1e300;
    CHECK_THROWS_AS(hp_grad(t, 5, 0.1, 1e-2), divergence_error);
}

TEST_CASE("sparse race: factor product identity to 4 ulps") {
    // m_{k+1} n_{k+1} = m_k n_k (1 - s^2) elementwise, s the signed step
    const int p = 16;
    orpca::rng gen(77, orpca::rng::stream_init);
    Eigen::ArrayXd target(p);
    for (int i = 0; i < p; ++i) target(i) = 4.0 * gen.next_normal();
    double alpha = 1e-2, eta = auto_eta_e(target.matrix());
    Eigen::ArrayXd m = Eigen::ArrayXd::Constant(p, alpha);
    Eigen::ArrayXd n = Eigen::ArrayXd::Constant(p, alpha);
    Eigen::ArrayXd e = Eigen::ArrayXd::Zero(p);
    const double ulp = std::numeric_limits<double>::epsilon();
    for (int k = 0; k < 1000; ++k) {
        Eigen::ArrayXd s = (eta * 4.0 / p) * (target - e);
        Eigen::ArrayXd predicted = m * n * (1.0 - s * s);
        m *= 1.0 + s;
        n *= 1.0 - s;
        e = m * m - n * n;
        for (int i = 0; i < p; ++i) {
            double prod = m(i) * n(i);
            double tol = 4.0 * ulp * std::max(std::abs(prod),
                                              std::abs(predicted(i)));
            CHECK(std::abs(prod - predicted(i)) <= tol);
            CHECK(prod > 0.0);
            CHECK(prod <= alpha * alpha * (1.0 + 4.0 * ulp));
        }
    }
}

TEST_CASE("sparse race: loss monotone under the auto rate") {
    for (uint64_t seed = 0; seed < 100; ++seed) {
        int p = 1 + int(seed % 8);
        VectorXd t = random_vector(p, 100 + seed, seed % 3 == 0 ? 50.0 : 2.0);
        double eta = auto_eta_e(t);
        double prev = t.squaredNorm();
        for (int T = 1; T <= 30; ++T) {
            VectorXd e = hp_grad(t, T, eta, 1e-2);
            double loss = (t - e).squaredNorm();
            CHECK(loss <= prev * (1.0 + 1e-12) + 1e-15);
            prev = loss;
        }
    }
}

TEST_CASE("sparse race: exact zeros stay below the floor") {
    VectorXd t(6);
    t << 8.0, 0.0, -3.0, 0.0, 0.0, 1.0;
    double alpha = 1e-2, eta = auto_eta_e(t);
    for (int T = 1; T <= 60; ++T) {
        VectorXd e = hp_grad(t, T, eta, alpha);
        for (int i : {1, 3, 4})
            CHECK(std::abs(e(i)) <= alpha * alpha + 1e-18);
    }
}

TEST_CASE("sparse race gradients match finite differences") {
    const double h = 1e-6;
    for (uint64_t seed = 0; seed < 50; ++seed) {
        int p = 2 + int(seed % 6);
        VectorXd t = random_vector(p, 400 + seed);
        VectorXd m = random_vector(p, 500 + seed).cwiseAbs().array() + 0.3;
        VectorXd n = random_vector(p, 600 + seed).cwiseAbs().array() + 0.3;
        VectorXd gm, gn;
        hp_grad_gradients(t, m, n, gm, gn);
        VectorXd fm(p), fn(p);
        for (int i = 0; i < p; ++i) {
            VectorXd mp = m, mm = m;
            mp(i) += h;
            mm(i) -= h;
            fm(i) = (hp_grad_loss(t, mp, n) - hp_grad_loss(t, mm, n)) / (2 * h);
            VectorXd np = n, nm = n;
            np(i) += h;
            nm(i) -= h;
            fn(i) = (hp_grad_loss(t, m, np) - hp_grad_loss(t, m, nm)) / (2 * h);
        }
        CHECK((gm - fm).norm() <= 1e-5 * (gm.norm() + 1e-9));
        CHECK((gn - fn).norm() <= 1e-5 * (gn.norm() + 1e-9));
    }
}

TEST_CASE("momentum fit: zero target gives zero coefficients") {
    MatrixXd L = random_matrix(6, 2, 41);
    VectorXd rc = hp_mom_grad(VectorXd::Zero(6), L, 0.9, 25, 0.05, 1e-2);
    CHECK(rc.isZero(0.0));
}

TEST_CASE("momentum fit: scalar single step matches the race recursion") {
    MatrixXd L(1, 1);
    L << 1.0;
    VectorXd t(1);
    t << 1.0;
    VectorXd rc = hp_mom_grad(t, L, 0.0, 1, 0.1, 0.1);
    CHECK(rc(0) == doctest::Approx(0.016).epsilon(1e-12));
}

TEST_CASE("momentum fit: mu = 0 reduces to the sparse race on scalars") {
    MatrixXd L(1, 1);
    L << 1.0;
    for (uint64_t seed = 0; seed < 10; ++seed) {
        VectorXd t = random_vector(1, 700 + seed, 3.0);
        double eta = auto_eta_e(t) / 2.0;
        for (int T : {1, 5, 17, 30}) {
            VectorXd a = hp_mom_grad(t, L, 0.0, T, eta, 1e-2);
            VectorXd b = hp_grad(t, T, eta, 1e-2);
            CHECK(a(0) == doctest::Approx(b(0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("momentum fit: loss blow-up raises a divergence error") {
    MatrixXd L(1, 1);
    L << 1.0;
    VectorXd t(1);
    t << 1e300;
    CHECK_THROWS_AS(hp_mom_grad(t, L, 0.9, 10, 0.1, 1e-2), divergence_error);
}

TEST_CASE("momentum fit: early stopping tracks the ridge closed form") {
    VectorXd y(3);
    y << 1.0, -2.0, 0.5;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        MatrixXd L = orthonormal_cols(20, 3, 800 + seed);
        VectorXd target = L * y;
        double eta = auto_eta_r(L, target);
        double M = (L.transpose() * target).cwiseAbs().maxCoeff();
        int T = hp_grad_budget(M, 20, 4.0 * eta / 20.0, 1e-2, 2000);
        VectorXd rc = hp_mom_grad(target, L, 0.9, T, eta, 1e-2);
        double lam = 2.0 / (double(T) * double(T));
        MatrixXd G = L.transpose() * L + lam * MatrixXd::Identity(3, 3);
        VectorXd oracle = G.ldlt().solve(L.transpose() * target);
        CHECK((rc - oracle).norm() <= 0.10 * oracle.norm());
    }
}

TEST_CASE("momentum fit gradients match finite differences") {
    const double h = 1e-6;
    for (uint64_t seed = 0; seed < 50; ++seed) {
        int p = 4 + int(seed % 5), r = 1 + int(seed % 3);
        MatrixXd L = random_matrix(p, r, 900 + seed);
        VectorXd t = random_vector(p, 950 + seed);
        VectorXd u = random_vector(r, 960 + seed).cwiseAbs().array() + 0.3;
        VectorXd v = random_vector(r, 970 + seed).cwiseAbs().array() + 0.3;
        VectorXd gu, gv;
        hp_mom_grad_gradients(t, L, u, v, gu, gv);
        VectorXd fu(r), fv(r);
        for (int i = 0; i < r; ++i) {
            VectorXd up = u, um = u;
            up(i) += h;
            um(i) -= h;
            fu(i) =
                (hp_mom_grad_loss(t, L, up, v) - hp_mom_grad_loss(t, L, um, v)) /
                (2 * h);
            VectorXd vp = v, vm = v;
            vp(i) += h;
            vm(i) -= h;
            fv(i) =
                (hp_mom_grad_loss(t, L, u, vp) - hp_mom_grad_loss(t, L, u, vm)) /
                (2 * h);
        }
        CHECK((gu - fu).norm() <= 1e-5 * (gu.norm() + 1e-9));
        CHECK((gv - fv).norm() <= 1e-5 * (gv.norm() + 1e-9));
    }
}

TEST_CASE("conditioned auto rate reduces to the plain rule on orthonormal L") {
    MatrixXd L = orthonormal_cols(12, 3, 1001);
    VectorXd t = random_vector(12, 1002, 2.0);
    double plain =
        12.0 / (16.0 * ((L.transpose() * t).cwiseAbs().maxCoeff() + 1.0));
    CHECK(auto_eta_r(L, t) == doctest::Approx(plain).epsilon(1e-9));
    SUBCASE("zero basis falls back to the dimension-only rate") {
        CHECK(auto_eta_r(MatrixXd::Zero(12, 3), t) == 12.0 / 16.0);
    }
}

TEST_CASE("ridge projection") {
    MatrixXd L = orthonormal_cols(10, 2, 1100);
    VectorXd t = random_vector(10, 1101);
    VectorXd r = ridge_projection(L, t);
    CHECK((r - L.transpose() * t).norm() <= 1e-9 * (t.norm() + 1.0));
    CHECK(ridge_projection(MatrixXd::Zero(10, 2), t).isZero(0.0));
}

TEST_CASE("basis update: zero coefficients leave the state alone") {
    VectorXd g = random_vector(5, 1200).cwiseAbs();
    MatrixXd V = random_matrix(5, 2, 1201);
    subspace_state s{g, V};
    subspace_state out =
        hp_group_grad(random_vector(5, 1202), VectorXd::Zero(2), 10, 0.3, s);
    CHECK(bitwise_equal(out.g, g));
    CHECK(bitwise_equal(out.V, V));
}

TEST_CASE("basis update: zero V pins g on the first step") {
    VectorXd g = VectorXd::Constant(4, 0.5);
    subspace_state s{g, MatrixXd::Zero(4, 2)};
    subspace_state out = hp_group_grad(random_vector(4, 1300),
                                       random_vector(2, 1301), 1, 0.2, s);
    CHECK(bitwise_equal(out.g, g));
    CHECK_FALSE(out.V.isZero(0.0));
}

TEST_CASE("basis update: two-pixel single-step oracle") {
    VectorXd target(2), rc(1);
    target << 1.0, 0.0;
    rc << 1.0;
    subspace_state s;
    s.g = Eigen::Vector2d(0.5, 0.5);
    s.V = MatrixXd::Zero(2, 1);
    CHECK(hp_group_loss(target, rc, s.g, s.V) == 0.5);
    subspace_state out = hp_group_grad(target, rc, 1, 0.5, s);
    CHECK(out.V(0, 0) == doctest::Approx(0.0625).epsilon(1e-15));
    CHECK(out.V(1, 0) == 0.0);
    CHECK(bitwise_equal(out.g, s.g));
    CHECK(hp_group_loss(target, rc, out.g, out.V) ==
          doctest::Approx(0.4844970703125).epsilon(1e-12));
}

TEST_CASE("basis update: band exit reports the iteration count") {
    VectorXd target = random_vector(6, 1400, 0.01);
    VectorXd rc = random_vector(2, 1401);
    VectorXd g = VectorXd::Constant(6, 0.1);
    MatrixXd V = MatrixXd::Zero(6, 2);
    // initial loss is already tiny: one step, then the band check fires
    int iters = hp_group_grad(target, rc, 100, 1e-3, g, V, 1e2, 1e4);
    CHECK(iters == 1);
}

TEST_CASE("basis update: auto step descends on random instances") {
    for (uint64_t seed = 0; seed < 100; ++seed) {
        int p = 4 + int(seed % 12), r = 1 + int(seed % 3);
        VectorXd g = random_vector(p, 1500 + seed).cwiseAbs().array() + 0.2;
        MatrixXd V = random_matrix(p, r, 1600 + seed, 0.5);
        VectorXd rc = random_vector(r, 1700 + seed);
        if (rc.norm() > 10.0) rc *= 10.0 / rc.norm();
        VectorXd target = random_vector(p, 1800 + seed, 2.0);
        if (target.norm() > 10.0) target *= 10.0 / target.norm();
        group_options opt;
        opt.auto_step = true;
        double prev = hp_group_loss(target, rc, g, V);
        for (int step = 0; step < 20; ++step) {
            hp_group_grad(target, rc, 1, 0.0, g, V, 1e-30, 1e30, opt);
            double loss = hp_group_loss(target, rc, g, V);
            CHECK(loss <= prev * (1.0 + 1e-12) + 1e-15);
            prev = loss;
        }
    }
}

TEST_CASE("basis update: non-finite loss raises a divergence error") {
    VectorXd target(2), rc(1);
    target << 1e300, 0.0;
    rc << 1e10;
    VectorXd g = VectorXd::Constant(2, 1e3);
    MatrixXd V = MatrixXd::Constant(2, 1, 1e3);
    const double no_band = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(
        hp_group_grad(target, rc, 50, 1e20, g, V, 0.0, no_band, group_options{}),
        divergence_error);
}

TEST_CASE("basis update gradients match finite differences") {
    const double h = 1e-6;
    for (uint64_t seed = 0; seed < 50; ++seed) {
        int p = 3 + int(seed % 6), r = 1 + int(seed % 3);
        VectorXd g = random_vector(p, 2000 + seed).cwiseAbs().array() + 0.3;
        MatrixXd V = random_matrix(p, r, 2100 + seed);
        VectorXd rc = random_vector(r, 2200 + seed);
        VectorXd target = random_vector(p, 2300 + seed);
        VectorXd gg;
        MatrixXd gV;
        hp_group_gradients(target, rc, g, V, gg, gV);
        // analytic gradients are of the per-dimension loss, i.e. loss/p
        auto f = [&](const VectorXd& gx, const MatrixXd& Vx) {
            return hp_group_loss(target, rc, gx, Vx) / double(p);
        };
        VectorXd fg(p);
        for (int i = 0; i < p; ++i) {
            VectorXd gp = g, gm = g;
            gp(i) += h;
            gm(i) -= h;
            fg(i) = (f(gp, V) - f(gm, V)) / (2 * h);
        }
        MatrixXd fV(p, r);
        for (int j = 0; j < r; ++j)
            for (int i = 0; i < p; ++i) {
                MatrixXd Vp = V, Vm = V;
                Vp(i, j) += h;
                Vm(i, j) -= h;
                fV(i, j) = (f(g, Vp) - f(g, Vm)) / (2 * h);
            }
        CHECK((gg - fg).norm() <= 1e-5 * (gg.norm() + 1e-9));
        CHECK((gV - fV).norm() <= 1e-5 * (gV.norm() + 1e-9));
    }
}

TEST_CASE("solvers are deterministic") {
    VectorXd t = random_vector(9, 2500, 4.0);
    CHECK(bitwise_equal(hp_grad(t, 40, auto_eta_e(t), 1e-2),
                        hp_grad(t, 40, auto_eta_e(t), 1e-2)));
    MatrixXd L = random_matrix(9, 3, 2501);
    CHECK(bitwise_equal(hp_mom_grad(t, L, 0.9, 40, auto_eta_r(L, t), 1e-2),
                        hp_mom_grad(t, L, 0.9, 40, auto_eta_r(L, t), 1e-2)));
    VectorXd g1 = random_vector(9, 2502).cwiseAbs(), g2 = g1;
    MatrixXd V1 = random_matrix(9, 3, 2503), V2 = V1;
    VectorXd rc = random_vector(3, 2504);
    group_options opt;
    opt.auto_step = true;
    hp_group_grad(t, rc, 20, 0.0, g1, V1, 1e-2, 1e2, opt);
    hp_group_grad(t, rc, 20, 0.0, g2, V2, 1e-2, 1e2, opt);
    CHECK(bitwise_equal(g1, g2));
    CHECK(bitwise_equal(V1, V2));
}

TEST_CASE("median and robust scale") {
    VectorXd v5(5);
    v5 << 3.0, 1.0, 4.0, 1.0, 5.0;
    CHECK(median(v5) == 3.0);
    VectorXd v4(4);
    v4 << 4.0, 1.0, 2.0, 3.0;
    CHECK(median(v4) == 2.5);
    VectorXd v1(1);
    v1 << 9.0;
    CHECK(median(v1) == 9.0);
    CHECK(median(VectorXd()) == 0.0);

    VectorXd w(5);
    w << 1.0, 2.0, 3.0, 4.0, 100.0;
    CHECK(mad_sigma(w, median(w)) == doctest::Approx(1.4826).epsilon(1e-12));
}

TEST_CASE("robust_clean imputes gross outliers with the median") {
    VectorXd z(5);
    z << 1.0, 2.0, 3.0, 4.0, 1000.0;
    VectorXd c = robust_clean(z);
    CHECK(c(4) == 3.0);
    for (int i = 0; i < 4; ++i) CHECK(c(i) == z(i));
}

TEST_CASE("density separates spread from localized content") {
    CHECK(density(VectorXd::Constant(64, 0.7)) == doctest::Approx(1.0));
    VectorXd onehot = VectorXd::Zero(64);
    onehot(5) = 3.0;
    CHECK(density(onehot) == doctest::Approx(1.0 / 64.0));
    CHECK(density(VectorXd::Zero(8)) == 0.0);
}
