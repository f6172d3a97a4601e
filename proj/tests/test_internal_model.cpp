#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "flexsat/example.h"
#include "flexsat/internal_model.h"

using namespace flexsat;
using Eigen::MatrixXd;
using Eigen::RowVector2d;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

InternalModelDesign example_design() {
    const Scenario sc = example_scenario();
    return synthesize_design(sc.disturbance, sc.design, sc.inertia.n_mu());
}

}  // namespace

TEST_CASE("observer pair defaults") {
    const MNPair one = choose_MN(1);
    CHECK(one.M(0, 0) == doctest::Approx(-2.0));
    CHECK(one.N(0) == 1.0);

    // r = 2: characteristic lambda^2 + 2 lambda + 3 (poles -1 +- i sqrt 2)
    const MNPair two = choose_MN(2);
    MatrixXd expect(2, 2);
    expect << 0, 1, -3, -2;
    CHECK((two.M - expect).norm() < 1e-15);
    CHECK(two.N(0) == 0.0);
    CHECK(two.N(1) == 1.0);

    // r = 3 pads with a real pole at -2: (l^2+2l+3)(l+2) = l^3+4l^2+7l+6
    const MNPair three = choose_MN(3);
    CHECK(three.M(2, 0) == doctest::Approx(-6.0));
    CHECK(three.M(2, 1) == doctest::Approx(-7.0));
    CHECK(three.M(2, 2) == doctest::Approx(-4.0));

    // all defaults are Hurwitz
    for (const MNPair& mn : {one, two, three}) {
        const Eigen::VectorXcd ev = mn.M.eigenvalues();
        for (Eigen::Index i = 0; i < ev.size(); ++i) CHECK(ev(i).real() < 0.0);
    }
}

TEST_CASE("observer pair rejects bad custom poles") {
    using cd = std::complex<double>;
    CHECK_THROWS_AS(choose_MN(2, {cd(-1, 1), cd(-1, 2)}), std::invalid_argument);
    CHECK_THROWS_AS(choose_MN(1, {cd(0.5, 0)}), std::invalid_argument);
    CHECK_THROWS_AS(choose_MN(2, {cd(-1, 0)}), std::invalid_argument);
    const MNPair ok = choose_MN(2, {cd(-2, 1), cd(-2, -1)});
    // (l+2-i)(l+2+i) = l^2 + 4 l + 5
    CHECK(ok.M(1, 0) == doctest::Approx(-5.0));
    CHECK(ok.M(1, 1) == doctest::Approx(-4.0));
}

TEST_CASE("Sylvester solve, scalar bias generator") {
    // T*0 - (-2)T = 1*1  =>  T = 1/2
    const MatrixXd Phi = MatrixXd::Zero(1, 1);
    const MNPair mn = choose_MN(1);
    const MatrixXd Psi = MatrixXd::Ones(1, 1);
    const MatrixXd T = solve_sylvester(Phi, mn.M, mn.N, Psi);
    CHECK(T(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("Sylvester solve, single tone closed form") {
    // For Phi = [[0,1],[-b^2,0]], M = [[0,1],[-3,-2]], N = [0,1]^T,
    // Psi = [1,0]; at b=1 the solution is T = (1/8) [[2,-2],[2,2]].
    const AxisExosystem ax = companion_axis({1.0}, false);
    const MNPair mn = choose_MN(2);
    const MatrixXd T =
        solve_sylvester(ax.Phi, mn.M, mn.N, MatrixXd(ax.Psi));
    MatrixXd expect(2, 2);
    expect << 0.25, -0.25, 0.25, 0.25;
    CHECK((T - expect).norm() < 1e-13);
    CHECK((T * ax.Phi - mn.M * T - mn.N * ax.Psi).norm() < 1e-12);
}

TEST_CASE("Sylvester solve requires disjoint spectra") {
    // Phi and M sharing an eigenvalue makes the vectorized system singular.
    MatrixXd Phi(1, 1), M(1, 1), N(1, 1), Psi(1, 1);
    Phi << -2.0;
    M << -2.0;
    N << 1.0;
    Psi << 1.0;
    CHECK_THROWS_AS(solve_sylvester(Phi, M, N, Psi), std::runtime_error);
}

TEST_CASE("frequency response row of the inverse transform") {
    // Psi T^{-1}(b) = [3-b^2, 2] for the default observer pair.
    for (double b : {0.2, 0.8, 1.0, 1.3}) {
        const AxisExosystem ax = companion_axis({b}, false);
        const MNPair mn = choose_MN(2);
        const MatrixXd T =
            solve_sylvester(ax.Phi, mn.M, mn.N, MatrixXd(ax.Psi));
        const Eigen::RowVectorXd row =
            MatrixXd(ax.Psi) * T.inverse();
        CHECK(row(0) == doctest::Approx(3.0 - b * b).epsilon(1e-11));
        CHECK(row(1) == doctest::Approx(2.0).epsilon(1e-11));
    }
}

TEST_CASE("basis eval and validation") {
    OmegaBasis basis;
    basis.n_sigma = 2;
    basis.exponents = {{1, 0}, {0, 2}};
    CHECK_NOTHROW(basis.validate());
    const VectorXd s = (Eigen::Vector2d() << 0.5, 1.5).finished();
    const VectorXd om = basis.eval(s);
    CHECK(om(0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(om(1) == doctest::Approx(1.5 * 1.5 * 1.5 * 1.5).epsilon(1e-15));

    OmegaBasis bad;
    bad.n_sigma = 1;
    bad.exponents = {{0}};  // constant duplicates the E0 slot
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("synthesized design for the built-in demonstration scenario") {
    const InternalModelDesign d = example_design();
    CHECK(d.r == 6);
    CHECK(d.n_mu == 1);
    CHECK(d.ell() == 1);
    CHECK(d.n_R() == 3);
    CHECK(d.sylvester_residual <= 1e-10);
    CHECK(d.fit_residual <= 1e-8);

    // exact rows for the two known axes, affine row for the unknown one
    CHECK((d.E0.block(0, 0, 1, 2) - RowVector2d(2.0, 2.0)).norm() < 1e-9);
    CHECK((d.E0.block(1, 2, 1, 2) - RowVector2d(2.36, 2.0)).norm() < 1e-9);
    CHECK((d.E0.block(2, 4, 1, 2) - RowVector2d(3.0, 2.0)).norm() < 1e-8);
    REQUIRE(d.E_blocks.size() == 1);
    CHECK((d.E_blocks[0].block(2, 4, 1, 2) - RowVector2d(-1.0, 0.0)).norm() < 1e-8);
    // off-block entries are exactly zero
    CHECK(d.E_blocks[0].topRows(2).norm() == 0.0);
    CHECK(d.E_blocks[0].block(2, 0, 1, 4).norm() == 0.0);

    // fit agrees with the exact per-axis solve away from the grid
    for (double s : {0.05, 0.337, 0.91, 1.02, 1.44}) {
        const VectorXd sig = VectorXd::Constant(1, s);
        CHECK((d.PsiTinv_fit(sig) - d.PsiTinv_at(sig)).norm() < 1e-8);
    }
}

TEST_CASE("uncertainty vector layout") {
    const InternalModelDesign d = example_design();
    const VectorXd R0 =
        true_R(VectorXd::Constant(1, 0.2), VectorXd::Constant(1, 20.0), d);
    CHECK(R0(0) == doctest::Approx(20.0).epsilon(1e-14));
    CHECK(R0(1) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(R0(2) == doctest::Approx(0.04).epsilon(1e-12));

    const VectorXd R1 =
        true_R(VectorXd::Constant(1, 1.0), VectorXd::Constant(1, 22.0), d);
    CHECK(R1(0) == doctest::Approx(22.0));
    CHECK(R1(1) == doctest::Approx(22.0));
    CHECK(R1(2) == doctest::Approx(1.0));
}

TEST_CASE("regressor blocks expose only the expected states") {
    const Scenario sc = example_scenario();
    const InternalModelDesign d = example_design();

    // with omega = 0 the regressor depends on zeta and v alone
    MatrixXd zeta = MatrixXd::Zero(6, 1);
    zeta(4, 0) = 0.7;
    zeta(5, 0) = -0.4;
    VectorXd v = VectorXd::Zero(6);
    v(4) = 1.3;
    v(5) = 0.2;
    const MatrixXd rho =
        regressor_rho(Vector3d::Zero(), zeta, v, d, sc.inertia);
    REQUIRE(rho.rows() == 3);
    REQUIRE(rho.cols() == 3);

    // rho2 = E o zeta touches only the third axis block: [0, 0, -zeta5]
    CHECK(rho(0, 1) == doctest::Approx(0.0));
    CHECK(rho(1, 1) == doctest::Approx(0.0));
    CHECK(rho(2, 1) == doctest::Approx(-zeta(4, 0)).epsilon(1e-9));
    // rho3 = E o (-v) -> [0, 0, v5]
    CHECK(rho(0, 2) == doctest::Approx(0.0));
    CHECK(rho(1, 2) == doctest::Approx(0.0));
    CHECK(rho(2, 2) == doctest::Approx(v(4)).epsilon(1e-9));
    // rho1 = E0 zeta at omega = 0
    CHECK((rho.col(0) - d.E0 * zeta.col(0)).norm() < 1e-12);
}

// The factorization must reproduce the mu/sigma-dependent forcing exactly:
// rho R + E0 (N L0 - v) = F1 mu + PsiTinv(sigma) (zeta mu + N L1 mu + N L0 - v).
TEST_CASE("regressor factorization identity on random states") {
    const Scenario sc = example_scenario();
    const InternalModelDesign d = example_design();

    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Vector3d w(u(rng), u(rng), u(rng));
        MatrixXd zeta(6, 1);
        VectorXd v(6);
        for (int i = 0; i < 6; ++i) {
            zeta(i, 0) = 2.0 * u(rng);
            v(i) = 2.0 * u(rng);
        }
        const VectorXd sigma = VectorXd::Constant(1, 0.75 * (u(rng) + 1.0));
        const VectorXd mu = VectorXd::Constant(1, 15.0 + 10.0 * u(rng));

        const MatrixXd rho = regressor_rho(w, zeta, v, d, sc.inertia);
        const VectorXd R = true_R(sigma, mu, d);

        MatrixXd L1, F1;
        Vector3d L0, F0;
        split_L(w, sc.inertia, L1, L0);
        F_terms(w, sc.inertia, F1, F0);
        const MatrixXd PT = d.PsiTinv_at(sigma);
        const Vector3d lhs = rho * R + d.E0 * (d.N * L0 - v);
        const Vector3d rhs =
            F1 * mu + PT * (zeta * mu + d.N * (L1 * mu) + d.N * L0 - v);
        worst = std::max(worst, (lhs - rhs).norm());
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("parameterization with two independent unknown frequencies") {
    DisturbanceModel m;
    m.axes[0].tones = {{1.0, 1.0, 0.0}};
    m.axes[1].tones = {{2.0, 0.9, 0.0}};
    m.axes[2].tones = {{6.0, 0.3, 0.0}};

    DesignConfig cfg;
    cfg.unknown = {{1, 0}, {2, 0}};
    cfg.basis.n_sigma = 2;
    cfg.basis.exponents = {{1, 0}, {0, 1}};
    cfg.nominal_sigma = (Eigen::Vector2d() << 0.9, 0.3).finished();
    cfg.assumed_sigma = cfg.nominal_sigma;
    cfg.assumed_mu = VectorXd::Constant(1, 20.0);
    cfg.grid_min = Eigen::Vector2d::Zero();
    cfg.grid_max = (Eigen::Vector2d() << 1.5, 1.5).finished();

    const InternalModelDesign d = synthesize_design(m, cfg, 1);
    CHECK(d.ell() == 2);
    CHECK(d.fit_residual <= 1e-8);

    // row 2 depends only on sigma_1, row 3 only on sigma_2
    CHECK((d.E0.block(1, 2, 1, 2) - RowVector2d(3.0, 2.0)).norm() < 1e-8);
    CHECK((d.E0.block(2, 4, 1, 2) - RowVector2d(3.0, 2.0)).norm() < 1e-8);
    CHECK((d.E_blocks[0].block(1, 2, 1, 2) - RowVector2d(-1.0, 0.0)).norm() < 1e-8);
    CHECK(d.E_blocks[0].block(2, 4, 1, 2).norm() < 1e-8);
    CHECK((d.E_blocks[1].block(2, 4, 1, 2) - RowVector2d(-1.0, 0.0)).norm() < 1e-8);
    CHECK(d.E_blocks[1].block(1, 2, 1, 2).norm() < 1e-8);

    const VectorXd sig = (Eigen::Vector2d() << 0.77, 1.21).finished();
    CHECK((d.PsiTinv_fit(sig) - d.PsiTinv_at(sig)).norm() < 1e-8);
}

TEST_CASE("state equations at the origin") {
    const Scenario sc = example_scenario();
    const InternalModelDesign d = example_design();
    VectorXd v(6);
    v << 1, -2, 3, -4, 5, -6;
    const VectorXd vdot =
        internal_model_rhs(v, Vector3d::Zero(), Vector3d::Zero(), d, sc.inertia);
    CHECK((vdot - d.M * v).norm() < 1e-13);

    MatrixXd zeta(6, 1);
    zeta << 0.3, -0.1, 0.9, 0.4, -0.7, 0.2;
    const MatrixXd zdot =
        compensator_rhs(zeta, Vector3d::Zero(), d, sc.inertia);
    CHECK((zdot - d.M * zeta).norm() < 1e-13);
}

TEST_CASE("block product contraction rule") {
    // (E o B)(Omega kron c) = sum_j Omega_j E^j B c
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto rnd = [&](Eigen::Index rows, Eigen::Index cols) {
        return MatrixXd::NullaryExpr(rows, cols, [&](Eigen::Index) { return u(rng); });
    };
    std::vector<MatrixXd> blocks{rnd(3, 6), rnd(3, 6)};
    const MatrixXd B = rnd(6, 2);
    const VectorXd c = rnd(2, 1);
    const Eigen::Vector2d Om(0.7, -1.3);

    Eigen::VectorXd kron(4);
    kron << Om(0) * c, Om(1) * c;
    const Vector3d lhs = block_row_product(blocks, B) * kron;
    const Vector3d rhs = Om(0) * blocks[0] * B * c + Om(1) * blocks[1] * B * c;
    CHECK((lhs - rhs).norm() < 1e-13);
}
