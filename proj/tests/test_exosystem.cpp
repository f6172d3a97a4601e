#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "flexsat/exosystem.h"

using namespace flexsat;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("companion axis for a single tone") {
    const AxisExosystem ax = companion_axis({0.8}, false);
    CHECK(ax.r == 2);
    MatrixXd expect(2, 2);
    expect << 0, 1, -0.64, 0;
    CHECK((ax.Phi - expect).norm() < 1e-15);
    CHECK(ax.Psi(0) == 1.0);
    CHECK(ax.Psi(1) == 0.0);
}

TEST_CASE("companion axis for bias plus two tones") {
    // minimal polynomial lambda (lambda^2+1)(lambda^2+4)
    //   = lambda^5 + 5 lambda^3 + 4 lambda
    const AxisExosystem ax = companion_axis({1.0, 2.0}, true);
    CHECK(ax.r == 5);
    VectorXd last = ax.Phi.row(4).transpose();
    VectorXd expect(5);
    expect << 0, -4, 0, -5, 0;  // -(coeffs of 1, l, l^2, l^3, l^4)
    CHECK((last - expect).norm() < 1e-12);
    // superdiagonal ones, zeros elsewhere above the last row
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 5; ++j)
            CHECK(ax.Phi(i, j) == (j == i + 1 ? 1.0 : 0.0));
}

TEST_CASE("full exosystem dimensions for the three-axis model") {
    DisturbanceModel m;
    m.axes[0].tones = {{1.0, 1.0, 0.0}};
    m.axes[1].tones = {{2.0, 0.8, 0.0}};
    m.axes[2].tones = {{6.0, 0.2, 0.0}};
    const ExosystemDesign d = build_exosystem(m);
    CHECK(d.r_total == 6);
    CHECK(d.axis[0].r == 2);
    CHECK(d.Phi().rows() == 6);
    CHECK(d.Psi().rows() == 3);
    CHECK(d.Psi().cols() == 6);
    // block structure: Psi row i touches only the axis-i columns
    CHECK(d.Psi()(0, 0) == 1.0);
    CHECK(d.Psi()(1, 2) == 1.0);
    CHECK(d.Psi()(2, 4) == 1.0);
    CHECK(d.Psi().cwiseAbs().sum() == 3.0);
}

TEST_CASE("build_exosystem rejects what the generator cannot represent") {
    DisturbanceModel m;
    m.axes[0].tones = {{1.0, 0.5, 0.0}, {1.0, 0.5, 1.0}};
    CHECK_THROWS_AS(build_exosystem(m), std::invalid_argument);
}

// The analytic generator state must satisfy its own ODE and output map:
// rho_dot = Phi rho (finite-difference check) and Psi rho = d(t).
TEST_CASE("analytic state solves the generator dynamics") {
    DisturbanceModel m;
    m.axes[0].bias = 0.4;
    m.axes[0].tones = {{1.5, 1.1, 0.3}};
    m.axes[1].tones = {{2.0, 0.8, -0.2}};
    m.axes[2].tones = {{6.0, 0.2, 0.9}, {0.5, 2.3, 0.0}};
    const ExosystemDesign d = build_exosystem(m);

    for (double t : {0.0, 0.37, 2.9, 11.4}) {
        const VectorXd rho = exosystem_state(m, t);
        CHECK(rho.size() == d.r_total);
        CHECK((d.Psi() * rho - disturbance_eval(m, t)).norm() < 1e-12);

        const double h = 1e-6;
        const VectorXd fd =
            (exosystem_state(m, t + h) - exosystem_state(m, t - h)) / (2 * h);
        CHECK((fd - d.Phi() * rho).norm() < 1e-6);
    }
}

TEST_CASE("derivative stacking uses the phase-shift rule") {
    // d(t) = A sin(bt + l): k-th derivative A b^k sin(bt + l + k pi/2)
    DisturbanceModel m;
    m.axes[0].bias = 1.0;
    m.axes[1].bias = 1.0;
    m.axes[2].tones = {{6.0, 0.2, 0.4}};
    const double t = 3.0;
    const VectorXd rho = exosystem_state(m, t);
    CHECK(rho.size() == 4);
    CHECK(rho(2) == doctest::Approx(6.0 * std::sin(0.2 * t + 0.4)).epsilon(1e-15));
    CHECK(rho(3) == doctest::Approx(6.0 * 0.2 * std::cos(0.2 * t + 0.4)).epsilon(1e-14));
}

TEST_CASE("an axis with neither bias nor tones has no generator") {
    DisturbanceModel m;
    m.axes[2].tones = {{6.0, 0.2, 0.0}};
    CHECK_THROWS_AS(build_exosystem(m), std::invalid_argument);
}
