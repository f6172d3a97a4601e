#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "flexsat/quat.h"

using namespace flexsat;
using Eigen::Vector3d;
using Eigen::Vector4d;

TEST_CASE("skew matrix reproduces cross product") {
    const Vector3d a(0.3, -1.2, 2.0), b(-0.7, 0.4, 1.1);
    CHECK((skew(a) * b - a.cross(b)).norm() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK((skew(a) + skew(a).transpose()).norm() == 0.0);
}

TEST_CASE("error against itself is the identity rotation") {
    const Quaternion q = normalize(Quaternion{Vector3d(0.3, -0.2, -0.3), 0.8832});
    const Quaternion e = quat_error(q, q);
    CHECK(e.v.norm() < 1e-15);
    CHECK(e.w == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("error against the identity target returns the attitude itself") {
    const Quaternion q = normalize(Quaternion{Vector3d(0.1, 0.2, -0.3), 0.9});
    const Quaternion qd{Vector3d::Zero(), 1.0};
    const Quaternion e = quat_error(q, qd);
    CHECK((e.v - q.v).norm() < 1e-15);
    CHECK(e.w == doctest::Approx(q.w).epsilon(1e-15));
}

// Frozen high-precision fixture computed with 50-digit arithmetic from the
// component formulas q_ev = qd4*qv - qd_v x qv - q4*qd_v, qe4 = qd_v.qv + q4*qd4.
TEST_CASE("frozen error fixture") {
    const Quaternion q = normalize(Quaternion{Vector3d(0.3, -0.2, -0.3), 0.8832});
    const Quaternion qd = normalize(Quaternion{Vector3d(-0.24, -0.57, -0.18), 0.77});

    CHECK(q.v(0) == doctest::Approx(0.29999366420071741).epsilon(1e-15));
    CHECK(q.v(1) == doctest::Approx(-0.19999577613381161).epsilon(1e-15));
    CHECK(q.v(2) == doctest::Approx(-0.29999366420071741).epsilon(1e-15));
    CHECK(q.w == doctest::Approx(0.88318134740691207).epsilon(1e-15));
    CHECK(qd.v(0) == doctest::Approx(-0.23906944024981817).epsilon(1e-15));
    CHECK(qd.v(1) == doctest::Approx(-0.56778992059331816).epsilon(1e-15));
    CHECK(qd.v(2) == doctest::Approx(-0.17930208018736363).epsilon(1e-15));
    CHECK(qd.w == doctest::Approx(0.76701445413483330).epsilon(1e-15));

    const Quaternion e = quat_error(q, qd);
    CHECK(e.v(0) == doctest::Approx(0.30676742686892724).epsilon(1e-14));
    CHECK(e.v(1) == doctest::Approx(0.47357062146629801).epsilon(1e-14));
    CHECK(e.v(2) == doctest::Approx(-0.28988948084574593).epsilon(1e-14));
    CHECK(e.w == doctest::Approx(0.77303861558865581).epsilon(1e-14));
    // error quaternion of two unit quaternions is itself unit
    CHECK(std::abs(e.v.squaredNorm() + e.w * e.w - 1.0) < 1e-14);
}

TEST_CASE("error kinematics preserve the unit norm differentially") {
    const Quaternion e = normalize(Quaternion{Vector3d(0.2, -0.1, 0.4), 0.88});
    const Vector3d w(0.5, -1.0, 0.25);
    const Vector4d der = error_kinematics(e, w);
    // d/dt(|qv|^2 + q4^2) = 2 qv.qv_dot + 2 q4 q4_dot = 0
    const double d = e.v.dot(der.head<3>()) + e.w * der(3);
    CHECK(std::abs(d) < 1e-15);
    const Vector3d expect =
        0.5 * (e.w * Eigen::Matrix3d::Identity() + skew(e.v)) * w;
    CHECK((der.head<3>() - expect).norm() < 1e-15);
    CHECK(der(3) == doctest::Approx(-0.5 * e.v.dot(w)).epsilon(1e-15));
}

TEST_CASE("normalize rejects degenerate input and is idempotent") {
    CHECK_THROWS_AS(normalize(Quaternion{Vector3d::Zero(), 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(normalize(Quaternion{Vector3d::Zero(), std::nan("")}),
                    std::invalid_argument);
    const Quaternion q = normalize(Quaternion{Vector3d(1, 2, 3), 4.0});
    const Quaternion q2 = normalize(q);
    CHECK(q2.v(0) == q.v(0));
    CHECK(q2.v(1) == q.v(1));
    CHECK(q2.v(2) == q.v(2));
    CHECK(q2.w == q.w);
}

TEST_CASE("quat_error enforces unit-norm inputs") {
    const Quaternion q{Vector3d(0.3, -0.2, -0.3), 0.8832};  // |q| != 1
    const Quaternion qd{Vector3d::Zero(), 1.0};
    CHECK_THROWS_AS(quat_error(q, qd), std::invalid_argument);
    CHECK_THROWS_AS(quat_error(qd, q), std::invalid_argument);
}
