#include "flexsat/example.h"

#include <cmath>

namespace flexsat {

Scenario example_scenario() {
    Scenario sc;
    sc.name = "example";

    // Inertia J = [[mu 3 0],[3 100 0],[0 0 10]] with J11 = mu uncertain.
    sc.inertia.Lbar1 = Eigen::MatrixXd::Zero(6, 1);
    sc.inertia.Lbar1(0, 0) = 1.0;
    sc.inertia.Lbar0 = (Vech6() << 0.0, 100.0, 10.0, 0.0, 0.0, 3.0).finished();
    sc.mu_true = Eigen::VectorXd::Constant(1, 20.0);

    sc.delta.resize(3, 4);
    sc.delta << 1.3523, 1.1519, 2.2167, 1.2364,
                1.2784, 1.0176, 1.5891, -1.6537,
                2.1530, -1.2724, -0.8324, 0.2251;
    sc.C = Eigen::Vector4d(0.1229, 0.2195, 0.2646, 0.1145).asDiagonal();
    sc.K = Eigen::Vector4d(1.2041, 1.6284, 2.7351, 5.2409).asDiagonal();

    sc.disturbance.axes[0].tones = {{1.0, 1.0, 0.0}};
    sc.disturbance.axes[1].tones = {{2.0, 0.8, 0.0}};
    sc.disturbance.axes[2].tones = {{6.0, 0.2, 0.0}};  // frequency treated as unknown

    sc.design.unknown = {{2, 0}};
    sc.design.basis.n_sigma = 1;
    sc.design.basis.exponents = {{1}};
    sc.design.nominal_sigma = Eigen::VectorXd::Constant(1, 1.0);
    sc.design.assumed_sigma = Eigen::VectorXd::Constant(1, 0.2);
    sc.design.assumed_mu = Eigen::VectorXd::Constant(1, 20.0);
    sc.design.grid_min = Eigen::VectorXd::Constant(1, 0.0);
    sc.design.grid_max = Eigen::VectorXd::Constant(1, 1.5);
    sc.design.grid_points = 13;

    sc.gains.k1 = 10.0;
    sc.gains.k2 = 50.0;
    sc.gains.k = 10.0;
    sc.gains.adaptation_enabled = false;  // estimate pinned until 400 s

    sc.q0.v = Eigen::Vector3d(0.3, -0.2, -0.3);
    sc.q0.w = 0.8832;
    sc.q_d.v = Eigen::Vector3d(-0.24, -0.57, -0.18);
    sc.q_d.w = 0.77;
    sc.omega0.setZero();
    sc.eta0 = Eigen::VectorXd::Zero(4);
    sc.eta_dot0 = Eigen::VectorXd::Zero(4);

    sc.t_final = 800.0;
    sc.dt = 1e-3;
    sc.decimate = 100;

    Event jump;
    jump.time = 200.0;
    {
        EventChange freq;
        freq.kind = EventChange::Kind::frequency;
        freq.axis = 2;
        freq.tone = 0;
        freq.value = 1.0;
        EventChange inertia;
        inertia.kind = EventChange::Kind::inertia;
        inertia.mu = Eigen::VectorXd::Constant(1, 22.0);
        jump.changes = {freq, inertia};
    }
    Event adapt_on;
    adapt_on.time = 400.0;
    {
        EventChange ch;
        ch.kind = EventChange::Kind::adaptation;
        ch.enabled = true;
        adapt_on.changes = {ch};
    }
    Event revert;
    revert.time = 600.0;
    {
        EventChange freq;
        freq.kind = EventChange::Kind::frequency;
        freq.axis = 2;
        freq.tone = 0;
        freq.value = 0.2;
        EventChange inertia;
        inertia.kind = EventChange::Kind::inertia;
        inertia.mu = Eigen::VectorXd::Constant(1, 20.0);
        revert.changes = {freq, inertia};
    }
    sc.events = {jump, adapt_on, revert};
    return sc;
}

Scenario gain_demo_scenario() {
    Scenario sc;
    sc.name = "gain-demo";

    // One lightly coupled mode keeps the conservative cross-term bounds small
    // enough for moderate k2 to clear the sufficient conditions.
    sc.inertia.Lbar1 = Eigen::MatrixXd::Zero(6, 1);
    sc.inertia.Lbar1(0, 0) = 1.0;
    sc.inertia.Lbar0 = (Vech6() << 0.0, 2.0, 3.0, 0.0, 0.0, 0.0).finished();
    sc.mu_true = Eigen::VectorXd::Constant(1, 2.5);

    sc.delta.resize(3, 1);
    sc.delta << 0.05, 0.05, 0.05;
    sc.C = Eigen::MatrixXd::Constant(1, 1, 3.0);
    sc.K = Eigen::MatrixXd::Constant(1, 1, 2.0);

    sc.disturbance.axes[0].tones = {{0.1, 1.0, 0.0}};
    sc.disturbance.axes[1].tones = {{0.1, 1.0, 0.0}};
    sc.disturbance.axes[2].tones = {{0.2, 0.5, 0.0}};

    sc.design.unknown = {{2, 0}};
    sc.design.basis.n_sigma = 1;
    sc.design.basis.exponents = {{1}};
    sc.design.nominal_sigma = Eigen::VectorXd::Constant(1, 0.5);
    sc.design.grid_min = Eigen::VectorXd::Constant(1, 0.0);
    sc.design.grid_max = Eigen::VectorXd::Constant(1, 1.5);
    sc.design.grid_points = 13;

    sc.gains.k1 = 5.0;
    sc.gains.k2 = 60.0;
    sc.gains.k = 5.0;
    sc.gains.adaptation_enabled = true;

    sc.q0.v = Eigen::Vector3d(0.10, -0.05, 0.08);
    sc.q0.w = std::sqrt(1.0 - sc.q0.v.squaredNorm());
    sc.q_d.v.setZero();
    sc.q_d.w = 1.0;
    sc.omega0.setZero();
    sc.eta0 = Eigen::VectorXd::Constant(1, 0.05);
    sc.eta_dot0 = Eigen::VectorXd::Zero(1);

    sc.t_final = 40.0;
    sc.dt = 1e-3;
    sc.decimate = 10;
    sc.analysis.enabled = true;
    sc.analysis.optimize = true;
    return sc;
}

}  // namespace flexsat
