#pragma once

#include <Eigen/Dense>

#include "flexsat/quat.h"

namespace flexsat {

// Dimensions of the packed closed-loop state vector:
// [q_e(4) | omega_e(3) | eta(n) | eta_dot(n) | v(r) | zeta(r*n_mu) | R_hat(n_R) | z(2n)].
struct StateDims {
    int n = 0;
    int r = 0;
    int n_mu = 0;
    int n_R = 0;

    int total() const { return 4 + 3 + 2 * n + r + r * n_mu + n_R + 2 * n; }
};

// Closed-loop state in error coordinates. The target rate is zero, so
// omega_e equals the body rate; q_e is the attitude error quaternion and the
// absolute attitude never needs to be carried.
struct ClosedLoopState {
    Quaternion q_e;
    Eigen::Vector3d omega_e;
    Eigen::VectorXd eta;
    Eigen::VectorXd eta_dot;
    Eigen::VectorXd v;       // internal model, r
    Eigen::MatrixXd zeta;    // compensator, r x n_mu
    Eigen::VectorXd R_hat;   // parameter estimate, n_R
    Eigen::VectorXd z;       // auxiliary modal observer, 2n
};

Eigen::VectorXd pack_state(const ClosedLoopState& s);
ClosedLoopState unpack_state(const Eigen::VectorXd& x, const StateDims& dims);

struct TelemetryRecord {
    double t = 0.0;
    Eigen::Vector4d q_e;
    Eigen::Vector3d omega_e;
    Eigen::VectorXd eta;
    Eigen::VectorXd eta_dot;
    Eigen::VectorXd v;
    Eigen::MatrixXd zeta;
    Eigen::VectorXd R_hat;
    Eigen::Vector3d u;
    Eigen::Vector3d d;
    Eigen::VectorXd z;
    bool has_lyapunov = false;
    double V = 0.0, V1 = 0.0, V2 = 0.0, V3 = 0.0;
};

}  // namespace flexsat
