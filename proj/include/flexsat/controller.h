#pragma once

#include <Eigen/Dense>

#include "flexsat/internal_model.h"

namespace flexsat {

struct Gains {
    double k1 = 0.0;
    double k2 = 0.0;
    double k = 0.0;  // adaptation rate
    bool adaptation_enabled = true;

    void validate() const;  // k1, k2, k strictly positive
};

// Plant data the controller is allowed to see: coupling, modal damping and
// the known inertia split. Deliberately excludes mu_true, the disturbance
// model and the modal state.
struct KnownPlant {
    Eigen::MatrixXd delta;  // 3 x n
    Eigen::MatrixXd C;      // n x n
    InertiaBasis inertia;
};

// Parameter update R_hat' = k rho^T omega_e; zero while adaptation is off.
Eigen::VectorXd adaptive_law(const Eigen::MatrixXd& rho, const Eigen::Vector3d& omega_e,
                             const Gains& g);

// Stabilizing part: u_check = -k1 q_ev - k2 omega_e - rho R_hat.
Eigen::Vector3d virtual_control(const Eigen::Vector3d& q_ev, const Eigen::Vector3d& omega_e,
                                const Eigen::MatrixXd& rho, const Eigen::VectorXd& R_hat,
                                const Gains& g);

// Full commanded torque:
//   u = u_check - E0 N L0(w) + delta C delta^T w + E0 v - F0(w)
// Uses only measured signals, the frozen design and the known plant split.
Eigen::Vector3d control_torque(const Eigen::Vector3d& q_ev, const Eigen::Vector3d& omega_e,
                               const Eigen::VectorXd& v, const Eigen::MatrixXd& zeta,
                               const Eigen::VectorXd& R_hat, const InternalModelDesign& d,
                               const KnownPlant& kp, const Gains& g);

// Same torque with a caller-computed regressor (must equal
// regressor_rho(omega_e, zeta, v, ...)); lets the simulator share one rho
// evaluation between the torque and the adaptive law.
Eigen::Vector3d control_torque_with_rho(const Eigen::Vector3d& q_ev,
                                        const Eigen::Vector3d& omega_e,
                                        const Eigen::VectorXd& v, const Eigen::MatrixXd& rho,
                                        const Eigen::VectorXd& R_hat,
                                        const InternalModelDesign& d, const KnownPlant& kp,
                                        const Gains& g);

}  // namespace flexsat
