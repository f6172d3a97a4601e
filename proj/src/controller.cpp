#include "flexsat/controller.h"

#include <stdexcept>

namespace flexsat {

void Gains::validate() const {
    if (!(k1 > 0.0) || !(k2 > 0.0) || !(k > 0.0)) {
        throw std::invalid_argument("Gains: k1, k2 and k must be strictly positive");
    }
}

Eigen::VectorXd adaptive_law(const Eigen::MatrixXd& rho, const Eigen::Vector3d& omega_e,
                             const Gains& g) {
    if (!g.adaptation_enabled) return Eigen::VectorXd::Zero(rho.cols());
    return g.k * rho.transpose() * omega_e;
}

Eigen::Vector3d virtual_control(const Eigen::Vector3d& q_ev, const Eigen::Vector3d& omega_e,
                                const Eigen::MatrixXd& rho, const Eigen::VectorXd& R_hat,
                                const Gains& g) {
    if (rho.cols() != R_hat.size()) {
        throw std::invalid_argument("virtual_control: rho and R_hat sizes mismatch");
    }
    return -g.k1 * q_ev - g.k2 * omega_e - rho * R_hat;
}

Eigen::Vector3d control_torque_with_rho(const Eigen::Vector3d& q_ev,
                                        const Eigen::Vector3d& omega_e,
                                        const Eigen::VectorXd& v, const Eigen::MatrixXd& rho,
                                        const Eigen::VectorXd& R_hat,
                                        const InternalModelDesign& d, const KnownPlant& kp,
                                        const Gains& g) {
    Eigen::MatrixXd F1, L1;
    Eigen::Vector3d F0, L0;
    F_terms(omega_e, kp.inertia, F1, F0);
    split_L(omega_e, kp.inertia, L1, L0);
    Eigen::Vector3d u = virtual_control(q_ev, omega_e, rho, R_hat, g);
    u += -d.E0 * (d.N * L0) + d.E0 * v - F0;
    if (kp.delta.cols() > 0) {
        u += kp.delta * kp.C * kp.delta.transpose() * omega_e;
    }
    return u;
}

Eigen::Vector3d control_torque(const Eigen::Vector3d& q_ev, const Eigen::Vector3d& omega_e,
                               const Eigen::VectorXd& v, const Eigen::MatrixXd& zeta,
                               const Eigen::VectorXd& R_hat, const InternalModelDesign& d,
                               const KnownPlant& kp, const Gains& g) {
    const Eigen::MatrixXd rho = regressor_rho(omega_e, zeta, v, d, kp.inertia);
    return control_torque_with_rho(q_ev, omega_e, v, rho, R_hat, d, kp, g);
}

}  // namespace flexsat
