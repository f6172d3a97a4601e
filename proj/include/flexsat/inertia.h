#pragma once

#include <Eigen/Dense>

namespace flexsat {

// vech ordering used throughout: [J11 J22 J33 J23 J13 J12].
using Vech6 = Eigen::Matrix<double, 6, 1>;

// Known split of the inertia parameters: vech(J) = Lbar1 * mu + Lbar0, where
// mu stacks the unknown entries. The controller sees only this basis, never
// the true mu.
struct InertiaBasis {
    Eigen::MatrixXd Lbar1;  // 6 x n_mu
    Vech6 Lbar0;

    int n_mu() const { return static_cast<int>(Lbar1.cols()); }

    // Assemble the symmetric inertia matrix for a given parameter vector.
    Eigen::Matrix3d J_of(const Eigen::VectorXd& mu) const;
};

// Linear-in-parameters form of the inertia product: J x = regressor_L(x) vech(J).
Eigen::Matrix<double, 3, 6> regressor_L(const Eigen::Vector3d& x);

// Split J x into unknown and known parts: J x = L1(x) mu + L0(x).
void split_L(const Eigen::Vector3d& x, const InertiaBasis& basis,
             Eigen::MatrixXd& L1, Eigen::Vector3d& L0);

// Gyroscopic torque split: -omega_e^x J omega_e = F1(omega_e) mu + F0(omega_e).
void F_terms(const Eigen::Vector3d& omega_e, const InertiaBasis& basis,
             Eigen::MatrixXd& F1, Eigen::Vector3d& F0);

}  // namespace flexsat
