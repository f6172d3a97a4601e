#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "flexsat/inertia.h"
#include "flexsat/quat.h"

namespace flexsat {

// Physical data of the flexible spacecraft. delta couples the n modal
// coordinates into the attitude dynamics; C and K are modal damping and
// stiffness. Jmb = J - delta delta^T must stay positive definite for the
// coupled dynamics to be solvable.
struct SpacecraftParams {
    Eigen::Matrix3d J;
    Eigen::MatrixXd delta;  // 3 x n
    Eigen::MatrixXd C;      // n x n, SPD
    Eigen::MatrixXd K;      // n x n, SPD
    Eigen::Matrix3d Jmb;
    int n = 0;

    // Validates symmetry, positive definiteness of J, C, K and Jmb, and
    // dimension consistency. Throws std::invalid_argument on violation.
    static SpacecraftParams make(const Eigen::Matrix3d& J, const Eigen::MatrixXd& delta,
                                 const Eigen::MatrixXd& C, const Eigen::MatrixXd& K);
};

// One disturbance tone: amplitude * sin(frequency * t + phase).
struct Tone {
    double amplitude = 0.0;
    double frequency = 0.0;
    double phase = 0.0;
};

// Per-axis disturbance: bias + sum of tones. Frequencies must be strictly
// positive and distinct within an axis.
struct AxisDisturbance {
    double bias = 0.0;
    std::vector<Tone> tones;
};

struct DisturbanceModel {
    std::array<AxisDisturbance, 3> axes;

    void validate() const;  // throws std::invalid_argument
};

Eigen::Vector3d disturbance_eval(const DisturbanceModel& model, double t);

struct PlantState {
    Quaternion q;
    Eigen::Vector3d omega;
    Eigen::VectorXd eta;
    Eigen::VectorXd eta_dot;
};

struct PlantDeriv {
    Eigen::Vector4d q_dot;
    Eigen::Vector3d omega_dot;
    Eigen::VectorXd eta_dot;
    Eigen::VectorXd eta_ddot;
};

// Coupled rigid/flexible dynamics under torque u and disturbance d. The
// attitude and modal accelerations are solved simultaneously: eliminating the
// modal acceleration gives
//   Jmb omega_dot = -omega^x J omega + u + d + delta (C eta_dot + K eta)
//   eta_ddot = -C eta_dot - K eta - delta^T omega_dot
PlantDeriv plant_rhs(const PlantState& s, const Eigen::Vector3d& u,
                     const Eigen::Vector3d& d, const SpacecraftParams& par);

}  // namespace flexsat
