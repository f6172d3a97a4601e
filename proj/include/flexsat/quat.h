#pragma once

#include <Eigen/Dense>

namespace flexsat {

// Attitude quaternion, vector part first: q = [v1 v2 v3 w], |q| = 1.
struct Quaternion {
    Eigen::Vector3d v;
    double w;

    Eigen::Vector4d vec() const {
        Eigen::Vector4d out;
        out << v, w;
        return out;
    }
    static Quaternion from_vec(const Eigen::Vector4d& x) {
        return Quaternion{x.head<3>(), x(3)};
    }
    double norm() const { return std::sqrt(v.squaredNorm() + w * w); }
};

// Cross-product matrix: skew(a) * b == a x b.
Eigen::Matrix3d skew(const Eigen::Vector3d& a);

// Attitude error of q relative to the target q_d:
//   q_ev = q_d4 q_v - q_dv x q_v - q_4 q_dv
//   q_e4 = q_dv . q_v + q_4 q_d4
// Both inputs must be unit (norm deviation <= 1e-6), and the result satisfies
// q_ev.q_ev + q_e4^2 = 1. Identical inputs give q_ev = 0, q_e4 = 1.
Quaternion quat_error(const Quaternion& q, const Quaternion& q_d);

// d/dt of the error quaternion under body rate error omega_e:
//   d/dt q_ev = 0.5 (q_e4 I + q_ev^x) omega_e
//   d/dt q_e4 = -0.5 q_ev . omega_e
// The result is orthogonal to q_e, so the unit norm is preserved by the flow.
Eigen::Vector4d error_kinematics(const Quaternion& q_e, const Eigen::Vector3d& omega_e);

// Rescale to unit norm. Inputs already unit to machine precision are returned
// unchanged, which makes the operation idempotent bit-for-bit. Zero or
// non-finite norm is rejected.
Quaternion normalize(const Quaternion& q);

}  // namespace flexsat
