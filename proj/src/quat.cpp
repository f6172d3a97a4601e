#include "flexsat/quat.h"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace flexsat {

Eigen::Matrix3d skew(const Eigen::Vector3d& a) {
    Eigen::Matrix3d s;
    s << 0.0, -a.z(), a.y(),
         a.z(), 0.0, -a.x(),
         -a.y(), a.x(), 0.0;
    return s;
}

Quaternion quat_error(const Quaternion& q, const Quaternion& q_d) {
    if (std::abs(q.norm() - 1.0) > 1e-6 || std::abs(q_d.norm() - 1.0) > 1e-6) {
        throw std::invalid_argument("quat_error: inputs must be unit quaternions");
    }
    Quaternion e;
    e.v = q_d.w * q.v - q_d.v.cross(q.v) - q.w * q_d.v;
    e.w = q_d.v.dot(q.v) + q.w * q_d.w;
    return e;
}

Eigen::Vector4d error_kinematics(const Quaternion& q_e, const Eigen::Vector3d& omega_e) {
    Eigen::Vector4d dq;
    dq.head<3>() = 0.5 * (q_e.w * Eigen::Matrix3d::Identity() + skew(q_e.v)) * omega_e;
    dq(3) = -0.5 * q_e.v.dot(omega_e);
    return dq;
}

Quaternion normalize(const Quaternion& q) {
    const double n = q.norm();
    if (!std::isfinite(n) || n == 0.0) {
        throw std::invalid_argument("normalize: quaternion norm must be finite and nonzero");
    }
    // Inside a few ulp of 1 the division would only churn the last bit, so
    // return the input unchanged; this also makes normalize idempotent.
    if (std::abs(n - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) {
        return q;
    }
    return Quaternion{q.v / n, q.w / n};
}

}  // namespace flexsat
