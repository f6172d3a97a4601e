#include "flexsat/inertia.h"

#include <stdexcept>

#include "flexsat/quat.h"

namespace flexsat {

Eigen::Matrix3d InertiaBasis::J_of(const Eigen::VectorXd& mu) const {
    if (mu.size() != Lbar1.cols()) {
        throw std::invalid_argument("InertiaBasis::J_of: mu size does not match basis");
    }
    Vech6 h = Lbar0;
    if (mu.size() > 0) h += Lbar1 * mu;
    Eigen::Matrix3d J;
    J << h(0), h(5), h(4),
         h(5), h(1), h(3),
         h(4), h(3), h(2);
    return J;
}

Eigen::Matrix<double, 3, 6> regressor_L(const Eigen::Vector3d& x) {
    Eigen::Matrix<double, 3, 6> L;
    L << x(0), 0.0, 0.0, 0.0, x(2), x(1),
         0.0, x(1), 0.0, x(2), 0.0, x(0),
         0.0, 0.0, x(2), x(1), x(0), 0.0;
    return L;
}

void split_L(const Eigen::Vector3d& x, const InertiaBasis& basis,
             Eigen::MatrixXd& L1, Eigen::Vector3d& L0) {
    const Eigen::Matrix<double, 3, 6> L = regressor_L(x);
    L1 = L * basis.Lbar1;
    L0 = L * basis.Lbar0;
}

void F_terms(const Eigen::Vector3d& omega_e, const InertiaBasis& basis,
             Eigen::MatrixXd& F1, Eigen::Vector3d& F0) {
    Eigen::MatrixXd L1;
    Eigen::Vector3d L0;
    split_L(omega_e, basis, L1, L0);
    const Eigen::Matrix3d sx = skew(omega_e);
    F1 = -sx * L1;
    F0 = -sx * L0;
}

}  // namespace flexsat
