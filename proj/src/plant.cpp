#include "flexsat/plant.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace flexsat {

namespace {

void require_spd(const Eigen::MatrixXd& A, const char* name) {
    if (A.rows() != A.cols()) {
        throw std::invalid_argument(std::string(name) + " must be square");
    }
    if (A.rows() == 0) return;
    if (!A.isApprox(A.transpose(), 1e-12)) {
        throw std::invalid_argument(std::string(name) + " must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw std::invalid_argument(std::string(name) + " must be positive definite");
    }
}

}  // namespace

SpacecraftParams SpacecraftParams::make(const Eigen::Matrix3d& J, const Eigen::MatrixXd& delta,
                                        const Eigen::MatrixXd& C, const Eigen::MatrixXd& K) {
    SpacecraftParams p;
    p.J = J;
    p.delta = delta;
    p.C = C;
    p.K = K;
    p.n = static_cast<int>(delta.cols());
    if (delta.rows() != 3) {
        throw std::invalid_argument("SpacecraftParams: delta must have 3 rows");
    }
    if (C.rows() != p.n || C.cols() != p.n || K.rows() != p.n || K.cols() != p.n) {
        throw std::invalid_argument("SpacecraftParams: C and K must be n x n");
    }
    require_spd(J, "J");
    if (p.n > 0) {
        require_spd(C, "C");
        require_spd(K, "K");
    }
    p.Jmb = J - delta * delta.transpose();
    require_spd(p.Jmb, "Jmb = J - delta delta^T");
    return p;
}

void DisturbanceModel::validate() const {
    for (int i = 0; i < 3; ++i) {
        const auto& ax = axes[i];
        for (size_t a = 0; a < ax.tones.size(); ++a) {
            if (!(ax.tones[a].frequency > 0.0)) {
                throw std::invalid_argument("disturbance axis " + std::to_string(i + 1) +
                                            ": tone frequencies must be strictly positive");
            }
            for (size_t b = a + 1; b < ax.tones.size(); ++b) {
                if (ax.tones[a].frequency == ax.tones[b].frequency) {
                    throw std::invalid_argument("disturbance axis " + std::to_string(i + 1) +
                                                ": duplicate tone frequency");
                }
            }
        }
    }
}

Eigen::Vector3d disturbance_eval(const DisturbanceModel& model, double t) {
    Eigen::Vector3d d;
    for (int i = 0; i < 3; ++i) {
        double di = model.axes[i].bias;
        for (const Tone& tone : model.axes[i].tones) {
            di += tone.amplitude * std::sin(tone.frequency * t + tone.phase);
        }
        d(i) = di;
    }
    return d;
}

PlantDeriv plant_rhs(const PlantState& s, const Eigen::Vector3d& u,
                     const Eigen::Vector3d& d, const SpacecraftParams& par) {
    if (s.eta.size() != par.n || s.eta_dot.size() != par.n) {
        throw std::invalid_argument("plant_rhs: modal state size does not match parameters");
    }
    PlantDeriv out;
    out.q_dot = error_kinematics(s.q, s.omega);
    const Eigen::Vector3d gyro = -s.omega.cross(par.J * s.omega);
    Eigen::Vector3d rhs = gyro + u + d;
    if (par.n > 0) rhs += par.delta * (par.C * s.eta_dot + par.K * s.eta);
    out.omega_dot = par.Jmb.llt().solve(rhs);
    out.eta_dot = s.eta_dot;
    if (par.n > 0) {
        out.eta_ddot = -par.C * s.eta_dot - par.K * s.eta - par.delta.transpose() * out.omega_dot;
    } else {
        out.eta_ddot.resize(0);
    }
    return out;
}

}  // namespace flexsat
