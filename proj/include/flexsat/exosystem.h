#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "flexsat/plant.h"

namespace flexsat {

// Marginally stable generator of one disturbance axis in companion form:
// ones on the superdiagonal, minimal-polynomial coefficients in the last row,
// output row Psi = [1 0 ... 0]. The generator state stacks the disturbance
// and its first r-1 derivatives.
struct AxisExosystem {
    Eigen::MatrixXd Phi;       // r x r
    Eigen::RowVectorXd Psi;    // 1 x r
    int r = 0;
};

struct ExosystemDesign {
    std::array<AxisExosystem, 3> axis;
    int r_total = 0;

    Eigen::MatrixXd Phi() const;  // blockdiag(Phi_1, Phi_2, Phi_3)
    Eigen::MatrixXd Psi() const;  // 3 x r_total block rows
};

// Companion matrix annihilating bias (optional) plus the given tones:
// minimal polynomial lambda^{bias} * prod_j (lambda^2 + b_j^2). Frequencies
// may be zero or repeated here; callers that need simple spectrum check it.
AxisExosystem companion_axis(const std::vector<double>& freqs, bool bias);

// Exosystem for the full disturbance model. Requires strictly positive,
// per-axis distinct frequencies so the aggregate spectrum per axis is simple.
ExosystemDesign build_exosystem(const DisturbanceModel& model);

// Analytic generator state at time t: per axis, [d_i, d_i', ..., d_i^(r-1)],
// stacked over the three axes.
Eigen::VectorXd exosystem_state(const DisturbanceModel& model, double t);

}  // namespace flexsat
