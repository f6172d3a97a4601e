#include "flexsat/exosystem.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace flexsat {

Eigen::MatrixXd ExosystemDesign::Phi() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r_total, r_total);
    int at = 0;
    for (const auto& ax : axis) {
        out.block(at, at, ax.r, ax.r) = ax.Phi;
        at += ax.r;
    }
    return out;
}

Eigen::MatrixXd ExosystemDesign::Psi() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3, r_total);
    int at = 0;
    for (int i = 0; i < 3; ++i) {
        out.block(i, at, 1, axis[i].r) = axis[i].Psi;
        at += axis[i].r;
    }
    return out;
}

AxisExosystem companion_axis(const std::vector<double>& freqs, bool bias) {
    // Expand lambda^{bias} * prod (lambda^2 + b^2) into monic coefficients.
    std::vector<double> coeff{1.0};  // constant polynomial 1
    for (double b : freqs) {
        std::vector<double> next(coeff.size() + 2, 0.0);
        for (size_t i = 0; i < coeff.size(); ++i) {
            next[i + 2] += coeff[i];          // lambda^2 term
            next[i] += b * b * coeff[i];      // constant term
        }
        coeff = next;
    }
    if (bias) coeff.insert(coeff.begin(), 0.0);  // multiply by lambda

    const int r = static_cast<int>(coeff.size()) - 1;
    AxisExosystem ax;
    ax.r = r;
    ax.Phi = Eigen::MatrixXd::Zero(r, r);
    for (int i = 0; i + 1 < r; ++i) ax.Phi(i, i + 1) = 1.0;
    // d^(r) = a_1 d + a_2 d' + ... with a_k = -coeff[k-1] of the monic polynomial.
    for (int k = 0; k < r; ++k) ax.Phi(r - 1, k) = -coeff[k];
    ax.Psi = Eigen::RowVectorXd::Zero(r);
    if (r > 0) ax.Psi(0) = 1.0;
    return ax;
}

ExosystemDesign build_exosystem(const DisturbanceModel& model) {
    model.validate();
    ExosystemDesign d;
    d.r_total = 0;
    for (int i = 0; i < 3; ++i) {
        std::vector<double> freqs;
        for (const Tone& t : model.axes[i].tones) freqs.push_back(t.frequency);
        d.axis[i] = companion_axis(freqs, model.axes[i].bias != 0.0);
        if (d.axis[i].r == 0) {
            throw std::invalid_argument("exosystem axis " + std::to_string(i + 1) +
                                        ": disturbance has no generator (no bias, no tones)");
        }
        d.r_total += d.axis[i].r;
    }
    return d;
}

Eigen::VectorXd exosystem_state(const DisturbanceModel& model, double t) {
    int r_total = 0;
    std::array<int, 3> r_axis{};
    for (int i = 0; i < 3; ++i) {
        r_axis[i] = 2 * static_cast<int>(model.axes[i].tones.size()) +
                    (model.axes[i].bias != 0.0 ? 1 : 0);
        r_total += r_axis[i];
    }
    Eigen::VectorXd rho = Eigen::VectorXd::Zero(r_total);
    int at = 0;
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < r_axis[i]; ++k) {
            // k-th derivative of bias + sum A sin(b t + l):
            // bias contributes only at k = 0, each tone A b^k sin(b t + l + k pi/2).
            double val = (k == 0) ? model.axes[i].bias : 0.0;
            for (const Tone& tone : model.axes[i].tones) {
                val += tone.amplitude * std::pow(tone.frequency, k) *
                       std::sin(tone.frequency * t + tone.phase + 0.5 * M_PI * k);
            }
            rho(at + k) = val;
        }
        at += r_axis[i];
    }
    return rho;
}

}  // namespace flexsat
