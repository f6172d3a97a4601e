#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flexsat/analysis.h"
#include "flexsat/controller.h"
#include "flexsat/internal_model.h"
#include "flexsat/plant.h"
#include "flexsat/state.h"

namespace flexsat {

// One atomic mid-run change. Frequency changes retune the true disturbance
// (the frozen design is not resynthesized; tracking it is the adaptation's
// job), inertia changes swap the true parameter vector, adaptation toggles
// the estimator. Disabling pins R_hat back to the assumed-parameter value.
struct EventChange {
    enum class Kind { frequency, inertia, adaptation };
    Kind kind = Kind::frequency;
    int axis = 0;        // frequency: 0-based axis
    int tone = 0;        // frequency: 0-based tone within the axis
    double value = 0.0;  // frequency: new rad/s value
    Eigen::VectorXd mu;  // inertia: new parameter vector
    bool enabled = false;  // adaptation
};

struct Event {
    double time = 0.0;
    std::vector<EventChange> changes;
};

// Optional Lyapunov instrumentation. When enabled the run carries a
// certificate (P, S, epsilons) and emits V, V1, V2, V3 with every telemetry
// record; `optimize` derives p, s and the epsilons from the gain bounds
// instead of taking them verbatim.
struct AnalysisConfig {
    bool enabled = false;
    bool optimize = true;
    double p = 1.0;
    double s = 1.0;
    std::array<double, 8> eps{1, 1, 1, 1, 1, 1, 1, 1};
};

struct Scenario {
    std::string name;

    InertiaBasis inertia;
    Eigen::VectorXd mu_true;
    Eigen::MatrixXd delta;  // 3 x n
    Eigen::MatrixXd C;      // n x n
    Eigen::MatrixXd K;      // n x n
    DisturbanceModel disturbance;
    DesignConfig design;
    Gains gains;

    Quaternion q0;  // initial attitude (normalized at load)
    Quaternion q_d; // constant target attitude (normalized at load)
    Eigen::Vector3d omega0 = Eigen::Vector3d::Zero();
    Eigen::VectorXd eta0;
    Eigen::VectorXd eta_dot0;
    // Initial estimate; empty means zeros, or the assumed-parameter pin when
    // adaptation starts disabled.
    Eigen::VectorXd R_hat0;

    double t_final = 0.0;
    double dt = 1e-3;
    int decimate = 100;
    std::vector<Event> events;
    AnalysisConfig analysis;

    void validate() const;  // throws std::invalid_argument
};

struct SimResult {
    StateDims dims;
    InternalModelDesign design;
    std::vector<TelemetryRecord> telemetry;
    ClosedLoopState final_state;
    Eigen::VectorXd final_mu;
    Eigen::VectorXd final_sigma;
    DisturbanceModel final_disturbance;
    bool has_certificate = false;
    LyapunovCertificate certificate;
    GainCheckReport gain_report;
};

// Classic fixed-step RK4 update of x' = f(t, x).
template <class F>
Eigen::VectorXd rk4_step(F&& f, double t, const Eigen::VectorXd& x, double h) {
    const Eigen::VectorXd k1 = f(t, x);
    const Eigen::VectorXd k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = f(t + h, x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// True unknown-frequency vector read off the (current) disturbance model.
Eigen::VectorXd current_sigma(const DisturbanceModel& model,
                              const std::vector<UnknownFreq>& unknown);

// Structural compatibility of a previously exported design with a scenario:
// per-axis generator order, known frequencies, basis and n_mu must agree.
// Throws std::invalid_argument naming the first mismatch.
void verify_design_matches(const InternalModelDesign& d, const Scenario& sc);

// Integrates the closed loop with fixed-step RK4 (error quaternion
// renormalized every step, events applied atomically on step boundaries,
// segment remainders taken as one shortened step). Telemetry is recorded
// every `decimate` steps plus once at t_final. A preloaded design skips
// synthesis; it must pass verify_design_matches.
SimResult run_scenario(const Scenario& sc, const InternalModelDesign* design = nullptr);

}  // namespace flexsat
