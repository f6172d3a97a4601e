#include "flexsat/sim.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace flexsat {

Eigen::VectorXd pack_state(const ClosedLoopState& s) {
    const int n = static_cast<int>(s.eta.size());
    const int r = static_cast<int>(s.v.size());
    const int n_mu = static_cast<int>(s.zeta.cols());
    const int n_R = static_cast<int>(s.R_hat.size());
    Eigen::VectorXd x(4 + 3 + 2 * n + r + r * n_mu + n_R + 2 * n);
    x.segment(0, 3) = s.q_e.v;
    x(3) = s.q_e.w;
    x.segment(4, 3) = s.omega_e;
    int off = 7;
    x.segment(off, n) = s.eta;
    off += n;
    x.segment(off, n) = s.eta_dot;
    off += n;
    x.segment(off, r) = s.v;
    off += r;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < n_mu; ++j) x(off + i * n_mu + j) = s.zeta(i, j);
    off += r * n_mu;
    x.segment(off, n_R) = s.R_hat;
    off += n_R;
    x.segment(off, 2 * n) = s.z;
    return x;
}

ClosedLoopState unpack_state(const Eigen::VectorXd& x, const StateDims& dims) {
    if (x.size() != dims.total()) throw std::invalid_argument("unpack_state: length mismatch");
    ClosedLoopState s;
    s.q_e.v = x.segment(0, 3);
    s.q_e.w = x(3);
    s.omega_e = x.segment(4, 3);
    int off = 7;
    s.eta = x.segment(off, dims.n);
    off += dims.n;
    s.eta_dot = x.segment(off, dims.n);
    off += dims.n;
    s.v = x.segment(off, dims.r);
    off += dims.r;
    s.zeta.resize(dims.r, dims.n_mu);
    for (int i = 0; i < dims.r; ++i)
        for (int j = 0; j < dims.n_mu; ++j) s.zeta(i, j) = x(off + i * dims.n_mu + j);
    off += dims.r * dims.n_mu;
    s.R_hat = x.segment(off, dims.n_R);
    off += dims.n_R;
    s.z = x.segment(off, 2 * dims.n);
    return s;
}

Eigen::VectorXd current_sigma(const DisturbanceModel& model,
                              const std::vector<UnknownFreq>& unknown) {
    Eigen::VectorXd sigma(static_cast<Eigen::Index>(unknown.size()));
    for (size_t i = 0; i < unknown.size(); ++i) {
        const auto& u = unknown[i];
        if (u.axis < 0 || u.axis >= 3) throw std::invalid_argument("current_sigma: bad axis");
        const auto& tones = model.axes[static_cast<size_t>(u.axis)].tones;
        if (u.tone < 0 || u.tone >= static_cast<int>(tones.size())) {
            throw std::invalid_argument("current_sigma: bad tone index");
        }
        sigma(static_cast<Eigen::Index>(i)) = tones[static_cast<size_t>(u.tone)].frequency;
    }
    return sigma;
}

void Scenario::validate() const {
    const int n = static_cast<int>(delta.cols());
    if (delta.rows() != 3) throw std::invalid_argument("scenario: delta must have 3 rows");
    if (C.rows() != n || C.cols() != n || K.rows() != n || K.cols() != n) {
        throw std::invalid_argument("scenario: C and K must be n x n");
    }
    if (mu_true.size() != inertia.n_mu()) {
        throw std::invalid_argument("scenario: mu_true length does not match the inertia basis");
    }
    if (eta0.size() != n || eta_dot0.size() != n) {
        throw std::invalid_argument("scenario: modal initial state must have length n");
    }
    gains.validate();
    disturbance.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("scenario: dt must be positive");
    if (!(t_final >= 0.0)) throw std::invalid_argument("scenario: t_final must be nonnegative");
    if (decimate < 1) throw std::invalid_argument("scenario: decimate must be >= 1");

    double prev = 0.0;
    for (const auto& ev : events) {
        if (!(ev.time > prev)) {
            throw std::invalid_argument("scenario: event times must be strictly increasing");
        }
        if (!(ev.time <= t_final)) {
            throw std::invalid_argument("scenario: event time beyond t_final");
        }
        if (ev.changes.empty()) throw std::invalid_argument("scenario: event with no changes");
        for (const auto& ch : ev.changes) {
            switch (ch.kind) {
                case EventChange::Kind::frequency: {
                    if (ch.axis < 0 || ch.axis >= 3) {
                        throw std::invalid_argument("scenario: frequency change to bad axis");
                    }
                    const auto& tones = disturbance.axes[static_cast<size_t>(ch.axis)].tones;
                    if (ch.tone < 0 || ch.tone >= static_cast<int>(tones.size())) {
                        throw std::invalid_argument("scenario: frequency change to bad tone");
                    }
                    if (!(ch.value > 0.0)) {
                        throw std::invalid_argument("scenario: frequencies must stay positive");
                    }
                    break;
                }
                case EventChange::Kind::inertia:
                    if (ch.mu.size() != inertia.n_mu()) {
                        throw std::invalid_argument("scenario: inertia change has wrong length");
                    }
                    break;
                case EventChange::Kind::adaptation:
                    break;
            }
        }
        prev = ev.time;
    }
}

namespace {

Eigen::VectorXd pinned_R(const Scenario& sc, const InternalModelDesign& design) {
    if (sc.design.assumed_mu.size() != design.n_mu ||
        sc.design.assumed_sigma.size() != design.basis.n_sigma) {
        throw std::invalid_argument(
            "scenario: assumed_sigma/assumed_mu required while adaptation is disabled");
    }
    return true_R(sc.design.assumed_sigma, sc.design.assumed_mu, design);
}

void renormalize_quat(Eigen::VectorXd& x) {
    Quaternion q;
    q.v = x.segment(0, 3);
    q.w = x(3);
    q = normalize(q);
    x.segment(0, 3) = q.v;
    x(3) = q.w;
}

}  // namespace

void verify_design_matches(const InternalModelDesign& d, const Scenario& sc) {
    if (d.n_mu != sc.inertia.n_mu()) {
        throw std::invalid_argument("design/scenario mismatch: inertia parameter count");
    }
    if (d.basis.n_sigma != sc.design.basis.n_sigma ||
        d.basis.exponents != sc.design.basis.exponents) {
        throw std::invalid_argument("design/scenario mismatch: frequency basis");
    }
    for (size_t a = 0; a < 3; ++a) {
        const auto& ax = d.axes[a];
        const auto& dist = sc.disturbance.axes[a];
        const std::string where = "design/scenario mismatch: axis " + std::to_string(a + 1);
        if (ax.bias != (dist.bias != 0.0)) throw std::invalid_argument(where + " bias term");
        if (ax.freqs.size() != dist.tones.size()) {
            throw std::invalid_argument(where + " tone count");
        }
        for (size_t k = 0; k < ax.freqs.size(); ++k) {
            const bool unknown = ax.sigma_slot[k] >= 0;
            if (!unknown && ax.freqs[k] != dist.tones[k].frequency) {
                throw std::invalid_argument(where + " known frequency value");
            }
        }
    }
    for (size_t i = 0; i < sc.design.unknown.size(); ++i) {
        const auto& u = sc.design.unknown[i];
        const auto& slots = d.axes[static_cast<size_t>(u.axis)].sigma_slot;
        if (u.tone >= static_cast<int>(slots.size()) ||
            slots[static_cast<size_t>(u.tone)] != static_cast<int>(i)) {
            throw std::invalid_argument("design/scenario mismatch: unknown-frequency slots");
        }
    }
}

SimResult run_scenario(const Scenario& sc, const InternalModelDesign* design_in) {
    sc.validate();

    SimResult out;
    if (design_in != nullptr) {
        verify_design_matches(*design_in, sc);
        out.design = *design_in;
    } else {
        out.design = synthesize_design(sc.disturbance, sc.design, sc.inertia.n_mu());
    }
    const InternalModelDesign& design = out.design;

    // Mutable truth; events rewrite these between steps.
    DisturbanceModel model = sc.disturbance;
    Eigen::VectorXd mu = sc.mu_true;
    SpacecraftParams par = SpacecraftParams::make(sc.inertia.J_of(mu), sc.delta, sc.C, sc.K);
    Gains gains = sc.gains;
    Eigen::VectorXd sigma = current_sigma(model, sc.design.unknown);
    Eigen::MatrixXd T_true = sc.analysis.enabled ? design.T_at(sigma) : Eigen::MatrixXd();

    const KnownPlant kp{sc.delta, sc.C, sc.inertia};
    const StateDims dims{par.n, design.r, design.n_mu, design.n_R()};
    out.dims = dims;

    ClosedLoopState st;
    st.q_e = quat_error(normalize(sc.q0), normalize(sc.q_d));
    st.omega_e = sc.omega0;
    st.eta = sc.eta0;
    st.eta_dot = sc.eta_dot0;
    st.v = Eigen::VectorXd::Zero(design.r);
    st.zeta = Eigen::MatrixXd::Zero(design.r, design.n_mu);
    if (sc.R_hat0.size() > 0) {
        if (sc.R_hat0.size() != design.n_R()) {
            throw std::invalid_argument("scenario: R_hat0 has wrong length");
        }
        st.R_hat = sc.R_hat0;
    } else if (!gains.adaptation_enabled) {
        st.R_hat = pinned_R(sc, design);
    } else {
        st.R_hat = Eigen::VectorXd::Zero(design.n_R());
    }
    st.z = auxiliary_initial_z(st.eta, st.eta_dot, st.omega_e, par);

    LyapunovCertificate cert;
    if (sc.analysis.enabled) {
        cert = sc.analysis.optimize
                   ? optimize_epsilons(par, design, gains, sigma)
                   : make_certificate(par, design, sc.analysis.p, sc.analysis.s, sc.analysis.eps);
        out.certificate = cert;
        out.gain_report = check_gain_conditions(cert, gains, par, design, sigma);
        out.has_certificate = true;
    }

    Eigen::VectorXd x = pack_state(st);

    auto rhs = [&](double t, const Eigen::VectorXd& xv) -> Eigen::VectorXd {
        const ClosedLoopState s = unpack_state(xv, dims);
        const Eigen::MatrixXd rho = regressor_rho(s.omega_e, s.zeta, s.v, design, sc.inertia);
        const Eigen::Vector3d u =
            control_torque_with_rho(s.q_e.v, s.omega_e, s.v, rho, s.R_hat, design, kp, gains);
        const Eigen::Vector3d d = disturbance_eval(model, t);

        const PlantState ps{s.q_e, s.omega_e, s.eta, s.eta_dot};
        const PlantDeriv pd = plant_rhs(ps, u, d, par);

        ClosedLoopState ds;
        ds.q_e.v = pd.q_dot.head<3>();
        ds.q_e.w = pd.q_dot(3);
        ds.omega_e = pd.omega_dot;
        ds.eta = pd.eta_dot;
        ds.eta_dot = pd.eta_ddot;
        ds.v = internal_model_rhs(s.v, u, s.omega_e, design, sc.inertia);
        ds.zeta = compensator_rhs(s.zeta, s.omega_e, design, sc.inertia);
        ds.R_hat = adaptive_law(rho, s.omega_e, gains);
        ds.z = auxiliary_rhs(s.z, s.omega_e, par);
        return pack_state(ds);
    };

    auto record = [&](double t, const Eigen::VectorXd& xv) {
        const ClosedLoopState s = unpack_state(xv, dims);
        TelemetryRecord rec;
        rec.t = t;
        rec.q_e << s.q_e.v, s.q_e.w;
        rec.omega_e = s.omega_e;
        rec.eta = s.eta;
        rec.eta_dot = s.eta_dot;
        rec.v = s.v;
        rec.zeta = s.zeta;
        rec.R_hat = s.R_hat;
        const Eigen::MatrixXd rho = regressor_rho(s.omega_e, s.zeta, s.v, design, sc.inertia);
        rec.u = control_torque_with_rho(s.q_e.v, s.omega_e, s.v, rho, s.R_hat, design, kp, gains);
        rec.d = disturbance_eval(model, t);
        rec.z = s.z;
        if (sc.analysis.enabled) {
            const TruthContext truth{sigma, mu, model};
            const LyapunovValues lv =
                lyapunov_eval(s, t, cert, truth, T_true, par, design, sc.inertia, gains);
            rec.has_lyapunov = true;
            rec.V = lv.V;
            rec.V1 = lv.V1;
            rec.V2 = lv.V2;
            rec.V3 = lv.V3;
        }
        out.telemetry.push_back(std::move(rec));
    };

    auto apply_event = [&](const Event& ev) {
        for (const auto& ch : ev.changes) {
            switch (ch.kind) {
                case EventChange::Kind::frequency:
                    model.axes[static_cast<size_t>(ch.axis)]
                        .tones[static_cast<size_t>(ch.tone)]
                        .frequency = ch.value;
                    break;
                case EventChange::Kind::inertia:
                    mu = ch.mu;
                    par = SpacecraftParams::make(sc.inertia.J_of(mu), sc.delta, sc.C, sc.K);
                    break;
                case EventChange::Kind::adaptation: {
                    gains.adaptation_enabled = ch.enabled;
                    if (!ch.enabled) {
                        const Eigen::VectorXd pin = pinned_R(sc, design);
                        x.segment(7 + 2 * dims.n + dims.r + dims.r * dims.n_mu, dims.n_R) = pin;
                    }
                    break;
                }
            }
        }
        model.validate();
        sigma = current_sigma(model, sc.design.unknown);
        if (sc.analysis.enabled) T_true = design.T_at(sigma);
    };

    // Segment boundaries: event times then t_final.
    std::vector<double> bounds;
    for (const auto& ev : sc.events) bounds.push_back(ev.time);
    if (bounds.empty() || bounds.back() < sc.t_final) bounds.push_back(sc.t_final);

    long global_step = 0;
    double seg_start = 0.0;
    size_t ev_idx = 0;
    for (double seg_end : bounds) {
        const double span = seg_end - seg_start;
        const long n_full = static_cast<long>(std::floor(span / sc.dt + 1e-9));
        double rem = span - static_cast<double>(n_full) * sc.dt;
        if (rem < 1e-12 * sc.dt) rem = 0.0;

        auto advance = [&](double t, double h) {
            if (global_step % sc.decimate == 0) record(t, x);
            x = rk4_step(rhs, t, x, h);
            renormalize_quat(x);
            if (!x.allFinite()) {
                std::ostringstream os;
                os << "simulation diverged near t = " << t + h;
                throw std::runtime_error(os.str());
            }
            ++global_step;
        };

        for (long k = 0; k < n_full; ++k) advance(seg_start + static_cast<double>(k) * sc.dt, sc.dt);
        if (rem > 0.0) advance(seg_start + static_cast<double>(n_full) * sc.dt, rem);

        if (ev_idx < sc.events.size() && sc.events[ev_idx].time == seg_end) {
            apply_event(sc.events[ev_idx]);
            ++ev_idx;
        }
        seg_start = seg_end;
    }
    record(sc.t_final, x);

    out.final_state = unpack_state(x, dims);
    out.final_mu = mu;
    out.final_sigma = sigma;
    out.final_disturbance = model;
    return out;
}

}  // namespace flexsat
