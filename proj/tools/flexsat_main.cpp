#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flexsat/example.h"
#include "flexsat/scenario_io.h"
#include "flexsat/sim.h"
#include "flexsat/svg_plot.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace flexsat;

namespace {

constexpr const char* kVersion = "1.0.0";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void ensure_out_dir(const std::string& dir, bool force) {
    fs::path p(dir);
    if (fs::exists(p)) {
        if (!fs::is_directory(p)) throw UsageError("usage: '" + dir + "' is not a directory");
        if (!fs::is_empty(p) && !force) {
            throw UsageError("usage: output directory '" + dir +
                             "' is not empty (pass --force to overwrite)");
        }
    } else {
        fs::create_directories(p);
    }
}

json vec_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

InternalModelDesign obtain_design(const Scenario& sc, const std::string& design_path) {
    if (design_path.empty()) {
        return synthesize_design(sc.disturbance, sc.design, sc.inertia.n_mu());
    }
    InternalModelDesign d = load_design(design_path);
    try {
        verify_design_matches(d, sc);
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("schema: ") + e.what());
    }
    return d;
}

// Truth (disturbance model, inertia, adaptation flag) after all events up to
// and including time t, plus the start of the final constant-truth segment.
struct ReplayedTruth {
    DisturbanceModel model;
    Eigen::VectorXd mu;
    bool adaptation = false;
    double segment_start = 0.0;
};

ReplayedTruth replay_truth(const Scenario& sc, double t) {
    ReplayedTruth out{sc.disturbance, sc.mu_true, sc.gains.adaptation_enabled, 0.0};
    for (const auto& ev : sc.events) {
        if (ev.time > t) break;
        for (const auto& ch : ev.changes) {
            switch (ch.kind) {
                case EventChange::Kind::frequency:
                    out.model.axes[static_cast<size_t>(ch.axis)]
                        .tones[static_cast<size_t>(ch.tone)]
                        .frequency = ch.value;
                    break;
                case EventChange::Kind::inertia:
                    out.mu = ch.mu;
                    break;
                case EventChange::Kind::adaptation:
                    out.adaptation = ch.enabled;
                    break;
            }
        }
        out.segment_start = ev.time;
    }
    return out;
}

double sup_qev(const std::vector<TelemetryRecord>& traj, double a, double b) {
    double sup = 0.0;
    bool seen = false;
    for (const auto& rec : traj) {
        if (rec.t < a - 1e-9 || rec.t > b + 1e-9) continue;
        seen = true;
        sup = std::max(sup, rec.q_e.head<3>().norm());
    }
    if (!seen) throw std::runtime_error("no telemetry inside requested window");
    return sup;
}

const TelemetryRecord& record_at(const std::vector<TelemetryRecord>& traj, double t) {
    const TelemetryRecord* best = nullptr;
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& rec : traj) {
        const double g = std::abs(rec.t - t);
        if (g < gap) {
            gap = g;
            best = &rec;
        }
    }
    if (best == nullptr) throw std::runtime_error("empty trajectory");
    return *best;
}

int cmd_design(const std::string& scenario_path, const std::string& out_path, bool force) {
    const Scenario sc = load_scenario(scenario_path);
    if (fs::exists(out_path) && !force) {
        throw UsageError("usage: output '" + out_path + "' exists (pass --force to overwrite)");
    }
    const InternalModelDesign d =
        synthesize_design(sc.disturbance, sc.design, sc.inertia.n_mu());
    save_design(d, out_path);
    std::printf("design: r=%d n_mu=%d ell=%d n_R=%d\n", d.r, d.n_mu, d.ell(), d.n_R());
    std::printf("design: sylvester residual %.3e, fit residual %.3e\n", d.sylvester_residual,
                d.fit_residual);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

int cmd_simulate(const std::string& scenario_path, const std::string& design_path,
                 const std::string& out_dir, double dt_override, int decimate_override,
                 bool force) {
    Scenario sc = load_scenario(scenario_path);
    if (dt_override > 0.0) sc.dt = dt_override;
    if (decimate_override > 0) sc.decimate = decimate_override;
    ensure_out_dir(out_dir, force);

    const InternalModelDesign d = obtain_design(sc, design_path);
    const SimResult res = run_scenario(sc, &d);

    const fs::path dir(out_dir);
    const std::string traj_path = (dir / "trajectory.csv").string();
    const std::string design_snapshot = (dir / "design.json").string();
    const std::string manifest_path = (dir / "manifest.json").string();
    write_trajectory_csv(traj_path, res.telemetry);
    save_design(res.design, design_snapshot);

    json extra;
    extra["scenario"] = scenario_path;
    extra["dt"] = sc.dt;
    extra["decimate"] = sc.decimate;
    extra["t_final"] = sc.t_final;
    extra["records"] = res.telemetry.size();
    write_manifest(manifest_path, kVersion,
                   {{"scenario", scenario_path},
                    {"design", design_snapshot},
                    {"trajectory", traj_path}},
                   extra);
    std::printf("wrote %s (%zu records)\n", traj_path.c_str(), res.telemetry.size());
    std::printf("wrote %s\n", design_snapshot.c_str());
    std::printf("wrote %s\n", manifest_path.c_str());
    return 0;
}

int report_out(const json& rep, const std::string& out_path, int verdict) {
    if (!out_path.empty()) write_json_file(rep, out_path);
    return verdict;
}

int cmd_check(const std::string& kind, const std::string& traj_path,
              const std::string& scenario_path, const std::string& design_path,
              const std::string& out_path) {
    const Scenario sc = load_scenario(scenario_path);
    const InternalModelDesign d = obtain_design(sc, design_path);

    if (kind == "gains") {
        const SpacecraftParams par =
            SpacecraftParams::make(sc.inertia.J_of(sc.mu_true), sc.delta, sc.C, sc.K);
        const Eigen::VectorXd sigma0 = current_sigma(sc.disturbance, sc.design.unknown);
        const LyapunovCertificate cert = optimize_epsilons(par, d, sc.gains, sigma0);
        const GainCheckReport rep = check_gain_conditions(cert, sc.gains, par, d, sigma0);
        std::printf("gain conditions          %s\n", rep.satisfied ? "satisfied" : "NOT satisfied");
        std::printf("  k1 %.6g (min 1)        margin %+.6g\n", sc.gains.k1, rep.margin_k1);
        std::printf("  k2 %.6g (min %.6g)     margin %+.6g\n", sc.gains.k2, rep.k2_required,
                    rep.margin_k2);
        std::printf("  p  %.6g (min %.6g)     margin %+.6g\n", rep.p, rep.p_required,
                    rep.margin_p);
        std::printf("  s  %.6g (min %.6g)     margin %+.6g\n", rep.s, rep.s_required,
                    rep.margin_s);
        std::printf("  lambda(P) in [%.6g, %.6g]\n", rep.beta1, rep.beta2);
        json j;
        j["kind"] = "gains";
        j["satisfied"] = rep.satisfied;
        j["k2_required"] = rep.k2_required;
        j["p_required"] = rep.p_required;
        j["s_required"] = rep.s_required;
        j["p"] = rep.p;
        j["s"] = rep.s;
        j["margins"] = {{"k1", rep.margin_k1},
                        {"k2", rep.margin_k2},
                        {"p", rep.margin_p},
                        {"s", rep.margin_s}};
        json eps = json::array();
        for (double e : rep.eps) eps.push_back(e);
        j["eps"] = std::move(eps);
        j["beta"] = {rep.beta1, rep.beta2};
        return report_out(j, out_path, rep.satisfied ? 0 : 2);
    }

    if (traj_path.empty()) {
        throw UsageError("usage: check " + kind + " requires a trajectory CSV argument");
    }
    const std::vector<TelemetryRecord> traj = read_trajectory_csv(traj_path);

    if (kind == "pe" || kind == "convergence") {
        const ReplayedTruth rt = replay_truth(sc, sc.t_final);
        const TruthContext truth{current_sigma(rt.model, sc.design.unknown), rt.mu, rt.model};
        PESignalConfig pe_cfg;
        pe_cfg.A0 = Eigen::MatrixXd::Zero(d.r, d.n_mu);
        pe_cfg.t0 = rt.segment_start;
        const ConvergenceReport rep = estimate_convergence_report(
            traj, d, sc.inertia, truth, rt.segment_start, sc.t_final, pe_cfg);

        json j;
        j["window"] = {rep.window_start, rep.window_end};
        j["pe"] = {{"is_pe", rep.pe.is_pe},
                   {"min_gram_eig", rep.pe.min_gram_eig},
                   {"windows", rep.pe.windows},
                   {"b", vec_json(rep.pe.b)},
                   {"T0", pe_cfg.T0},
                   {"theta", pe_cfg.theta}};
        if (kind == "pe") {
            j["kind"] = "pe";
            std::printf("PE verdict               %s\n", rep.pe.is_pe ? "PE" : "not PE");
            std::printf("  window Gram infimum    %.6g (threshold %.6g)\n", rep.pe.min_gram_eig,
                        pe_cfg.theta * pe_cfg.theta);
            std::printf("  windows tested         %d\n", rep.pe.windows);
            return report_out(j, out_path, rep.pe.is_pe ? 0 : 2);
        }

        j["kind"] = "convergence";
        j["R_true"] = vec_json(rep.R_true);
        j["R_hat_tail_mean"] = vec_json(rep.R_hat_tail_mean);
        j["R_tilde_tail_max"] = vec_json(rep.R_tilde_tail_max);
        j["converged"] = rep.converged;
        j["sigma_hat"] = rep.sigma_hat;
        j["residual_tail"] = rep.residual_tail;
        j["limits"] = {{"A_zeta", rep.lim_A_zeta},
                       {"T_rho", rep.lim_T_rho},
                       {"y_rho", rep.lim_y_rho}};
        bool freq_ok = true;
        const int freq_off = d.n_mu + d.ell() * d.n_mu;
        for (int i = 0; i < d.ell(); ++i) {
            freq_ok = freq_ok && rep.converged[static_cast<size_t>(freq_off + i)];
        }
        j["satisfied"] = freq_ok;
        std::printf("convergence window       [%.6g, %.6g]\n", rep.window_start, rep.window_end);
        for (Eigen::Index i = 0; i < rep.R_true.size(); ++i) {
            std::printf("  R[%ld] true %-10.6g tail mean %-12.6g max|err| %-10.6g %s\n",
                        static_cast<long>(i + 1), rep.R_true(i), rep.R_hat_tail_mean(i),
                        rep.R_tilde_tail_max(i),
                        rep.converged[static_cast<size_t>(i)] ? "converged" : "not converged");
        }
        for (size_t k = 0; k < rep.sigma_hat.size(); ++k) {
            std::printf("  sigma_hat[%zu]          %.6g\n", k + 1, rep.sigma_hat[k]);
        }
        std::printf("  residual tail          %.6g\n", rep.residual_tail);
        std::printf("  limits (A-zeta, T-rho, y-rho): %.3e %.3e %.3e\n", rep.lim_A_zeta,
                    rep.lim_T_rho, rep.lim_y_rho);
        std::printf("  frequency estimates    %s\n", freq_ok ? "converged" : "NOT converged");
        return report_out(j, out_path, freq_ok ? 0 : 2);
    }

    if (kind == "lyapunov") {
        if (!traj.front().has_lyapunov) {
            throw SchemaError("schema: trajectory has no Lyapunov columns (enable analysis)");
        }
        // Check V monotone on record pairs not straddling an event and with
        // adaptation active; per-step slack 1e-6 * max(1, V).
        double worst = 0.0;
        long checked = 0;
        bool satisfied = true;
        json segs = json::array();
        for (size_t i = 0; i + 1 < traj.size(); ++i) {
            const double t0 = traj[i].t, t1 = traj[i + 1].t;
            bool straddles = false;
            for (const auto& ev : sc.events) {
                if (ev.time > t0 && ev.time <= t1) straddles = true;
            }
            if (straddles) continue;
            if (!replay_truth(sc, t0).adaptation) continue;
            ++checked;
            const double slack = 1e-6 * std::max(1.0, std::abs(traj[i].V));
            const double inc = traj[i + 1].V - traj[i].V;
            if (inc > slack) {
                satisfied = false;
                worst = std::max(worst, inc - slack);
            }
        }
        std::printf("Lyapunov monotonicity    %s\n", satisfied ? "satisfied" : "VIOLATED");
        std::printf("  record pairs checked   %ld\n", checked);
        std::printf("  worst excess increase  %.6g\n", worst);
        json j;
        j["kind"] = "lyapunov";
        j["satisfied"] = satisfied;
        j["pairs_checked"] = checked;
        j["worst_excess_increase"] = worst;
        return report_out(j, out_path, satisfied ? 0 : 2);
    }

    throw UsageError("usage: unknown check kind '" + kind +
                     "' (expected gains|pe|lyapunov|convergence)");
}

struct CheckLine {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string cmp;  // "<" or ">"
};

int cmd_reproduce(const std::string& out_dir, double dt_override, int decimate_override,
                  bool force) {
    Scenario sc = example_scenario();
    if (dt_override > 0.0) sc.dt = dt_override;
    if (decimate_override > 0) sc.decimate = decimate_override;
    // Coarser steps relax the behavioral gates proportionally.
    const double tolf = std::max(1.0, sc.dt / 1e-3);
    ensure_out_dir(out_dir, force);
    const fs::path dir(out_dir);

    const std::string scenario_path = (dir / "scenario.json").string();
    const std::string design_path = (dir / "design.json").string();
    const std::string traj_path = (dir / "trajectory.csv").string();
    const std::string checks_path = (dir / "checks.json").string();
    const std::string manifest_path = (dir / "manifest.json").string();

    save_scenario(sc, scenario_path);

    InternalModelDesign design;
    try {
        design = synthesize_design(sc.disturbance, sc.design, sc.inertia.n_mu());
        save_design(design, design_path);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("design stage: ") + e.what());
    }

    SimResult res;
    try {
        res = run_scenario(sc, &design);
        write_trajectory_csv(traj_path, res.telemetry);
    } catch (const SchemaError&) {
        throw;
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("simulate stage: ") + e.what());
    }
    const auto& traj = res.telemetry;

    std::vector<CheckLine> checks;
    json jchecks;
    try {
        const double plateau_a = sup_qev(traj, 150.0, 200.0);
        const double spike_b = sup_qev(traj, 200.0, 400.0);
        const double settle_c = sup_qev(traj, 580.0, 600.0);
        const double settle_d = sup_qev(traj, 780.0, 800.0);
        checks.push_back({"phase_a_tracking", plateau_a < 1e-2 * tolf, plateau_a, 1e-2 * tolf, "<"});
        checks.push_back({"phase_b_disruption", spike_b > 5.0 * plateau_a, spike_b,
                          5.0 * plateau_a, ">"});
        checks.push_back({"phase_c_recovery", settle_c < 1e-2 * tolf, settle_c, 1e-2 * tolf, "<"});
        checks.push_back(
            {"phase_d_reconvergence", settle_d < 1e-2 * tolf, settle_d, 1e-2 * tolf, "<"});

        double eta_worst = 0.0;
        for (double t : {200.0, 600.0, 800.0}) {
            eta_worst = std::max(eta_worst, record_at(traj, t).eta.norm());
        }
        checks.push_back({"modal_settling", eta_worst < 1e-2 * tolf, eta_worst, 1e-2 * tolf, "<"});

        // Convergence analysis over the adaptive window [400, 600] with the
        // truth that was active there.
        const ReplayedTruth rt = replay_truth(sc, 400.0);
        const TruthContext truth{current_sigma(rt.model, sc.design.unknown), rt.mu, rt.model};
        PESignalConfig pe_cfg;
        pe_cfg.A0 = Eigen::MatrixXd::Zero(design.r, design.n_mu);
        pe_cfg.t0 = 400.0;
        const ConvergenceReport conv =
            estimate_convergence_report(traj, design, sc.inertia, truth, 400.0, 600.0, pe_cfg);
        const double sigma_err = std::abs(conv.sigma_hat[0] - truth.sigma(0));
        checks.push_back(
            {"frequency_estimate", sigma_err <= 0.05 * tolf, sigma_err, 0.05 * tolf, "<"});
        const bool mu_nonconv = !conv.converged[0];
        checks.push_back({"inertia_estimate_nonconvergent", mu_nonconv, mu_nonconv ? 1.0 : 0.0,
                          1.0, "="});
        const double lim_worst =
            std::max({conv.lim_A_zeta, conv.lim_T_rho, conv.lim_y_rho});
        checks.push_back(
            {"intermediate_limits", lim_worst < 1e-3 * tolf, lim_worst, 1e-3 * tolf, "<"});

        double aux_gap = 0.0;
        for (const auto& rec : traj) {
            const Eigen::Index n = rec.eta.size();
            aux_gap =
                std::max(aux_gap, (rec.z.tail(n) - rec.eta).cwiseAbs().maxCoeff());
        }
        checks.push_back(
            {"auxiliary_identity", aux_gap <= 1e-6 * tolf, aux_gap, 1e-6 * tolf, "<"});

        jchecks["convergence"] = {{"sigma_hat", conv.sigma_hat},
                                  {"R_true", vec_json(conv.R_true)},
                                  {"R_hat_tail_mean", vec_json(conv.R_hat_tail_mean)},
                                  {"R_tilde_tail_max", vec_json(conv.R_tilde_tail_max)},
                                  {"converged", conv.converged},
                                  {"residual_tail", conv.residual_tail},
                                  {"pe_of_y",
                                   {{"is_pe", conv.pe.is_pe},
                                    {"min_gram_eig", conv.pe.min_gram_eig},
                                    {"b", vec_json(conv.pe.b)}}}};
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("check stage: ") + e.what());
    }

    // Plot scripts and figures.
    try {
        const int n = res.dims.n, r = res.dims.r, n_mu = res.dims.n_mu;
        const int col_rhat1 = 1 + 4 + 3 + 2 * n + r + r * n_mu + 1;  // 1-based CSV column
        {
            std::ofstream gp((dir / "plot_attitude.gp").string(), std::ios::binary);
            gp << "set datafile separator ','\n"
               << "set xlabel 'time [s]'\nset ylabel 'attitude error quaternion'\n"
               << "set key outside\nset grid\n"
               << "plot 'trajectory.csv' using 1:2 with lines title 'qe1', \\\n"
               << "     'trajectory.csv' using 1:3 with lines title 'qe2', \\\n"
               << "     'trajectory.csv' using 1:4 with lines title 'qe3'\n";
        }
        {
            std::ofstream gp((dir / "plot_params.gp").string(), std::ios::binary);
            gp << "set datafile separator ','\n"
               << "set xlabel 'time [s]'\nset ylabel 'parameter estimates'\n"
               << "set key outside\nset grid\n"
               << "plot 'trajectory.csv' using 1:" << col_rhat1
               << " with lines title 'inertia estimate', \\\n"
               << "     'trajectory.csv' using 1:(sqrt(abs(column(" << col_rhat1 + 2
               << ")))) with lines title 'frequency estimate'\n";
        }
        std::vector<SvgSeries> att(3);
        const char* qlabels[3] = {"qe1", "qe2", "qe3"};
        for (int c = 0; c < 3; ++c) att[static_cast<size_t>(c)].label = qlabels[c];
        SvgSeries mu_hat{"inertia estimate", {}, {}};
        SvgSeries sig_hat{"frequency estimate", {}, {}};
        for (const auto& rec : traj) {
            for (int c = 0; c < 3; ++c) {
                att[static_cast<size_t>(c)].x.push_back(rec.t);
                att[static_cast<size_t>(c)].y.push_back(rec.q_e(c));
            }
            mu_hat.x.push_back(rec.t);
            mu_hat.y.push_back(rec.R_hat(0));
            sig_hat.x.push_back(rec.t);
            sig_hat.y.push_back(std::sqrt(std::max(0.0, rec.R_hat(2))));
        }
        write_svg_chart((dir / "attitude_error.svg").string(), "Attitude error quaternion",
                        "time [s]", "q_e components", att);
        write_svg_chart((dir / "adaptive_params.svg").string(), "Adaptive parameter estimates",
                        "time [s]", "estimate", {mu_hat, sig_hat});
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("plot stage: ") + e.what());
    }

    bool all_pass = true;
    json lines = json::array();
    std::printf("%-32s %-6s %14s %3s %14s\n", "check", "pass", "value", "", "threshold");
    for (const auto& c : checks) {
        all_pass = all_pass && c.pass;
        std::printf("%-32s %-6s %14.6g %3s %14.6g\n", c.name.c_str(), c.pass ? "PASS" : "FAIL",
                    c.value, c.cmp.c_str(), c.threshold);
        lines.push_back({{"name", c.name},
                         {"pass", c.pass},
                         {"value", c.value},
                         {"threshold", c.threshold},
                         {"comparison", c.cmp}});
    }
    jchecks["checks"] = std::move(lines);
    jchecks["all_pass"] = all_pass;
    jchecks["dt"] = sc.dt;
    jchecks["tolerance_factor"] = tolf;
    write_json_file(jchecks, checks_path);

    json extra;
    extra["dt"] = sc.dt;
    extra["decimate"] = sc.decimate;
    extra["records"] = traj.size();
    write_manifest(manifest_path, kVersion,
                   {{"scenario", scenario_path},
                    {"design", design_path},
                    {"trajectory", traj_path},
                    {"checks", checks_path}},
                   extra);
    std::printf("artifacts in %s\n", out_dir.c_str());
    return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive internal-model attitude tracking for flexible spacecraft"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string scenario_path, design_path, out_path, check_kind, traj_path;
    double dt_override = 0.0;
    int decimate_override = 0;
    bool force = false, seedless = false;

    auto* cd = app.add_subcommand("design", "Synthesize and export the internal-model design");
    cd->add_option("--scenario", scenario_path, "Scenario JSON")->required();
    cd->add_option("--out", out_path, "Design JSON to write")->required();
    cd->add_flag("--force", force, "Overwrite existing output");
    cd->add_flag("--seedless", seedless, "Assert the run uses no randomness (always true)");

    auto* cs = app.add_subcommand("simulate", "Run a scenario and write trajectory + manifest");
    cs->add_option("--scenario", scenario_path, "Scenario JSON")->required();
    cs->add_option("--design", design_path, "Use a previously exported design");
    cs->add_option("--out", out_path, "Output directory")->required();
    cs->add_option("--dt", dt_override, "Override integration step");
    cs->add_option("--decimate", decimate_override, "Override telemetry decimation");
    cs->add_flag("--force", force, "Write into a non-empty directory");
    cs->add_flag("--seedless", seedless, "Assert the run uses no randomness (always true)");

    auto* cc = app.add_subcommand("check", "Analyze a run (gains|pe|lyapunov|convergence)");
    cc->add_option("kind", check_kind, "gains|pe|lyapunov|convergence")->required();
    cc->add_option("trajectory", traj_path, "Trajectory CSV (not needed for 'gains')");
    cc->add_option("--scenario", scenario_path, "Scenario JSON")->required();
    cc->add_option("--design", design_path, "Use a previously exported design");
    cc->add_option("--out", out_path, "Write the JSON report here");
    cc->add_flag("--seedless", seedless, "Assert the run uses no randomness (always true)");

    auto* cr = app.add_subcommand("reproduce-example",
                                  "Run the built-in demonstration and verify its checks");
    cr->add_option("--out", out_path, "Output directory")->required();
    cr->add_option("--dt", dt_override, "Override integration step (relaxes gates)");
    cr->add_option("--decimate", decimate_override, "Override telemetry decimation");
    cr->add_flag("--force", force, "Write into a non-empty directory");
    cr->add_flag("--seedless", seedless, "Assert the run uses no randomness (always true)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help/--version
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    }

    try {
        if (cd->parsed()) return cmd_design(scenario_path, out_path, force);
        if (cs->parsed()) {
            return cmd_simulate(scenario_path, design_path, out_path, dt_override,
                                decimate_override, force);
        }
        if (cc->parsed()) {
            return cmd_check(check_kind, traj_path, scenario_path, design_path, out_path);
        }
        if (cr->parsed()) {
            return cmd_reproduce(out_path, dt_override, decimate_override, force);
        }
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: runtime: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
