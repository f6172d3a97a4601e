#include "flexsat/scenario_io.h"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace flexsat {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw SchemaError("schema: " + msg); }

const json& need(const json& j, const char* key, const std::string& ctx) {
    if (!j.is_object() || !j.contains(key)) fail(ctx + ": missing field '" + key + "'");
    return j.at(key);
}

double need_num(const json& j, const char* key, const std::string& ctx) {
    const json& v = need(j, key, ctx);
    if (!v.is_number()) fail(ctx + ": field '" + key + "' must be a number");
    return v.get<double>();
}

int need_int(const json& j, const char* key, const std::string& ctx) {
    const json& v = need(j, key, ctx);
    if (!v.is_number_integer()) fail(ctx + ": field '" + key + "' must be an integer");
    return v.get<int>();
}

bool need_bool(const json& j, const char* key, const std::string& ctx) {
    const json& v = need(j, key, ctx);
    if (!v.is_boolean()) fail(ctx + ": field '" + key + "' must be a boolean");
    return v.get<bool>();
}

Eigen::VectorXd as_vector(const json& v, const std::string& ctx) {
    if (!v.is_array()) fail(ctx + ": expected an array of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) fail(ctx + ": expected an array of numbers");
        out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
    }
    return out;
}

Eigen::MatrixXd as_matrix(const json& v, const std::string& ctx) {
    if (!v.is_array()) fail(ctx + ": expected a row-major nested array");
    const size_t rows = v.size();
    size_t cols = 0;
    if (rows > 0) {
        if (!v[0].is_array()) fail(ctx + ": expected a row-major nested array");
        cols = v[0].size();
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t i = 0; i < rows; ++i) {
        if (!v[i].is_array() || v[i].size() != cols) fail(ctx + ": ragged matrix rows");
        for (size_t j = 0; j < cols; ++j) {
            if (!v[i][j].is_number()) fail(ctx + ": matrix entries must be numbers");
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                v[i][j].get<double>();
        }
    }
    return out;
}

json vec_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json mat_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail("'" + path + "' is not valid JSON: " + e.what());
    }
    return j;
}

void dump_file(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void check_version(const json& j, const std::string& ctx) {
    if (need_int(j, "schema_version", ctx) != 1) fail(ctx + ": unsupported schema_version");
}

}  // namespace

json scenario_to_json(const Scenario& sc) {
    json j;
    j["schema_version"] = 1;
    if (!sc.name.empty()) j["name"] = sc.name;

    json spacecraft;
    spacecraft["inertia_basis"] = {{"Lbar1", mat_to_json(sc.inertia.Lbar1)},
                                   {"Lbar0", vec_to_json(sc.inertia.Lbar0)}};
    spacecraft["mu_true"] = vec_to_json(sc.mu_true);
    spacecraft["delta"] = mat_to_json(sc.delta);
    spacecraft["C"] = mat_to_json(sc.C);
    spacecraft["K"] = mat_to_json(sc.K);
    j["spacecraft"] = std::move(spacecraft);

    json axes = json::array();
    for (const auto& ax : sc.disturbance.axes) {
        json tones = json::array();
        for (const auto& tone : ax.tones) {
            tones.push_back({{"amplitude", tone.amplitude},
                             {"frequency", tone.frequency},
                             {"phase", tone.phase}});
        }
        axes.push_back({{"bias", ax.bias}, {"tones", std::move(tones)}});
    }
    j["disturbance"] = {{"axes", std::move(axes)}};

    json design;
    json unknown = json::array();
    for (const auto& u : sc.design.unknown) {
        unknown.push_back({{"axis", u.axis + 1}, {"tone", u.tone + 1}});
    }
    design["unknown"] = std::move(unknown);
    json expo = json::array();
    for (const auto& row : sc.design.basis.exponents) expo.push_back(row);
    design["basis"] = {{"n_sigma", sc.design.basis.n_sigma}, {"exponents", std::move(expo)}};
    design["nominal_sigma"] = vec_to_json(sc.design.nominal_sigma);
    if (sc.design.assumed_sigma.size() > 0) {
        design["assumed_sigma"] = vec_to_json(sc.design.assumed_sigma);
    }
    if (sc.design.assumed_mu.size() > 0) design["assumed_mu"] = vec_to_json(sc.design.assumed_mu);
    design["grid"] = {{"min", vec_to_json(sc.design.grid_min)},
                      {"max", vec_to_json(sc.design.grid_max)},
                      {"points", sc.design.grid_points}};
    bool any_poles = false;
    for (const auto& p : sc.design.m_poles) any_poles = any_poles || !p.empty();
    if (any_poles) {
        json poles = json::array();
        for (const auto& axis_poles : sc.design.m_poles) {
            json ap = json::array();
            for (const auto& p : axis_poles) ap.push_back({{"re", p.real()}, {"im", p.imag()}});
            poles.push_back(std::move(ap));
        }
        design["m_poles"] = std::move(poles);
    }
    j["design"] = std::move(design);

    j["gains"] = {{"k1", sc.gains.k1},
                  {"k2", sc.gains.k2},
                  {"k", sc.gains.k},
                  {"adaptation_enabled", sc.gains.adaptation_enabled}};

    json initial;
    initial["q"] = {sc.q0.v(0), sc.q0.v(1), sc.q0.v(2), sc.q0.w};
    initial["q_d"] = {sc.q_d.v(0), sc.q_d.v(1), sc.q_d.v(2), sc.q_d.w};
    initial["omega"] = {sc.omega0(0), sc.omega0(1), sc.omega0(2)};
    initial["eta"] = vec_to_json(sc.eta0);
    initial["eta_dot"] = vec_to_json(sc.eta_dot0);
    if (sc.R_hat0.size() > 0) initial["R_hat"] = vec_to_json(sc.R_hat0);
    j["initial"] = std::move(initial);

    j["integration"] = {{"t_final", sc.t_final}, {"dt", sc.dt}, {"decimate", sc.decimate}};

    json events = json::array();
    for (const auto& ev : sc.events) {
        json changes = json::array();
        for (const auto& ch : ev.changes) {
            switch (ch.kind) {
                case EventChange::Kind::frequency:
                    changes.push_back({{"type", "frequency"},
                                       {"axis", ch.axis + 1},
                                       {"tone", ch.tone + 1},
                                       {"value", ch.value}});
                    break;
                case EventChange::Kind::inertia:
                    changes.push_back({{"type", "inertia"}, {"mu", vec_to_json(ch.mu)}});
                    break;
                case EventChange::Kind::adaptation:
                    changes.push_back({{"type", "adaptation"}, {"enabled", ch.enabled}});
                    break;
            }
        }
        events.push_back({{"time", ev.time}, {"changes", std::move(changes)}});
    }
    j["events"] = std::move(events);

    if (sc.analysis.enabled) {
        json an = {{"enabled", true}, {"optimize", sc.analysis.optimize}};
        if (!sc.analysis.optimize) {
            an["p"] = sc.analysis.p;
            an["s"] = sc.analysis.s;
            json eps = json::array();
            for (double e : sc.analysis.eps) eps.push_back(e);
            an["eps"] = std::move(eps);
        }
        j["analysis"] = std::move(an);
    }
    return j;
}

Scenario scenario_from_json(const json& j) {
    check_version(j, "scenario");
    Scenario sc;
    if (j.contains("name")) {
        if (!j.at("name").is_string()) fail("scenario: 'name' must be a string");
        sc.name = j.at("name").get<std::string>();
    }

    const json& sp = need(j, "spacecraft", "scenario");
    const json& ib = need(sp, "inertia_basis", "spacecraft");
    sc.inertia.Lbar1 = as_matrix(need(ib, "Lbar1", "inertia_basis"), "inertia_basis.Lbar1");
    const Eigen::VectorXd lbar0 = as_vector(need(ib, "Lbar0", "inertia_basis"), "inertia_basis.Lbar0");
    if (sc.inertia.Lbar1.rows() != 6 || lbar0.size() != 6) {
        fail("inertia_basis: Lbar1 must have 6 rows and Lbar0 length 6");
    }
    sc.inertia.Lbar0 = lbar0;
    sc.mu_true = as_vector(need(sp, "mu_true", "spacecraft"), "spacecraft.mu_true");
    sc.delta = as_matrix(need(sp, "delta", "spacecraft"), "spacecraft.delta");
    sc.C = as_matrix(need(sp, "C", "spacecraft"), "spacecraft.C");
    sc.K = as_matrix(need(sp, "K", "spacecraft"), "spacecraft.K");

    const json& dist = need(j, "disturbance", "scenario");
    const json& axes = need(dist, "axes", "disturbance");
    if (!axes.is_array() || axes.size() != 3) fail("disturbance: 'axes' must list 3 axes");
    for (size_t a = 0; a < 3; ++a) {
        const json& ax = axes[a];
        const std::string ctx = "disturbance.axes[" + std::to_string(a + 1) + "]";
        sc.disturbance.axes[a].bias = need_num(ax, "bias", ctx);
        const json& tones = need(ax, "tones", ctx);
        if (!tones.is_array()) fail(ctx + ": 'tones' must be an array");
        for (const json& tj : tones) {
            Tone tone;
            tone.amplitude = need_num(tj, "amplitude", ctx + ".tones");
            tone.frequency = need_num(tj, "frequency", ctx + ".tones");
            tone.phase = need_num(tj, "phase", ctx + ".tones");
            sc.disturbance.axes[a].tones.push_back(tone);
        }
    }

    const json& dj = need(j, "design", "scenario");
    const json& unknown = need(dj, "unknown", "design");
    if (!unknown.is_array()) fail("design: 'unknown' must be an array");
    for (const json& uj : unknown) {
        UnknownFreq u;
        u.axis = need_int(uj, "axis", "design.unknown") - 1;
        u.tone = need_int(uj, "tone", "design.unknown") - 1;
        if (u.axis < 0 || u.axis > 2) fail("design.unknown: axis must be 1..3");
        if (u.tone < 0) fail("design.unknown: tone must be >= 1");
        sc.design.unknown.push_back(u);
    }
    const json& bj = need(dj, "basis", "design");
    sc.design.basis.n_sigma = need_int(bj, "n_sigma", "design.basis");
    const json& expo = need(bj, "exponents", "design.basis");
    if (!expo.is_array()) fail("design.basis: 'exponents' must be an array");
    for (const json& row : expo) {
        if (!row.is_array()) fail("design.basis: exponent rows must be arrays");
        std::vector<int> r;
        for (const json& e : row) {
            if (!e.is_number_integer()) fail("design.basis: exponents must be integers");
            r.push_back(e.get<int>());
        }
        sc.design.basis.exponents.push_back(std::move(r));
    }
    sc.design.nominal_sigma =
        as_vector(need(dj, "nominal_sigma", "design"), "design.nominal_sigma");
    if (dj.contains("assumed_sigma")) {
        sc.design.assumed_sigma = as_vector(dj.at("assumed_sigma"), "design.assumed_sigma");
    }
    if (dj.contains("assumed_mu")) {
        sc.design.assumed_mu = as_vector(dj.at("assumed_mu"), "design.assumed_mu");
    }
    const json& grid = need(dj, "grid", "design");
    sc.design.grid_min = as_vector(need(grid, "min", "design.grid"), "design.grid.min");
    sc.design.grid_max = as_vector(need(grid, "max", "design.grid"), "design.grid.max");
    sc.design.grid_points = need_int(grid, "points", "design.grid");
    if (dj.contains("m_poles")) {
        const json& poles = dj.at("m_poles");
        if (!poles.is_array() || poles.size() != 3) fail("design: 'm_poles' must list 3 axes");
        for (size_t a = 0; a < 3; ++a) {
            if (!poles[a].is_array()) fail("design.m_poles: each axis needs an array");
            for (const json& pj : poles[a]) {
                sc.design.m_poles[a].emplace_back(need_num(pj, "re", "design.m_poles"),
                                                  need_num(pj, "im", "design.m_poles"));
            }
        }
    }

    const json& gj = need(j, "gains", "scenario");
    sc.gains.k1 = need_num(gj, "k1", "gains");
    sc.gains.k2 = need_num(gj, "k2", "gains");
    sc.gains.k = need_num(gj, "k", "gains");
    sc.gains.adaptation_enabled = need_bool(gj, "adaptation_enabled", "gains");

    const json& init = need(j, "initial", "scenario");
    const Eigen::VectorXd q = as_vector(need(init, "q", "initial"), "initial.q");
    const Eigen::VectorXd qd = as_vector(need(init, "q_d", "initial"), "initial.q_d");
    if (q.size() != 4 || qd.size() != 4) fail("initial: quaternions must have 4 entries [x y z w]");
    sc.q0.v = q.head<3>();
    sc.q0.w = q(3);
    sc.q_d.v = qd.head<3>();
    sc.q_d.w = qd(3);
    const Eigen::VectorXd om = as_vector(need(init, "omega", "initial"), "initial.omega");
    if (om.size() != 3) fail("initial: 'omega' must have 3 entries");
    sc.omega0 = om;
    sc.eta0 = as_vector(need(init, "eta", "initial"), "initial.eta");
    sc.eta_dot0 = as_vector(need(init, "eta_dot", "initial"), "initial.eta_dot");
    if (init.contains("R_hat")) sc.R_hat0 = as_vector(init.at("R_hat"), "initial.R_hat");

    const json& integ = need(j, "integration", "scenario");
    sc.t_final = need_num(integ, "t_final", "integration");
    sc.dt = need_num(integ, "dt", "integration");
    sc.decimate = need_int(integ, "decimate", "integration");

    if (j.contains("events")) {
        const json& events = j.at("events");
        if (!events.is_array()) fail("scenario: 'events' must be an array");
        for (const json& ej : events) {
            Event ev;
            ev.time = need_num(ej, "time", "events");
            const json& changes = need(ej, "changes", "events");
            if (!changes.is_array()) fail("events: 'changes' must be an array");
            for (const json& cj : changes) {
                const json& tj = need(cj, "type", "events.changes");
                if (!tj.is_string()) fail("events.changes: 'type' must be a string");
                const std::string type = tj.get<std::string>();
                EventChange ch;
                if (type == "frequency") {
                    ch.kind = EventChange::Kind::frequency;
                    ch.axis = need_int(cj, "axis", "events.changes") - 1;
                    ch.tone = need_int(cj, "tone", "events.changes") - 1;
                    ch.value = need_num(cj, "value", "events.changes");
                } else if (type == "inertia") {
                    ch.kind = EventChange::Kind::inertia;
                    ch.mu = as_vector(need(cj, "mu", "events.changes"), "events.changes.mu");
                } else if (type == "adaptation") {
                    ch.kind = EventChange::Kind::adaptation;
                    ch.enabled = need_bool(cj, "enabled", "events.changes");
                } else {
                    fail("events.changes: unknown type '" + type + "'");
                }
                ev.changes.push_back(std::move(ch));
            }
            sc.events.push_back(std::move(ev));
        }
    }

    if (j.contains("analysis")) {
        const json& an = j.at("analysis");
        sc.analysis.enabled = need_bool(an, "enabled", "analysis");
        if (an.contains("optimize")) sc.analysis.optimize = need_bool(an, "optimize", "analysis");
        if (!sc.analysis.optimize) {
            sc.analysis.p = need_num(an, "p", "analysis");
            sc.analysis.s = need_num(an, "s", "analysis");
            const Eigen::VectorXd eps = as_vector(need(an, "eps", "analysis"), "analysis.eps");
            if (eps.size() != 8) fail("analysis: 'eps' must have 8 entries");
            for (int i = 0; i < 8; ++i) sc.analysis.eps[static_cast<size_t>(i)] = eps(i);
        }
    }

    // Domain validation (frequency positivity, gain signs, event ordering)
    // is deferred to run_scenario/synthesize_design so those failures report
    // as runtime errors rather than malformed input.
    return sc;
}

void save_scenario(const Scenario& sc, const std::string& path) {
    dump_file(scenario_to_json(sc), path);
}

Scenario load_scenario(const std::string& path) { return scenario_from_json(parse_file(path)); }

json design_to_json(const InternalModelDesign& d) {
    json j;
    j["schema_version"] = 1;
    json axes = json::array();
    for (const auto& ax : d.axes) {
        json slots = json::array();
        for (int s : ax.sigma_slot) {
            if (s < 0) {
                slots.push_back(nullptr);
            } else {
                slots.push_back(s + 1);
            }
        }
        axes.push_back({{"bias", ax.bias}, {"freqs", ax.freqs}, {"sigma_slot", std::move(slots)}});
    }
    j["axes"] = std::move(axes);
    j["r_axis"] = {d.r_axis[0], d.r_axis[1], d.r_axis[2]};
    j["r"] = d.r;
    j["n_mu"] = d.n_mu;
    j["M"] = mat_to_json(d.M);
    j["N"] = mat_to_json(d.N);
    j["Psi"] = mat_to_json(d.Psi);
    j["T_nominal"] = mat_to_json(d.T_nominal);
    j["E0"] = mat_to_json(d.E0);
    json blocks = json::array();
    for (const auto& b : d.E_blocks) blocks.push_back(mat_to_json(b));
    j["E_blocks"] = std::move(blocks);
    json expo = json::array();
    for (const auto& row : d.basis.exponents) expo.push_back(row);
    j["basis"] = {{"n_sigma", d.basis.n_sigma}, {"exponents", std::move(expo)}};
    j["nominal_sigma"] = vec_to_json(d.nominal_sigma);
    j["residuals"] = {{"sylvester", d.sylvester_residual}, {"fit", d.fit_residual}};
    return j;
}

InternalModelDesign design_from_json(const json& j) {
    check_version(j, "design");
    InternalModelDesign d;
    const json& axes = need(j, "axes", "design");
    if (!axes.is_array() || axes.size() != 3) fail("design: 'axes' must list 3 axes");
    for (size_t a = 0; a < 3; ++a) {
        const json& ax = axes[a];
        const std::string ctx = "design.axes[" + std::to_string(a + 1) + "]";
        d.axes[a].bias = need_bool(ax, "bias", ctx);
        const json& freqs = need(ax, "freqs", ctx);
        const json& slots = need(ax, "sigma_slot", ctx);
        if (!freqs.is_array() || !slots.is_array() || freqs.size() != slots.size()) {
            fail(ctx + ": 'freqs' and 'sigma_slot' must be arrays of equal length");
        }
        for (size_t i = 0; i < freqs.size(); ++i) {
            if (!freqs[i].is_number()) fail(ctx + ": frequencies must be numbers");
            d.axes[a].freqs.push_back(freqs[i].get<double>());
            if (slots[i].is_null()) {
                d.axes[a].sigma_slot.push_back(-1);
            } else if (slots[i].is_number_integer()) {
                d.axes[a].sigma_slot.push_back(slots[i].get<int>() - 1);
            } else {
                fail(ctx + ": sigma_slot entries must be null or integers");
            }
        }
    }
    const json& ra = need(j, "r_axis", "design");
    if (!ra.is_array() || ra.size() != 3) fail("design: 'r_axis' must have 3 entries");
    for (size_t a = 0; a < 3; ++a) {
        if (!ra[a].is_number_integer()) fail("design: 'r_axis' entries must be integers");
        d.r_axis[a] = ra[a].get<int>();
    }
    d.r = need_int(j, "r", "design");
    d.n_mu = need_int(j, "n_mu", "design");
    d.M = as_matrix(need(j, "M", "design"), "design.M");
    d.N = as_matrix(need(j, "N", "design"), "design.N");
    d.Psi = as_matrix(need(j, "Psi", "design"), "design.Psi");
    d.T_nominal = as_matrix(need(j, "T_nominal", "design"), "design.T_nominal");
    d.E0 = as_matrix(need(j, "E0", "design"), "design.E0");
    const json& blocks = need(j, "E_blocks", "design");
    if (!blocks.is_array()) fail("design: 'E_blocks' must be an array");
    for (const json& b : blocks) d.E_blocks.push_back(as_matrix(b, "design.E_blocks"));
    const json& bj = need(j, "basis", "design");
    d.basis.n_sigma = need_int(bj, "n_sigma", "design.basis");
    const json& expo = need(bj, "exponents", "design.basis");
    if (!expo.is_array()) fail("design.basis: 'exponents' must be an array");
    for (const json& row : expo) {
        if (!row.is_array()) fail("design.basis: exponent rows must be arrays");
        std::vector<int> r;
        for (const json& e : row) {
            if (!e.is_number_integer()) fail("design.basis: exponents must be integers");
            r.push_back(e.get<int>());
        }
        d.basis.exponents.push_back(std::move(r));
    }
    d.nominal_sigma = as_vector(need(j, "nominal_sigma", "design"), "design.nominal_sigma");
    const json& res = need(j, "residuals", "design");
    d.sylvester_residual = need_num(res, "sylvester", "design.residuals");
    d.fit_residual = need_num(res, "fit", "design.residuals");

    if (d.r != d.r_axis[0] + d.r_axis[1] + d.r_axis[2]) fail("design: r must equal sum of r_axis");
    if (d.M.rows() != d.r || d.M.cols() != d.r || d.N.rows() != d.r || d.N.cols() != 3 ||
        d.Psi.rows() != 3 || d.Psi.cols() != d.r || d.T_nominal.rows() != d.r ||
        d.T_nominal.cols() != d.r || d.E0.rows() != 3 || d.E0.cols() != d.r) {
        fail("design: matrix dimensions inconsistent with r");
    }
    if (static_cast<int>(d.E_blocks.size()) != d.basis.ell()) {
        fail("design: E_blocks count must match the basis size");
    }
    for (const auto& b : d.E_blocks) {
        if (b.rows() != 3 || b.cols() != d.r) fail("design: E block dimensions inconsistent");
    }
    try {
        d.basis.validate();
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
    // Per-axis observer pairs are slices of the aggregate (M, N).
    int off = 0;
    for (size_t a = 0; a < 3; ++a) {
        const int ri = d.r_axis[a];
        d.mn[a].M = d.M.block(off, off, ri, ri);
        d.mn[a].N = d.N.block(off, static_cast<int>(a), ri, 1);
        off += ri;
    }
    return d;
}

void save_design(const InternalModelDesign& d, const std::string& path) {
    dump_file(design_to_json(d), path);
}

InternalModelDesign load_design(const std::string& path) {
    return design_from_json(parse_file(path));
}

namespace {

std::string csv_header(int n, int r, int n_mu, int n_R, bool lyapunov) {
    std::ostringstream os;
    os << "t,qe1,qe2,qe3,qe4,we1,we2,we3";
    for (int i = 1; i <= n; ++i) os << ",eta" << i;
    for (int i = 1; i <= n; ++i) os << ",etadot" << i;
    for (int i = 1; i <= r; ++i) os << ",v" << i;
    for (int i = 1; i <= r * n_mu; ++i) os << ",zeta" << i;
    for (int i = 1; i <= n_R; ++i) os << ",Rhat" << i;
    os << ",u1,u2,u3,d1,d2,d3";
    for (int i = 1; i <= 2 * n; ++i) os << ",z" << i;
    if (lyapunov) os << ",V,V1,V2,V3";
    return os.str();
}

void append_num(std::string& line, double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    line += ',';
    line += buf;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const std::vector<TelemetryRecord>& traj) {
    if (traj.empty()) throw std::invalid_argument("write_trajectory_csv: empty trajectory");
    const int n = static_cast<int>(traj.front().eta.size());
    const int r = static_cast<int>(traj.front().v.size());
    const int n_mu = static_cast<int>(traj.front().zeta.cols());
    const int n_R = static_cast<int>(traj.front().R_hat.size());
    const bool lyap = traj.front().has_lyapunov;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << csv_header(n, r, n_mu, n_R, lyap) << "\n";

    std::string line;
    char buf[40];
    for (const auto& rec : traj) {
        line.clear();
        std::snprintf(buf, sizeof(buf), "%.17g", rec.t);
        line += buf;
        for (int i = 0; i < 4; ++i) append_num(line, rec.q_e(i));
        for (int i = 0; i < 3; ++i) append_num(line, rec.omega_e(i));
        for (int i = 0; i < n; ++i) append_num(line, rec.eta(i));
        for (int i = 0; i < n; ++i) append_num(line, rec.eta_dot(i));
        for (int i = 0; i < r; ++i) append_num(line, rec.v(i));
        for (int i = 0; i < r; ++i)
            for (int k = 0; k < n_mu; ++k) append_num(line, rec.zeta(i, k));
        for (int i = 0; i < n_R; ++i) append_num(line, rec.R_hat(i));
        for (int i = 0; i < 3; ++i) append_num(line, rec.u(i));
        for (int i = 0; i < 3; ++i) append_num(line, rec.d(i));
        for (int i = 0; i < 2 * n; ++i) append_num(line, rec.z(i));
        if (lyap) {
            append_num(line, rec.V);
            append_num(line, rec.V1);
            append_num(line, rec.V2);
            append_num(line, rec.V3);
        }
        out << line << "\n";
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<TelemetryRecord> read_trajectory_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open '" + path + "'");
    // Every writer-produced row ends in '\n'; a missing terminal newline means
    // the file was cut off even when the surviving fields still parse.
    in.seekg(0, std::ios::end);
    if (in.tellg() > 0) {
        in.seekg(-1, std::ios::end);
        char last = 0;
        in.get(last);
        if (last != '\n') fail("'" + path + "': truncated file");
    }
    in.clear();
    in.seekg(0, std::ios::beg);
    std::string header;
    if (!std::getline(in, header)) fail("'" + path + "': empty file");
    if (!header.empty() && header.back() == '\r') header.pop_back();

    std::vector<std::string> names;
    {
        std::stringstream ss(header);
        std::string tok;
        while (std::getline(ss, tok, ',')) names.push_back(tok);
    }
    int n = 0, r = 0, zeta_cols = 0, n_R = 0, z_cols = 0;
    bool lyap = false;
    for (const auto& nm : names) {
        if (nm.rfind("etadot", 0) == 0) continue;
        if (nm.rfind("eta", 0) == 0) ++n;
        else if (nm.rfind("v", 0) == 0 && nm != "we1" && nm != "we2" && nm != "we3") ++r;
        else if (nm.rfind("zeta", 0) == 0) ++zeta_cols;
        else if (nm.rfind("Rhat", 0) == 0) ++n_R;
        else if (nm.rfind("z", 0) == 0) ++z_cols;
        else if (nm == "V") lyap = true;
    }
    if (z_cols != 2 * n) fail("'" + path + "': z column count does not match eta columns");
    const int n_mu = r > 0 ? zeta_cols / r : 0;
    if (r * n_mu != zeta_cols) fail("'" + path + "': zeta column count not divisible by v count");
    if (header != csv_header(n, r, n_mu, n_R, lyap)) {
        fail("'" + path + "': unexpected trajectory header layout");
    }
    const size_t expected = names.size();

    std::vector<TelemetryRecord> traj;
    std::string line;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> vals;
        vals.reserve(expected);
        size_t pos = 0;
        while (pos <= line.size()) {
            size_t next = line.find(',', pos);
            if (next == std::string::npos) next = line.size();
            const std::string tok = line.substr(pos, next - pos);
            try {
                size_t used = 0;
                vals.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                fail("'" + path + "' line " + std::to_string(lineno) + ": bad number '" + tok +
                     "'");
            }
            pos = next + 1;
            if (next == line.size()) break;
        }
        if (vals.size() != expected) {
            fail("'" + path + "' line " + std::to_string(lineno) + ": expected " +
                 std::to_string(expected) + " fields, got " + std::to_string(vals.size()));
        }
        TelemetryRecord rec;
        size_t c = 0;
        rec.t = vals[c++];
        for (int i = 0; i < 4; ++i) rec.q_e(i) = vals[c++];
        for (int i = 0; i < 3; ++i) rec.omega_e(i) = vals[c++];
        rec.eta.resize(n);
        for (int i = 0; i < n; ++i) rec.eta(i) = vals[c++];
        rec.eta_dot.resize(n);
        for (int i = 0; i < n; ++i) rec.eta_dot(i) = vals[c++];
        rec.v.resize(r);
        for (int i = 0; i < r; ++i) rec.v(i) = vals[c++];
        rec.zeta.resize(r, n_mu);
        for (int i = 0; i < r; ++i)
            for (int k = 0; k < n_mu; ++k) rec.zeta(i, k) = vals[c++];
        rec.R_hat.resize(n_R);
        for (int i = 0; i < n_R; ++i) rec.R_hat(i) = vals[c++];
        for (int i = 0; i < 3; ++i) rec.u(i) = vals[c++];
        for (int i = 0; i < 3; ++i) rec.d(i) = vals[c++];
        rec.z.resize(2 * n);
        for (int i = 0; i < 2 * n; ++i) rec.z(i) = vals[c++];
        if (lyap) {
            rec.has_lyapunov = true;
            rec.V = vals[c++];
            rec.V1 = vals[c++];
            rec.V2 = vals[c++];
            rec.V3 = vals[c++];
        }
        traj.push_back(std::move(rec));
    }
    if (traj.empty()) fail("'" + path + "': no data rows");
    return traj;
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open '" + path + "' for hashing");
    std::uint64_t h = 14695981039346656037ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
        if (got < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    return h;
}

std::string fnv1a_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

void write_manifest(const std::string& path, const std::string& tool_version,
                    const std::vector<std::pair<std::string, std::string>>& files,
                    const json& extra) {
    json j;
    j["schema_version"] = 1;
    j["tool"] = {{"name", "flexsat"}, {"version", tool_version}};
    json fl = json::array();
    for (const auto& [role, fpath] : files) {
        // Record only the file name so the artifact directory stays
        // relocatable and manifest bytes do not depend on --out.
        const size_t cut = fpath.find_last_of('/');
        const std::string name = cut == std::string::npos ? fpath : fpath.substr(cut + 1);
        fl.push_back({{"role", role}, {"path", name}, {"fnv1a", fnv1a_hex(fnv1a_file(fpath))}});
    }
    j["files"] = std::move(fl);
    if (extra.is_object()) {
        for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    }
    dump_file(j, path);
}

}  // namespace flexsat
