#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "flexsat/example.h"
#include "flexsat/scenario_io.h"
#include "flexsat/sim.h"

using namespace flexsat;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void spit(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out << bytes;
}

std::vector<TelemetryRecord> tiny_run(bool lyapunov) {
    Scenario sc = example_scenario();
    sc.t_final = 0.3;
    sc.decimate = 100;
    sc.events.clear();
    if (lyapunov) {
        sc.analysis.enabled = true;
        sc.analysis.optimize = false;  // plain p = s = 1 certificate
    }
    return run_scenario(sc).telemetry;
}

}  // namespace

TEST_CASE("scenario JSON round trip is lossless") {
    const Scenario sc = example_scenario();
    const json j = scenario_to_json(sc);
    const Scenario back = scenario_from_json(j);
    CHECK(scenario_to_json(back) == j);
    CHECK(back.name == sc.name);
    CHECK(back.events.size() == sc.events.size());
    CHECK(back.design.unknown.size() == 1);
    CHECK(back.design.unknown[0].axis == 2);  // 0-based in memory
    CHECK(back.q0.w == sc.q0.w);
}

TEST_CASE("scenario file save and load") {
    const Scenario sc = example_scenario();
    const std::string path = "io_scenario.json";
    save_scenario(sc, path);
    const Scenario back = load_scenario(path);
    CHECK(scenario_to_json(back) == scenario_to_json(sc));
    std::remove(path.c_str());
}

TEST_CASE("missing scenario file is a schema error") {
    CHECK_THROWS_AS(load_scenario("does_not_exist.json"), SchemaError);
}

TEST_CASE("structural schema violations are rejected with context") {
    const json good = scenario_to_json(example_scenario());

    json j = good;
    j.erase("gains");
    CHECK_THROWS_AS(scenario_from_json(j), SchemaError);

    j = good;
    j["initial"]["q"] = {0.1, 0.2, 0.3};  // needs 4 entries
    CHECK_THROWS_AS(scenario_from_json(j), SchemaError);

    j = good;
    j["design"]["unknown"][0]["axis"] = 5;  // axes are 1..3 on disk
    CHECK_THROWS_AS(scenario_from_json(j), SchemaError);

    j = good;
    j["events"][0]["changes"][0]["type"] = "warp";
    CHECK_THROWS_AS(scenario_from_json(j), SchemaError);

    j = good;
    j["integration"]["t_final"] = "soon";
    CHECK_THROWS_AS(scenario_from_json(j), SchemaError);

    j = good;
    j["schema_version"] = 99;
    CHECK_THROWS_AS(scenario_from_json(j), SchemaError);
}

TEST_CASE("domain problems pass the schema layer and fail at run time") {
    // duplicate in-axis frequencies are well-formed JSON but an invalid model
    json j = scenario_to_json(example_scenario());
    j["disturbance"]["axes"][0]["tones"] = {
        {{"amplitude", 1.0}, {"frequency", 0.8}, {"phase", 0.0}},
        {{"amplitude", 2.0}, {"frequency", 0.8}, {"phase", 0.0}}};
    Scenario sc;
    CHECK_NOTHROW(sc = scenario_from_json(j));
    CHECK_THROWS_WITH_AS(run_scenario(sc), doctest::Contains("axis 1"),
                         std::invalid_argument);
}

TEST_CASE("design JSON round trip preserves every matrix bit for bit") {
    const Scenario sc = example_scenario();
    const InternalModelDesign d =
        synthesize_design(sc.disturbance, sc.design, sc.inertia.n_mu());
    const std::string path = "io_design.json";
    save_design(d, path);
    const InternalModelDesign back = load_design(path);

    CHECK(back.r == d.r);
    CHECK(back.n_mu == d.n_mu);
    CHECK((back.M - d.M).norm() == 0.0);
    CHECK((back.N - d.N).norm() == 0.0);
    CHECK((back.Psi - d.Psi).norm() == 0.0);
    CHECK((back.T_nominal - d.T_nominal).norm() == 0.0);
    CHECK((back.E0 - d.E0).norm() == 0.0);
    REQUIRE(back.E_blocks.size() == d.E_blocks.size());
    CHECK((back.E_blocks[0] - d.E_blocks[0]).norm() == 0.0);
    CHECK(back.basis.exponents == d.basis.exponents);
    CHECK(back.sylvester_residual == d.sylvester_residual);
    for (int i = 0; i < 3; ++i) {
        CHECK(back.axes[i].freqs == d.axes[i].freqs);
        CHECK(back.axes[i].sigma_slot == d.axes[i].sigma_slot);
        CHECK(back.r_axis[i] == d.r_axis[i]);
        CHECK((back.mn[i].M - d.mn[i].M).norm() == 0.0);
    }
    std::remove(path.c_str());
}

TEST_CASE("design schema dimension checks") {
    const Scenario sc = example_scenario();
    const InternalModelDesign d =
        synthesize_design(sc.disturbance, sc.design, sc.inertia.n_mu());
    json j = design_to_json(d);
    j["r"] = 7;  // inconsistent with the stored matrices
    CHECK_THROWS_AS(design_from_json(j), SchemaError);
}

TEST_CASE("trajectory CSV round trip") {
    for (bool lyap : {false, true}) {
        const std::vector<TelemetryRecord> traj = tiny_run(lyap);
        REQUIRE(traj.size() >= 2);
        const std::string path = "io_traj.csv";
        write_trajectory_csv(path, traj);
        const std::vector<TelemetryRecord> back = read_trajectory_csv(path);
        REQUIRE(back.size() == traj.size());
        for (size_t i = 0; i < traj.size(); ++i) {
            CHECK(back[i].t == traj[i].t);
            CHECK((back[i].q_e - traj[i].q_e).norm() == 0.0);
            CHECK((back[i].omega_e - traj[i].omega_e).norm() == 0.0);
            CHECK((back[i].eta - traj[i].eta).norm() == 0.0);
            CHECK((back[i].v - traj[i].v).norm() == 0.0);
            CHECK((back[i].zeta - traj[i].zeta).norm() == 0.0);
            CHECK((back[i].R_hat - traj[i].R_hat).norm() == 0.0);
            CHECK((back[i].u - traj[i].u).norm() == 0.0);
            CHECK((back[i].d - traj[i].d).norm() == 0.0);
            CHECK((back[i].z - traj[i].z).norm() == 0.0);
            CHECK(back[i].has_lyapunov == lyap);
            if (lyap) {
                CHECK(back[i].V == traj[i].V);
                CHECK(back[i].V3 == traj[i].V3);
            }
        }
        std::remove(path.c_str());
    }
}

TEST_CASE("malformed trajectory files are schema errors") {
    const std::vector<TelemetryRecord> traj = tiny_run(false);
    const std::string path = "io_bad.csv";
    write_trajectory_csv(path, traj);
    const std::string bytes = slurp(path);

    // truncated mid-row
    spit(path, bytes.substr(0, bytes.size() - 20));
    CHECK_THROWS_AS(read_trajectory_csv(path), SchemaError);

    // non-numeric field
    std::string corrupted = bytes;
    corrupted.replace(corrupted.find('\n') + 3, 2, "xy");
    spit(path, corrupted);
    CHECK_THROWS_AS(read_trajectory_csv(path), SchemaError);

    // empty file
    spit(path, "");
    CHECK_THROWS_AS(read_trajectory_csv(path), SchemaError);

    // header only
    spit(path, bytes.substr(0, bytes.find('\n') + 1));
    CHECK_THROWS_AS(read_trajectory_csv(path), SchemaError);

    // unknown header column
    spit(path, "t,bogus\n0,1\n");
    CHECK_THROWS_AS(read_trajectory_csv(path), SchemaError);

    std::remove(path.c_str());
    CHECK_THROWS_AS(read_trajectory_csv("io_missing.csv"), SchemaError);
}

TEST_CASE("file hashing matches the FNV-1a reference values") {
    const std::string path = "io_hash.bin";
    spit(path, "");
    CHECK(fnv1a_hex(fnv1a_file(path)) == "cbf29ce484222325");
    spit(path, "a");
    CHECK(fnv1a_hex(fnv1a_file(path)) == "af63dc4c8601ec8c");
    std::remove(path.c_str());
}

TEST_CASE("manifests are deterministic and carry no timestamps") {
    const std::string f = "io_manifest_file.txt";
    spit(f, "payload");
    const std::string m1 = "io_manifest1.json", m2 = "io_manifest2.json";
    json extra;
    extra["note"] = "fixture";
    write_manifest(m1, "9.9.9", {{"data", f}}, extra);
    write_manifest(m2, "9.9.9", {{"data", f}}, extra);
    CHECK(slurp(m1) == slurp(m2));

    const json j = json::parse(slurp(m1));
    CHECK(j["tool"]["version"] == "9.9.9");
    CHECK(j["files"][0]["role"] == "data");
    CHECK(j["files"][0]["fnv1a"].is_string());
    CHECK(j["note"] == "fixture");
    CHECK_FALSE(j.contains("timestamp"));
    CHECK_FALSE(j.contains("created_at"));
    std::remove(f.c_str());
    std::remove(m1.c_str());
    std::remove(m2.c_str());
}
