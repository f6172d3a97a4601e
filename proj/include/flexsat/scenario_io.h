#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "flexsat/sim.h"

namespace flexsat {

// Malformed or out-of-contract input files. The CLI maps this (and bad
// arguments) to exit code 2, as opposed to runtime failures which exit 1.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scenario files are versioned JSON; matrices are nested row-major arrays,
// axis and tone references are 1-based on disk and 0-based in memory.
nlohmann::json scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const nlohmann::json& j);
void save_scenario(const Scenario& sc, const std::string& path);
Scenario load_scenario(const std::string& path);

// Frozen synthesis output, exported so a run can be reproduced without
// re-deriving the design. Numbers round-trip bit exactly (shortest
// representation that reparses to the same double).
nlohmann::json design_to_json(const InternalModelDesign& d);
InternalModelDesign design_from_json(const nlohmann::json& j);
void save_design(const InternalModelDesign& d, const std::string& path);
InternalModelDesign load_design(const std::string& path);

// Trajectory CSV: fixed header, %.17g values, UNIX newlines, one row per
// telemetry record. The Lyapunov columns appear only when the run carried a
// certificate.
void write_trajectory_csv(const std::string& path, const std::vector<TelemetryRecord>& traj);
std::vector<TelemetryRecord> read_trajectory_csv(const std::string& path);

// 64-bit FNV-1a over raw file bytes.
std::uint64_t fnv1a_file(const std::string& path);
std::string fnv1a_hex(std::uint64_t h);

// Run manifest: tool version, per-file role/path/hash table and free-form
// metadata, written as JSON.
void write_manifest(const std::string& path, const std::string& tool_version,
                    const std::vector<std::pair<std::string, std::string>>& files,
                    const nlohmann::json& extra);

}  // namespace flexsat
