#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "kdvq/errors.hpp"

namespace kdvq::driver {

/** One batch run: a command name, its parameter map, an output directory for
 *  the artifacts, and the seed for randomized sweeps.  Parameters are
 *  validated against the command before any computation starts. */
struct RunConfig {
    std::string command;
    nlohmann::json parameters = nlohmann::json::object();
    std::filesystem::path output_dir;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

struct StageRecord {
    std::string name;
    double seconds = 0.0;
    bool ok = true;
    std::string detail;
};

struct RunResult {
    int exit_code = 0;
    nlohmann::json manifest;
};

/// Commands: airy-evolve, talbot, kdv-solve, smoothing-report, greens-verify,
/// gronwall-check, almost-periods, stepanov-demo, deift-pipeline.
const std::vector<std::string>& command_names();

/// Executes the run, writes CSV/JSON artifacts plus manifest.json under
/// config.output_dir, and returns the manifest.  Module errors become a
/// structured error record (error.json) and a nonzero exit code.
RunResult run(const RunConfig& config);

/// Manifest assembly: config echo + hash, versions, per-stage timings,
/// pass/fail per recorded check, and the error record when a stage failed.
nlohmann::json emit_manifest(const RunConfig& config, const std::vector<StageRecord>& stages,
                             const nlohmann::json& results, const nlohmann::json* error);

/// Manifest with the timing fields removed, for determinism comparisons.
nlohmann::json strip_timings(nlohmann::json manifest);

}  // namespace kdvq::driver
