#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dichoteq/report.hpp"
#include "dichoteq/scenarios.hpp"
#include "dichoteq/window.hpp"

namespace dichoteq {

/// Parsed batch-run configuration. Everything a run touches (scenario,
/// window, tolerances, sampling) is pinned here so that a config plus a seed
/// reproduces the outputs byte for byte.
struct RunConfig {
    nlohmann::json scenario_params; // as given, window folded in
    std::string scenario_name;
    std::optional<nlohmann::json> inline_system;      // {"dim", "window", "matrices"}
    std::optional<nlohmann::json> inline_certificate; // certificate JSON; for a named
                                                      // scenario this overrides (claims)
                                                      // a different certificate

    Window window{-30, 30};
    double eps = 1e-9;
    double round_trip_tol = 1e-6;
    double residual_tol = 1e-8;
    double cert_tol = 1e-9;

    uint64_t seed = 42;
    int num_points = 100;
    int num_solutions = 10;
    int num_flow_samples = 40;
    int max_offset = 5;
    double xi_radius = 2.0;
    std::vector<double> deltas{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    int num_directions = 4;
    int modulus_points = 5;

    std::vector<double> alphas{0.5, 0.3, 0.2};
    int stepanov_L = 5;
    bool fault_injection = false;

    std::optional<nlohmann::json> forcing; // cmd bounded: {"constant": v} | {"table": ...}
    std::optional<nlohmann::json> nonlinear; // cmd bounded: saturating-plus-offset forcing

    std::string out_dir = "out";
};

/// Validates and normalizes a raw config document. Throws ConfigError.
RunConfig load_config(const nlohmann::json& doc);

/// Builds the scenario (from a family or inline tables) on the config window.
Scenario build_scenario(const RunConfig& cfg);

struct PipelineResult {
    int exit_code = 0; // 0 pass, 1 check failure (2 and 3 arrive as exceptions)
    nlohmann::json summary;
    VerificationReport detail;
    /// Additional named outputs, e.g. the plot-ready modulus ladder.
    std::vector<std::pair<std::string, std::string>> extra_files;
};

PipelineResult run_certify(const RunConfig& cfg);
PipelineResult run_bounded(const RunConfig& cfg);
PipelineResult run_verify(const RunConfig& cfg);
PipelineResult run_modulus(const RunConfig& cfg);

/// Writes summary.json and detail.csv under out_dir (created if needed).
void write_outputs(const PipelineResult& result, const std::string& out_dir);

} // namespace dichoteq
