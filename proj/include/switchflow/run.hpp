#pragma once

#include "switchflow/config.hpp"
#include "switchflow/model.hpp"
#include "switchflow/pde.hpp"
#include "switchflow/strategy.hpp"

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace switchflow {

inline constexpr const char* kArtifactVersion = "switchflow 1.0.0";

enum class Command { validate, solve, simulate, run };

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_module_error = 2,
    exit_validation_failed = 3,
    exit_gate_failed = 4,
};

struct Gate {
    std::string name;
    bool passed;
    double value;
    double threshold;
};

struct Timings {
    double solve_seconds = 0.0;
    double picard_seconds = 0.0;
    double simulate_seconds = 0.0;
};

struct RunSummary {
    Command command = Command::run;
    ValidationReport validation;
    std::vector<double> values_at_x0; ///< v_i(0, x0) per mode
    std::optional<ResidualReport> residuals;
    std::optional<double> surface_max_norm;
    std::optional<std::size_t> picard_iterations;
    std::optional<bool> picard_converged;
    std::optional<double> picard_gap_to_direct;
    std::optional<ValueEstimate> monte_carlo;
    std::optional<SwitchTailStats> tail;
    std::optional<std::size_t> total_switches;
    std::vector<Gate> gates;
    std::vector<std::string> files;
    std::string error;
    int exit_code = exit_ok;
    /// Wall-clock timings; reported on the log stream, kept out of the JSON.
    Timings timings;

    /// Deterministic for a fixed config: no timings, sorted keys.
    nlohmann::json to_json(const RunConfig& config) const;
};

nlohmann::json config_to_json(const RunConfig& config);

/**
 * Orchestrates validate -> solve (direct and, if enabled, Picard) -> policy ->
 * simulation -> report for `command`, writing artifacts under config.output.dir.
 * Module errors are caught and reported through exit_code and error.
 * Progress lines go to `log` when it is non-null.
 */
RunSummary run(const RunConfig& config, Command command, std::ostream* log = nullptr);

} // namespace switchflow
