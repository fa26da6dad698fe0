#pragma once

#include "switchflow/coefficient.hpp"
#include "switchflow/errors.hpp"
#include "switchflow/model.hpp"
#include "switchflow/pde.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace switchflow {

inline constexpr int kConfigVersion = 1;

/// A config file could not be read or did not match the schema.
class ConfigError : public InvalidInput {
public:
    ConfigError(const std::string& source, std::size_t line, const std::string& message);

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

struct ProblemSpec {
    std::size_t modes = 0;
    double horizon = 0.0;
    double loop_floor = kDefaultLoopFloor;
    AffineCoefficients drift;
    AffineCoefficients volatility;
    std::vector<AffineCoefficients> payoffs;             ///< index i - 1
    std::vector<std::vector<AffineCoefficients>> costs; ///< [i - 1][j - 1]

    SwitchingProblem build() const;
};

enum class LogSpaceSetting { automatic, on, off };

struct GridSpec {
    std::size_t time_steps = 100;
    std::size_t space_nodes = 201;
    std::optional<double> x_min;
    std::optional<double> x_max;
    LogSpaceSetting log_space = LogSpaceSetting::automatic;
};

struct SchemeSpec {
    Scheme scheme = Scheme::implicit_euler;
    bool picard = true;
    double tol = 1e-8;
    std::size_t max_iters = 50;
};

struct SimulationSpec {
    double x0 = 1.0;
    std::size_t start_mode = 0; ///< 0-based; the file uses 1-based labels
    std::size_t paths = 10000;
    std::uint64_t seed = 1;
    double slack = 0.05;
    std::optional<double> switch_tolerance;
};

struct OutputSpec {
    std::string dir = "switchflow-out";
    bool surfaces = true;
    bool executions = true;
    bool tail = true;
    bool paths = false;
};

struct RunConfig {
    std::string source = "<string>";
    ProblemSpec problem;
    GridSpec grid;
    SchemeSpec scheme;
    SimulationSpec simulation;
    OutputSpec output;
};

/**
 * Parses a coefficient: either a linear expression in x, |x| and t such as
 * "0.1|x| + 0.5t + 2" or "-x + t - 2", or four numbers
 * "x_coef abs_x_coef t_coef const". Throws InvalidInput on malformed text.
 */
AffineCoefficients parse_coefficient(std::string_view text);
std::string format_coefficient(const AffineCoefficients& c);

RunConfig parse_config(std::string_view text, const std::string& source = "<string>");
RunConfig load_config(const std::filesystem::path& path);

/// Space grid from the config: explicit bounds, or auto_space_grid around x0.
Grids make_grids(const RunConfig& config, const SwitchingProblem& problem);

} // namespace switchflow
