#include "switchflow/run.hpp"

#include "switchflow/errors.hpp"
#include "switchflow/sde.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace switchflow {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

const char* command_name(Command c) {
    switch (c) {
    case Command::validate: return "validate";
    case Command::solve: return "solve";
    case Command::simulate: return "simulate";
    case Command::run: return "run";
    }
    return "run";
}

nlohmann::json coefficient_json(const AffineCoefficients& c) {
    return {{"x", c.x_coef}, {"abs_x", c.abs_x_coef}, {"t", c.t_coef}, {"const", c.const_term}};
}

class ArtifactWriter {
public:
    ArtifactWriter(std::filesystem::path dir, RunSummary& summary)
        : dir_(std::move(dir)), summary_(summary) {}

    template <typename Fn>
    void write(const std::string& name, Fn&& fn) {
        std::filesystem::create_directories(dir_);
        const auto path = dir_ / name;
        std::ofstream out(path);
        if (!out) throw Error("cannot write " + path.string());
        fn(out);
        summary_.files.push_back(name);
    }

private:
    std::filesystem::path dir_;
    RunSummary& summary_;
};

} // namespace

nlohmann::json config_to_json(const RunConfig& config) {
    const auto& p = config.problem;
    nlohmann::json payoffs = nlohmann::json::array();
    for (const auto& c : p.payoffs) payoffs.push_back(coefficient_json(c));
    nlohmann::json costs = nlohmann::json::array();
    for (const auto& row : p.costs) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& c : row) r.push_back(coefficient_json(c));
        costs.push_back(r);
    }
    nlohmann::json grid = {{"time_steps", config.grid.time_steps},
                           {"space_nodes", config.grid.space_nodes},
                           {"log_space", config.grid.log_space == LogSpaceSetting::automatic ? "auto"
                                         : config.grid.log_space == LogSpaceSetting::on  ? "true"
                                                                                         : "false"}};
    if (config.grid.x_min) {
        grid["x_min"] = *config.grid.x_min;
        grid["x_max"] = *config.grid.x_max;
    }
    nlohmann::json sim = {{"x0", config.simulation.x0},
                          {"start_mode", config.simulation.start_mode + 1},
                          {"paths", config.simulation.paths},
                          {"seed", config.simulation.seed},
                          {"slack", config.simulation.slack}};
    if (config.simulation.switch_tolerance) sim["switch_tolerance"] = *config.simulation.switch_tolerance;
    return {
        {"version", kConfigVersion},
        {"problem",
         {{"modes", p.modes},
          {"horizon", p.horizon},
          {"loop_floor", p.loop_floor},
          {"drift", coefficient_json(p.drift)},
          {"volatility", coefficient_json(p.volatility)},
          {"payoffs", payoffs},
          {"costs", costs}}},
        {"grid", grid},
        {"scheme",
         {{"type", config.scheme.scheme == Scheme::implicit_euler ? "implicit" : "explicit"},
          {"picard", config.scheme.picard},
          {"tol", config.scheme.tol},
          {"max_iters", config.scheme.max_iters}}},
        {"simulation", sim},
        {"output",
         {{"surfaces", config.output.surfaces},
          {"executions", config.output.executions},
          {"tail", config.output.tail},
          {"paths", config.output.paths}}},
    };
}

nlohmann::json RunSummary::to_json(const RunConfig& config) const {
    nlohmann::json j;
    j["artifact_version"] = kArtifactVersion;
    j["command"] = command_name(command);
    j["config"] = config_to_json(config);
    nlohmann::json violations = nlohmann::json::array();
    for (const auto& v : validation.violations) {
        nlohmann::json modes = nlohmann::json::array();
        for (auto m : v.modes) modes.push_back(m + 1);
        violations.push_back(
            {{"rule", rule_id(v.rule)}, {"modes", modes}, {"t", v.t}, {"x", v.x}, {"margin", v.margin}});
    }
    j["validation"] = {{"passed", validation.passed},
                       {"certified", validation.certified},
                       {"violations", violations}};
    if (!values_at_x0.empty()) j["values_at_x0"] = values_at_x0;
    if (residuals) {
        j["residuals"] = {{"max_pde_residual", residuals->max_pde_residual},
                          {"max_obstacle_violation", residuals->max_obstacle_violation},
                          {"complementarity_defect", residuals->complementarity_defect}};
    }
    if (surface_max_norm) j["surface_max_norm"] = *surface_max_norm;
    if (picard_iterations) {
        j["picard"] = {{"iterations", *picard_iterations},
                       {"converged", *picard_converged},
                       {"gap_to_direct", *picard_gap_to_direct}};
    }
    if (monte_carlo) {
        j["monte_carlo"] = {{"mean", monte_carlo->mean},
                            {"std_error", monte_carlo->std_error},
                            {"paths", monte_carlo->n}};
    }
    if (tail) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t n = 1; n <= tail->frequency.size(); ++n) {
            rows.push_back({{"n", n}, {"frequency", tail->frequency[n - 1]}});
        }
        j["switch_tail"] = {{"start_mode", tail->start_mode + 1},
                            {"sample_size", tail->sample_size},
                            {"table", rows}};
    }
    if (total_switches) j["total_switches"] = *total_switches;
    nlohmann::json gate_list = nlohmann::json::array();
    for (const auto& g : gates) {
        gate_list.push_back(
            {{"name", g.name}, {"passed", g.passed}, {"value", g.value}, {"threshold", g.threshold}});
    }
    j["gates"] = gate_list;
    j["files"] = files;
    if (!error.empty()) j["error"] = error;
    j["exit_code"] = exit_code;
    return j;
}

RunSummary run(const RunConfig& config, Command command, std::ostream* log) {
    RunSummary summary;
    summary.command = command;
    ArtifactWriter writer(config.output.dir, summary);
    auto note = [log](const std::string& line) {
        if (log) *log << line << '\n';
    };

    try {
        const auto problem = config.problem.build();
        const auto grids = make_grids(config, problem);
        summary.validation =
            validate_problem(problem, grids.space.x_min(), grids.space.x_max());
        note("validation: " + summary.validation.summary());

        bool hard_failure = false;
        for (const auto& v : summary.validation.violations) hard_failure |= v.rule != Rule::strict_triangle;

        if (command != Command::validate && !hard_failure) {
            auto start = Clock::now();
            const auto solved = solve_system(problem, grids, config.scheme.scheme);
            summary.timings.solve_seconds = seconds_since(start);
            const auto& surface = solved.surface;
            const double norm = surface.max_norm();
            summary.residuals = solved.residuals;
            summary.surface_max_norm = norm;
            for (std::size_t i = 0; i < problem.mode_count(); ++i) {
                summary.values_at_x0.push_back(surface.value_at(i, 0, config.simulation.x0));
            }
            const double dx = grids.space.spacing();
            const double defect_limit =
                10.0 * (grids.time.dt() + dx * dx) * std::max(1.0, norm);
            summary.gates.push_back({"obstacle", solved.residuals.max_obstacle_violation <= kObstacleTolerance,
                                     solved.residuals.max_obstacle_violation, kObstacleTolerance});
            summary.gates.push_back({"complementarity",
                                     solved.residuals.complementarity_defect <= defect_limit,
                                     solved.residuals.complementarity_defect, defect_limit});

            if (config.scheme.picard) {
                start = Clock::now();
                PicardOptions opts;
                opts.max_iters = config.scheme.max_iters;
                opts.tol = config.scheme.tol;
                opts.keep_all = false;
                const auto picard = picard_solve(problem, grids, config.scheme.scheme, opts);
                summary.timings.picard_seconds = seconds_since(start);
                summary.picard_iterations = picard.iterations;
                summary.picard_converged = picard.converged;
                const double gap = picard.final_surface().max_difference(surface);
                summary.picard_gap_to_direct = gap;
                const double limit = std::max(1e-6, config.scheme.tol);
                summary.gates.push_back({"picard_converged", picard.converged,
                                         static_cast<double>(picard.iterations),
                                         static_cast<double>(config.scheme.max_iters)});
                summary.gates.push_back({"picard_agreement", gap <= limit, gap, limit});
            }

            if (config.output.surfaces && command != Command::simulate) {
                for (std::size_t i = 0; i < problem.mode_count(); ++i) {
                    writer.write("mode" + std::to_string(i + 1) + ".csv",
                                 [&](std::ostream& out) { write_surface_csv(out, surface, i); });
                }
            }

            if (command == Command::simulate || command == Command::run) {
                start = Clock::now();
                const double tol = config.simulation.switch_tolerance.value_or(
                    default_switch_tolerance(surface));
                const auto policy = extract_policy(surface, problem, tol);
                const auto paths = simulate_paths(problem, grids.time, config.simulation.x0,
                                                  config.simulation.paths, config.simulation.seed);
                const auto executions =
                    simulate_strategy(policy, paths, problem, config.simulation.start_mode);
                const auto estimate = estimate_value(executions);
                summary.monte_carlo = estimate;
                summary.tail = switch_count_tail(executions, config.simulation.start_mode);
                std::size_t switches = 0;
                for (const auto& e : executions) switches += e.switches.size();
                summary.total_switches = switches;
                summary.timings.simulate_seconds = seconds_since(start);

                const double target = summary.values_at_x0.at(config.simulation.start_mode);
                const double gap = std::abs(estimate.mean - target);
                const double limit = 3.0 * estimate.std_error + config.simulation.slack;
                summary.gates.push_back({"monte_carlo_consistency", gap <= limit, gap, limit});

                if (config.output.executions) {
                    writer.write("executions.csv", [&](std::ostream& out) {
                        write_executions_csv(out, executions, grids.time);
                    });
                }
                if (config.output.tail) {
                    writer.write("tail.csv", [&](std::ostream& out) { write_tail_csv(out, *summary.tail); });
                }
                if (config.output.paths) {
                    writer.write("paths.csv", [&](std::ostream& out) { write_paths_csv(out, paths); });
                }
            }
        }

        bool gates_ok = true;
        for (const auto& g : summary.gates) gates_ok = gates_ok && g.passed;
        if (!summary.validation.passed) {
            summary.exit_code = exit_validation_failed;
        } else if (!gates_ok) {
            summary.exit_code = exit_gate_failed;
        }
    } catch (const std::exception& e) {
        summary.error = e.what();
        summary.exit_code = exit_module_error;
        note(std::string("error: ") + e.what());
    }

    note("timings: solve " + std::to_string(summary.timings.solve_seconds) + " s, picard " +
         std::to_string(summary.timings.picard_seconds) + " s, simulate " +
         std::to_string(summary.timings.simulate_seconds) + " s");
    try {
        summary.files.push_back("summary.json");
        std::filesystem::create_directories(config.output.dir);
        std::ofstream out(std::filesystem::path(config.output.dir) / "summary.json");
        out << summary.to_json(config).dump(2) << '\n';
    } catch (const std::exception& e) {
        summary.error = e.what();
        summary.exit_code = exit_module_error;
    }
    return summary;
}

} // namespace switchflow
