#include "switchflow/config.hpp"
#include "switchflow/errors.hpp"
#include "switchflow/pde.hpp"
#include "switchflow/run.hpp"
#include "switchflow/sde.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

namespace py = pybind11;
using namespace switchflow;

namespace {

Command command_from(const std::string& name) {
    if (name == "validate") return Command::validate;
    if (name == "solve") return Command::solve;
    if (name == "simulate") return Command::simulate;
    if (name == "run") return Command::run;
    throw InvalidInput("unknown command '" + name + "'");
}

std::pair<std::string, int> run_config(const std::string& path, const std::string& command,
                                       std::optional<std::string> out_dir,
                                       std::optional<std::uint64_t> seed) {
    auto config = load_config(path);
    if (out_dir) config.output.dir = *out_dir;
    if (seed) config.simulation.seed = *seed;
    RunSummary summary;
    {
        py::gil_scoped_release release;
        summary = run(config, command_from(command));
    }
    return {summary.to_json(config).dump(), summary.exit_code};
}

// Direct solve of a config: (t, x, values[mode, k, j]).
py::tuple solve_config(const std::string& path) {
    const auto config = load_config(path);
    const auto problem = config.problem.build();
    const auto grids = make_grids(config, problem);
    std::optional<SolveResult> result;
    {
        py::gil_scoped_release release;
        result.emplace(solve_system(problem, grids, config.scheme.scheme));
    }
    const auto& s = result->surface;
    const auto nt = grids.time.steps() + 1;
    const auto nx = grids.space.nodes();
    py::array_t<double> t(nt), x(nx);
    for (std::size_t k = 0; k < nt; ++k) t.mutable_at(k) = grids.time.time(k);
    for (std::size_t j = 0; j < nx; ++j) x.mutable_at(j) = grids.space.state(j);
    py::array_t<double> values({s.modes(), nt, nx});
    std::copy(s.data().begin(), s.data().end(), values.mutable_data());
    return py::make_tuple(t, x, values);
}

py::array_t<double> simulate_config_paths(const std::string& path, std::size_t n_paths,
                                          std::optional<std::uint64_t> seed) {
    const auto config = load_config(path);
    const auto problem = config.problem.build();
    const auto grid = TimeGrid::over(problem, config.grid.time_steps);
    const auto paths = simulate_paths(problem, grid, config.simulation.x0, n_paths,
                                      seed.value_or(config.simulation.seed));
    const auto width = grid.steps() + 1;
    py::array_t<double> out({n_paths, width});
    for (std::size_t p = 0; p < n_paths; ++p) {
        const auto row = paths.path(p);
        std::copy(row.begin(), row.end(), out.mutable_data(p, 0));
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_switchflow, m) {
    m.doc() = "Optimal multi-mode switching solver";
    m.attr("__version__") = "1.0.0";

    // Translators run newest first, so the base class goes in before InvalidInput.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);

    m.def(
        "parse_coefficient",
        [](const std::string& text) {
            const auto c = parse_coefficient(text);
            return py::make_tuple(c.x_coef, c.abs_x_coef, c.t_coef, c.const_term);
        },
        py::arg("text"), "(x, |x|, t, const) coefficients of an affine expression");

    m.def(
        "validate",
        [](const std::string& path) {
            const auto config = load_config(path);
            const auto problem = config.problem.build();
            const auto grids = make_grids(config, problem);
            const auto report = validate_problem(problem, grids.space.x_min(), grids.space.x_max());
            py::list rules;
            for (const auto& v : report.violations) rules.append(std::string(rule_id(v.rule)));
            return py::make_tuple(report.passed, rules);
        },
        py::arg("config_path"), "(passed, violated rule ids) on the config's grid domain");

    m.def("run_json", &run_config, py::arg("config_path"), py::arg("command") = "run",
          py::arg("out_dir") = py::none(), py::arg("seed") = py::none(),
          "Runs a CLI command; returns (summary JSON text, exit code)");

    m.def("solve", &solve_config, py::arg("config_path"),
          "Direct solve; returns (t, x, values[mode, k, j])");

    m.def("simulate_paths", &simulate_config_paths, py::arg("config_path"), py::arg("n_paths"),
          py::arg("seed") = py::none(), "Euler paths of the config's state, shape (n_paths, steps + 1)");
}
