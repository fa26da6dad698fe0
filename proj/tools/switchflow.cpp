// Command-line front end: switchflow {validate|solve|simulate|run} <cfg>.

#include "switchflow/config.hpp"
#include "switchflow/run.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

struct Options {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

int execute(switchflow::Command command, const Options& opts) {
    switchflow::RunConfig config;
    try {
        config = switchflow::load_config(opts.config_path);
    } catch (const std::exception& e) {
        std::cerr << "switchflow: " << e.what() << '\n';
        return switchflow::exit_usage;
    }
    if (!opts.out_dir.empty()) config.output.dir = opts.out_dir;
    if (opts.seed) config.simulation.seed = *opts.seed;

    const auto summary = switchflow::run(config, command, opts.quiet ? nullptr : &std::cerr);
    if (!opts.quiet) {
        std::cout << summary.to_json(config).dump(2) << '\n';
    }
    if (!summary.error.empty()) std::cerr << "switchflow: " << summary.error << '\n';
    return summary.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-horizon optimal multi-mode switching: solve, simulate, report"};
    app.require_subcommand(1);

    Options opts;
    int exit_code = 0;
    const std::pair<const char*, switchflow::Command> commands[] = {
        {"validate", switchflow::Command::validate},
        {"solve", switchflow::Command::solve},
        {"simulate", switchflow::Command::simulate},
        {"run", switchflow::Command::run},
    };
    const char* help[] = {
        "check the switching-cost assumptions",
        "solve the value surfaces and write mode<i>.csv",
        "solve, then simulate the extracted policy",
        "full pipeline with every enabled artifact and gate",
    };
    for (std::size_t n = 0; n < std::size(commands); ++n) {
        auto* sub = app.add_subcommand(commands[n].first, help[n]);
        sub->add_option("config", opts.config_path, "config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out-dir", opts.out_dir, "output directory (overrides output.dir)");
        sub->add_option("--seed", opts.seed, "simulation seed (overrides simulation.seed)");
        sub->add_flag("--quiet", opts.quiet, "suppress progress and the summary on stdout");
        sub->callback([&exit_code, &opts, cmd = commands[n].second] { exit_code = execute(cmd, opts); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : switchflow::exit_usage;
    }
    return exit_code;
}
