#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "qthermo_cli/commands.hpp"

namespace {

void add_common(CLI::App* cmd, qthermo::cli::CommonArgs& a) {
    cmd->add_option("config", a.config_path, "YAML run configuration")->required();
    cmd->add_option("--out", a.out_dir, "output directory");
    cmd->add_option("--seed", a.seed, "override numerics.seed");
    cmd->add_option("--tol", a.tol, "override numerics.tol");
    cmd->add_option("--set", a.assignments, "override a config key, key=value (repeatable)");
    cmd->add_flag("--timing", a.timing, "add wall-clock time to summary.json");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qthermo: open-system thermodynamics simulator"};
    app.require_subcommand(1);

    qthermo::cli::CommonArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "run one protocol and write ledger.csv and summary.json");
    add_common(sim, sim_args);

    qthermo::cli::CommonArgs sweep_args;
    std::string grid;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    auto* sweep = app.add_subcommand("sweep", "run a parameter grid and write sweep.csv");
    add_common(sweep, sweep_args);
    sweep->add_option("--grid", grid, "grid spec, e.g. \"tau_ramp=1,10,100;policy=sLPM,LPM\"")->required();
    sweep->add_option("--threads", threads, "worker threads");

    qthermo::cli::CommonArgs needle_args;
    auto* needle = app.add_subcommand("needle", "run the needle measurement cycle");
    add_common(needle, needle_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qthermo::cli::kExitConfig;
    }

    if (*sim) return qthermo::cli::cmd_simulate(sim_args, std::cout, std::cerr);
    if (*sweep) return qthermo::cli::cmd_sweep(sweep_args, grid, threads, std::cout, std::cerr);
    return qthermo::cli::cmd_needle(needle_args, std::cout, std::cerr);
}
