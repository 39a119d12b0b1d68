// dlab.cpp — Command-line entry point: parses flags, loads the config, runs one command.

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dlab/dlab.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Dissipative spinwave lattice toolkit"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool paper_scale = false;
    bool nominal = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "JSON config file, or inline JSON text");
        sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
        sub->add_option("--seed", seed, "Master seed (overrides the config)");
        sub->add_option("--threads", threads, "Worker threads (fallback: DLAB_THREADS)")->check(CLI::PositiveNumber);
        sub->add_flag("--paper-scale", paper_scale, "Monte Carlo preset 30 x 7000");
        sub->add_flag("--nominal", nominal, "Set w = 2v");
    };
    const std::map<std::string, std::string> about{
        {"calibrate", "Two-channel coupling rates versus spacing and the fitted 1/d constant"},
        {"spectrum", "Dissipation spectrum, modes and Hamiltonian at zero detuning"},
        {"bloch", "Bloch bands over the Brillouin zone"},
        {"eit", "Coupled and uncoupled EIT traces over the detuning grid"},
        {"eigen-eit", "Eigenmode drives and the rates recovered from their traces"},
        {"chiral-test", "Closed six-channel ring driven on odd channels"},
        {"phase-diagram", "Topology over a (v, t) grid of the next-nearest-neighbour chain"},
        {"mc", "Kinetic Monte Carlo EIT spectra and coupling matrix"},
        {"ode-check", "Time integration of the reduced and three-level models"},
    };
    for (const auto& name : dlab::command_names()) {
        add_common(app.add_subcommand(name, about.at(name)));
    }
    auto* plot = app.add_subcommand("plot-data", "Collect result CSVs in --out into a long-format table");
    plot->add_option("--out", out_dir, "Directory holding result files")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : dlab::exit_invalid;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        if (command == "plot-data") {
            std::cout << dlab::emit_plot_data(out_dir) << '\n';
            return dlab::exit_ok;
        }
        dlab::ConfigOverrides overrides;
        overrides.seed = seed;
        overrides.threads = threads;
        overrides.paper_scale = paper_scale;
        overrides.nominal = nominal;
        const dlab::RunConfig rc = config.empty() ? dlab::parse_config_json(dlab::json::object(), overrides)
                                                  : dlab::parse_config(config, overrides);
        const auto out = dlab::run_command(command, rc, out_dir);
        std::cout << out.summary << '\n';
        return out.status;
    } catch (const dlab::NumericalError& e) {
        std::cerr << "dlab " << command << ": numerical failure: " << e.what() << '\n';
        return dlab::exit_numerical;
    } catch (const dlab::Error& e) {
        std::cerr << "dlab " << command << ": " << e.what() << '\n';
        return dlab::exit_invalid;
    } catch (const std::exception& e) {
        std::cerr << "dlab " << command << ": " << e.what() << '\n';
        return dlab::exit_numerical;
    }
}
