#include <CLI11.hpp>

#include <cstdint>
#include <iostream>

#include "qvi/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Grid solver and checks for the impulse-control quasi-variational inequality"};
    app.set_version_flag("--version", qvi::kToolVersion);
    app.require_subcommand(1);

    std::string path, out;
    std::uint64_t seed = 0;
    struct Sub {
        const char* name;
        const char* help;
        const char* arg;
    };
    const Sub subs[] = {
        {"solve", "Solve the QVI described by a config file", "config"},
        {"verify", "Check the artifacts of a finished solve", "run_dir"},
        {"analyze", "Regularity and free-boundary reports for a finished solve", "run_dir"},
        {"oracle", "Cross-check solvers against reference implementations", "config"},
    };
    for (const Sub& s : subs) {
        CLI::App* sc = app.add_subcommand(s.name, s.help);
        sc->add_option(s.arg, path, "Input path")->required();
        sc->add_option("--out", out, "Output directory");
        sc->add_option("--seed", seed, "Seed for randomized checks (overrides the config)");
    }
    CLI11_PARSE(app, argc, argv);

    qvi::CommandOptions opt;
    opt.out_dir = out;
    CLI::App* used = app.get_subcommands().front();
    if (used->count("--seed") > 0) opt.seed = seed;
    const std::string cmd = used->get_name();
    try {
        if (cmd == "solve") return qvi::cmd_solve(path, opt);
        if (cmd == "verify") return qvi::cmd_verify(path, opt);
        if (cmd == "analyze") return qvi::cmd_analyze(path, opt);
        return qvi::cmd_oracle(path, opt);
    } catch (const std::exception& e) {
        std::cerr << "qvi " << cmd << ": " << e.what() << '\n';
        return qvi::kExitInput;
    }
}
