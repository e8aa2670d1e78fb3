// Command-line front end. One subcommand: `aqtm run <scenario>`.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aqtm/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"autonomous quantum thermal machine toolkit"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::vector<std::string> overrides;
    aqtm::RunOptions options;

    CLI::App* run = app.add_subcommand("run", "evaluate a scenario file");
    run->add_option("scenario", scenario_path, "scenario file to evaluate")->required();
    run->add_option("--out", options.out_dir, "directory for output tables");
    run->add_flag("--oracle", options.with_oracle,
                  "also compare against the exact-diagonalization generator");
    run->add_flag("--quiet", options.quiet, "suppress the list of written files");
    run->add_option("--override", overrides,
                    "replace a scenario field, e.g. machine.g=0.005 (repeatable)");

    CLI11_PARSE(app, argc, argv);

    try {
        const aqtm::Scenario scenario = aqtm::load_scenario(scenario_path, overrides);
        aqtm::run_scenario(scenario, options);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return aqtm::cli_exit_code(e);
    }
    return 0;
}
