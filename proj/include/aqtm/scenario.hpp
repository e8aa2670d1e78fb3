// scenario.hpp: file-driven front end. A scenario is a JSON document (with
// comments allowed) naming a machine, an initial battery state, and one run
// kind; running it writes versioned CSV tables. Everything in the pipeline
// is deterministic: the same scenario always produces the same bytes.
#pragma once

#include <string>
#include <variant>
#include <vector>

#include "aqtm/machine_analytics.hpp"
#include "aqtm/operator_core.hpp"

namespace aqtm {

struct ThermalStateSpec {
    double temperature = 1.0;
};
struct DickeStateSpec {
    int n = 1;
    int n_e = 0;
};
struct SqueezedThermalStateSpec {
    double temperature = 1.0;
    double r = 0.0;
};
struct ExplicitStateSpec {
    Matrix matrix;
};
struct PhaseoniumStateSpec {
    std::vector<double> populations;
    std::vector<double> coherences;
};
using BatteryStateSpec = std::variant<ThermalStateSpec, DickeStateSpec, SqueezedThermalStateSpec,
                                      ExplicitStateSpec, PhaseoniumStateSpec>;

struct AnalyticsRun {};
struct TrajectoryRun {
    double t_end = 10.0;
    double step = 0.1;
};
struct SweepRun {
    std::string parameter;  // dotted path to a numeric field
    std::vector<double> grid;
};
struct RegimeMapRun {
    std::string param_x;
    std::string param_y;
    std::vector<double> grid_x;
    std::vector<double> grid_y;
};
struct OracleCompareRun {
    std::vector<double> g_list;
};
using RunSpec = std::variant<AnalyticsRun, TrajectoryRun, SweepRun, RegimeMapRun, OracleCompareRun>;

struct Scenario {
    MachineConfig machine;
    BatteryStateSpec battery_state;
    RunSpec run;
};

// Parses scenario text and re-validates everything it names: machine
// invariants, battery-state shapes, explicit density matrices. Unknown
// fields are rejected; schema complaints carry the offending field path.
Scenario parse_scenario(const std::string& text);

// Same from a file, with optional dotted-path overrides ("machine.g=0.02")
// applied to the document before validation.
Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides = {});

// Canonical text form: parse-serialize round trips are byte-stable.
std::string serialize_scenario(const Scenario& scenario);

// Initial battery state realized on the machine's battery space.
DensityMatrix realize_battery_state(const MachineConfig& machine, const BatteryStateSpec& spec);

struct RunOptions {
    std::string out_dir = ".";
    bool with_oracle = false;  // adds the coupling-sweep comparison table
    bool quiet = false;
};

// Executes the scenario and returns the paths written. Grid points of sweep
// and map runs are computed on a worker pool; rows are assembled in grid
// order so the output bytes never depend on scheduling.
std::vector<std::string> run_scenario(const Scenario& scenario, const RunOptions& options);

// Exit code the CLI reports for an error: bad input structure 2, invalid
// physics 3, numerical breakdown 4, anything else 1.
int cli_exit_code(const std::exception& e);

}  // namespace aqtm
