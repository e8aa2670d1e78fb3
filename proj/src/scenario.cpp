// scenario.cpp: scenario parsing, canonical serialization, and the run
// drivers behind the CLI. Parsing is strict: unknown fields are rejected and
// every complaint names the field path, so a typo cannot silently fall back
// to a default.

#include "aqtm/scenario.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>

#include "aqtm/bath.hpp"
#include "aqtm/battery_models.hpp"
#include "aqtm/dynamics.hpp"
#include "aqtm/errors.hpp"
#include "aqtm/redfield.hpp"
#include "aqtm/thermometry.hpp"
#include "json.hpp"

namespace aqtm {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw SchemaError(path + ": " + why);
}

const json& need(const json& obj, const std::string& path, const char* key) {
    if (!obj.is_object()) fail(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing field");
    return *it;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed) {
            if (item.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) fail(path + "." + item.key(), "unknown field");
    }
}

double as_num(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
}

std::string as_str(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

double num_field(const json& obj, const std::string& path, const char* key) {
    return as_num(need(obj, path, key), path + "." + key);
}

double num_field_or(const json& obj, const std::string& path, const char* key, double dflt) {
    const auto it = obj.find(key);
    return it == obj.end() ? dflt : as_num(*it, path + "." + key);
}

std::vector<double> num_list(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(as_num(v[i], path + "." + std::to_string(i)));
    }
    return out;
}

std::vector<int> int_list(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of integers");
    std::vector<int> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(as_int(v[i], path + "." + std::to_string(i)));
    }
    return out;
}

MediumSpec parse_medium(const json& v, const std::string& path) {
    MediumSpec medium;
    const std::string kind = as_str(need(v, path, "kind"), path + ".kind");
    if (kind == "two_level") {
        check_keys(v, path, {"kind"});
        medium.kind = MediumKind::TwoLevel;
    } else if (kind == "oscillator") {
        check_keys(v, path, {"kind", "n_cut"});
        medium.kind = MediumKind::TruncatedOscillator;
        medium.n_cut = as_int(need(v, path, "n_cut"), path + ".n_cut");
    } else {
        fail(path + ".kind", "unknown medium kind \"" + kind + "\"");
    }
    return medium;
}

BatterySpec parse_battery(const json& v, const std::string& path, double nu0) {
    BatterySpec spec;
    spec.nu0 = nu0;  // the battery transition always rides the machine nu0
    const std::string kind = as_str(need(v, path, "kind"), path + ".kind");
    if (kind == "ladder") {
        check_keys(v, path, {"kind", "levels", "amplitudes"});
        LadderSpec ladder;
        ladder.levels = as_int(need(v, path, "levels"), path + ".levels");
        const auto it = v.find("amplitudes");
        if (it != v.end()) {
            if (!it->is_array()) fail(path + ".amplitudes", "expected an array of numbers");
            for (std::size_t i = 0; i < it->size(); ++i) {
                ladder.amplitudes.push_back(
                    as_num((*it)[i], path + ".amplitudes." + std::to_string(i)));
            }
        }
        spec.kind = ladder;
    } else if (kind == "degenerate_ladder") {
        check_keys(v, path, {"kind", "degeneracies"});
        spec.kind = DegenerateLadderSpec{
            int_list(need(v, path, "degeneracies"), path + ".degeneracies")};
    } else if (kind == "spins") {
        check_keys(v, path, {"kind", "count"});
        spec.kind = SpinEnsembleSpec{as_int(need(v, path, "count"), path + ".count")};
    } else if (kind == "oscillator") {
        check_keys(v, path, {"kind", "n_cut"});
        spec.kind = TruncatedOscillatorSpec{as_int(need(v, path, "n_cut"), path + ".n_cut")};
    } else {
        fail(path + ".kind", "unknown battery kind \"" + kind + "\"");
    }
    return spec;
}

BathSpec parse_bath(const json& v, const std::string& path, BathSide side) {
    check_keys(v, path, {"temperature", "model", "center", "width", "height", "lamb_shift"});
    BathSpec bath;
    bath.side = side;
    bath.temperature = num_field(v, path, "temperature");
    const double center = num_field(v, path, "center");
    const double width = num_field(v, path, "width");
    const double height = num_field(v, path, "height");
    std::string model = "flat";
    const auto it = v.find("model");
    if (it != v.end()) model = as_str(*it, path + ".model");
    if (model == "flat") {
        bath.model = FlatBandModel{center, width, height};
    } else if (model == "lorentzian") {
        bath.model = LorentzianModel{center, width, height};
    } else {
        fail(path + ".model", "expected \"flat\" or \"lorentzian\"");
    }
    bath.lamb_shift = num_field_or(v, path, "lamb_shift", 0.0);
    return bath;
}

MachineConfig parse_machine(const json& v, const std::string& path) {
    check_keys(v, path,
               {"omega0", "nu0", "g", "alpha", "medium", "battery", "bath_c", "bath_h",
                "weak_ratio", "warn_ratio", "leak_tol", "idle_tol"});
    MachineConfig cfg;
    cfg.omega0 = num_field(v, path, "omega0");
    cfg.nu0 = num_field(v, path, "nu0");
    cfg.g = num_field(v, path, "g");
    cfg.alpha = num_field_or(v, path, "alpha", 1.0);
    cfg.medium = parse_medium(need(v, path, "medium"), path + ".medium");
    cfg.battery = parse_battery(need(v, path, "battery"), path + ".battery", cfg.nu0);
    cfg.bath_c = parse_bath(need(v, path, "bath_c"), path + ".bath_c", BathSide::Cold);
    cfg.bath_h = parse_bath(need(v, path, "bath_h"), path + ".bath_h", BathSide::Hot);
    cfg.weak_ratio = num_field_or(v, path, "weak_ratio", cfg.weak_ratio);
    cfg.warn_ratio = num_field_or(v, path, "warn_ratio", cfg.warn_ratio);
    cfg.leak_tol = num_field_or(v, path, "leak_tol", cfg.leak_tol);
    cfg.idle_tol = num_field_or(v, path, "idle_tol", cfg.idle_tol);
    return cfg;
}

Matrix parse_matrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of rows");
    const Eigen::Index n = static_cast<Eigen::Index>(v.size());
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const json& row = v[static_cast<std::size_t>(i)];
        const std::string rpath = path + "." + std::to_string(i);
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
            fail(rpath, "expected a row of " + std::to_string(n) + " entries");
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const json& cell = row[static_cast<std::size_t>(j)];
            const std::string cpath = rpath + "." + std::to_string(j);
            if (cell.is_number()) {
                m(i, j) = Complex(cell.get<double>(), 0.0);
            } else if (cell.is_array() && cell.size() == 2) {
                m(i, j) = Complex(as_num(cell[0], cpath), as_num(cell[1], cpath));
            } else {
                fail(cpath, "expected a number or an [re, im] pair");
            }
        }
    }
    return m;
}

BatteryStateSpec parse_state(const json& v, const std::string& path) {
    const std::string kind = as_str(need(v, path, "kind"), path + ".kind");
    if (kind == "thermal") {
        check_keys(v, path, {"kind", "temperature"});
        return ThermalStateSpec{num_field(v, path, "temperature")};
    }
    if (kind == "dicke") {
        check_keys(v, path, {"kind", "n", "n_e"});
        return DickeStateSpec{as_int(need(v, path, "n"), path + ".n"),
                              as_int(need(v, path, "n_e"), path + ".n_e")};
    }
    if (kind == "squeezed_thermal") {
        check_keys(v, path, {"kind", "temperature", "r"});
        return SqueezedThermalStateSpec{num_field(v, path, "temperature"),
                                        num_field(v, path, "r")};
    }
    if (kind == "explicit") {
        check_keys(v, path, {"kind", "matrix"});
        return ExplicitStateSpec{parse_matrix(need(v, path, "matrix"), path + ".matrix")};
    }
    if (kind == "phaseonium_like") {
        check_keys(v, path, {"kind", "populations", "coherences"});
        return PhaseoniumStateSpec{
            num_list(need(v, path, "populations"), path + ".populations"),
            num_list(need(v, path, "coherences"), path + ".coherences")};
    }
    fail(path + ".kind", "unknown battery_state kind \"" + kind + "\"");
}

RunSpec parse_run(const json& v, const std::string& path) {
    const std::string kind = as_str(need(v, path, "kind"), path + ".kind");
    if (kind == "analytics") {
        check_keys(v, path, {"kind"});
        return AnalyticsRun{};
    }
    if (kind == "trajectory") {
        check_keys(v, path, {"kind", "t_end", "step"});
        return TrajectoryRun{num_field(v, path, "t_end"), num_field(v, path, "step")};
    }
    if (kind == "sweep") {
        check_keys(v, path, {"kind", "parameter", "grid"});
        return SweepRun{as_str(need(v, path, "parameter"), path + ".parameter"),
                        num_list(need(v, path, "grid"), path + ".grid")};
    }
    if (kind == "regime_map") {
        check_keys(v, path, {"kind", "param_x", "param_y", "grid_x", "grid_y"});
        return RegimeMapRun{as_str(need(v, path, "param_x"), path + ".param_x"),
                            as_str(need(v, path, "param_y"), path + ".param_y"),
                            num_list(need(v, path, "grid_x"), path + ".grid_x"),
                            num_list(need(v, path, "grid_y"), path + ".grid_y")};
    }
    if (kind == "oracle_compare") {
        check_keys(v, path, {"kind", "g_list"});
        return OracleCompareRun{num_list(need(v, path, "g_list"), path + ".g_list")};
    }
    fail(path + ".kind", "unknown run kind \"" + kind + "\"");
}

json parse_document(const std::string& text) {
    try {
        return json::parse(text, nullptr, true, true);  // comments allowed
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("invalid scenario text: ") + e.what());
    }
}

Scenario scenario_from_doc(const json& doc) {
    check_keys(doc, "scenario", {"machine", "battery_state", "run"});
    Scenario s;
    s.machine = parse_machine(need(doc, "scenario", "machine"), "machine");
    s.battery_state = parse_state(need(doc, "scenario", "battery_state"), "battery_state");
    s.run = parse_run(need(doc, "scenario", "run"), "run");
    validate_machine(s.machine);
    realize_battery_state(s.machine, s.battery_state);
    return s;
}

json state_to_json(const BatteryStateSpec& state) {
    json v;
    if (const auto* th = std::get_if<ThermalStateSpec>(&state)) {
        v["kind"] = "thermal";
        v["temperature"] = th->temperature;
    } else if (const auto* dk = std::get_if<DickeStateSpec>(&state)) {
        v["kind"] = "dicke";
        v["n"] = dk->n;
        v["n_e"] = dk->n_e;
    } else if (const auto* sq = std::get_if<SqueezedThermalStateSpec>(&state)) {
        v["kind"] = "squeezed_thermal";
        v["temperature"] = sq->temperature;
        v["r"] = sq->r;
    } else if (const auto* ex = std::get_if<ExplicitStateSpec>(&state)) {
        v["kind"] = "explicit";
        json rows = json::array();
        for (Eigen::Index i = 0; i < ex->matrix.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index j = 0; j < ex->matrix.cols(); ++j) {
                row.push_back({ex->matrix(i, j).real(), ex->matrix(i, j).imag()});
            }
            rows.push_back(std::move(row));
        }
        v["matrix"] = std::move(rows);
    } else {
        const auto& ph = std::get<PhaseoniumStateSpec>(state);
        v["kind"] = "phaseonium_like";
        v["populations"] = ph.populations;
        v["coherences"] = ph.coherences;
    }
    return v;
}

json bath_to_json(const BathSpec& bath) {
    json v;
    v["temperature"] = bath.temperature;
    if (const auto* flat = std::get_if<FlatBandModel>(&bath.model)) {
        v["model"] = "flat";
        v["center"] = flat->center;
        v["width"] = flat->width;
        v["height"] = flat->height;
    } else {
        const auto& lor = std::get<LorentzianModel>(bath.model);
        v["model"] = "lorentzian";
        v["center"] = lor.center;
        v["width"] = lor.width;
        v["height"] = lor.height;
    }
    v["lamb_shift"] = bath.lamb_shift;
    return v;
}

json battery_to_json(const BatterySpec& battery) {
    json v;
    if (const auto* ladder = std::get_if<LadderSpec>(&battery.kind)) {
        v["kind"] = "ladder";
        v["levels"] = ladder->levels;
        v["amplitudes"] = ladder->amplitudes;
    } else if (const auto* deg = std::get_if<DegenerateLadderSpec>(&battery.kind)) {
        v["kind"] = "degenerate_ladder";
        v["degeneracies"] = deg->degeneracies;
    } else if (const auto* spins = std::get_if<SpinEnsembleSpec>(&battery.kind)) {
        v["kind"] = "spins";
        v["count"] = spins->count;
    } else {
        v["kind"] = "oscillator";
        v["n_cut"] = std::get<TruncatedOscillatorSpec>(battery.kind).n_cut;
    }
    return v;
}

json scenario_to_json(const Scenario& s) {
    json doc;
    json& m = doc["machine"];
    m["omega0"] = s.machine.omega0;
    m["nu0"] = s.machine.nu0;
    m["g"] = s.machine.g;
    m["alpha"] = s.machine.alpha;
    if (s.machine.medium.kind == MediumKind::TwoLevel) {
        m["medium"] = {{"kind", "two_level"}};
    } else {
        m["medium"] = {{"kind", "oscillator"}, {"n_cut", s.machine.medium.n_cut}};
    }
    m["battery"] = battery_to_json(s.machine.battery);
    m["bath_c"] = bath_to_json(s.machine.bath_c);
    m["bath_h"] = bath_to_json(s.machine.bath_h);
    m["weak_ratio"] = s.machine.weak_ratio;
    m["warn_ratio"] = s.machine.warn_ratio;
    m["leak_tol"] = s.machine.leak_tol;
    m["idle_tol"] = s.machine.idle_tol;
    doc["battery_state"] = state_to_json(s.battery_state);
    json& r = doc["run"];
    if (std::holds_alternative<AnalyticsRun>(s.run)) {
        r["kind"] = "analytics";
    } else if (const auto* traj = std::get_if<TrajectoryRun>(&s.run)) {
        r["kind"] = "trajectory";
        r["t_end"] = traj->t_end;
        r["step"] = traj->step;
    } else if (const auto* sweep = std::get_if<SweepRun>(&s.run)) {
        r["kind"] = "sweep";
        r["parameter"] = sweep->parameter;
        r["grid"] = sweep->grid;
    } else if (const auto* map = std::get_if<RegimeMapRun>(&s.run)) {
        r["kind"] = "regime_map";
        r["param_x"] = map->param_x;
        r["param_y"] = map->param_y;
        r["grid_x"] = map->grid_x;
        r["grid_y"] = map->grid_y;
    } else {
        r["kind"] = "oracle_compare";
        r["g_list"] = std::get<OracleCompareRun>(s.run).g_list;
    }
    return doc;
}

// ---- run drivers ----

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* regime_label(Regime regime) {
    switch (regime) {
        case Regime::Refrigeration:
            return "refrigeration";
        case Regime::EnergyExtraction:
            return "extraction";
        case Regime::Idle:
            break;
    }
    return "idle";
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (f == nullptr) throw SchemaError("cannot open output file: " + path);
    std::fprintf(f, "# schema=1\n%s\n", header.c_str());
    for (const std::string& row : rows) std::fprintf(f, "%s\n", row.c_str());
    std::fclose(f);
}

constexpr const char* kAnalyticsHeader =
    "beta_app,t_app,eta_ac,threshold_omega0,q_c,q_h,e_r_dot,e_s_dot,eta,error_order,regime";

std::string analytics_row(const MachineConfig& machine, const BatteryStateSpec& state_spec) {
    const DensityMatrix state = realize_battery_state(machine, state_spec);
    const HeatFlowReport report = cold_heat_flow(machine, state);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double beta = nan, t_app = nan, eta_ac = nan, threshold = nan;
    try {
        const ApparentTemperature app = apparent_temperature(make_battery(machine.battery, state));
        beta = app.beta;
        t_app = app.temperature();
        eta_ac = max_achievable_efficiency_refrigeration(machine.bath_c.temperature,
                                                         machine.bath_h.temperature, beta);
        threshold = refrigeration_threshold(machine.bath_c.temperature,
                                            machine.bath_h.temperature, machine.nu0, beta);
    } catch (const UndefinedTemperatureError&) {
        // flows stay meaningful, the temperature columns go blank as nan
    }
    std::string row = fmt(beta);
    for (double v : {t_app, eta_ac, threshold, report.q_c, report.q_h, report.e_r_dot,
                     report.e_s_dot, report.eta, report.error_order}) {
        row += ',';
        row += fmt(v);
    }
    row += ',';
    row += regime_label(report.regime);
    return row;
}

// Rebuilds a scenario with numeric fields replaced through their dotted
// paths. Going through the document again reuses the full validation.
Scenario point_scenario(const json& base,
                        const std::vector<std::pair<std::string, double>>& sets) {
    json doc = base;
    for (const auto& [key, value] : sets) {
        std::string pointer = "/" + key;
        for (char& c : pointer) {
            if (c == '.') c = '/';
        }
        try {
            doc[json::json_pointer(pointer)] = value;
        } catch (const json::exception& e) {
            throw SchemaError("parameter \"" + key + "\": " + e.what());
        }
    }
    return scenario_from_doc(doc);
}

template <typename F>
void parallel_for(std::size_t count, F&& body) {
    const std::size_t workers =
        std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
    if (workers < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(err_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// Settled-flow disagreement against the exact-diagonalization generator for
// each coupling in the list, with a least-squares slope of log|dq_c| vs
// log g shared by all rows.
void oracle_table(const Scenario& scenario, const std::vector<double>& g_list,
                  const std::string& path) {
    const json base = scenario_to_json(scenario);
    struct Entry {
        double dq_c = 0.0, dq_h = 0.0, de_r = 0.0;
    };
    std::vector<Entry> entries(g_list.size());
    parallel_for(g_list.size(), [&](std::size_t i) {
        const Scenario point = point_scenario(base, {{"machine.g", g_list[i]}});
        const GlobalGenerator gen = build_global_generator(point.machine);
        const DensityMatrix rho_r0 = realize_battery_state(point.machine, point.battery_state);
        AdaptiveOptions ode;
        ode.rtol = 1e-11;
        ode.atol = 1e-13;
        const Matrix rho =
            evolve_oracle(gen, tensor(gen.rho_s_eq, rho_r0.matrix()), 12.0 * gen.tau_es, ode);
        const HeatFlowReport oracle = oracle_heat_flows(gen, DensityMatrix(rho));
        const Matrix battery = partial_trace_first(rho, gen.dim_s, gen.dim_r);
        const HeatFlowReport pert = cold_heat_flow(point.machine, DensityMatrix(battery));
        entries[i] = {std::abs(oracle.q_c - pert.q_c), std::abs(oracle.q_h - pert.q_h),
                      std::abs(oracle.e_r_dot - pert.e_r_dot)};
    });

    double slope = std::numeric_limits<double>::quiet_NaN();
    if (g_list.size() >= 2) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < g_list.size(); ++i) {
            const double x = std::log(g_list[i]);
            const double y = std::log(std::max(entries[i].dq_c, 1e-300));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double n = static_cast<double>(g_list.size());
        slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }

    std::vector<std::string> rows;
    rows.reserve(g_list.size());
    for (std::size_t i = 0; i < g_list.size(); ++i) {
        rows.push_back(fmt(g_list[i]) + "," + fmt(entries[i].dq_c) + "," + fmt(entries[i].dq_h) +
                       "," + fmt(entries[i].de_r) + "," + fmt(slope));
    }
    write_csv(path, "g,dq_c,dq_h,de_r,slope_fit", rows);
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    return scenario_from_doc(parse_document(text));
}

Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot read scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    json doc = parse_document(buf.str());
    for (const std::string& ov : overrides) {
        const std::size_t eq = ov.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw SchemaError("override \"" + ov + "\" is not of the form key=value");
        }
        const std::string key = ov.substr(0, eq);
        const std::string raw = ov.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::parse_error&) {
            value = raw;  // bare words stay strings
        }
        std::string pointer = "/" + key;
        for (char& c : pointer) {
            if (c == '.') c = '/';
        }
        try {
            doc[json::json_pointer(pointer)] = value;
        } catch (const json::exception& e) {
            throw SchemaError("override \"" + key + "\": " + e.what());
        }
    }
    return scenario_from_doc(doc);
}

std::string serialize_scenario(const Scenario& scenario) {
    return scenario_to_json(scenario).dump(2) + "\n";
}

DensityMatrix realize_battery_state(const MachineConfig& machine, const BatteryStateSpec& spec) {
    if (const auto* th = std::get_if<ThermalStateSpec>(&spec)) {
        return thermal_battery(machine.battery, th->temperature).state;
    }
    if (const auto* dk = std::get_if<DickeStateSpec>(&spec)) {
        const auto* spins = std::get_if<SpinEnsembleSpec>(&machine.battery.kind);
        if (spins == nullptr || spins->count != dk->n) {
            throw SchemaError(
                "battery_state: a dicke state needs a spins battery with count " +
                std::to_string(dk->n));
        }
        return build_dicke_state(dk->n, dk->n_e);
    }
    if (const auto* sq = std::get_if<SqueezedThermalStateSpec>(&spec)) {
        const auto* osc = std::get_if<TruncatedOscillatorSpec>(&machine.battery.kind);
        if (osc == nullptr) {
            throw SchemaError("battery_state: a squeezed_thermal state needs an oscillator battery");
        }
        return build_squeezed_thermal(osc->n_cut, machine.battery.nu0, sq->temperature, sq->r)
            .state;
    }
    if (const auto* ex = std::get_if<ExplicitStateSpec>(&spec)) {
        if (ex->matrix.rows() != machine.battery.dim()) {
            throw SchemaError("battery_state.matrix: dimension " +
                              std::to_string(ex->matrix.rows()) +
                              " does not match the battery space " +
                              std::to_string(machine.battery.dim()));
        }
        return DensityMatrix(ex->matrix);
    }
    const auto& ph = std::get<PhaseoniumStateSpec>(spec);
    const auto* ladder = std::get_if<DegenerateLadderSpec>(&machine.battery.kind);
    if (ladder == nullptr) {
        throw SchemaError("battery_state: a phaseonium_like state needs a degenerate_ladder battery");
    }
    return phaseonium_like_state(ladder->degeneracies, ph.populations, ph.coherences);
}

std::vector<std::string> run_scenario(const Scenario& scenario, const RunOptions& options) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(options.out_dir, ec);
    if (ec) {
        throw SchemaError("cannot create output directory " + options.out_dir + ": " +
                          ec.message());
    }
    const auto out_path = [&](const char* name) {
        return (fs::path(options.out_dir) / name).string();
    };

    std::vector<std::string> written;
    if (std::holds_alternative<AnalyticsRun>(scenario.run)) {
        const std::string path = out_path("analytics.csv");
        write_csv(path, kAnalyticsHeader, {analytics_row(scenario.machine, scenario.battery_state)});
        written.push_back(path);
    } else if (const auto* traj_run = std::get_if<TrajectoryRun>(&scenario.run)) {
        const DensityMatrix state = realize_battery_state(scenario.machine, scenario.battery_state);
        const Trajectory traj =
            evolve(scenario.machine, state.matrix(), traj_run->t_end, traj_run->step);
        std::vector<std::string> rows;
        rows.reserve(traj.points.size());
        for (const TrajectoryPoint& p : traj.points) {
            std::string row = fmt(p.t);
            for (double v : {p.energy_r, p.energy_s, p.report.q_c, p.report.q_h, p.report.e_r_dot,
                             p.report.eta, p.entropy_r, p.beta_app}) {
                row += ',';
                row += fmt(v);
            }
            row += ',';
            row += regime_label(p.report.regime);
            rows.push_back(std::move(row));
        }
        const std::string path = out_path("trajectory.csv");
        write_csv(path, "t,E_R,E_S,q_c,q_h,e_r_dot,eta,S_rho_R,beta_app,regime", rows);
        written.push_back(path);
    } else if (const auto* sweep = std::get_if<SweepRun>(&scenario.run)) {
        const json base = scenario_to_json(scenario);
        std::vector<std::string> rows(sweep->grid.size());
        parallel_for(sweep->grid.size(), [&](std::size_t i) {
            const Scenario point = point_scenario(base, {{sweep->parameter, sweep->grid[i]}});
            rows[i] = fmt(sweep->grid[i]) + "," +
                      analytics_row(point.machine, point.battery_state);
        });
        const std::string path = out_path("sweep.csv");
        write_csv(path, sweep->parameter + "," + kAnalyticsHeader, rows);
        written.push_back(path);
    } else if (const auto* map = std::get_if<RegimeMapRun>(&scenario.run)) {
        const json base = scenario_to_json(scenario);
        const std::size_t ny = map->grid_y.size();
        std::vector<std::string> rows(map->grid_x.size() * ny);
        parallel_for(rows.size(), [&](std::size_t k) {
            const double x = map->grid_x[k / ny];
            const double y = map->grid_y[k % ny];
            const Scenario point =
                point_scenario(base, {{map->param_x, x}, {map->param_y, y}});
            const DensityMatrix state =
                realize_battery_state(point.machine, point.battery_state);
            const HeatFlowReport report = cold_heat_flow(point.machine, state);
            double eta_ac = std::numeric_limits<double>::quiet_NaN();
            try {
                const double beta =
                    apparent_temperature(make_battery(point.machine.battery, state)).beta;
                eta_ac = max_achievable_efficiency_refrigeration(
                    point.machine.bath_c.temperature, point.machine.bath_h.temperature, beta);
            } catch (const UndefinedTemperatureError&) {
            }
            rows[k] = fmt(x) + "," + fmt(y) + "," + regime_label(report.regime) + "," +
                      fmt(report.q_c) + "," + fmt(eta_ac);
        });
        const std::string path = out_path("regime_map.csv");
        write_csv(path, map->param_x + "," + map->param_y + ",regime,q_c,eta_ac", rows);
        written.push_back(path);
    } else {
        const std::string path = out_path("oracle.csv");
        oracle_table(scenario, std::get<OracleCompareRun>(scenario.run).g_list, path);
        written.push_back(path);
    }

    if (options.with_oracle && !std::holds_alternative<OracleCompareRun>(scenario.run)) {
        const std::string path = out_path("oracle.csv");
        std::vector<double> g_list;
        for (double scale : {0.02, 0.01, 0.005, 0.0025}) {
            g_list.push_back(scale * scenario.machine.nu0);
        }
        oracle_table(scenario, g_list, path);
        written.push_back(path);
    }

    if (!options.quiet) {
        for (const std::string& path : written) std::printf("wrote %s\n", path.c_str());
    }
    return written;
}

int cli_exit_code(const std::exception& e) {
    if (dynamic_cast<const SchemaError*>(&e) != nullptr) return 2;
    if (dynamic_cast<const PhysicsError*>(&e) != nullptr) return 3;
    if (dynamic_cast<const NumericalError*>(&e) != nullptr) return 4;
    return 1;
}

}  // namespace aqtm
