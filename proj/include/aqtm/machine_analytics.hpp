// machine_analytics.hpp: closed-form answers for the battery-powered
// autonomous machine. The medium S sits at resonance omega0 with the cold
// bath, the battery R shifts the hot transition to omega0 + nu0, and all
// flows below are the weak-coupling second-order expressions.
#pragma once

#include <string>
#include <vector>

#include "aqtm/bath.hpp"
#include "aqtm/battery_models.hpp"
#include "aqtm/thermometry.hpp"

namespace aqtm {

enum class MediumKind { TwoLevel, TruncatedOscillator };

struct MediumSpec {
    MediumKind kind = MediumKind::TwoLevel;
    int n_cut = 8;  // oscillator truncation; ignored for TwoLevel

    Eigen::Index dim() const { return kind == MediumKind::TwoLevel ? 2 : n_cut; }
};

struct MachineConfig {
    double omega0 = 1.0;
    double nu0 = 1.0;
    double g = 0.01;
    double alpha = 1.0;  // coupling observable is alpha * H_S
    MediumSpec medium;
    BatterySpec battery;
    BathSpec bath_c{1.0, FlatBandModel{}, BathSide::Cold};
    BathSpec bath_h{2.0, FlatBandModel{}, BathSide::Hot};

    double weak_ratio = 0.1;   // hard cap on g/nu0
    double warn_ratio = 0.05;  // soft cap, reported not enforced
    double leak_tol = 1e-9;    // off-resonance bath weight, relative
    double idle_tol = -1.0;    // dead band on q_c; negative selects error_order
};

// Validates parameters, bath roles and bath supports. Returns soft warnings;
// throws on hard violations. A bath with weight on the wrong transition is a
// heat leak and is rejected.
std::vector<std::string> validate_machine(const MachineConfig& config);

// Scale of the neglected third-order terms: (g/nu0)^3 * omega0 * G_C(omega0).
// The dimensional prefactor is a reporting convention, not a derived bound.
double error_order(const MachineConfig& config);

enum class Regime { Refrigeration, EnergyExtraction, Idle };

struct HeatFlowReport {
    double q_c = 0.0;      // heat flow out of the cold bath
    double q_h = 0.0;      // heat flow out of the hot bath
    double e_r_dot = 0.0;  // battery energy change rate
    double e_s_dot = 0.0;  // medium energy change rate, zero at this order
    double eta = 0.0;      // actual efficiency of the active regime, 0 when idle
    double error_order = 0.0;
    Regime regime = Regime::Idle;
};

// Second-order flows for a battery in `battery_state`, medium equilibrated
// with the cold bath. Valid well past the medium settling time.
HeatFlowReport cold_heat_flow(const MachineConfig& config, const DensityMatrix& battery_state);

// Largest omega0 that still refrigerates for a battery at inverse apparent
// temperature beta_app. Negative when no positive omega0 works.
double refrigeration_threshold(double t_c, double t_h, double nu0, double beta_app);

// Efficiency ceiling reached at the refrigeration threshold (zero power).
double max_achievable_efficiency_refrigeration(double t_c, double t_h, double beta_app);

struct CoherenceEfficiency {
    double eta_ac = 0.0;
    bool coherence_benefit = false;  // beats the coherence-free ceiling
};
// Ceiling for a degenerate-ladder battery split into the coherence-free part
// (t0_beta from the population sums rho_pm) and the coherence sums c_pm.
CoherenceEfficiency max_achievable_efficiency_coherence(double t_c, double t_h, double nu0,
                                                        double t0_beta, double c_plus,
                                                        double c_minus, double rho_plus,
                                                        double rho_minus);

struct CorrelationEfficiency {
    double eta_ac = 0.0;
    bool correlation_benefit = false;
};
CorrelationEfficiency max_achievable_efficiency_correlation(double t_c, double t_h, double nu0,
                                                            double t0_beta, double c,
                                                            double n_plus, double n_minus);

// Closed form for a spin ensemble in the symmetric n_e-excitation state.
double dicke_max_efficiency(int n, int n_e, double t_c, double t_h, double nu0);

struct ExtractionAnalysis {
    bool condition_met = false;  // battery charges at this omega0
    double eta_e = 0.0;          // actual extraction efficiency nu0/(omega0+nu0)
    double eta_e_bound = 0.0;
};
ExtractionAnalysis extraction_condition_and_efficiency(double t_c, double t_h, double omega0,
                                                       double nu0, double beta_app);

// Apparent temperature the battery settles at when its energy flow stops.
ApparentTemperature steady_state_apparent_temperature(double omega0, double nu0, double t_c,
                                                      double t_h);

// Efficiency ceiling from entropy bookkeeping of a discharging battery.
double second_law_bound(double t_c, double t_h, double entropy_rate, double e_r_dot);

// Same bookkeeping with the irreversible part removed: an equality for the
// actual efficiency rather than a bound.
double entropy_flow_efficiency(double t_c, double t_h, double entropy_rate,
                               double entropy_production, double e_r_dot);

}  // namespace aqtm
