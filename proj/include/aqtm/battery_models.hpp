// battery_models.hpp: constructors for the finite quantum batteries that
// power the machine. Every battery exposes a single transition frequency nu0
// through its coupling observable; richer spectra are out of scope.
#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "aqtm/operator_core.hpp"

namespace aqtm {

// Plain non-degenerate ladder of `levels` equidistant levels with per-step
// transition amplitudes. Empty amplitude list means all ones.
struct LadderSpec {
    int levels = 2;
    std::vector<double> amplitudes;
};

// Equidistant levels n = 0..N with degeneracy l_n each; all transition
// amplitudes are 1 (absolute scale is absorbed into the machine coupling g).
struct DegenerateLadderSpec {
    std::vector<int> degeneracies;
};

// N two-level systems in the full 2^N product space.
struct SpinEnsembleSpec {
    int count = 1;
};

// Truncated Fock space of a single oscillator mode.
struct TruncatedOscillatorSpec {
    int n_cut = 8;
};

struct BatterySpec {
    double nu0 = 1.0;
    std::variant<LadderSpec, DegenerateLadderSpec, SpinEnsembleSpec, TruncatedOscillatorSpec> kind =
        LadderSpec{};

    Eigen::Index dim() const;
};

struct BatteryInstance {
    BatterySpec spec;
    HermitianOperator hamiltonian;
    HermitianOperator coupling;  // A_R
    EigenoperatorSet ladder;     // eigenoperators of A_R w.r.t. H_R
    DensityMatrix state;

    // <A_R(nu0)^dag A_R(nu0)>: weight available for dropping one quantum.
    double emission_weight() const;
    // <A_R(nu0) A_R(nu0)^dag>: weight available for absorbing one quantum.
    double absorption_weight() const;
    double energy() const;  // <H_R>
};

HermitianOperator battery_hamiltonian(const BatterySpec& spec);
HermitianOperator battery_coupling(const BatterySpec& spec);

// Assembles an instance for an arbitrary state on the battery space.
BatteryInstance make_battery(const BatterySpec& spec, DensityMatrix state);
BatteryInstance thermal_battery(const BatterySpec& spec, double temperature);

// Degenerate multilevel battery (Lambda, V, phaseonium-like patterns).
BatteryInstance build_degenerate_ladder(int n, const std::vector<int>& degeneracies, double nu0,
                                        DensityMatrix state);

// Symmetric n_e-excitation state of N spins in the full product space.
DensityMatrix build_dicke_state(int n, int n_e);

// S(r) rho_th(T_R) S(r)^dag on a truncated Fock space. The truncation is
// policed by requiring the top two Fock populations to stay below trunc_tol.
BatteryInstance build_squeezed_thermal(int n_cut, double nu0, double t_r, double r,
                                       double trunc_tol = Tolerances{}.trunc);

// Explicit state for a degenerate ladder given per-level population totals
// and per-level coherence sums, spread uniformly inside each level block.
DensityMatrix phaseonium_like_state(const std::vector<int>& degeneracies,
                                    const std::vector<double>& populations,
                                    const std::vector<double>& coherences);

// Per-level population totals rho_n and coherence sums c_n of a state on a
// degenerate-ladder space (c_n sums the off-diagonal block entries, real by
// hermiticity).
struct LevelSums {
    std::vector<double> populations;
    std::vector<double> coherences;
};
LevelSums degenerate_level_sums(const std::vector<int>& degeneracies, const DensityMatrix& state);

}  // namespace aqtm
