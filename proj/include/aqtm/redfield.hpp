// redfield.hpp: brute-force reference generator. The joint Hamiltonian is
// diagonalized exactly and the Born-Markov generator is assembled from the
// medium quadrature expanded in the exact eigenbasis, with bath rates
// sampled at the true (coupling-shifted) transition frequencies. No
// expansion in the machine coupling is performed, so this generator checks
// the second-order formulas from the outside.
//
// The reference stops at the Born-Markov level on purpose: the closed-form
// results being validated live inside that regime, so a non-perturbative
// generator at the same level is the meaningful yardstick, not exact
// system-bath unitary dynamics.
#pragma once

#include "aqtm/dynamics.hpp"
#include "aqtm/integrate.hpp"
#include "aqtm/machine_analytics.hpp"
#include "aqtm/operator_core.hpp"

namespace aqtm {

struct GlobalGenerator {
    Eigen::Index dimension = 0;   // joint space, medium times battery
    Eigen::Index dim_s = 0;
    Eigen::Index dim_r = 0;
    SpectralDecomposition exact_eigenbasis;   // of the joint Hamiltonian
    Matrix h_joint;
    Matrix h_medium;              // bare medium Hamiltonian, embedded
    Matrix h_battery;             // bare battery Hamiltonian, embedded
    EigenoperatorSet exact_ops;   // quadrature components at exact frequencies

    // Superoperators over column-major vectorized density matrices.
    Eigen::MatrixXcd redfield_tensor;    // commutator part plus both baths
    Eigen::MatrixXcd dissipator_cold;
    Eigen::MatrixXcd dissipator_hot;

    bool full_secular = false;
    double window = 0.0;          // frequency-pairing window actually used
    double omega0 = 0.0;
    double nu0 = 0.0;
    double tau_es = 0.0;
    double error_order = 0.0;
    double idle_band = 0.0;
    Matrix rho_s_eq;              // cold-equilibrium medium, standard start
};

// Exact-diagonalization generator. Near-degenerate exact frequencies are
// kept coherent when they fall inside a pairing window of 10 g; the full
// secular variant instead pairs only identical frequencies. Joint spaces
// beyond dim_cap are refused.
GlobalGenerator build_global_generator(const MachineConfig& config, bool full_secular = false,
                                       Eigen::Index dim_cap = 64);

// Heat flows from the per-bath dissipative parts, traced against the joint
// Hamiltonian; the commutator part moves no heat. Regime and efficiency are
// attributed exactly as in the perturbative trajectory reports.
HeatFlowReport oracle_heat_flows(const GlobalGenerator& gen, const DensityMatrix& rho);

// Propagates rho0 for a time span under the full generator and returns the
// (rehermitized, renormalized) final state.
Matrix evolve_oracle(const GlobalGenerator& gen, const Matrix& rho0, double t_span,
                     const AdaptiveOptions& ode = {});

}  // namespace aqtm
