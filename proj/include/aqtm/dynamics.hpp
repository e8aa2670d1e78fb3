// dynamics.hpp: second-order master-equation generators for the joint
// medium + battery system, trajectory integration, and the quasi-steady
// medium populations behind the closed-form flow expressions.
//
// The joint state is propagated in the interaction picture with respect to
// the full joint Hamiltonian (medium + battery + coupling). The dissipative
// channels are assembled once per configuration; the drift-correction map
// keeps its explicit time dependence and is evaluated per step.
#pragma once

#include <string>
#include <vector>

#include "aqtm/bath.hpp"
#include "aqtm/battery_models.hpp"
#include "aqtm/integrate.hpp"
#include "aqtm/machine_analytics.hpp"
#include "aqtm/operator_core.hpp"

namespace aqtm {

Matrix medium_hamiltonian(const MediumSpec& medium, double omega0);
// Lowering operator of the medium at its working frequency (sigma_minus for
// a two-level medium, the truncated annihilation operator otherwise).
Matrix medium_lowering(const MediumSpec& medium);

// One secular channel: rate * (op rho op^dag - op^dag op rho) + h.c. with
// the rate split per bath so heat flows can be attributed.
struct SecularTerm {
    double frequency = 0.0;
    Complex rate_cold;   // one-sided bath rate at `frequency`
    Complex rate_hot;
    Matrix op;           // joint-space jump operator
    Matrix op_dag_op;    // cached op^dag op
};

// Time-independent part of the drift correction, weighted by the spectral
// derivative of the one-sided bath rate.
struct LambdaStaticTerm {
    Complex coeff_cold;
    Complex coeff_hot;
    Matrix a_dag;   // bare medium eigenoperator (adjoint), embedded in joint space
    Matrix c_op;    // second-order correction operator
};

// Oscillating part of the drift correction; its amplitude grows linearly in
// t and stays negligible on the validity window of the expansion.
struct LambdaCrossTerm {
    Complex rate_cold;
    Complex rate_hot;
    double phase = 0.0;   // frequency mismatch driving the oscillation
    Matrix c_op;
    Matrix a_dag_prime;
    Matrix a_op;
    Matrix c_prime_dag;
};

struct DissipatorSet {
    Eigen::Index dim_s = 0;
    Eigen::Index dim_r = 0;
    std::vector<SecularTerm> secular;
    std::vector<LambdaStaticTerm> lambda_static;
    std::vector<LambdaCrossTerm> lambda_cross;

    double omega0 = 0.0;
    double nu0 = 0.0;
    double tau_es = 0.0;    // medium relaxation time
    double tau_r = 0.0;     // battery discharge time
    double error_order = 0.0;
    double idle_band = 0.0;

    Matrix h_s;        // medium Hamiltonian (medium space)
    Matrix h_r;        // battery Hamiltonian (battery space)
    Matrix h_joint;    // full joint Hamiltonian including the coupling
    Matrix a_r_low;    // battery lowering component (battery space)
    Matrix rho_s_eq;   // medium thermal state at the cold temperature

    // Battery energy-flow coefficients: e_r_dot = down * <A A^dag> - up * <A^dag A>.
    double er_up = 0.0;
    double er_down = 0.0;
};

struct TrajectoryPoint {
    double t = 0.0;
    HeatFlowReport report;           // q_c, q_h from the generator; e_r_dot closed form
    double energy_r = 0.0;           // <H_R> of the reduced battery state
    double energy_s = 0.0;           // <H_S> of the reduced medium state
    double energy_joint = 0.0;       // <H_joint>, basis of the first-law check
    double entropy_r = 0.0;
    double entropy_joint = 0.0;
    double beta_app = 0.0;           // NaN when the battery weights degenerate
    double trace_defect = 0.0;       // |tr(rho) - 1| before renormalization
    bool transient = false;          // earlier than the medium settling window
    bool beyond_validity = false;    // later than ~3 battery discharge times
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    std::vector<Matrix> battery_states;   // reduced battery state per point
    double tau_es = 0.0;
    double tau_r = 0.0;
    int clipped_points = 0;   // outputs where tiny negative eigenvalues were clipped
};

struct DischargeCurve {
    std::vector<double> times;
    std::vector<double> energy;
    std::vector<double> beta;
    double tau_r = 0.0;
};

// Validates the configuration, then assembles the secular channels at the
// four retained transition frequencies plus the drift-correction terms.
// Batteries whose coupling is not a pure ladder at +/- nu0 are rejected.
DissipatorSet build_dissipators(const MachineConfig& config);

// Full generator (both baths, drift correction included) applied to rho at time t.
Matrix apply_generator(const DissipatorSet& set, double t, const Matrix& rho);
// Same, restricted to one bath's channels and its share of the drift correction.
Matrix apply_bath_generator(const DissipatorSet& set, BathSide side, double t,
                            const Matrix& rho);
// Drift correction alone (both baths).
Matrix apply_lambda(const DissipatorSet& set, double t, const Matrix& rho);
// Only the t-linear part of one bath's drift correction.
Matrix apply_lambda_cross(const DissipatorSet& set, BathSide side, double t,
                          const Matrix& rho);

// Heat currents read off the generator: q_j = Re tr{L_j(rho) H_joint}.
struct InstantFlows {
    double q_c = 0.0;
    double q_h = 0.0;
    double e_s_dot = 0.0;
};
InstantFlows instantaneous_flows(const DissipatorSet& set, double t, const Matrix& rho);

// Battery energy-flow closed form evaluated on a reduced battery state.
double battery_energy_flow(const DissipatorSet& set, const Matrix& rho_r);

// Propagates medium (thermal at T_C) x initial battery state and samples
// every output_step up to t_end. Sampled states are lightly policed:
// eigenvalue dips below zero within the clip tolerance are clipped and
// renormalized, deeper ones raise PositivityError.
Trajectory evolve(const MachineConfig& config, const Matrix& initial_battery, double t_end,
                  double output_step, const AdaptiveOptions& ode = {});

// Excited-state weight of the medium once it has settled against the frozen
// battery state: excited population for a two-level medium, mean occupation
// for a truncated-oscillator medium.
double quasi_steady_medium_population(const MachineConfig& config, const Matrix& battery_state);

// Battery energy and apparent inverse temperature along a slow discharge.
// Uses the reduced battery dynamics with the medium held at its cold-bath
// equilibrium, valid on timescales well past the medium settling time.
DischargeCurve battery_discharge_curve(const MachineConfig& config, const Matrix& initial_battery,
                                       double t_end, int samples = 64);

void write_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace aqtm
