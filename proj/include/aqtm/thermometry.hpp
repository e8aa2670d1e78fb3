// thermometry.hpp: apparent temperature of a battery, in every closed form
// the machine analysis needs. Inverse temperature beta is the canonical
// representation: beta = 0 is the infinite-temperature (work-reservoir)
// limit and stays a regular value; beta = +-inf is rejected as undefined.
#pragma once

#include <vector>

#include "aqtm/battery_models.hpp"

namespace aqtm {

struct ApparentTemperature {
    double beta = 0.0;  // inverse apparent temperature, signed
    double nu0 = 1.0;

    double temperature() const;  // 1/beta, +inf at beta == 0
};

// Expectation-ratio floor below which the temperature is declared undefined
// rather than zero.
inline constexpr double kNumFloor = 1e-300;

// General definition from the battery's ladder expectations.
ApparentTemperature apparent_temperature(const BatteryInstance& battery);
ApparentTemperature apparent_temperature_from_weights(double emission, double absorption,
                                                      double nu0);

// Degenerate-ladder form from per-level populations and coherence sums.
ApparentTemperature apparent_temperature_coherence_form(const std::vector<double>& populations,
                                                        const std::vector<double>& coherences,
                                                        const std::vector<int>& degeneracies,
                                                        double nu0);

// Correlated-ensemble form from local weights n+ = sum <Ai^dag Ai>,
// n- = sum <Ai Ai^dag> and the cross-correlation sum c.
ApparentTemperature apparent_temperature_correlation_form(double n_plus, double n_minus, double c,
                                                          double nu0);

// Uniform-amplitude ladder form needing only the edge populations.
ApparentTemperature apparent_temperature_nondegenerate_ladder(double rho_ground, double rho_top,
                                                              double nu0);

// Squeezed thermal oscillator closed form.
ApparentTemperature apparent_temperature_squeezed(double t_r, double r, double nu0);

// Hottest apparent temperature reachable at fixed mean energy on an
// equidistant ladder of n_levels levels. Above e_r = nu0 only inverted
// (negative-temperature) values are reachable; `inverted` marks that branch.
struct MaxApparentTemperature {
    ApparentTemperature value;
    bool inverted = false;
};
MaxApparentTemperature max_apparent_temperature(double e_r, double nu0, int n_levels);

// Mean energy of the thermal n_levels ladder at temperature t.
double thermal_ladder_energy(double t, double nu0, int n_levels);

// Closed-form local weights of collective states, consumed by the
// correlation form.
struct CollectiveMoments {
    double n_plus = 0.0;
    double n_minus = 0.0;
    double c = 0.0;
};
CollectiveMoments dicke_moments(int n, int n_e);
CollectiveMoments collective_oscillator_moments(int n, int n_e);

}  // namespace aqtm
