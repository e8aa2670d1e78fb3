#include "aqtm/thermometry.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "aqtm/errors.hpp"

namespace aqtm {

namespace {

void require_positive_nu0(double nu0) {
    if (!std::isfinite(nu0) || nu0 <= 0.0) {
        throw DomainError("transition frequency must be positive and finite");
    }
}

}  // namespace

double ApparentTemperature::temperature() const {
    if (beta == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / beta;
}

ApparentTemperature apparent_temperature_from_weights(double emission, double absorption,
                                                      double nu0) {
    require_positive_nu0(nu0);
    if (!std::isfinite(emission) || !std::isfinite(absorption)) {
        throw DomainError("ladder weights must be finite");
    }
    if (emission <= kNumFloor || absorption <= kNumFloor) {
        throw UndefinedTemperatureError("ladder weight vanishes, no temperature assignable");
    }
    // Difference of logs keeps extreme ratios finite until the floor trips.
    return {(std::log(absorption) - std::log(emission)) / nu0, nu0};
}

ApparentTemperature apparent_temperature(const BatteryInstance& battery) {
    return apparent_temperature_from_weights(battery.emission_weight(),
                                             battery.absorption_weight(), battery.spec.nu0);
}

ApparentTemperature apparent_temperature_coherence_form(const std::vector<double>& populations,
                                                        const std::vector<double>& coherences,
                                                        const std::vector<int>& degeneracies,
                                                        double nu0) {
    require_positive_nu0(nu0);
    const std::size_t n = populations.size();
    if (n < 2) throw ShapeError("need at least two ladder levels");
    if (coherences.size() != n || degeneracies.size() != n) {
        throw ShapeError("populations, coherences and degeneracies must have equal length");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (degeneracies[k] < 1) throw DomainError("level degeneracy must be at least 1");
        if (!std::isfinite(populations[k])) throw DomainError("level population must be finite");
        if (!std::isfinite(coherences[k])) throw DomainError("coherence sum must be finite");
        if (degeneracies[k] == 1 && coherences[k] != 0.0) {
            throw DomainError("nondegenerate level cannot carry internal coherence");
        }
    }
    // Uniform all-to-all sublevel coupling: the weight for moving off level k
    // is the full block sum population + coherences of that level.
    double emission = 0.0;    // transitions k -> k-1
    double absorption = 0.0;  // transitions k-1 -> k
    for (std::size_t k = 1; k < n; ++k) {
        emission += degeneracies[k - 1] * (populations[k] + coherences[k]);
        absorption += degeneracies[k] * (populations[k - 1] + coherences[k - 1]);
    }
    return apparent_temperature_from_weights(emission, absorption, nu0);
}

ApparentTemperature apparent_temperature_correlation_form(double n_plus, double n_minus, double c,
                                                          double nu0) {
    return apparent_temperature_from_weights(n_plus + c, n_minus + c, nu0);
}

ApparentTemperature apparent_temperature_nondegenerate_ladder(double rho_ground, double rho_top,
                                                              double nu0) {
    if (!std::isfinite(rho_ground) || rho_ground < 0.0 || rho_ground > 1.0 ||
        !std::isfinite(rho_top) || rho_top < 0.0 || rho_top > 1.0) {
        throw DomainError("edge populations must lie in [0, 1]");
    }
    if (rho_ground + rho_top > 1.0) throw DomainError("edge populations exceed unit mass");
    // Unit-amplitude ladder: every interior population cancels between the
    // two weights, only the edges survive.
    return apparent_temperature_from_weights(1.0 - rho_ground, 1.0 - rho_top, nu0);
}

ApparentTemperature apparent_temperature_squeezed(double t_r, double r, double nu0) {
    require_positive_nu0(nu0);
    if (!std::isfinite(t_r) || t_r <= 0.0) throw DomainError("seed temperature must be positive");
    if (!std::isfinite(r) || r < 0.0) throw DomainError("squeezing parameter must be nonnegative");
    if (r == 0.0) return {1.0 / t_r, nu0};
    const double th2 = std::tanh(r) * std::tanh(r);
    const double x = nu0 / t_r;
    // beta = [ln(th2 + e^x) - ln(1 + th2 e^x)] / nu0, written overflow-free.
    const double beta = (std::log1p(th2 * std::exp(-x)) - std::log(th2 + std::exp(-x))) / nu0;
    return {beta, nu0};
}

MaxApparentTemperature max_apparent_temperature(double e_r, double nu0, int n_levels) {
    require_positive_nu0(nu0);
    if (n_levels < 3) throw DomainError("need at least three ladder levels");
    const double top = (n_levels - 1) * nu0;
    if (!std::isfinite(e_r) || e_r <= 0.0 || e_r > top) {
        throw DomainError("mean energy out of range (0, " + std::to_string(top) + "]");
    }
    if (e_r <= nu0) {
        // Hottest positive-temperature state: all weight on the bottom two
        // levels, e_r = nu0 exp(-beta nu0).
        return {{(std::log(nu0) - std::log(e_r)) / nu0, nu0}, false};
    }
    // Past e_r = nu0 only population-inverted states remain; the optimum
    // keeps adjacent-ratio u = exp(beta nu0) in (0, 1) uniform across the
    // occupied top of the ladder.
    const double m = static_cast<double>(n_levels) - 1.0;
    double u;
    if (e_r >= (m - 1.0) * nu0) {
        u = m * nu0 / e_r - 1.0;  // ground + top two-point construction
    } else {
        u = (m - e_r / nu0) / (m - 1.0);
    }
    if (u <= 0.0) {
        throw UndefinedTemperatureError(
            "fully inverted ladder, apparent temperature reaches 0-");
    }
    return {{std::log(u) / nu0, nu0}, true};
}

double thermal_ladder_energy(double t, double nu0, int n_levels) {
    require_positive_nu0(nu0);
    if (n_levels < 2) throw DomainError("need at least two ladder levels");
    if (!std::isfinite(t) || t == 0.0) throw DomainError("temperature must be finite and nonzero");
    const double x = nu0 / t;
    const double n = static_cast<double>(n_levels);
    if (std::abs(x) < 1e-4) {
        // Both geometric terms lose their 1/x poles; expand instead.
        return nu0 * ((n - 1.0) / 2.0 - (n * n - 1.0) * x / 12.0 +
                      (n * n * n * n - 1.0) * x * x * x / 720.0);
    }
    const double lead = 1.0 / std::expm1(x);
    const double cutoff = n / std::expm1(n * x);  // overflow gives 0, the right limit
    return nu0 * (lead - cutoff);
}

CollectiveMoments dicke_moments(int n, int n_e) {
    if (n < 1) throw DomainError("need at least one spin");
    if (n_e < 0 || n_e > n) throw DomainError("excitation count out of range");
    const double ne = n_e;
    const double ng = n - n_e;
    return {ne, ng, ne * ng};
}

CollectiveMoments collective_oscillator_moments(int n, int n_e) {
    if (n < 1) throw DomainError("need at least one mode");
    if (n_e < 0) throw DomainError("excitation count must be nonnegative");
    const double ne = n_e;
    return {ne, ne + n, ne * (n - 1.0)};
}

}  // namespace aqtm
