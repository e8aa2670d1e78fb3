#include "aqtm/machine_analytics.hpp"

#include <cmath>

#include "aqtm/errors.hpp"

namespace aqtm {

namespace {

void require_bath_ordering(double t_c, double t_h) {
    if (!std::isfinite(t_c) || !std::isfinite(t_h) || t_c <= 0.0 || t_h <= t_c) {
        throw DomainError("need T_H > T_C > 0");
    }
}

void require_leak_free(const BathSpec& bath, double resonance, double other, double leak_tol,
                       const char* label) {
    const double on = spectral_density(bath, resonance);
    if (on <= 0.0) {
        throw BathModelError(std::string(label) + " bath has no weight at its resonance");
    }
    if (spectral_density(bath, other) > leak_tol * on) {
        throw BathModelError(std::string(label) +
                             " bath has weight on the other resonance (heat leak)");
    }
}

}  // namespace

std::vector<std::string> validate_machine(const MachineConfig& config) {
    if (!std::isfinite(config.omega0) || config.omega0 <= 0.0) {
        throw DomainError("omega0 must be positive");
    }
    if (!std::isfinite(config.nu0) || config.nu0 <= 0.0) throw DomainError("nu0 must be positive");
    if (!std::isfinite(config.g) || config.g <= 0.0) throw DomainError("g must be positive");
    if (!std::isfinite(config.alpha) || config.alpha <= 0.0) {
        throw DomainError("alpha must be positive");
    }
    if (config.medium.kind == MediumKind::TruncatedOscillator && config.medium.n_cut < 2) {
        throw DomainError("oscillator medium needs at least two levels");
    }
    if (config.battery.nu0 != config.nu0) {
        throw DomainError("battery transition frequency must match nu0");
    }
    battery_coupling(config.battery);  // runs the battery shape checks

    if (config.bath_c.side != BathSide::Cold || config.bath_h.side != BathSide::Hot) {
        throw DomainError("bath roles are swapped");
    }
    validate_bath(config.bath_c);
    validate_bath(config.bath_h);
    require_bath_ordering(config.bath_c.temperature, config.bath_h.temperature);

    const double ratio = config.g / config.nu0;
    if (ratio >= config.weak_ratio) {
        throw ValidityError("g/nu0 = " + std::to_string(ratio) +
                            " is outside the weak-coupling regime");
    }

    // Each bath talks to exactly one transition; weight on the other one is a
    // heat leak the perturbative treatment cannot absorb.
    require_leak_free(config.bath_c, config.omega0, config.omega0 + config.nu0, config.leak_tol,
                      "cold");
    require_leak_free(config.bath_h, config.omega0 + config.nu0, config.omega0, config.leak_tol,
                      "hot");

    std::vector<std::string> warnings;
    if (ratio >= config.warn_ratio) {
        warnings.push_back("g/nu0 = " + std::to_string(ratio) +
                           " exceeds the soft weak-coupling ratio; third-order errors grow");
    }
    return warnings;
}

double error_order(const MachineConfig& config) {
    const double r = config.g / config.nu0;
    return r * r * r * config.omega0 * spectral_density(config.bath_c, config.omega0);
}

HeatFlowReport cold_heat_flow(const MachineConfig& config, const DensityMatrix& battery_state) {
    auto battery = make_battery(config.battery, battery_state);

    const double gc_p = spectral_density(config.bath_c, config.omega0);
    const double gc_m = spectral_density(config.bath_c, -config.omega0);
    const double gh = spectral_density(config.bath_h, config.omega0 + config.nu0);
    const double denom =
        config.medium.kind == MediumKind::TwoLevel ? gc_p + gc_m : gc_p - gc_m;
    if (denom <= 0.0) {
        throw BathModelError("cold-bath rate balance is not thermal at omega0");
    }

    const double bracket =
        std::exp(-config.omega0 / config.bath_c.temperature) * battery.emission_weight() -
        std::exp(-(config.omega0 + config.nu0) / config.bath_h.temperature) *
            battery.absorption_weight();
    const double scale = config.g * config.alpha * config.omega0 / config.nu0;

    HeatFlowReport report;
    report.q_c = config.omega0 * scale * scale * (gc_p * gh / denom) * bracket;
    report.q_h = -(config.omega0 + config.nu0) / config.omega0 * report.q_c;
    report.e_r_dot = -config.nu0 / config.omega0 * report.q_c;
    report.e_s_dot = 0.0;
    report.error_order = error_order(config);

    const double band = config.idle_tol < 0.0 ? report.error_order : config.idle_tol;
    if (report.q_c > band) {
        report.regime = Regime::Refrigeration;
        report.eta = config.omega0 / config.nu0;
    } else if (report.q_c < -band) {
        report.regime = Regime::EnergyExtraction;
        report.eta = config.nu0 / (config.omega0 + config.nu0);
    } else {
        report.regime = Regime::Idle;
        report.eta = 0.0;
    }
    return report;
}

double refrigeration_threshold(double t_c, double t_h, double nu0, double beta_app) {
    require_bath_ordering(t_c, t_h);
    return nu0 * t_c / (t_h - t_c) * (1.0 - t_h * beta_app);
}

double max_achievable_efficiency_refrigeration(double t_c, double t_h, double beta_app) {
    require_bath_ordering(t_c, t_h);
    return t_c / (t_h - t_c) * (1.0 - t_h * beta_app);
}

CoherenceEfficiency max_achievable_efficiency_coherence(double t_c, double t_h, double nu0,
                                                        double t0_beta, double c_plus,
                                                        double c_minus, double rho_plus,
                                                        double rho_minus) {
    require_bath_ordering(t_c, t_h);
    if (nu0 <= 0.0) throw DomainError("nu0 must be positive");
    if (rho_plus <= 0.0 || rho_minus <= 0.0) throw DomainError("population sums must be positive");
    const double up = 1.0 + c_plus / rho_plus;
    const double down = 1.0 + c_minus / rho_minus;
    if (up <= 0.0 || down <= 0.0) {
        throw DomainError("coherence sums drive a transition weight negative");
    }
    CoherenceEfficiency out;
    out.eta_ac = t_c / (t_h - t_c) *
                 (1.0 - t_h * t0_beta - t_h / nu0 * (std::log(down) - std::log(up)));
    out.coherence_benefit = c_plus >= c_minus * std::exp(-nu0 * t0_beta);
    return out;
}

CorrelationEfficiency max_achievable_efficiency_correlation(double t_c, double t_h, double nu0,
                                                            double t0_beta, double c,
                                                            double n_plus, double n_minus) {
    require_bath_ordering(t_c, t_h);
    if (nu0 <= 0.0) throw DomainError("nu0 must be positive");
    if (n_plus <= 0.0 || n_minus <= 0.0) throw DomainError("local weights must be positive");
    const double up = 1.0 + c / n_plus;
    const double down = 1.0 + c / n_minus;
    if (up <= 0.0 || down <= 0.0) {
        throw DomainError("correlation sum drives a transition weight negative");
    }
    CorrelationEfficiency out;
    out.eta_ac = t_c / (t_h - t_c) *
                 (1.0 - t_h * t0_beta - t_h / nu0 * (std::log(down) - std::log(up)));
    out.correlation_benefit = c * (std::exp(nu0 * t0_beta) - 1.0) >= 0.0;
    return out;
}

double dicke_max_efficiency(int n, int n_e, double t_c, double t_h, double nu0) {
    require_bath_ordering(t_c, t_h);
    if (nu0 <= 0.0) throw DomainError("nu0 must be positive");
    if (n < 2 || n_e < 0 || n_e > n) throw DomainError("invalid spin or excitation count");
    if (n_e == 0 || n_e == n) {
        throw UndefinedTemperatureError("edge Dicke state has no coherence-free temperature");
    }
    const double ne = n_e;
    const double ng = n - n_e;
    const double t0_beta = (std::log(ng) - std::log(ne)) / nu0;
    return t_c / (t_h - t_c) *
           (1.0 - t_h * t0_beta - t_h / nu0 * (std::log(1.0 + ne) - std::log(1.0 + ng)));
}

ExtractionAnalysis extraction_condition_and_efficiency(double t_c, double t_h, double omega0,
                                                       double nu0, double beta_app) {
    require_bath_ordering(t_c, t_h);
    if (omega0 <= 0.0 || nu0 <= 0.0) throw DomainError("frequencies must be positive");
    if (beta_app >= 1.0 / t_c) {
        throw TrivialExtractionError(
            "battery not hotter than the cold bath; extraction carries no cost");
    }
    ExtractionAnalysis out;
    out.condition_met = omega0 >= refrigeration_threshold(t_c, t_h, nu0, beta_app);
    out.eta_e = nu0 / (omega0 + nu0);
    out.eta_e_bound = (1.0 - t_c / t_h) / (1.0 - t_c * beta_app);
    return out;
}

ApparentTemperature steady_state_apparent_temperature(double omega0, double nu0, double t_c,
                                                      double t_h) {
    require_bath_ordering(t_c, t_h);
    if (omega0 <= 0.0 || nu0 <= 0.0) throw DomainError("frequencies must be positive");
    // beta = 0 (infinite apparent temperature) is a regular point here.
    return {((omega0 + nu0) / t_h - omega0 / t_c) / nu0, nu0};
}

double second_law_bound(double t_c, double t_h, double entropy_rate, double e_r_dot) {
    require_bath_ordering(t_c, t_h);
    if (e_r_dot >= 0.0) throw RegimeError("battery is not discharging");
    return t_c / (t_h - t_c) * (1.0 + t_h * entropy_rate / (-e_r_dot));
}

double entropy_flow_efficiency(double t_c, double t_h, double entropy_rate,
                               double entropy_production, double e_r_dot) {
    require_bath_ordering(t_c, t_h);
    if (e_r_dot >= 0.0) throw RegimeError("battery is not discharging");
    return t_c / (t_h - t_c) *
           (1.0 + t_h * (entropy_rate - entropy_production) / (-e_r_dot));
}

}  // namespace aqtm
