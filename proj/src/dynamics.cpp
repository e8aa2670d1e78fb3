#include "aqtm/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <utility>

#include "aqtm/errors.hpp"
#include "aqtm/integrate.hpp"
#include "aqtm/thermometry.hpp"

namespace aqtm {

namespace {

// eigenvalue dips below -kClipTol abort; shallower ones are clipped away
constexpr double kClipTol = 1e-7;

bool nonzero(Complex z) { return std::abs(z) != 0.0; }

const char* regime_label(Regime r) {
    switch (r) {
        case Regime::Refrigeration: return "refrigeration";
        case Regime::EnergyExtraction: return "extraction";
        case Regime::Idle: return "idle";
    }
    return "idle";
}

struct PolicedState {
    Matrix rho;
    double trace_defect = 0.0;
    bool clipped = false;
};

PolicedState police(const Matrix& raw) {
    PolicedState out;
    out.trace_defect = std::abs(raw.trace() - Complex(1.0, 0.0));
    Matrix sym = 0.5 * (raw + raw.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double low = ev.minCoeff();
    if (low < -kClipTol) {
        throw PositivityError("state eigenvalue " + std::to_string(low) +
                              " below the clip tolerance; step control or parameters are off");
    }
    if (low < 0.0) {
        Eigen::VectorXd cl = ev.cwiseMax(0.0);
        sym = es.eigenvectors() * cl.asDiagonal() * es.eigenvectors().adjoint();
        const double tr = sym.trace().real();
        if (tr <= 0.0) throw PositivityError("state trace vanished after clipping");
        sym /= tr;
        out.clipped = true;
    }
    out.rho = std::move(sym);
    return out;
}

void accumulate_secular(const SecularTerm& term, Complex rate, const Matrix& rho, Matrix& out) {
    if (!nonzero(rate)) return;
    Matrix t = rate * (term.op * rho * term.op.adjoint() - term.op_dag_op * rho);
    out += t + t.adjoint();
}

void accumulate_static(const LambdaStaticTerm& term, Complex coeff, const Matrix& rho,
                       Matrix& out) {
    if (!nonzero(coeff)) return;
    Matrix cr = term.c_op * rho;
    Matrix t = Complex(0.0, -1.0) * coeff * (term.a_dag * cr - cr * term.a_dag);
    out += t + t.adjoint();
}

void accumulate_cross(const LambdaCrossTerm& term, Complex rate, double t_now, const Matrix& rho,
                      Matrix& out) {
    if (!nonzero(rate)) return;
    const Complex w = rate * t_now * std::exp(Complex(0.0, term.phase * t_now));
    Matrix cr = term.c_op * rho;
    Matrix ar = term.a_op * rho;
    Matrix t = w * (cr * term.a_dag_prime - term.a_dag_prime * cr + ar * term.c_prime_dag -
                    term.c_prime_dag * ar);
    out += t + t.adjoint();
}

Complex bath_rate(const SecularTerm& t, BathSide side) {
    return side == BathSide::Cold ? t.rate_cold : t.rate_hot;
}

double real_trace_product(const Matrix& a, const Matrix& b) {
    // tr{a b} without forming the product
    return (a.transpose().cwiseProduct(b)).sum().real();
}

}  // namespace

Matrix medium_hamiltonian(const MediumSpec& medium, double omega0) {
    const Eigen::Index d = medium.dim();
    Matrix h = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) h(i, i) = omega0 * static_cast<double>(i);
    return h;
}

Matrix medium_lowering(const MediumSpec& medium) {
    const Eigen::Index d = medium.dim();
    if (medium.kind == MediumKind::TwoLevel) {
        Matrix s = Matrix::Zero(2, 2);
        s(0, 1) = 1.0;
        return s;
    }
    return annihilation(d);
}

DissipatorSet build_dissipators(const MachineConfig& config) {
    validate_machine(config);

    DissipatorSet set;
    set.omega0 = config.omega0;
    set.nu0 = config.nu0;
    set.dim_s = config.medium.dim();
    set.dim_r = config.battery.dim();

    set.h_s = medium_hamiltonian(config.medium, config.omega0);
    const HermitianOperator h_r_op = battery_hamiltonian(config.battery);
    const HermitianOperator a_r_op = battery_coupling(config.battery);
    set.h_r = h_r_op.matrix();

    const EigenoperatorSet ladder = eigenoperators(a_r_op, h_r_op);
    for (std::size_t i = 0; i < ladder.frequencies.size(); ++i) {
        if (ladder.components[i].norm() < 1e-12) continue;
        if (std::abs(std::abs(ladder.frequencies[i]) - config.nu0) >
            std::max(ladder.tol_freq, 1e-9 * config.nu0)) {
            throw UnsupportedBatteryError(
                "battery couples at a frequency other than its quantum");
        }
    }
    if (!ladder.has(config.nu0)) {
        throw UnsupportedBatteryError("battery has no ladder component at its quantum");
    }
    set.a_r_low = ladder.at(config.nu0);

    const Matrix a_s = medium_lowering(config.medium);
    const Matrix& a = set.a_r_low;
    const Matrix ad = a.adjoint();
    const Matrix id_s = identity(set.dim_s);
    const Matrix id_r = identity(set.dim_r);

    const double x = config.g * config.alpha * config.omega0 / config.nu0;
    const Matrix k2 = 0.5 * (a * a + ad * ad) - (ad * a + a * ad);
    const Matrix m_plus = id_r - x * (a - ad) + x * x * k2;

    const Matrix big_plus = tensor(a_s, m_plus);
    const Matrix side_plus = x * tensor(a_s, a);

    auto add_secular = [&](double freq, Matrix op) {
        SecularTerm term;
        term.frequency = freq;
        term.rate_cold = one_sided_rate(config.bath_c, freq);
        term.rate_hot = one_sided_rate(config.bath_h, freq);
        term.op_dag_op = op.adjoint() * op;
        term.op = std::move(op);
        set.secular.push_back(std::move(term));
    };
    add_secular(config.omega0, big_plus);
    add_secular(-config.omega0, big_plus.adjoint());
    add_secular(config.omega0 + config.nu0, side_plus);
    add_secular(-(config.omega0 + config.nu0), side_plus.adjoint());

    // second-order correction operator and the bare medium ladder in joint space
    const Matrix hs2 = set.h_s * set.h_s;
    const Matrix c_plus = Complex(0.0, 1.0) *
                          (config.g * config.g * config.alpha * config.alpha * 2.0 / config.nu0) *
                          tensor(hs2 * a_s - a_s * hs2, ad * a - a * ad);
    const Matrix c_minus = c_plus.adjoint();
    const Matrix as_plus = tensor(a_s, id_r);
    const Matrix as_minus = as_plus.adjoint();

    for (int sw : {+1, -1}) {
        const double w = sw * config.omega0;
        LambdaStaticTerm term;
        term.coeff_cold = one_sided_rate_derivative(config.bath_c, w);
        term.coeff_hot = one_sided_rate_derivative(config.bath_h, w);
        term.a_dag = sw > 0 ? as_minus : as_plus;
        term.c_op = sw > 0 ? c_plus : c_minus;
        set.lambda_static.push_back(std::move(term));
    }
    for (int sw : {+1, -1}) {
        for (int swp : {+1, -1}) {
            LambdaCrossTerm term;
            term.rate_cold = one_sided_rate(config.bath_c, sw * config.omega0);
            term.rate_hot = one_sided_rate(config.bath_h, sw * config.omega0);
            term.phase = (swp - sw) * config.omega0;
            term.c_op = sw > 0 ? c_plus : c_minus;
            term.a_dag_prime = swp > 0 ? as_minus : as_plus;
            term.a_op = sw > 0 ? as_plus : as_minus;
            term.c_prime_dag = swp > 0 ? c_minus : c_plus;
            set.lambda_cross.push_back(std::move(term));
        }
    }

    set.h_joint = tensor(set.h_s, id_r) + tensor(id_s, set.h_r) +
                  (config.g * config.alpha) * tensor(set.h_s, a_r_op.matrix());

    const double gc0 = spectral_density(config.bath_c, config.omega0);
    set.tau_es = 1.0 / gc0;
    set.tau_r = config.nu0 * config.nu0 / (gc0 * config.g * config.g);
    set.error_order = error_order(config);
    set.idle_band = config.idle_tol < 0.0 ? set.error_order : config.idle_tol;

    set.rho_s_eq = thermal_state(HermitianOperator(set.h_s), config.bath_c.temperature).matrix();
    const double s_emit = real_expectation(set.rho_s_eq, a_s.adjoint() * a_s);
    const double s_absorb = real_expectation(set.rho_s_eq, a_s * a_s.adjoint());
    const double pref = config.g * config.g * config.alpha * config.alpha * config.omega0 *
                        config.omega0 / config.nu0;
    set.er_up = pref * spectral_density(config.bath_h, config.omega0 + config.nu0) * s_emit;
    set.er_down =
        pref * spectral_density(config.bath_h, -(config.omega0 + config.nu0)) * s_absorb;
    return set;
}

Matrix apply_generator(const DissipatorSet& set, double t, const Matrix& rho) {
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (const auto& term : set.secular) {
        accumulate_secular(term, term.rate_cold + term.rate_hot, rho, out);
    }
    for (const auto& term : set.lambda_static) {
        accumulate_static(term, term.coeff_cold + term.coeff_hot, rho, out);
    }
    for (const auto& term : set.lambda_cross) {
        accumulate_cross(term, term.rate_cold + term.rate_hot, t, rho, out);
    }
    return out;
}

Matrix apply_bath_generator(const DissipatorSet& set, BathSide side, double t,
                            const Matrix& rho) {
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (const auto& term : set.secular) {
        accumulate_secular(term, bath_rate(term, side), rho, out);
    }
    for (const auto& term : set.lambda_static) {
        accumulate_static(term, side == BathSide::Cold ? term.coeff_cold : term.coeff_hot, rho,
                          out);
    }
    for (const auto& term : set.lambda_cross) {
        accumulate_cross(term, side == BathSide::Cold ? term.rate_cold : term.rate_hot, t, rho,
                         out);
    }
    return out;
}

Matrix apply_lambda(const DissipatorSet& set, double t, const Matrix& rho) {
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (const auto& term : set.lambda_static) {
        accumulate_static(term, term.coeff_cold + term.coeff_hot, rho, out);
    }
    for (const auto& term : set.lambda_cross) {
        accumulate_cross(term, term.rate_cold + term.rate_hot, t, rho, out);
    }
    return out;
}

Matrix apply_lambda_cross(const DissipatorSet& set, BathSide side, double t, const Matrix& rho) {
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (const auto& term : set.lambda_cross) {
        accumulate_cross(term, side == BathSide::Cold ? term.rate_cold : term.rate_hot, t, rho,
                         out);
    }
    return out;
}

InstantFlows instantaneous_flows(const DissipatorSet& set, double t, const Matrix& rho) {
    const Matrix lc = apply_bath_generator(set, BathSide::Cold, t, rho);
    const Matrix lh = apply_bath_generator(set, BathSide::Hot, t, rho);
    InstantFlows f;
    f.q_c = real_trace_product(lc, set.h_joint);
    f.q_h = real_trace_product(lh, set.h_joint);
    const Matrix sum_s = partial_trace_second(lc + lh, set.dim_s, set.dim_r);
    f.e_s_dot = real_trace_product(sum_s, set.h_s);
    return f;
}

double battery_energy_flow(const DissipatorSet& set, const Matrix& rho_r) {
    const Matrix& a = set.a_r_low;
    const double emit = real_expectation(rho_r, a.adjoint() * a);
    const double absorb = real_expectation(rho_r, a * a.adjoint());
    return set.er_down * absorb - set.er_up * emit;
}

namespace {

TrajectoryPoint make_point(const DissipatorSet& set, double t, const PolicedState& state,
                           const Matrix& rho_r, const Matrix& rho_s) {
    TrajectoryPoint p;
    p.t = t;
    const InstantFlows f = instantaneous_flows(set, t, state.rho);
    p.report.q_c = f.q_c;
    p.report.q_h = f.q_h;
    p.report.e_s_dot = f.e_s_dot;
    p.report.e_r_dot = battery_energy_flow(set, rho_r);
    p.report.error_order = set.error_order;
    if (f.q_c > set.idle_band) {
        p.report.regime = Regime::Refrigeration;
        p.report.eta = set.omega0 / set.nu0;
    } else if (f.q_c < -set.idle_band) {
        p.report.regime = Regime::EnergyExtraction;
        p.report.eta = set.nu0 / (set.omega0 + set.nu0);
    } else {
        p.report.regime = Regime::Idle;
        p.report.eta = 0.0;
    }
    p.energy_r = real_trace_product(rho_r, set.h_r);
    p.energy_s = real_trace_product(rho_s, set.h_s);
    p.energy_joint = real_trace_product(state.rho, set.h_joint);
    p.entropy_r = von_neumann_entropy(rho_r);
    p.entropy_joint = von_neumann_entropy(state.rho);
    try {
        const Matrix& a = set.a_r_low;
        const double emit = real_expectation(rho_r, a.adjoint() * a);
        const double absorb = real_expectation(rho_r, a * a.adjoint());
        p.beta_app = apparent_temperature_from_weights(emit, absorb, set.nu0).beta;
    } catch (const UndefinedTemperatureError&) {
        p.beta_app = std::numeric_limits<double>::quiet_NaN();
    }
    p.transient = t < 5.0 * set.tau_es;
    p.beyond_validity = t > 3.0 * set.tau_r;
    return p;
}

}  // namespace

Trajectory evolve(const MachineConfig& config, const Matrix& initial_battery, double t_end,
                  double output_step, const AdaptiveOptions& ode) {
    if (!(output_step > 0.0)) throw DomainError("output step must be positive");
    if (!(t_end >= 0.0)) throw DomainError("horizon must be nonnegative");

    DissipatorSet set = build_dissipators(config);
    const DensityMatrix rho_r0(initial_battery);
    if (rho_r0.dim() != set.dim_r) {
        throw ShapeError("battery state dimension does not match the battery model");
    }

    const Eigen::Index n = set.dim_s * set.dim_r;
    Matrix rho = tensor(set.rho_s_eq, rho_r0.matrix());
    Eigen::VectorXcd y = Eigen::Map<const Eigen::VectorXcd>(rho.data(), n * n);

    const auto rhs = [&set, n](double t, const Eigen::VectorXcd& v, Eigen::VectorXcd& dv) {
        const Matrix m = Eigen::Map<const Matrix>(v.data(), n, n);
        const Matrix out = apply_generator(set, t, m);
        dv = Eigen::Map<const Eigen::VectorXcd>(out.data(), n * n);
    };

    Trajectory traj;
    traj.tau_es = set.tau_es;
    traj.tau_r = set.tau_r;

    AdaptiveOptions opt = ode;
    auto sample = [&](double t, const Matrix& raw) {
        PolicedState st = police(raw);
        if (st.clipped) ++traj.clipped_points;
        const Matrix rho_r = partial_trace_first(st.rho, set.dim_s, set.dim_r);
        const Matrix rho_s = partial_trace_second(st.rho, set.dim_s, set.dim_r);
        TrajectoryPoint p = make_point(set, t, st, rho_r, rho_s);
        p.trace_defect = st.trace_defect;
        traj.points.push_back(std::move(p));
        traj.battery_states.push_back(rho_r);
    };

    sample(0.0, rho);
    double t_prev = 0.0;
    for (long k = 1; t_prev < t_end; ++k) {
        const double t_k = std::min(static_cast<double>(k) * output_step, t_end);
        opt.initial_step = integrate_adaptive(rhs, t_prev, t_k, y, opt);
        const Matrix m = Eigen::Map<const Matrix>(y.data(), n, n);
        sample(t_k, m);
        t_prev = t_k;
    }
    return traj;
}

double quasi_steady_medium_population(const MachineConfig& config, const Matrix& battery_state) {
    validate_machine(config);
    const BatteryInstance battery = make_battery(config.battery, DensityMatrix(battery_state));
    const double emit = battery.emission_weight();
    const double absorb = battery.absorption_weight();

    const double w0 = config.omega0;
    const double n0 = config.nu0;
    const double tc = config.bath_c.temperature;
    const double gc_p = spectral_density(config.bath_c, w0);
    const double gc_m = spectral_density(config.bath_c, -w0);
    const double gh_p = spectral_density(config.bath_h, w0 + n0);
    const double gh_m = spectral_density(config.bath_h, -(w0 + n0));
    const double g2a2w2 = config.g * config.g * config.alpha * config.alpha * w0 * w0;

    if (config.medium.kind == MediumKind::TwoLevel) {
        const double pump = (emit - absorb) / (tc * n0);
        const double r_plus = gc_p + g2a2w2 * (gh_p / (n0 * n0) * emit + gc_p * pump);
        const double r_minus = gc_m + g2a2w2 * (gh_m / (n0 * n0) * absorb + gc_m * pump);
        const double r_total = r_plus + r_minus;
        if (r_total <= 0.0) {
            throw ValidityError("medium relaxation rate is not positive; out of regime");
        }
        return r_minus / r_total;
    }

    const Matrix h_s = medium_hamiltonian(config.medium, config.omega0);
    const Matrix num = h_s / config.omega0;
    const Matrix rho_eq = thermal_state(HermitianOperator(h_s), tc).matrix();
    const double n_sq = real_expectation(rho_eq, num * num);
    const double n_shift = real_expectation(rho_eq, num * num + num);
    const double lambda =
        gc_p - gc_m + g2a2w2 / (n0 * n0) * (gh_p * emit - gh_m * absorb);
    const double r = gc_m + g2a2w2 * (gh_m / (n0 * n0) * absorb -
                                      (gc_p * n_sq + gc_m * n_shift) * 2.0 * (emit - absorb) /
                                          (tc * n0));
    if (lambda <= 0.0) {
        throw ValidityError("medium relaxation rate is not positive; out of regime");
    }
    return r / lambda;
}

DischargeCurve battery_discharge_curve(const MachineConfig& config, const Matrix& initial_battery,
                                       double t_end, int samples) {
    if (!(t_end > 0.0)) throw DomainError("horizon must be positive");
    if (samples < 2) throw DomainError("need at least two samples");

    DissipatorSet set = build_dissipators(config);
    const DensityMatrix rho0(initial_battery);
    if (rho0.dim() != set.dim_r) {
        throw ShapeError("battery state dimension does not match the battery model");
    }

    const Matrix a = set.a_r_low;
    const Matrix ad = a.adjoint();
    const Matrix ada = ad * a;
    const Matrix aad = a * ad;
    const double k_up = set.er_up / set.nu0;
    const double k_down = set.er_down / set.nu0;
    const Eigen::Index d = set.dim_r;

    const auto rhs = [&](double, const Eigen::VectorXcd& v, Eigen::VectorXcd& dv) {
        const Matrix rho = Eigen::Map<const Matrix>(v.data(), d, d);
        Matrix out = k_up * (a * rho * ad - 0.5 * (ada * rho + rho * ada)) +
                     k_down * (ad * rho * a - 0.5 * (aad * rho + rho * aad));
        dv = Eigen::Map<const Eigen::VectorXcd>(out.data(), d * d);
    };

    DischargeCurve curve;
    curve.tau_r = set.tau_r;
    Eigen::VectorXcd y =
        Eigen::Map<const Eigen::VectorXcd>(rho0.matrix().data(), d * d);

    AdaptiveOptions opt;
    auto sample = [&](double t, const Matrix& raw) {
        const PolicedState st = police(raw);
        curve.times.push_back(t);
        curve.energy.push_back(real_trace_product(st.rho, set.h_r));
        double beta = std::numeric_limits<double>::quiet_NaN();
        try {
            const double emit = real_expectation(st.rho, ada);
            const double absorb = real_expectation(st.rho, aad);
            beta = apparent_temperature_from_weights(emit, absorb, set.nu0).beta;
        } catch (const UndefinedTemperatureError&) {
        }
        curve.beta.push_back(beta);
    };

    sample(0.0, rho0.matrix());
    double t_prev = 0.0;
    for (int k = 1; k < samples; ++k) {
        const double t_k = t_end * static_cast<double>(k) / (samples - 1);
        opt.initial_step = integrate_adaptive(rhs, t_prev, t_k, y, opt);
        sample(t_k, Eigen::Map<const Matrix>(y.data(), d, d));
        t_prev = t_k;
    }
    return curve;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (f == nullptr) throw SchemaError("cannot open output file: " + path);
    std::fprintf(f, "t,E_R,E_S,q_c,q_h,e_r_dot,eta,S_rho_R,beta_app,regime\n");
    for (const auto& p : traj.points) {
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", p.t,
                     p.energy_r, p.energy_s, p.report.q_c, p.report.q_h, p.report.e_r_dot,
                     p.report.eta, p.entropy_r, p.beta_app, regime_label(p.report.regime));
    }
    std::fclose(f);
}

}  // namespace aqtm
