// redfield.cpp: exact-eigenbasis reference generator.
//
// The joint Hamiltonian (medium, battery, dispersive coupling) is
// diagonalized without approximation and both baths act through the medium
// quadrature a_s + a_s^dag. Expanding that quadrature over the exact
// eigenbasis yields jump components at the true coupling-shifted Bohr
// frequencies; the bath rates are sampled there, so nothing here is
// truncated at second order in g. Frequency pairs inside the pairing window
// stay coherently coupled; the full secular variant keeps only identical
// pairs.

#include "aqtm/redfield.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "aqtm/bath.hpp"
#include "aqtm/battery_models.hpp"
#include "aqtm/errors.hpp"

namespace aqtm {

namespace {

// vec(E rho F) = (F^T kron E) vec(rho) for column-major vec.
void add_sandwich(Eigen::MatrixXcd& out, const Complex& w, const Matrix& e, const Matrix& f) {
    out.noalias() += w * tensor(f.transpose(), e);
}

// rate * (A_i rho A_j^dag - A_j^dag A_i rho) + h.c., vectorized.
void add_channel_pair(Eigen::MatrixXcd& out, const Complex& rate, const Matrix& a_i,
                      const Matrix& a_j, const Matrix& id) {
    const Matrix a_j_dag = a_j.adjoint();
    const Matrix k = a_j_dag * a_i;
    add_sandwich(out, rate, a_i, a_j_dag);
    add_sandwich(out, -rate, k, id);
    add_sandwich(out, std::conj(rate), a_j, a_i.adjoint());
    add_sandwich(out, -std::conj(rate), id, Matrix(k.adjoint()));
}

double real_trace_product(const Matrix& a, const Matrix& b) {
    return (a.transpose().cwiseProduct(b)).sum().real();
}

}  // namespace

GlobalGenerator build_global_generator(const MachineConfig& config, bool full_secular,
                                       Eigen::Index dim_cap) {
    validate_machine(config);

    GlobalGenerator gen;
    gen.dim_s = config.medium.dim();
    gen.dim_r = config.battery.dim();
    gen.dimension = gen.dim_s * gen.dim_r;
    if (gen.dimension > dim_cap) {
        throw OracleSizeError("joint dimension " + std::to_string(gen.dimension) +
                              " exceeds the reference-generator cap " + std::to_string(dim_cap));
    }

    const Matrix h_s = medium_hamiltonian(config.medium, config.omega0);
    const Matrix a_s = medium_lowering(config.medium);
    const Matrix h_r = battery_hamiltonian(config.battery).matrix();
    const Matrix a_r = battery_coupling(config.battery).matrix();
    const Matrix id_s = identity(gen.dim_s);
    const Matrix id_r = identity(gen.dim_r);
    const Matrix id = identity(gen.dimension);

    gen.h_medium = tensor(h_s, id_r);
    gen.h_battery = tensor(id_s, h_r);
    gen.h_joint = gen.h_medium + gen.h_battery + config.g * config.alpha * tensor(h_s, a_r);
    gen.exact_eigenbasis = spectral_decompose(HermitianOperator(gen.h_joint));

    const Matrix quadrature = tensor(Matrix(a_s + a_s.adjoint()), id_r);
    gen.exact_ops = eigenoperators(HermitianOperator(quadrature), gen.exact_eigenbasis);

    gen.full_secular = full_secular;
    gen.window = full_secular ? 0.0 : 10.0 * config.g;
    gen.omega0 = config.omega0;
    gen.nu0 = config.nu0;
    gen.tau_es = 1.0 / spectral_density(config.bath_c, config.omega0);
    gen.error_order = error_order(config);
    gen.idle_band = config.idle_tol < 0.0 ? gen.error_order : config.idle_tol;
    gen.rho_s_eq = thermal_state(HermitianOperator(h_s), config.bath_c.temperature).matrix();

    const Eigen::Index n2 = gen.dimension * gen.dimension;
    gen.dissipator_cold = Eigen::MatrixXcd::Zero(n2, n2);
    gen.dissipator_hot = Eigen::MatrixXcd::Zero(n2, n2);

    const auto& freqs = gen.exact_ops.frequencies;
    const auto& comps = gen.exact_ops.components;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        for (std::size_t j = 0; j < freqs.size(); ++j) {
            const bool paired =
                full_secular ? (i == j) : (std::abs(freqs[i] - freqs[j]) <= gen.window);
            if (!paired) continue;
            add_channel_pair(gen.dissipator_cold, one_sided_rate(config.bath_c, freqs[i]),
                             comps[i], comps[j], id);
            add_channel_pair(gen.dissipator_hot, one_sided_rate(config.bath_h, freqs[i]),
                             comps[i], comps[j], id);
        }
    }

    gen.redfield_tensor = gen.dissipator_cold + gen.dissipator_hot;
    add_sandwich(gen.redfield_tensor, Complex(0.0, -1.0), gen.h_joint, id);
    add_sandwich(gen.redfield_tensor, Complex(0.0, 1.0), id, gen.h_joint);
    return gen;
}

HeatFlowReport oracle_heat_flows(const GlobalGenerator& gen, const DensityMatrix& rho) {
    if (rho.dim() != gen.dimension) {
        throw ShapeError("state dimension does not match the reference generator");
    }
    const Eigen::Index n = gen.dimension;
    const Eigen::Map<const Eigen::VectorXcd> v(rho.matrix().data(), n * n);
    const Eigen::VectorXcd lc_vec = gen.dissipator_cold * v;
    const Eigen::VectorXcd lh_vec = gen.dissipator_hot * v;
    const Eigen::Map<const Matrix> lc(lc_vec.data(), n, n);
    const Eigen::Map<const Matrix> lh(lh_vec.data(), n, n);

    HeatFlowReport report;
    report.q_c = real_trace_product(lc, gen.h_joint);
    report.q_h = real_trace_product(lh, gen.h_joint);
    const Matrix total = lc + lh;
    report.e_s_dot = real_trace_product(total, gen.h_medium);
    report.e_r_dot = real_trace_product(total, gen.h_battery);
    report.error_order = gen.error_order;
    if (report.q_c > gen.idle_band) {
        report.regime = Regime::Refrigeration;
        report.eta = gen.omega0 / gen.nu0;
    } else if (report.q_c < -gen.idle_band) {
        report.regime = Regime::EnergyExtraction;
        report.eta = gen.nu0 / (gen.omega0 + gen.nu0);
    } else {
        report.regime = Regime::Idle;
        report.eta = 0.0;
    }
    return report;
}

Matrix evolve_oracle(const GlobalGenerator& gen, const Matrix& rho0, double t_span,
                     const AdaptiveOptions& ode) {
    if (rho0.rows() != gen.dimension || rho0.cols() != gen.dimension) {
        throw ShapeError("initial state dimension does not match the reference generator");
    }
    if (t_span < 0.0) {
        throw DomainError("propagation span must be nonnegative");
    }
    const Eigen::Index n = gen.dimension;
    Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(rho0.data(), n * n);
    const OdeRhs rhs = [&gen](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        dy.noalias() = gen.redfield_tensor * y;
    };
    integrate_adaptive(rhs, 0.0, t_span, v, ode);

    Matrix rho = Eigen::Map<const Matrix>(v.data(), n, n);
    rho = 0.5 * (rho + rho.adjoint().eval());
    const double tr = rho.trace().real();
    if (!(tr > 0.0)) {
        throw PositivityError("propagated state lost its trace");
    }
    return rho / tr;
}

}  // namespace aqtm
