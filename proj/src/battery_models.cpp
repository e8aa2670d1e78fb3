// battery_models.cpp
#include "aqtm/battery_models.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace aqtm {

namespace {

constexpr int kMaxSpins = 12;  // 2^12 = 4096 stays inside the dense-size budget

void check_spec(const BatterySpec& spec) {
    if (!(spec.nu0 > 0.0)) throw DomainError("battery: nu0 must be positive");
    if (const auto* l = std::get_if<LadderSpec>(&spec.kind)) {
        if (l->levels < 2) throw DomainError("battery: ladder needs at least 2 levels");
        if (!l->amplitudes.empty() && int(l->amplitudes.size()) != l->levels - 1) {
            throw ShapeError("battery: need one amplitude per ladder step");
        }
    } else if (const auto* d = std::get_if<DegenerateLadderSpec>(&spec.kind)) {
        if (d->degeneracies.size() < 2) throw DomainError("battery: need at least 2 levels");
        for (int l : d->degeneracies) {
            if (l < 1) throw DomainError("battery: degeneracies must be >= 1");
        }
    } else if (const auto* s = std::get_if<SpinEnsembleSpec>(&spec.kind)) {
        if (s->count < 1 || s->count > kMaxSpins) {
            throw DomainError("battery: spin count outside [1, " + std::to_string(kMaxSpins) + "]");
        }
    } else if (const auto* o = std::get_if<TruncatedOscillatorSpec>(&spec.kind)) {
        if (o->n_cut < 2) throw DomainError("battery: oscillator cutoff must be >= 2");
    }
}

std::vector<Eigen::Index> level_offsets(const std::vector<int>& degeneracies) {
    std::vector<Eigen::Index> off(degeneracies.size() + 1, 0);
    for (std::size_t n = 0; n < degeneracies.size(); ++n) off[n + 1] = off[n] + degeneracies[n];
    return off;
}

// Embeds a single-site operator at position `site` of an n-spin chain.
Matrix embed_site(const Matrix& op, int site, int n) {
    Matrix out = Matrix::Identity(1, 1);
    for (int k = 0; k < n; ++k) out = tensor(out, k == site ? op : identity(2));
    return out;
}

}  // namespace

Eigen::Index BatterySpec::dim() const {
    if (const auto* l = std::get_if<LadderSpec>(&kind)) return l->levels;
    if (const auto* d = std::get_if<DegenerateLadderSpec>(&kind)) {
        return std::accumulate(d->degeneracies.begin(), d->degeneracies.end(), Eigen::Index{0});
    }
    if (const auto* s = std::get_if<SpinEnsembleSpec>(&kind)) return Eigen::Index(1) << s->count;
    return std::get<TruncatedOscillatorSpec>(kind).n_cut;
}

HermitianOperator battery_hamiltonian(const BatterySpec& spec) {
    check_spec(spec);
    if (const auto* l = std::get_if<LadderSpec>(&spec.kind)) {
        return HermitianOperator(spec.nu0 * number_operator(l->levels));
    }
    if (const auto* d = std::get_if<DegenerateLadderSpec>(&spec.kind)) {
        const auto off = level_offsets(d->degeneracies);
        Matrix h = Matrix::Zero(off.back(), off.back());
        for (std::size_t n = 0; n < d->degeneracies.size(); ++n) {
            for (int k = 0; k < d->degeneracies[n]; ++k) h(off[n] + k, off[n] + k) = n * spec.nu0;
        }
        return HermitianOperator(std::move(h));
    }
    if (const auto* s = std::get_if<SpinEnsembleSpec>(&spec.kind)) {
        const Eigen::Index dim = Eigen::Index(1) << s->count;
        Matrix h = Matrix::Zero(dim, dim);
        for (int site = 0; site < s->count; ++site) {
            h += spec.nu0 * embed_site(number_operator(2), site, s->count);
        }
        return HermitianOperator(std::move(h));
    }
    const auto& o = std::get<TruncatedOscillatorSpec>(spec.kind);
    return HermitianOperator(spec.nu0 * number_operator(o.n_cut));
}

HermitianOperator battery_coupling(const BatterySpec& spec) {
    check_spec(spec);
    if (const auto* l = std::get_if<LadderSpec>(&spec.kind)) {
        Matrix a = Matrix::Zero(l->levels, l->levels);
        for (int n = 0; n + 1 < l->levels; ++n) {
            a(n, n + 1) = l->amplitudes.empty() ? 1.0 : l->amplitudes[n];
        }
        return HermitianOperator(a + a.adjoint().eval());
    }
    if (const auto* d = std::get_if<DegenerateLadderSpec>(&spec.kind)) {
        const auto off = level_offsets(d->degeneracies);
        Matrix a = Matrix::Zero(off.back(), off.back());
        for (std::size_t n = 1; n < d->degeneracies.size(); ++n) {
            for (int k = 0; k < d->degeneracies[n - 1]; ++k) {
                for (int kp = 0; kp < d->degeneracies[n]; ++kp) {
                    a(off[n - 1] + k, off[n] + kp) = 1.0;
                }
            }
        }
        return HermitianOperator(a + a.adjoint().eval());
    }
    if (const auto* s = std::get_if<SpinEnsembleSpec>(&spec.kind)) {
        const Eigen::Index dim = Eigen::Index(1) << s->count;
        Matrix a = Matrix::Zero(dim, dim);
        for (int site = 0; site < s->count; ++site) {
            a += embed_site(pauli_x(), site, s->count);
        }
        return HermitianOperator(std::move(a));
    }
    const auto& o = std::get<TruncatedOscillatorSpec>(spec.kind);
    Matrix a = annihilation(o.n_cut);
    return HermitianOperator(a + a.adjoint().eval());
}

double BatteryInstance::emission_weight() const {
    const Matrix& a = ladder.at(spec.nu0);
    return real_expectation(state.matrix(), (a.adjoint() * a).eval());
}

double BatteryInstance::absorption_weight() const {
    const Matrix& a = ladder.at(spec.nu0);
    return real_expectation(state.matrix(), (a * a.adjoint()).eval());
}

double BatteryInstance::energy() const {
    return real_expectation(state.matrix(), hamiltonian.matrix());
}

BatteryInstance make_battery(const BatterySpec& spec, DensityMatrix state) {
    auto h = battery_hamiltonian(spec);
    if (state.dim() != h.dim()) {
        throw ShapeError("make_battery: state dimension " + std::to_string(state.dim()) +
                         " does not match battery dimension " + std::to_string(h.dim()));
    }
    auto a = battery_coupling(spec);
    auto ladder = eigenoperators(a, h, 1e-9 * spec.nu0);
    for (double nu : ladder.frequencies) {
        if (std::abs(nu) > 1e-9 && std::abs(std::abs(nu) - spec.nu0) > 1e-9 * spec.nu0) {
            throw DomainError("make_battery: coupling has a transition at " + std::to_string(nu) +
                              ", expected only +-nu0");
        }
    }
    return BatteryInstance{spec, std::move(h), std::move(a), std::move(ladder), std::move(state)};
}

BatteryInstance thermal_battery(const BatterySpec& spec, double temperature) {
    auto h = battery_hamiltonian(spec);
    return make_battery(spec, thermal_state(h, temperature));
}

BatteryInstance build_degenerate_ladder(int n, const std::vector<int>& degeneracies, double nu0,
                                        DensityMatrix state) {
    if (int(degeneracies.size()) != n + 1) {
        throw ShapeError("build_degenerate_ladder: need n+1 degeneracy entries");
    }
    BatterySpec spec{nu0, DegenerateLadderSpec{degeneracies}};
    return make_battery(spec, std::move(state));
}

DensityMatrix build_dicke_state(int n, int n_e) {
    if (n < 1 || n > kMaxSpins) throw DomainError("build_dicke_state: spin count out of range");
    if (n_e < 0 || n_e > n) throw DomainError("build_dicke_state: n_e outside [0, N]");
    const Eigen::Index dim = Eigen::Index(1) << n;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    // Basis index bit k set <=> spin k excited (matches number-operator basis
    // ordering used by embed_site).
    for (Eigen::Index idx = 0; idx < dim; ++idx) {
        int bits = 0;
        for (int k = 0; k < n; ++k) bits += int((idx >> k) & 1);
        if (bits == n_e) psi(idx) = 1.0;
    }
    psi.normalize();
    return DensityMatrix(psi * psi.adjoint());
}

BatteryInstance build_squeezed_thermal(int n_cut, double nu0, double t_r, double r,
                                       double trunc_tol) {
    BatterySpec spec{nu0, TruncatedOscillatorSpec{n_cut}};
    auto h = battery_hamiltonian(spec);
    Matrix a = annihilation(n_cut);
    const Matrix gen = (r / 2.0) * (a * a - (a.adjoint() * a.adjoint()).eval());
    const Matrix squeeze = exp_antihermitian(gen);
    const Matrix rho_th = thermal_state(h, t_r).matrix();
    Matrix rho = squeeze * rho_th * squeeze.adjoint();
    const double tail = rho(n_cut - 1, n_cut - 1).real() + rho(n_cut - 2, n_cut - 2).real();
    if (tail > trunc_tol) {
        throw TruncationError("build_squeezed_thermal: top-two Fock population " +
                              std::to_string(tail) + " exceeds budget; raise n_cut");
    }
    return make_battery(spec, DensityMatrix(std::move(rho)));
}

DensityMatrix phaseonium_like_state(const std::vector<int>& degeneracies,
                                    const std::vector<double>& populations,
                                    const std::vector<double>& coherences) {
    if (populations.size() != degeneracies.size() || coherences.size() != degeneracies.size()) {
        throw ShapeError("phaseonium_like_state: need one population and coherence per level");
    }
    const auto off = level_offsets(degeneracies);
    Matrix rho = Matrix::Zero(off.back(), off.back());
    for (std::size_t n = 0; n < degeneracies.size(); ++n) {
        const int l = degeneracies[n];
        if (l == 1 && coherences[n] != 0.0) {
            throw DomainError("phaseonium_like_state: nondegenerate level cannot hold coherence");
        }
        for (int k = 0; k < l; ++k) {
            rho(off[n] + k, off[n] + k) = populations[n] / l;
            for (int kp = 0; kp < l; ++kp) {
                if (k != kp) rho(off[n] + k, off[n] + kp) = coherences[n] / (double(l) * (l - 1));
            }
        }
    }
    return DensityMatrix(std::move(rho));
}

LevelSums degenerate_level_sums(const std::vector<int>& degeneracies, const DensityMatrix& state) {
    const auto off = level_offsets(degeneracies);
    if (state.dim() != off.back()) throw ShapeError("degenerate_level_sums: dimension mismatch");
    LevelSums sums;
    for (std::size_t n = 0; n < degeneracies.size(); ++n) {
        double pop = 0.0;
        Complex coh = 0.0;
        for (int k = 0; k < degeneracies[n]; ++k) {
            pop += state.matrix()(off[n] + k, off[n] + k).real();
            for (int kp = 0; kp < degeneracies[n]; ++kp) {
                if (k != kp) coh += state.matrix()(off[n] + k, off[n] + kp);
            }
        }
        sums.populations.push_back(pop);
        sums.coherences.push_back(coh.real());  // imaginary parts cancel pairwise
    }
    return sums;
}

}  // namespace aqtm
