// operator_core.cpp
#include "aqtm/operator_core.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <string>

namespace aqtm {

namespace {

void require_square(const Matrix& m, const char* who) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw ShapeError(std::string(who) + ": matrix must be square and non-empty, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

void require_same_dim(const Matrix& a, const Matrix& b, const char* who) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(who) + ": dimension mismatch " + std::to_string(a.rows()) +
                         " vs " + std::to_string(b.rows()));
    }
}

Eigen::SelfAdjointEigenSolver<Matrix> solve_hermitian(const Matrix& m, const char* who) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.info() != Eigen::Success) {
        throw NumericalError(std::string(who) + ": eigensolver failed to converge");
    }
    return es;
}

}  // namespace

// ---- basic helpers ----

bool is_hermitian(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Matrix commutator(const Matrix& a, const Matrix& b) {
    require_same_dim(a, b, "commutator");
    return a * b - b * a;
}

Matrix anticommutator(const Matrix& a, const Matrix& b) {
    require_same_dim(a, b, "anticommutator");
    return a * b + b * a;
}

Matrix tensor(const Matrix& a, const Matrix& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

Complex expectation(const Matrix& rho, const Matrix& op) {
    require_same_dim(rho, op, "expectation");
    return (rho * op).trace();
}

double real_expectation(const Matrix& rho, const Matrix& op) {
    return expectation(rho, op).real();
}

Matrix identity(Eigen::Index n) { return Matrix::Identity(n, n); }

Matrix annihilation(Eigen::Index n) {
    Matrix a = Matrix::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(double(k));
    return a;
}

Matrix number_operator(Eigen::Index n) {
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) m(k, k) = double(k);
    return m;
}

Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Matrix partial_trace_first(const Matrix& m, Eigen::Index d1, Eigen::Index d2) {
    require_square(m, "partial_trace_first");
    if (m.rows() != d1 * d2) throw ShapeError("partial_trace_first: dims do not factor the matrix");
    Matrix out = Matrix::Zero(d2, d2);
    for (Eigen::Index i = 0; i < d1; ++i) out += m.block(i * d2, i * d2, d2, d2);
    return out;
}

Matrix partial_trace_second(const Matrix& m, Eigen::Index d1, Eigen::Index d2) {
    require_square(m, "partial_trace_second");
    if (m.rows() != d1 * d2) throw ShapeError("partial_trace_second: dims do not factor the matrix");
    Matrix out = Matrix::Zero(d1, d1);
    for (Eigen::Index i = 0; i < d1; ++i)
        for (Eigen::Index j = 0; j < d1; ++j)
            out(i, j) = m.block(i * d2, j * d2, d2, d2).trace();
    return out;
}

Matrix exp_antihermitian(const Matrix& k, double tol) {
    require_square(k, "exp_antihermitian");
    if ((k + k.adjoint()).cwiseAbs().maxCoeff() > tol) {
        throw HermiticityError("exp_antihermitian: generator is not anti-hermitian");
    }
    // K = -iH with H hermitian, so exp(K) = V exp(-i diag) V^dag.
    const Matrix h = Complex(0, 1) * k;
    auto es = solve_hermitian((h + h.adjoint()) / 2.0, "exp_antihermitian");
    const auto& v = es.eigenvectors();
    Eigen::VectorXcd phases(k.rows());
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        phases(i) = std::exp(Complex(0, -es.eigenvalues()(i)));
    }
    return v * phases.asDiagonal() * v.adjoint();
}

// ---- checked operator types ----

HermitianOperator::HermitianOperator(Matrix m, double tol_herm) {
    require_square(m, "HermitianOperator");
    const double res = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (res > tol_herm) {
        throw HermiticityError("HermitianOperator: residual " + std::to_string(res) +
                               " exceeds tolerance");
    }
    m_ = (m + m.adjoint()) / 2.0;
}

DensityMatrix::DensityMatrix(Matrix m, double tol_herm, double tol_trace, double tol_psd) {
    require_square(m, "DensityMatrix");
    const double herm_res = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (herm_res > tol_herm) {
        throw HermiticityError("DensityMatrix: hermiticity residual " + std::to_string(herm_res));
    }
    Matrix sym = (m + m.adjoint()) / 2.0;
    const double tr = sym.trace().real();
    if (std::abs(tr - 1.0) > tol_trace) {
        throw StateError("DensityMatrix: trace " + std::to_string(tr) + " is not 1");
    }
    sym /= tr;
    auto es = solve_hermitian(sym, "DensityMatrix");
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -tol_psd) {
        throw StateError("DensityMatrix: negative eigenvalue " + std::to_string(min_eig));
    }
    m_ = std::move(sym);
}

// ---- spectral structure ----

SpectralDecomposition spectral_decompose(const HermitianOperator& h, double tol_degen) {
    auto es = solve_hermitian(h.matrix(), "spectral_decompose");
    const RealVector& vals = es.eigenvalues();
    const Matrix& vecs = es.eigenvectors();
    const Eigen::Index n = vals.size();

    double tol = tol_degen;
    if (tol < 0) {
        const double range = vals(n - 1) - vals(0);
        tol = 1e-9 * (range > 0 ? range : 1.0);
    }

    SpectralDecomposition dec;
    dec.tol_degen = tol;
    dec.basis = vecs;
    dec.group_offsets.push_back(0);
    Eigen::Index start = 0;
    for (Eigen::Index i = 1; i <= n; ++i) {
        if (i == n || vals(i) - vals(i - 1) > tol) {
            const Eigen::Index width = i - start;
            const auto block = vecs.middleCols(start, width);
            dec.eigenvalues.push_back(vals.segment(start, width).mean());
            dec.projectors.push_back(block * block.adjoint());
            dec.group_offsets.push_back(i);
            start = i;
        }
    }
    return dec;
}

bool EigenoperatorSet::has(double nu) const {
    for (double f : frequencies) {
        if (std::abs(f - nu) <= tol_freq) return true;
    }
    return false;
}

const Matrix& EigenoperatorSet::at(double nu) const {
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        if (std::abs(frequencies[i] - nu) <= tol_freq) return components[i];
    }
    throw DomainError("EigenoperatorSet: no component at frequency " + std::to_string(nu));
}

Matrix EigenoperatorSet::sum() const {
    if (components.empty()) throw DomainError("EigenoperatorSet: empty set");
    Matrix acc = Matrix::Zero(components.front().rows(), components.front().cols());
    for (const auto& c : components) acc += c;
    return acc;
}

EigenoperatorSet eigenoperators(const HermitianOperator& a, const SpectralDecomposition& dec) {
    if (a.dim() != dec.dim()) throw ShapeError("eigenoperators: dimension mismatch");
    const double drop = 1e-14 * std::max(1.0, a.matrix().cwiseAbs().maxCoeff());

    // One rotation into the eigenbasis; each group pair is then a contiguous
    // block, and only frequencies with surviving blocks pay a back-rotation.
    const Matrix in_basis = dec.basis.adjoint() * a.matrix() * dec.basis;
    const std::size_t groups = dec.eigenvalues.size();
    struct Block {
        double nu;
        std::size_t i, j;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < groups; ++i) {
        for (std::size_t j = 0; j < groups; ++j) {
            const auto part = in_basis.block(
                dec.group_offsets[i], dec.group_offsets[j],
                dec.group_offsets[i + 1] - dec.group_offsets[i],
                dec.group_offsets[j + 1] - dec.group_offsets[j]);
            if (part.cwiseAbs().maxCoeff() <= drop) continue;
            blocks.push_back({dec.eigenvalues[j] - dec.eigenvalues[i], i, j});
        }
    }
    std::sort(blocks.begin(), blocks.end(), [](const Block& l, const Block& r) { return l.nu < r.nu; });

    EigenoperatorSet set;
    set.tol_freq = std::max(dec.tol_degen, 1e-12);
    const Eigen::Index d = dec.dim();
    std::size_t start = 0;
    for (std::size_t k = 1; k <= blocks.size(); ++k) {
        if (k < blocks.size() && blocks[k].nu - blocks[k - 1].nu <= set.tol_freq) continue;
        Matrix masked = Matrix::Zero(d, d);
        double nu_sum = 0.0;
        for (std::size_t b = start; b < k; ++b) {
            const auto& blk = blocks[b];
            const Eigen::Index r0 = dec.group_offsets[blk.i];
            const Eigen::Index c0 = dec.group_offsets[blk.j];
            masked.block(r0, c0, dec.group_offsets[blk.i + 1] - r0,
                         dec.group_offsets[blk.j + 1] - c0) =
                in_basis.block(r0, c0, dec.group_offsets[blk.i + 1] - r0,
                               dec.group_offsets[blk.j + 1] - c0);
            nu_sum += blk.nu;
        }
        set.frequencies.push_back(nu_sum / double(k - start));
        set.components.push_back(dec.basis * masked * dec.basis.adjoint());
        start = k;
    }
    return set;
}

EigenoperatorSet eigenoperators(const HermitianOperator& a, const HermitianOperator& h,
                                double tol_degen) {
    return eigenoperators(a, spectral_decompose(h, tol_degen));
}

DensityMatrix thermal_state(const HermitianOperator& h, double temperature) {
    if (temperature == 0.0) {
        throw DegenerateTemperatureError("thermal_state: T = 0 is degenerate, use ground_state");
    }
    auto es = solve_hermitian(h.matrix(), "thermal_state");
    const RealVector& vals = es.eigenvalues();
    const Matrix& vecs = es.eigenvectors();
    // Shift so the largest Boltzmann exponent is zero; safe for either sign of T.
    const double ref = temperature > 0 ? vals.minCoeff() : vals.maxCoeff();
    RealVector w(vals.size());
    for (Eigen::Index i = 0; i < vals.size(); ++i) w(i) = std::exp(-(vals(i) - ref) / temperature);
    const double z = w.sum();
    Matrix rho = vecs * (w / z).cast<Complex>().asDiagonal() * vecs.adjoint();
    return DensityMatrix(std::move(rho));
}

DensityMatrix ground_state(const HermitianOperator& h) {
    auto dec = spectral_decompose(h);
    const Matrix& p = dec.projectors.front();
    return DensityMatrix(p / p.trace().real());
}

double von_neumann_entropy(const Matrix& rho) {
    require_square(rho, "von_neumann_entropy");
    auto es = solve_hermitian((rho + rho.adjoint()) / 2.0, "von_neumann_entropy");
    double s = 0.0;
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        const double p = es.eigenvalues()(i);
        if (p > 0.0) s -= p * std::log(p);
    }
    return s;
}

Matrix log_density(const Matrix& rho, double floor) {
    require_square(rho, "log_density");
    auto es = solve_hermitian((rho + rho.adjoint()) / 2.0, "log_density");
    Eigen::VectorXcd logs(rho.rows());
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        logs(i) = std::log(std::max(es.eigenvalues()(i), floor));
    }
    return es.eigenvectors() * logs.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace aqtm
