// operator_core.hpp: dense complex operator algebra shared by every module.
//
// Conventions (hbar = k_B = 1 throughout):
//  * frequencies are signed; the eigenoperator A(nu) with nu > 0 lowers the
//    energy by nu, satisfies [H, A(nu)] = -nu A(nu), and A(-nu) = A(nu)^dag.
//  * tensor products put the working-medium factor first: tensor(S, R).
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <vector>

#include "aqtm/errors.hpp"

namespace aqtm {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

// Default numerical tolerances. Every validating entry point takes these as
// overridable arguments; the values here are the library-wide defaults.
struct Tolerances {
    double herm = 1e-10;   // max-abs hermiticity residual
    double trace = 1e-10;  // |Tr(rho) - 1|
    double psd = 1e-9;     // largest admissible negative eigenvalue magnitude
    double eig = 1e-8;     // eigen-identity residuals
    double kms = 1e-9;     // detailed-balance residual of thermal states
    double trunc = 1e-6;   // top-two level population budget for truncated bases
};

// ---- basic helpers ----

bool is_hermitian(const Matrix& m, double tol = Tolerances{}.herm);
Matrix commutator(const Matrix& a, const Matrix& b);
Matrix anticommutator(const Matrix& a, const Matrix& b);
Matrix tensor(const Matrix& a, const Matrix& b);
Complex expectation(const Matrix& rho, const Matrix& op);
double real_expectation(const Matrix& rho, const Matrix& op);

Matrix identity(Eigen::Index n);
Matrix annihilation(Eigen::Index n);  // truncated ladder-lowering operator
Matrix number_operator(Eigen::Index n);
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

// Partial traces on a bipartite space ordered as tensor(first, second).
Matrix partial_trace_first(const Matrix& m, Eigen::Index dim_first, Eigen::Index dim_second);
Matrix partial_trace_second(const Matrix& m, Eigen::Index dim_first, Eigen::Index dim_second);

// exp(K) for an anti-hermitian generator K, evaluated exactly through the
// eigenbasis of iK. Throws HermiticityError if K is not anti-hermitian.
Matrix exp_antihermitian(const Matrix& k, double tol = Tolerances{}.herm);

// ---- checked operator types ----

class HermitianOperator {
public:
    explicit HermitianOperator(Matrix m, double tol_herm = Tolerances{}.herm);

    const Matrix& matrix() const noexcept { return m_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }

private:
    Matrix m_;
};

class DensityMatrix {
public:
    explicit DensityMatrix(Matrix m, double tol_herm = Tolerances{}.herm,
                           double tol_trace = Tolerances{}.trace,
                           double tol_psd = Tolerances{}.psd);

    const Matrix& matrix() const noexcept { return m_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }

private:
    Matrix m_;
};

// ---- spectral structure ----

struct SpectralDecomposition {
    std::vector<double> eigenvalues;  // distinct, ascending
    std::vector<Matrix> projectors;   // aligned with eigenvalues
    Matrix basis;  // unitary, eigenvector columns ascending, groups contiguous
    std::vector<Eigen::Index> group_offsets;  // size groups+1, column ranges in basis
    double tol_degen = 0.0;                   // grouping tolerance actually used

    Eigen::Index dim() const { return basis.rows(); }
};

// Frequency-resolved components of an observable relative to a Hamiltonian.
struct EigenoperatorSet {
    std::vector<double> frequencies;  // signed, ascending, closed under negation
    std::vector<Matrix> components;   // aligned with frequencies
    double tol_freq = 0.0;            // matching tolerance for lookups

    bool has(double nu) const;
    const Matrix& at(double nu) const;  // DomainError when absent
    Matrix sum() const;                 // reconstructs the observable
};

// Groups eigenvalues within tol_degen; a negative tol_degen selects the
// default 1e-9 * spectral range.
SpectralDecomposition spectral_decompose(const HermitianOperator& h, double tol_degen = -1.0);

EigenoperatorSet eigenoperators(const HermitianOperator& a, const HermitianOperator& h,
                                double tol_degen = -1.0);
EigenoperatorSet eigenoperators(const HermitianOperator& a, const SpectralDecomposition& dec);

// Gibbs state exp(-H/T)/Z. Negative T is legal (bounded spectra); T == 0 is
// not and raises DegenerateTemperatureError. Use ground_state for the T -> 0+
// limit instead.
DensityMatrix thermal_state(const HermitianOperator& h, double temperature);
DensityMatrix ground_state(const HermitianOperator& h);

double von_neumann_entropy(const Matrix& rho);

// Matrix logarithm of a positive state with eigenvalue floor, for analytic
// entropy rates. Eigenvalues below the floor are clamped.
Matrix log_density(const Matrix& rho, double floor = 1e-300);

}  // namespace aqtm
