#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "aqtm/operator_core.hpp"

using namespace aqtm;

namespace {

// Deterministic random operators for property tests.
Matrix random_matrix(std::mt19937& rng, Eigen::Index n) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(dist(rng), dist(rng));
    return m;
}

HermitianOperator random_hermitian(std::mt19937& rng, Eigen::Index n) {
    Matrix m = random_matrix(rng, n);
    return HermitianOperator((m + m.adjoint()) / 2.0);
}

DensityMatrix random_density(std::mt19937& rng, Eigen::Index n) {
    Matrix m = random_matrix(rng, n);
    Matrix rho = m * m.adjoint();
    return DensityMatrix(rho / rho.trace());
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("hermitian operator validation") {
    Matrix good = pauli_x();
    CHECK_NOTHROW(HermitianOperator{good});

    Matrix bad(2, 2);
    bad << 0, 1, 2, 0;
    CHECK_THROWS_AS(HermitianOperator{bad}, HermiticityError);

    Matrix rect(2, 3);
    rect.setZero();
    CHECK_THROWS_AS(HermitianOperator{rect}, ShapeError);
}

TEST_CASE("density matrix validation") {
    Matrix half = 0.5 * identity(2);
    CHECK_NOTHROW(DensityMatrix{half});

    CHECK_THROWS_AS(DensityMatrix{identity(2)}, StateError);  // trace 2

    Matrix neg(2, 2);
    neg << 1.5, 0, 0, -0.5;
    CHECK_THROWS_AS(DensityMatrix{neg}, StateError);  // not PSD
}

TEST_CASE("spectral_decompose merges exact degeneracies") {
    Matrix h = Matrix::Zero(3, 3);
    h(1, 1) = 1.0;
    h(2, 2) = 1.0;
    auto dec = spectral_decompose(HermitianOperator(h), 1e-9);
    REQUIRE(dec.eigenvalues.size() == 2);
    CHECK(dec.eigenvalues[0] == doctest::Approx(0.0));
    CHECK(dec.eigenvalues[1] == doctest::Approx(1.0));
    CHECK(dec.projectors[1].trace().real() == doctest::Approx(2.0));
}

TEST_CASE("spectral_decompose identity") {
    auto dec = spectral_decompose(HermitianOperator(identity(4)));
    REQUIRE(dec.eigenvalues.size() == 1);
    CHECK(dec.eigenvalues[0] == doctest::Approx(1.0));
    CHECK(max_abs(dec.projectors[0] - identity(4)) < 1e-12);
}

TEST_CASE("spectral_decompose of a dispersively coupled pair") {
    // H = H_S + H_R + g*alpha*H_S A_R on TLS x TLS, unit splittings. The exact
    // spectrum stays within O(g) of {0, 1, 1, 2}; compare against a direct
    // dense solve of the very same matrix built by hand.
    const double g = 0.01, nu0 = 1.0, omega0 = 1.0;
    Matrix h_s = omega0 * number_operator(2);
    Matrix h_r = nu0 * number_operator(2);
    Matrix a_r = pauli_x();
    Matrix h = tensor(h_s, identity(2)) + tensor(identity(2), h_r) + g * tensor(h_s, a_r);

    Matrix h_manual = Matrix::Zero(4, 4);
    h_manual(1, 1) = nu0;
    h_manual(2, 2) = omega0;
    h_manual(3, 3) = omega0 + nu0;
    h_manual(2, 3) = g * omega0;
    h_manual(3, 2) = g * omega0;
    CHECK(max_abs(h - h_manual) < 1e-14);

    auto dec = spectral_decompose(HermitianOperator(h), 1e-12);
    REQUIRE(dec.eigenvalues.size() == 4);
    Eigen::SelfAdjointEigenSolver<Matrix> direct(h_manual);
    const double bare[4] = {0.0, nu0, omega0, omega0 + nu0};
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(dec.eigenvalues[i] - direct.eigenvalues()(i)) < 1e-12);
        CHECK(std::abs(dec.eigenvalues[i] - bare[i]) < 5 * g);
    }
    // The coupled block is shifted off the bare values.
    CHECK(std::abs(dec.eigenvalues[3] - (omega0 + nu0)) > g * g / 10);
}

TEST_CASE("eigenoperators of truncated oscillator ladder") {
    const int n = 5;
    Matrix a = annihilation(n);
    HermitianOperator coupling(a + a.adjoint().eval());
    HermitianOperator h(number_operator(n));
    auto set = eigenoperators(coupling, h);
    REQUIRE(set.frequencies.size() == 2);
    CHECK(max_abs(set.at(1.0) - a) < 1e-12);
    CHECK(max_abs(set.at(-1.0) - a.adjoint()) < 1e-12);
    CHECK_FALSE(set.has(0.0));
    CHECK_THROWS_AS(set.at(0.5), DomainError);
}

TEST_CASE("eigenoperators of sigma_x against sigma_z splitting") {
    const double omega0 = 1.3;
    HermitianOperator h(omega0 / 2.0 * pauli_z());
    auto set = eigenoperators(HermitianOperator(pauli_x()), h);
    // With sigma_z = diag(1,-1) the first basis vector is the excited state,
    // so the lowering component sits at entry (1,0).
    Matrix lower = Matrix::Zero(2, 2);
    lower(1, 0) = 1.0;
    CHECK(max_abs(set.at(omega0) - lower) < 1e-12);
    CHECK(max_abs(set.at(-omega0) - lower.adjoint()) < 1e-12);
}

TEST_CASE("eigenoperators of a two-spin collective coupling") {
    const double nu0 = 1.0;
    Matrix n1 = tensor(number_operator(2), identity(2));
    Matrix n2 = tensor(identity(2), number_operator(2));
    Matrix sx1 = tensor(pauli_x(), identity(2));
    Matrix sx2 = tensor(identity(2), pauli_x());
    auto set = eigenoperators(HermitianOperator(sx1 + sx2), HermitianOperator(nu0 * (n1 + n2)));
    // lowering operator on each site: |0><1| in the number basis
    Matrix low = annihilation(2);
    Matrix collective = tensor(low, identity(2)) + tensor(identity(2), low);
    CHECK(max_abs(set.at(nu0) - collective) < 1e-12);
    // single-quantum coupling: no component two rungs down
    CHECK_FALSE(set.has(2 * nu0));
}

TEST_CASE("thermal state limits and Boltzmann weights") {
    Matrix h = Matrix::Zero(2, 2);
    h(1, 1) = 1.0;
    HermitianOperator ho(h);

    auto hot = thermal_state(ho, 1e12);
    CHECK(hot.matrix()(0, 0).real() == doctest::Approx(0.5).epsilon(1e-9));

    auto unit = thermal_state(ho, 1.0);
    const double z = 1.0 + std::exp(-1.0);
    CHECK(unit.matrix()(0, 0).real() == doctest::Approx(1.0 / z));
    CHECK(unit.matrix()(1, 1).real() == doctest::Approx(std::exp(-1.0) / z));

    CHECK_THROWS_AS(thermal_state(ho, 0.0), DegenerateTemperatureError);

    auto inverted = thermal_state(ho, -1.0);
    CHECK(inverted.matrix()(1, 1).real() > inverted.matrix()(0, 0).real());
}

TEST_CASE("truncated oscillator thermal occupation matches geometric sum") {
    const int n = 5;
    const double t = 0.5, nu0 = 1.0;
    HermitianOperator h(nu0 * number_operator(n));
    auto rho = thermal_state(h, t);

    // independent truncated geometric series
    double z = 0.0, num = 0.0;
    for (int k = 0; k < n; ++k) {
        const double w = std::exp(-k * nu0 / t);
        z += w;
        num += k * w;
    }
    const double occupation = real_expectation(rho.matrix(), number_operator(n));
    CHECK(occupation == doctest::Approx(num / z).epsilon(1e-12));
}

TEST_CASE("ground state projector constructor") {
    Matrix h = Matrix::Zero(3, 3);
    h(0, 0) = -1.0;
    h(1, 1) = -1.0;
    h(2, 2) = 3.0;
    auto rho = ground_state(HermitianOperator(h));
    CHECK(rho.matrix()(0, 0).real() == doctest::Approx(0.5));
    CHECK(rho.matrix()(1, 1).real() == doctest::Approx(0.5));
    CHECK(rho.matrix()(2, 2).real() == doctest::Approx(0.0));
}

TEST_CASE("tensor product conventions") {
    CHECK(max_abs(tensor(identity(2), identity(3)) - identity(6)) < 1e-15);
    CHECK(std::abs(tensor(pauli_z(), identity(2)).trace()) < 1e-15);

    Matrix lhs = tensor(number_operator(3), identity(2));
    Matrix expected = Matrix::Zero(6, 6);
    const double diag[6] = {0, 0, 1, 1, 2, 2};
    for (int i = 0; i < 6; ++i) expected(i, i) = diag[i];
    CHECK(max_abs(lhs - expected) < 1e-15);
}

TEST_CASE("partial traces undo tensor products") {
    std::mt19937 rng(71);
    auto rho_a = random_density(rng, 3);
    auto rho_b = random_density(rng, 2);
    Matrix joint = tensor(rho_a.matrix(), rho_b.matrix());
    CHECK(max_abs(partial_trace_second(joint, 3, 2) - rho_a.matrix()) < 1e-12);
    CHECK(max_abs(partial_trace_first(joint, 3, 2) - rho_b.matrix()) < 1e-12);
}

TEST_CASE("eigenoperator completeness, pairing and commutator properties") {
    std::mt19937 rng(1234);
    for (int trial = 0; trial < 40; ++trial) {
        const Eigen::Index n = 2 + (trial % 5);
        auto a = random_hermitian(rng, n);
        auto h = random_hermitian(rng, n);
        auto set = eigenoperators(a, h);

        CHECK(max_abs(set.sum() - a.matrix()) < 1e-10);
        for (std::size_t i = 0; i < set.frequencies.size(); ++i) {
            const double nu = set.frequencies[i];
            REQUIRE(set.has(-nu));
            CHECK(max_abs(set.at(-nu) - set.components[i].adjoint()) < 1e-10);
            Matrix res = commutator(h.matrix(), set.components[i]) + nu * set.components[i];
            CHECK(max_abs(res) < 1e-8);
        }
    }
}

TEST_CASE("spectral projector completeness and orthogonality") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const Eigen::Index n = 2 + (trial % 5);
        auto dec = spectral_decompose(random_hermitian(rng, n));
        Matrix sum = Matrix::Zero(n, n);
        for (std::size_t i = 0; i < dec.projectors.size(); ++i) {
            sum += dec.projectors[i];
            CHECK(max_abs(dec.projectors[i] * dec.projectors[i] - dec.projectors[i]) < 1e-10);
            for (std::size_t j = i + 1; j < dec.projectors.size(); ++j) {
                CHECK(max_abs(dec.projectors[i] * dec.projectors[j]) < 1e-10);
            }
        }
        CHECK(max_abs(sum - identity(n)) < 1e-10);
    }
}

TEST_CASE("thermal states obey detailed balance for arbitrary couplings") {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const Eigen::Index n = 2 + (trial % 5);
        auto a = random_hermitian(rng, n);
        auto h = random_hermitian(rng, n);
        const double t = (trial % 2 == 0) ? 0.7 : 2.5;
        auto rho = thermal_state(h, t);
        auto set = eigenoperators(a, h);
        for (std::size_t i = 0; i < set.frequencies.size(); ++i) {
            const double nu = set.frequencies[i];
            Matrix res = set.components[i] * rho.matrix() -
                         std::exp(-nu / t) * rho.matrix() * set.components[i];
            CHECK(max_abs(res) < 1e-9);
        }
    }
}

TEST_CASE("exp of anti-hermitian generator is unitary") {
    std::mt19937 rng(5);
    Matrix m = random_matrix(rng, 4);
    Matrix k = (m - m.adjoint()) / 2.0;
    Matrix u = exp_antihermitian(k);
    CHECK(max_abs(u * u.adjoint() - identity(4)) < 1e-12);
    CHECK_THROWS_AS(exp_antihermitian(pauli_x()), HermiticityError);

    // one-parameter group property on a small step
    Matrix u1 = exp_antihermitian(0.5 * k);
    CHECK(max_abs(u1 * u1 - u) < 1e-12);
}

TEST_CASE("entropy of mixtures") {
    CHECK(von_neumann_entropy(0.5 * identity(2)) == doctest::Approx(std::log(2.0)));
    Matrix pure = Matrix::Zero(2, 2);
    pure(0, 0) = 1.0;
    CHECK(von_neumann_entropy(pure) == doctest::Approx(0.0));

    std::mt19937 rng(7);
    auto rho = random_density(rng, 4);
    Matrix lr = log_density(rho.matrix());
    CHECK(von_neumann_entropy(rho.matrix()) ==
          doctest::Approx(-real_expectation(rho.matrix(), lr)).epsilon(1e-10));
}
