#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hens/core.hpp"
#include "hens/error.hpp"
#include "oracles.hpp"

using namespace hens;

namespace {

Matrix diag(std::initializer_list<double> d) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
    Eigen::Index i = 0;
    for (double x : d) m(i, i) = x, ++i;
    return m;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("tensor: identity and sigma_z with a projector") {
    const auto i2 = HermitianOperator::identity(2);
    CHECK(max_abs(tensor(i2, i2).matrix() - Matrix::Identity(4, 4)) == 0.0);

    const Matrix p0 = diag({1.0, 0.0});
    CHECK(max_abs(tensor(HermitianOperator::sigma_z().matrix(), p0) - diag({1, 0, -1, 0})) == 0.0);
}

TEST_CASE("tensor: trace is multiplicative") {
    oracle::Gen gen(7);
    for (int d : {2, 3, 4}) {
        const DensityMatrix rho(gen.density(d));
        const DensityMatrix both = tensor(rho, rho);
        CHECK(both.dim() == static_cast<std::size_t>(d * d));
        CHECK(std::abs(both.matrix().trace() - Complex(1.0)) < 1e-13);
    }
}

TEST_CASE("partial_trace: product states and the Bell state") {
    oracle::Gen gen(11);
    const DensityMatrix rs(gen.density(2));
    const DensityMatrix re(gen.density(3));
    const DensityMatrix joint = tensor(rs, re);
    CHECK(max_abs(partial_trace(joint, {2, 3}, Subsystem::system).matrix() - rs.matrix()) < 1e-12);
    CHECK(max_abs(partial_trace(joint, {2, 3}, Subsystem::environment).matrix() - re.matrix()) < 1e-12);

    Eigen::VectorXcd bell = Eigen::VectorXcd::Zero(4);
    bell(0) = bell(3) = 1.0;
    const DensityMatrix b = DensityMatrix::pure(bell);
    CHECK(max_abs(partial_trace(b, {2, 2}, Subsystem::system).matrix() - 0.5 * Matrix::Identity(2, 2)) < 1e-15);
}

TEST_CASE("partial_trace: matches two independent index summations") {
    oracle::Gen gen(13);
    for (int trial = 0; trial < 20; ++trial) {
        const int ds = gen.integer(1, 4);
        const int de = gen.integer(1, 4);
        const Matrix rho = gen.density(ds * de);
        for (bool keep_system : {true, false}) {
            const Matrix a = oracle::ptrace_env_outer(rho, ds, de, keep_system);
            const Matrix b = oracle::ptrace_env_inner(rho, ds, de, keep_system);
            REQUIRE(max_abs(a - b) < 1e-14);
            const Matrix got = partial_trace(rho, {static_cast<std::size_t>(ds), static_cast<std::size_t>(de)},
                                             keep_system ? Subsystem::system : Subsystem::environment);
            CHECK(max_abs(got - a) < 1e-14);
            CHECK(std::abs(got.trace() - Complex(1.0)) < 1e-12);
        }
    }
}

TEST_CASE("partial_trace: linear") {
    oracle::Gen gen(17);
    const Matrix r = gen.density(6);
    const Matrix s = gen.density(6);
    const double alpha = 0.3, beta = 0.7;
    const Matrix lhs = partial_trace(Matrix(alpha * r + beta * s), {2, 3}, Subsystem::system);
    const Matrix rhs = alpha * partial_trace(r, {2, 3}, Subsystem::system) +
                       beta * partial_trace(s, {2, 3}, Subsystem::system);
    CHECK(max_abs(lhs - rhs) < 1e-12);
}

TEST_CASE("partial_trace: bad factorization") {
    const auto rho = DensityMatrix::maximally_mixed(4);
    CHECK_THROWS_WITH_AS(partial_trace(rho, {3, 2}, Subsystem::system), "bad factorization", ConfigError);
}

TEST_CASE("evolve_unitary: t = 0 leaves the state unchanged") {
    oracle::Gen gen(19);
    const DensityMatrix rho(gen.density(3));
    const HermitianOperator h(gen.hermitian(3));
    CHECK(max_abs(evolve_unitary(rho, h, 0.0).matrix() - rho.matrix()) < 1e-15);
}

TEST_CASE("evolve_unitary: sigma_z rotation phases the coherence") {
    const double w = 1.7;
    const double t = 0.83;
    oracle::Gen gen(23);
    const DensityMatrix rho(gen.density(2));
    const DensityMatrix out = evolve_unitary(rho, (0.5 * w) * HermitianOperator::sigma_z(), t);

    const Matrix u = oracle::rz(w, t);
    const Matrix expected = u * rho.matrix() * u.adjoint();
    CHECK(max_abs(out.matrix() - expected) < 1e-15);
    // <up|rho|down> acquires exp(-i w t), <down|rho|up> acquires exp(+i w t)
    CHECK(std::abs(out(0, 1) - std::polar(1.0, -w * t) * rho(0, 1)) < 1e-15);
    CHECK(std::abs(coherence(out) - std::polar(1.0, w * t) * coherence(rho)) < 1e-15);
}

TEST_CASE("evolve_unitary: 2x2 closed form agrees with eigendecomposition") {
    oracle::Gen gen(29);
    for (int trial = 0; trial < 50; ++trial) {
        const HermitianOperator h(gen.hermitian(2, 3.0));
        const double t = gen.uniform(-5.0, 5.0);
        Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
        Eigen::VectorXcd ph(2);
        for (int k = 0; k < 2; ++k) ph(k) = std::polar(1.0, -es.eigenvalues()(k) * t);
        const Matrix ref = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
        CHECK(max_abs(unitary(h, t) - ref) < 1e-13);
    }
}

TEST_CASE("evolve_unitary: preserves trace, hermiticity, spectrum, purity") {
    oracle::Gen gen(31);
    for (int d : {2, 4, 8}) {
        for (int trial = 0; trial < 10; ++trial) {
            const DensityMatrix rho(gen.density(d));
            const HermitianOperator h(gen.hermitian(d));
            const double t = gen.uniform(-3.0, 3.0);
            const DensityMatrix out = evolve_unitary(rho, h, t);
            CHECK(std::abs(out.matrix().trace() - Complex(1.0)) < 1e-12);
            CHECK(hermiticity_residual(out.matrix()) < 1e-12);
            CHECK(std::abs(out.purity() - rho.purity()) < 1e-12);
            Eigen::SelfAdjointEigenSolver<Matrix> a(rho.matrix(), Eigen::EigenvaluesOnly);
            Eigen::SelfAdjointEigenSolver<Matrix> b(out.matrix(), Eigen::EigenvaluesOnly);
            CHECK((a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
            CHECK(b.eigenvalues()(0) >= -1e-10);
        }
    }
}

TEST_CASE("evolve_unitary: dimension mismatch") {
    CHECK_THROWS_AS(evolve_unitary(DensityMatrix::maximally_mixed(2), HermitianOperator::identity(3), 1.0),
                    ConfigError);
}

TEST_CASE("trace_distance: basic values") {
    oracle::Gen gen(37);
    const DensityMatrix rho(gen.density(3));
    CHECK(trace_distance(rho, rho) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(trace_distance(DensityMatrix::basis_state(2, 0), DensityMatrix::basis_state(2, 1)) ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(trace_distance(DensityMatrix::maximally_mixed(2), DensityMatrix::maximally_mixed(3)),
                    ConfigError);
}

TEST_CASE("trace_distance: symmetric and satisfies the triangle inequality") {
    oracle::Gen gen(41);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = gen.integer(2, 5);
        const DensityMatrix a(gen.density(d)), b(gen.density(d)), c(gen.density(d));
        const double ab = trace_distance(a, b);
        CHECK(ab == doctest::Approx(trace_distance(b, a)).epsilon(1e-14));
        CHECK(ab <= trace_distance(a, c) + trace_distance(c, b) + 1e-14);
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0 + 1e-14);
        // eigenvalue-sum oracle
        Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix() - b.matrix(), Eigen::EigenvaluesOnly);
        CHECK(ab == doctest::Approx(0.5 * es.eigenvalues().cwiseAbs().sum()).epsilon(1e-13));
    }
}

TEST_CASE("DensityMatrix rejects invalid matrices") {
    CHECK_THROWS_AS(DensityMatrix(diag({0.5, 0.6})), ConfigError);   // trace
    CHECK_THROWS_AS(DensityMatrix(diag({1.5, -0.5})), ConfigError);  // not PSD
    Matrix m = diag({0.5, 0.5});
    m(0, 1) = 0.1;
    CHECK_THROWS_AS(DensityMatrix{m}, ConfigError);  // not Hermitian
    CHECK_THROWS_AS(HermitianOperator{m}, ConfigError);
}
