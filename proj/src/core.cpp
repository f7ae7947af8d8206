#include "hens/core.hpp"

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

#include "hens/error.hpp"

namespace hens {

namespace {

void require_square(const Matrix& m, const char* what) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
        throw ConfigError(std::string(what) + ": matrix must be square and non-empty");
    }
}

Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

double hermiticity_residual(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Matrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

// ---------------------------------------------------------------------------

HermitianOperator::HermitianOperator(Matrix m) : m_(std::move(m)) {
    require_square(m_, "HermitianOperator");
    if (hermiticity_residual(m_) > kHermitianTol) {
        throw ConfigError("HermitianOperator: matrix is not Hermitian");
    }
}

HermitianOperator HermitianOperator::zero(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return HermitianOperator(Matrix::Zero(d, d));
}

HermitianOperator HermitianOperator::identity(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return HermitianOperator(Matrix::Identity(d, d));
}

HermitianOperator HermitianOperator::sigma_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return HermitianOperator(std::move(m));
}

HermitianOperator HermitianOperator::sigma_y() {
    Matrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return HermitianOperator(std::move(m));
}

HermitianOperator HermitianOperator::sigma_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return HermitianOperator(std::move(m));
}

HermitianOperator operator*(double s, const HermitianOperator& h) {
    return HermitianOperator(s * h.m_);
}

HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
    if (a.dim() != b.dim()) throw ConfigError("HermitianOperator: dimension mismatch");
    return HermitianOperator(a.m_ + b.m_);
}

HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
    if (a.dim() != b.dim()) throw ConfigError("HermitianOperator: dimension mismatch");
    return HermitianOperator(a.m_ - b.m_);
}

// ---------------------------------------------------------------------------

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
    require_square(m_, "DensityMatrix");
    if (hermiticity_residual(m_) > kHermitianTol) {
        throw ConfigError("DensityMatrix: matrix is not Hermitian");
    }
    if (std::abs(m_.trace() - Complex(1.0)) > kTraceTol) {
        throw ConfigError("DensityMatrix: trace is not 1");
    }
    if (min_eigenvalue(m_) < -kPsdTol) {
        throw ConfigError("DensityMatrix: matrix is not positive semidefinite");
    }
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
    const double norm = psi.norm();
    if (!(norm > 0.0)) throw ConfigError("DensityMatrix::pure: zero vector");
    const Eigen::VectorXcd v = psi / norm;
    return DensityMatrix(hermitize(v * v.adjoint()));
}

DensityMatrix DensityMatrix::basis_state(std::size_t dim, std::size_t k) {
    if (k >= dim) throw ConfigError("DensityMatrix::basis_state: index out of range");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(k)) = 1.0;
    return pure(v);
}

// ---------------------------------------------------------------------------

Matrix tensor(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
    return DensityMatrix(tensor(a.matrix(), b.matrix()));
}

HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b) {
    return HermitianOperator(tensor(a.matrix(), b.matrix()));
}

Matrix partial_trace(const Matrix& m, Factorization dims, Subsystem keep) {
    const auto ds = static_cast<Eigen::Index>(dims.system_dim);
    const auto de = static_cast<Eigen::Index>(dims.environment_dim);
    if (ds == 0 || de == 0 || m.rows() != ds * de || m.cols() != ds * de) {
        throw ConfigError("bad factorization");
    }
    if (keep == Subsystem::system) {
        Matrix out = Matrix::Zero(ds, ds);
        for (Eigen::Index i = 0; i < ds; ++i) {
            for (Eigen::Index j = 0; j < ds; ++j) {
                out(i, j) = m.block(i * de, j * de, de, de).trace();
            }
        }
        return out;
    }
    Matrix out = Matrix::Zero(de, de);
    for (Eigen::Index s = 0; s < ds; ++s) out += m.block(s * de, s * de, de, de);
    return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, Factorization dims, Subsystem keep) {
    return DensityMatrix(hermitize(partial_trace(rho.matrix(), dims, keep)));
}

Matrix unitary(const HermitianOperator& h, double t) {
    const Matrix& m = h.matrix();
    if (h.dim() == 2) {
        // h = a0 I + a . sigma  =>  exp(-i h t) = e^{-i a0 t} (cos(|a| t) I - i sin(|a| t) a.sigma / |a|)
        const double a0 = 0.5 * (m(0, 0).real() + m(1, 1).real());
        const double az = 0.5 * (m(0, 0).real() - m(1, 1).real());
        const double ax = m(1, 0).real();
        const double ay = m(1, 0).imag();
        const double r = std::sqrt(ax * ax + ay * ay + az * az);
        const double c = std::cos(r * t);
        // sin(r t) / r, continuous at r = 0
        const double s = r > 0.0 ? std::sin(r * t) / r : t;
        const Complex i(0.0, 1.0);
        Matrix u(2, 2);
        u(0, 0) = c - i * s * az;
        u(1, 1) = c + i * s * az;
        u(0, 1) = -i * s * Complex(ax, -ay);
        u(1, 0) = -i * s * Complex(ax, ay);
        return std::polar(1.0, -a0 * t) * u;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    const Eigen::VectorXd& w = es.eigenvalues();
    Eigen::VectorXcd phases(w.size());
    for (Eigen::Index k = 0; k < w.size(); ++k) phases(k) = std::polar(1.0, -w(k) * t);
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

DensityMatrix evolve_unitary(const DensityMatrix& rho, const HermitianOperator& h, double t) {
    if (rho.dim() != h.dim()) throw ConfigError("evolve_unitary: dimension mismatch");
    const Matrix u = unitary(h, t);
    return DensityMatrix(hermitize(u * rho.matrix() * u.adjoint()));
}

double trace_distance(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ConfigError("trace_distance: dimension mismatch");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(a - b), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    return trace_distance(a.matrix(), b.matrix());
}

}  // namespace hens
