#pragma once

// Dense complex linear algebra for small quantum states (hbar = 1).
//
// Basis convention for qubits: sigma_z = diag(+1, -1), |up> = e0, |down> = e1.
// Composite systems are ordered (system, environment), i.e. the joint index is
// s * d_env + e.

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace hens {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;

double hermiticity_residual(const Matrix& m);
double min_eigenvalue(const Matrix& hermitian);

class HermitianOperator {
public:
    explicit HermitianOperator(Matrix m);

    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    const Matrix& matrix() const { return m_; }

    static HermitianOperator zero(std::size_t dim);
    static HermitianOperator identity(std::size_t dim);
    static HermitianOperator sigma_x();
    static HermitianOperator sigma_y();
    static HermitianOperator sigma_z();

    friend HermitianOperator operator*(double s, const HermitianOperator& h);
    friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b);
    friend HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b);

private:
    Matrix m_;
};

// Hermitian, unit-trace, positive semidefinite.
class DensityMatrix {
public:
    explicit DensityMatrix(Matrix m);

    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    const Matrix& matrix() const { return m_; }
    Complex operator()(std::size_t i, std::size_t j) const {
        return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    double purity() const;

    static DensityMatrix maximally_mixed(std::size_t dim);
    static DensityMatrix pure(const Eigen::VectorXcd& psi);  // normalizes psi
    static DensityMatrix basis_state(std::size_t dim, std::size_t k);

private:
    Matrix m_;
};

enum class Subsystem { system, environment };

struct Factorization {
    std::size_t system_dim;
    std::size_t environment_dim;
};

Matrix tensor(const Matrix& a, const Matrix& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);
HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b);

Matrix partial_trace(const Matrix& m, Factorization dims, Subsystem keep);
DensityMatrix partial_trace(const DensityMatrix& rho, Factorization dims, Subsystem keep);

// exp(-i h t). Closed form for 2x2, eigendecomposition otherwise.
Matrix unitary(const HermitianOperator& h, double t);

DensityMatrix evolve_unitary(const DensityMatrix& rho, const HermitianOperator& h, double t);

double trace_distance(const Matrix& a, const Matrix& b);
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

// <down| rho |up>, the qubit coherence multiplied by the dephasing factor phi(t).
// The transposed element <up| rho |down> picks up conj(phi(t)).
inline Complex coherence(const Matrix& rho) { return rho(1, 0); }
inline Complex coherence(const DensityMatrix& rho) { return rho(1, 0); }

}  // namespace hens
