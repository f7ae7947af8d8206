#include "hens/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "hens/error.hpp"
#include "hens/parallel.hpp"

namespace hens {

namespace {

constexpr double kProbabilityTol = 1e-10;
constexpr double kNormTol = 1e-8;
constexpr double kNegativeWeightTol = 1e-6;  // relative to max |w|
constexpr double kOffBlockTol = 1e-10;
constexpr std::size_t kMcChunks = 64;

Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

void require_qubit(const DensityMatrix& rho, const char* what) {
    if (rho.dim() != 2) throw ConfigError(std::string(what) + ": qubit state required");
}

// Trapezoid quadrature coefficient of node k on an n-point grid.
double trapezoid_coeff(std::size_t k, std::size_t n) {
    return (k == 0 || k + 1 == n) ? 0.5 : 1.0;
}

DensityMatrix scale_coherence(const DensityMatrix& rho0, Complex factor) {
    Matrix m = rho0.matrix();
    m(1, 0) *= factor;
    m(0, 1) *= std::conj(factor);
    return DensityMatrix(std::move(m));
}

// Piecewise-linear density on a uniform grid, sampled by inverting its CDF.
class GridSampler {
public:
    GridSampler(const UniformGrid& grid, const std::vector<double>& w) : grid_(grid), w_(w) {
        cumulative_.resize(grid.n - 1);
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < grid.n; ++i) {
            acc += 0.5 * (w[i] + w[i + 1]) * grid.step;
            cumulative_[i] = acc;
        }
    }

    double total() const { return cumulative_.back(); }

    // u in [0, total()]. Flat CDF stretches resolve to their left edge.
    double invert(double u) const {
        const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
        const auto cell = static_cast<std::size_t>(
            std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                     static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
        const double below = cell == 0 ? 0.0 : cumulative_[cell - 1];
        const double h = grid_.step;
        const double a = w_[cell];
        const double b = w_[cell + 1];
        const double target = std::max(0.0, u - below) / h;
        // solve (b - a)/2 x^2 + a x = target on [0, 1]
        double x = 0.0;
        const double disc = a * a + 2.0 * (b - a) * target;
        const double denom = a + std::sqrt(std::max(0.0, disc));
        if (denom > 0.0) x = 2.0 * target / denom;
        return grid_[cell] + std::clamp(x, 0.0, 1.0) * h;
    }

private:
    UniformGrid grid_;
    const std::vector<double>& w_;
    std::vector<double> cumulative_;
};

}  // namespace

// ---------------------------------------------------------------------------

HamiltonianEnsemble::HamiltonianEnsemble(std::vector<EnsembleMember> members)
    : members_(std::move(members)) {
    if (members_.empty()) throw ConfigError("Hamiltonian ensemble: no members");
    double total = 0.0;
    for (const auto& m : members_) {
        if (!(m.probability >= 0.0)) throw ConfigError("Hamiltonian ensemble: negative probability");
        if (m.hamiltonian.dim() != members_.front().hamiltonian.dim()) {
            throw ConfigError("Hamiltonian ensemble: members differ in dimension");
        }
        total += m.probability;
    }
    if (std::abs(total - 1.0) > kProbabilityTol) {
        throw ConfigError("Hamiltonian ensemble: probabilities do not sum to 1");
    }
}

HermitianOperator HamiltonianEnsemble::mean() const {
    const auto d = static_cast<Eigen::Index>(dim());
    Matrix acc = Matrix::Zero(d, d);
    for (const auto& m : members_) acc += m.probability * m.hamiltonian.matrix();
    return HermitianOperator(hermitize(acc));
}

DensityMatrix he_average(const HamiltonianEnsemble& ens, const DensityMatrix& rho0, double t) {
    if (rho0.dim() != ens.dim()) throw ConfigError("he_average: dimension mismatch");
    const auto d = static_cast<Eigen::Index>(rho0.dim());
    Matrix acc = Matrix::Zero(d, d);
    for (const auto& m : ens.members()) {
        if (m.probability == 0.0) continue;
        const Matrix u = unitary(m.hamiltonian, t);
        acc += m.probability * (u * rho0.matrix() * u.adjoint());
    }
    return DensityMatrix(hermitize(acc));
}

// ---------------------------------------------------------------------------

SpectralEnsemble::SpectralEnsemble(UniformGrid omega, std::vector<double> weights)
    : grid_(omega), weights_(std::move(weights)) {
    if (grid_.n < 2 || weights_.size() != grid_.n || !(grid_.step > 0.0)) {
        throw ConfigError("spectral ensemble: weights do not match the frequency grid");
    }
    double peak = 0.0;
    for (double w : weights_) {
        if (!std::isfinite(w)) throw ConfigError("spectral ensemble: non-finite weight");
        peak = std::max(peak, std::abs(w));
    }
    for (double& w : weights_) {
        if (w < -kNegativeWeightTol * peak) throw SamplingError();
        w = std::max(w, 0.0);
    }
    double norm = 0.0;
    for (std::size_t k = 0; k < grid_.n; ++k) {
        norm += trapezoid_coeff(k, grid_.n) * weights_[k];
    }
    norm *= grid_.step;
    if (std::abs(norm - 1.0) > kNormTol) {
        throw ConfigError("spectral ensemble: weights are not normalized (integral " +
                          std::to_string(norm) + ")");
    }
}

Complex SpectralEnsemble::dephasing_factor(double t) const {
    Complex acc = 0.0;
    for (std::size_t k = 0; k < grid_.n; ++k) {
        if (weights_[k] == 0.0) continue;
        acc += trapezoid_coeff(k, grid_.n) * weights_[k] * std::polar(1.0, grid_[k] * t);
    }
    return acc * grid_.step;
}

DensityMatrix spectral_average(const SpectralEnsemble& ens, const DensityMatrix& rho0, double t) {
    require_qubit(rho0, "spectral_average");
    return scale_coherence(rho0, ens.dephasing_factor(t));
}

std::vector<McEstimate> mc_average(const SpectralEnsemble& ens, const DensityMatrix& rho0,
                                   const std::vector<double>& times, std::size_t n,
                                   std::uint64_t seed) {
    require_qubit(rho0, "mc_average");
    if (n < 1) throw ConfigError("mc_average: sample count must be >= 1");
    const GridSampler sampler(ens.grid(), ens.weights());
    const std::size_t nt = times.size();

    struct Sums {
        std::vector<double> c, s, cc, ss;
    };
    std::vector<Sums> chunks(kMcChunks);
    parallel_for(kMcChunks, [&](std::size_t chunk) {
        Sums& acc = chunks[chunk];
        acc.c.assign(nt, 0.0);
        acc.s.assign(nt, 0.0);
        acc.cc.assign(nt, 0.0);
        acc.ss.assign(nt, 0.0);
        const std::size_t begin = n * chunk / kMcChunks;
        const std::size_t end = n * (chunk + 1) / kMcChunks;
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(chunk)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::size_t i = begin; i < end; ++i) {
            const double omega = sampler.invert(unit(rng) * sampler.total());
            for (std::size_t k = 0; k < nt; ++k) {
                const double c = std::cos(omega * times[k]);
                const double s = std::sin(omega * times[k]);
                acc.c[k] += c;
                acc.s[k] += s;
                acc.cc[k] += c * c;
                acc.ss[k] += s * s;
            }
        }
    });

    std::vector<McEstimate> out;
    out.reserve(nt);
    const double nn = static_cast<double>(n);
    const double c0 = std::abs(coherence(rho0));
    for (std::size_t k = 0; k < nt; ++k) {
        double c = 0.0, s = 0.0, cc = 0.0, ss = 0.0;
        for (const auto& acc : chunks) {
            c += acc.c[k];
            s += acc.s[k];
            cc += acc.cc[k];
            ss += acc.ss[k];
        }
        const Complex factor(c / nn, s / nn);
        double var = 0.0;
        if (n > 1) {
            var = (cc - c * c / nn + ss - s * s / nn) / (nn - 1.0);
        }
        out.push_back({scale_coherence(rho0, factor), c0 * std::sqrt(std::max(0.0, var) / nn)});
    }
    return out;
}

McEstimate mc_average(const SpectralEnsemble& ens, const DensityMatrix& rho0, double t,
                      std::size_t n, std::uint64_t seed) {
    return mc_average(ens, rho0, std::vector<double>{t}, n, seed).front();
}

HamiltonianEnsemble discretize(const SpectralEnsemble& ens, std::size_t members) {
    if (members < 1) throw ConfigError("discretize: need at least one member");
    const UniformGrid& g = ens.grid();
    const auto& w = ens.weights();

    // Cumulative trapezoid mass up to node k.
    std::vector<double> mass(g.n, 0.0);
    for (std::size_t k = 1; k < g.n; ++k) mass[k] = mass[k - 1] + 0.5 * (w[k - 1] + w[k]) * g.step;
    const double total = mass.back();
    const double tail = 0.5e-6 * total;
    std::size_t lo = 0;
    while (lo + 1 < g.n && mass[lo + 1] < tail) ++lo;
    std::size_t hi = g.n - 1;
    while (hi > lo + 1 && total - mass[hi - 1] < tail) --hi;

    auto weight_at = [&](double x) {
        const double pos = (x - g.start) / g.step;
        const double fl = std::clamp(std::floor(pos), 0.0, static_cast<double>(g.n - 2));
        const auto i = static_cast<std::size_t>(fl);
        const double f = std::clamp(pos - fl, 0.0, 1.0);
        return w[i] + f * (w[i + 1] - w[i]);
    };

    const HermitianOperator half_sz = 0.5 * HermitianOperator::sigma_z();
    std::vector<EnsembleMember> out;
    if (members == 1) {
        double first = 0.0;
        for (std::size_t k = 0; k < g.n; ++k) first += trapezoid_coeff(k, g.n) * w[k] * g[k];
        out.push_back({1.0, (first * g.step / total) * half_sz});
        return HamiltonianEnsemble(std::move(out));
    }
    const double a = g[lo];
    const double b = g[hi];
    const double h = (b - a) / static_cast<double>(members - 1);
    std::vector<double> p(members);
    double norm = 0.0;
    for (std::size_t j = 0; j < members; ++j) {
        p[j] = trapezoid_coeff(j, members) * weight_at(a + static_cast<double>(j) * h);
        norm += p[j];
    }
    if (!(norm > 0.0)) throw ConfigError("discretize: no weight inside the truncation window");
    for (std::size_t j = 0; j < members; ++j) {
        out.push_back({p[j] / norm, (a + static_cast<double>(j) * h) * half_sz});
    }
    return HamiltonianEnsemble(std::move(out));
}

// ---------------------------------------------------------------------------

DensityMatrix Dilation::environment_state() const {
    const auto m = static_cast<Eigen::Index>(env_dim);
    Matrix rho = Matrix::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) rho(j, j) = populations[static_cast<std::size_t>(j)];
    return DensityMatrix(std::move(rho));
}

DensityMatrix Dilation::initial_joint_state(const DensityMatrix& rho0) const {
    if (rho0.dim() != system_dim()) throw ConfigError("dilation: system dimension mismatch");
    return tensor(rho0, environment_state());
}

Dilation dilate(const HamiltonianEnsemble& ens) {
    const HermitianOperator mean = ens.mean();
    const std::size_t m = ens.size();
    const auto d = static_cast<Eigen::Index>(ens.dim());

    std::vector<HermitianOperator> deviations;
    std::vector<double> populations;
    deviations.reserve(m);
    Matrix centering = Matrix::Zero(d, d);
    Matrix joint = tensor(mean.matrix(), Matrix::Identity(static_cast<Eigen::Index>(m),
                                                          static_cast<Eigen::Index>(m)));
    for (std::size_t j = 0; j < m; ++j) {
        const auto& member = ens.members()[j];
        deviations.push_back(member.hamiltonian - mean);
        populations.push_back(member.probability);
        centering += member.probability * deviations.back().matrix();
        Matrix projector = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        projector(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = 1.0;
        joint += tensor(deviations.back().matrix(), projector);
    }
    return Dilation{m,
                    mean,
                    std::move(deviations),
                    std::move(populations),
                    HermitianOperator(hermitize(joint)),
                    centering.cwiseAbs().maxCoeff()};
}

ReducedEvolution joint_evolve_reduce(const Dilation& d, const DensityMatrix& rho0, double t) {
    const DensityMatrix joint0 = d.initial_joint_state(rho0);
    const Matrix u = unitary(d.joint_hamiltonian, t);
    const Matrix joint = hermitize(u * joint0.matrix() * u.adjoint());

    const auto ds = static_cast<Eigen::Index>(d.system_dim());
    const auto de = static_cast<Eigen::Index>(d.env_dim);
    double off = 0.0;
    for (Eigen::Index s = 0; s < ds; ++s) {
        for (Eigen::Index s2 = 0; s2 < ds; ++s2) {
            for (Eigen::Index j = 0; j < de; ++j) {
                for (Eigen::Index j2 = 0; j2 < de; ++j2) {
                    if (j != j2) off = std::max(off, std::abs(joint(s * de + j, s2 * de + j2)));
                }
            }
        }
    }
    Matrix reduced = partial_trace(joint, {d.system_dim(), d.env_dim}, Subsystem::system);
    return {DensityMatrix(hermitize(reduced)), off <= kOffBlockTol, off};
}

// ---------------------------------------------------------------------------

DensityMatrix cnot_example(double a, double j_coupling, double t, const DensityMatrix& rho0) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("cnot_example: a outside [0,1]");
    require_qubit(rho0, "cnot_example");
    const Matrix u = unitary(0.5 * j_coupling * HermitianOperator::sigma_x(), t);
    return DensityMatrix(hermitize(a * (u * rho0.matrix() * u.adjoint()) + (1.0 - a) * rho0.matrix()));
}

HamiltonianEnsemble cnot_ensemble(double a, double j_coupling) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("cnot_example: a outside [0,1]");
    return HamiltonianEnsemble({{a, 0.5 * j_coupling * HermitianOperator::sigma_x()},
                                {1.0 - a, HermitianOperator::identity(2)}});
}

}  // namespace hens
