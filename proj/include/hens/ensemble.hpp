#pragma once

// Hamiltonian ensembles {(p_j, H_j)}: the averaged unital map, its spectral
// (continuous, qubit) form, Monte Carlo estimation, and the classical
// system-environment dilation reproducing it.

#include <cstdint>
#include <vector>

#include "hens/core.hpp"
#include "hens/grid.hpp"

namespace hens {

struct EnsembleMember {
    double probability;
    HermitianOperator hamiltonian;
};

class HamiltonianEnsemble {
public:
    // p_j >= 0, |sum p_j - 1| <= 1e-10, all members of equal dimension.
    explicit HamiltonianEnsemble(std::vector<EnsembleMember> members);

    const std::vector<EnsembleMember>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    std::size_t dim() const { return members_.front().hamiltonian.dim(); }

    HermitianOperator mean() const;

private:
    std::vector<EnsembleMember> members_;
};

// sum_j p_j U_j rho0 U_j^dagger with U_j = exp(-i H_j t).
DensityMatrix he_average(const HamiltonianEnsemble& ens, const DensityMatrix& rho0, double t);

// Qubit ensemble {(p(w), w sigma_z / 2)} with p sampled on a uniform grid.
class SpectralEnsemble {
public:
    // Weights below -1e-6 max|w| throw SamplingError; smaller negative values
    // (transform round-off) are clamped to zero. The trapezoid integral must be
    // 1 within 1e-8 (ConfigError otherwise).
    SpectralEnsemble(UniformGrid omega, std::vector<double> weights);

    const UniformGrid& grid() const { return grid_; }
    const std::vector<double>& weights() const { return weights_; }

    // phi(t) = sum_k c_k w_k exp(i w_k t) d_omega, trapezoid coefficients c_k.
    Complex dephasing_factor(double t) const;

private:
    UniformGrid grid_;
    std::vector<double> weights_;
};

// Populations are unchanged; <down|rho|up> is multiplied by phi(t) and
// <up|rho|down> by conj(phi(t)).
DensityMatrix spectral_average(const SpectralEnsemble& ens, const DensityMatrix& rho0, double t);

struct McEstimate {
    DensityMatrix state;
    double stderr_coherence;  // standard error of the <down|rho|up> estimate
};

// Monte Carlo average over n frequencies drawn by inverse-CDF sampling of the
// piecewise-linear density. Samples are split into a fixed number of chunks,
// each with its own (seed, chunk) stream and summed in chunk order, so the
// result does not depend on the number of worker threads.
std::vector<McEstimate> mc_average(const SpectralEnsemble& ens, const DensityMatrix& rho0,
                                   const std::vector<double>& times, std::size_t n,
                                   std::uint64_t seed);
McEstimate mc_average(const SpectralEnsemble& ens, const DensityMatrix& rho0, double t,
                      std::size_t n, std::uint64_t seed);

// Finite ensemble of `members` equally spaced frequencies spanning the window
// outside of which the total weight is below 1e-6, with trapezoid probabilities.
HamiltonianEnsemble discretize(const SpectralEnsemble& ens, std::size_t members);

// Classical dilation: environment basis |j> carries the ensemble index,
// H_S = mean H, H_I = sum_j (H_j - mean H) (x) |j><j|, H_E = 0, and the
// environment starts in sum_j p_j |j><j|.
struct Dilation {
    std::size_t env_dim;
    HermitianOperator system_hamiltonian;
    std::vector<HermitianOperator> deviations;
    std::vector<double> populations;
    HermitianOperator joint_hamiltonian;  // H_S (x) I + H_I
    double centering_residual;            // max |sum_j p_j V_j|

    std::size_t system_dim() const { return system_hamiltonian.dim(); }
    DensityMatrix environment_state() const;
    DensityMatrix initial_joint_state(const DensityMatrix& rho0) const;
};

Dilation dilate(const HamiltonianEnsemble& ens);

struct ReducedEvolution {
    DensityMatrix reduced;
    bool classical_ok;          // environment off-diagonal blocks all <= 1e-10
    double max_offdiag_block;
};

ReducedEvolution joint_evolve_reduce(const Dilation& d, const DensityMatrix& rho0, double t);

// The controlled-NOT arrangement: control qubit in a|1><1| + (1-a)|0><0|,
// target evolves as a U_x rho0 U_x^dagger + (1-a) rho0, U_x = exp(-i J sigma_x t / 2).
DensityMatrix cnot_example(double a, double j_coupling, double t, const DensityMatrix& rho0);

// The ensemble {(a, J sigma_x / 2), (1 - a, I)} realized by the CNOT arrangement.
HamiltonianEnsemble cnot_ensemble(double a, double j_coupling);

}  // namespace hens
