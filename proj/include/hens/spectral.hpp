#pragma once

// Fourier pair between frequency distributions p(w) and dephasing factors
// phi(t) = int p(w) exp(i w t) dw, recovery of a (quasi-)distribution from a
// dephasing factor, and two witnesses of nonclassicality: negativity of the
// recovered distribution and a non-positive-semidefinite Gram matrix
// [phi(t_j - t_k)] (failure of Bochner positive definiteness).

#include <cstdint>
#include <vector>

#include "hens/core.hpp"
#include "hens/dephasing.hpp"
#include "hens/grid.hpp"

namespace hens {

struct QuasiDistribution {
    UniformGrid omega;
    std::vector<double> values;
    double norm = 0.0;               // trapezoid integral
    double min_value = 0.0;
    double negativity = 0.0;         // -int min(values, 0) dw, trapezoid
    double realness_residual = 0.0;  // max |Im| discarded by the inversion

    // Computes the diagnostics from the values.
    static QuasiDistribution from_values(UniformGrid omega, std::vector<double> values,
                                         double realness_residual = 0.0);

    // Linear interpolation; zero outside the grid.
    double at(double w) const;
};

// phi(t_n) = sum_k p_k exp(i w_k t_n) dw on the time grid conjugate to the
// frequency grid (same N, dw dt N = 2 pi). Throws ConfigError on mismatch.
DephasingSeries forward_ft(const UniformGrid& omega, const std::vector<double>& weights,
                           const TimeGrid& grid);
DephasingSeries forward_ft(const QuasiDistribution& dist, const TimeGrid& grid);

// wp(w_k) = (dt / 2 pi) sum_n phi_n exp(-i w_k t_n) on conjugate_grid(series.grid).
// Throws PreconditionError "series not conjugate-symmetric" if the symmetry
// residual exceeds 1e-8.
QuasiDistribution inverse_ft(const DephasingSeries& series);

// L-infinity distance between dist and inverse_ft(forward_ft(dist)). The
// distribution must live on a grid conjugate to some TimeGrid (power-of-two N).
double roundtrip_error(const QuasiDistribution& dist);

struct BochnerReport {
    std::vector<double> times;
    double min_eigenvalue = 0.0;
    std::size_t matrix_dim = 0;
};

// Smallest eigenvalue of the Hermitian Gram matrix M_jk = phi(t_j - t_k), with phi
// interpolated linearly. Throws PreconditionError if some |t_j - t_k| exceeds t_max.
BochnerReport bochner_witness(const DephasingSeries& series, const std::vector<double>& times);

struct BochnerSearchOptions {
    std::size_t restarts = 10000;
    std::size_t min_set = 2;
    std::size_t max_set = 8;
    double window = 0.0;  // times drawn from [0, window]; 0 means t_max / 4
    std::uint64_t seed = 1;
};

struct BochnerSearchResult {
    BochnerReport best;
    std::size_t restarts_used = 0;
};

// Random restarts over time sets, keeping the set with the smallest eigenvalue.
BochnerSearchResult bochner_search(const DephasingSeries& series, const BochnerSearchOptions& opt);

struct NegativityLandscape {
    std::vector<double> omega;
    std::vector<double> phases;
    std::vector<std::vector<double>> cells;  // cells[phase][omega] = min(wp_X(w), 0)
};

// Negative part of the extended-model distribution for the Ohmic bath at T = 0,
// one column per phase, restricted to the frequency window. Columns are
// computed independently and assembled by index.
NegativityLandscape negativity_landscape(double omega_c, const std::vector<double>& phases,
                                         double omega_lo, double omega_hi,
                                         const TimeGrid& grid);

}  // namespace hens
