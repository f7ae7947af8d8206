#pragma once

// Pure-dephasing models of a qubit coupled to a boson bath: spectral densities,
// the decoherence exponent Phi(t), the extended two-qubit phase vartheta(t),
// dephasing-factor series, and the equivalent time-local master equation.

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "hens/core.hpp"
#include "hens/grid.hpp"

namespace hens {

class SpectralDensityModel {
public:
    enum class Kind { ohmic_exp_cutoff, tabulated };

    // J(w) = w exp(-w / omega_c). temperature = 0 means the T -> 0 limit.
    static SpectralDensityModel ohmic(double omega_c, double temperature = 0.0);

    // Linear interpolation between samples; J = 0 beyond the last sample and
    // linear from (0, 0) to the first sample. Rejects negative J, negative or
    // non-increasing omega.
    static SpectralDensityModel tabulated(std::vector<double> omega, std::vector<double> j,
                                          double temperature = 0.0);

    // Two whitespace/comma separated columns (omega, J); '#' starts a comment.
    static SpectralDensityModel load_table(const std::filesystem::path& path,
                                           double temperature = 0.0);

    Kind kind() const { return kind_; }
    double omega_c() const { return omega_c_; }
    double temperature() const { return temperature_; }

    double J(double omega) const;

    // Upper integration limit; beyond it the integrands are below tol in absolute terms.
    double upper_cutoff(double tol = 1e-12) const;

    // Points where the integrand is non-smooth (table nodes, omega = T).
    std::vector<double> breakpoints() const;

private:
    SpectralDensityModel() = default;

    Kind kind_ = Kind::ohmic_exp_cutoff;
    double omega_c_ = 1.0;
    double temperature_ = 0.0;
    std::vector<double> table_omega_;
    std::vector<double> table_j_;
};

// Adaptive Gauss-Kronrod (G7/K15) tolerances. abs_tol is distributed over the
// integration range in proportion to panel width.
struct QuadratureOptions {
    double abs_tol = 1e-13;
    double rel_tol = 1e-12;
    unsigned max_depth = 12;
};

// Phi(t) = 4 int_0^inf J(w) / w^2 coth(w / 2T) (1 - cos wt) dw. Even in t.
double phi_exponent(const SpectralDensityModel& model, double t, const QuadratureOptions& q = {});

// vartheta_phase(t) = cos(phase) D(t) + sign(t) sin(phase) B(t) with
//   D(t) = 4 int J / w^2 (wt - sin wt) dw,   B(t) = 4 int J / w^2 (1 - cos wt) dw.
// Odd in t. Requires a zero-temperature model.
double vartheta(const SpectralDensityModel& model, double phase, double t,
                const QuadratureOptions& q = {});

enum class SeriesKind { conventional, extended, ensemble };

// Complex dephasing factor phi(t) sampled on a symmetric TimeGrid. values[0]
// holds the endpoint average (phi(-t_max) + phi(t_max)) / 2.
struct DephasingSeries {
    TimeGrid grid;
    std::vector<Complex> values;
    double omega0 = 0.0;
    SeriesKind kind = SeriesKind::ensemble;
    double phase = 0.0;  // extended models only

    // Samples f at every grid point (endpoint folded).
    static DephasingSeries sample(const TimeGrid& grid, const std::function<Complex(double)>& f);

    // Samples f at t >= 0 only and fills t < 0 by conjugation, so that
    // values(-t) = conj(values(t)) holds exactly. Evaluations run in parallel.
    static DephasingSeries sample_hermitian(const TimeGrid& grid,
                                            const std::function<Complex(double)>& f);

    // max |phi(-t) - conj(phi(t))| over the grid, including Im of the self-paired samples.
    double conjugate_symmetry_residual() const;

    double max_modulus() const;

    // Linear interpolation of real and imaginary parts; |t| <= t_max.
    Complex at(double t) const;

    std::size_t index_of(double t) const;  // nearest grid index
};

DephasingSeries dephasing_conventional(const SpectralDensityModel& model, double omega0,
                                       const TimeGrid& grid, const QuadratureOptions& q = {});

// phi_X(t) = exp(i omega0 t - i vartheta_phase(t) - Phi(t)). Zero temperature only.
DephasingSeries dephasing_extended(const SpectralDensityModel& model, double phase,
                                   const TimeGrid& grid, const QuadratureOptions& q = {},
                                   double omega0 = 0.0);

// Analytic Ohmic (T = 0) results:
//   phi_o1(t)    = (1 + wc^2 t^2)^-2
//   phi_o1^X(t)  = exp(-4i cos(phase) (wc t - atan(wc t))) (1 + wc^2 t^2)^(-2 (1 + i sign(t) sin(phase)))
//   wp_o1(w)     = (wc + |w|) exp(-|w| / wc) / (4 wc^2)
Complex ohmic_phi(double omega_c, double t);
Complex ohmic_phi_extended(double omega_c, double phase, double t);
double ohmic_distribution(double omega_c, double omega);

// Series of the analytic forms. With a phase the extended factor is produced;
// omega0 multiplies the series by exp(i omega0 t).
DephasingSeries ohmic_closed_forms(double omega_c, std::optional<double> phase,
                                   const TimeGrid& grid, double omega0 = 0.0);

// ---------------------------------------------------------------------------
// Master-equation view: d rho/dt = -i [eps sigma_z, rho] + gamma (sigma_z rho sigma_z - rho)
// with eps = Im[d/dt ln phi] / 2 and gamma = -Re[d/dt ln phi] / 2.

struct RealSeries {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> values;

    double t(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
    std::size_t size() const { return values.size(); }
};

struct MasterCoefficients {
    RealSeries epsilon;
    RealSeries gamma;
};

// Centered finite differences (five-point stencil) of ln phi with the phase
// unwrapped along the grid. The output covers grid points in [t_lo, t_hi]
// (default: all points with two neighbours on each side, excluding the folded
// endpoint). Throws PreconditionError "coefficient singularity" if |phi| <= 1e-14
// anywhere on the stencil support, or if the phase moves by more than pi/2
// between neighbouring samples (a zero crossing or an unresolved phase).
MasterCoefficients master_coeffs(const DephasingSeries& series,
                                 std::optional<double> t_lo = std::nullopt,
                                 std::optional<double> t_hi = std::nullopt);

struct MasterTrajectory {
    std::vector<double> times;
    std::vector<Matrix> states;
};

// Classical fourth-order Runge-Kutta from t = 0 (which must be a grid point of
// the coefficient series) forward, with step 2 dt so that all stages fall on
// grid points. Throws ConfigError on misaligned grids.
MasterTrajectory propagate_master(const DensityMatrix& rho0, const RealSeries& epsilon,
                                  const RealSeries& gamma);

// Coherence of qubit 1 in the extended model when qubit 2 starts with populations
// (p_up, p_down): c0 (p_up phi_X(t) + p_down conj(phi_X(t))), per grid point.
std::vector<Complex> extended_coherence(Complex rho1_coherence0, double p_up, double p_down,
                                        const DephasingSeries& series);

}  // namespace hens
