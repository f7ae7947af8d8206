#include "hens/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include <Eigen/Eigenvalues>

#include "hens/error.hpp"
#include "hens/fft.hpp"
#include "hens/parallel.hpp"

namespace hens {

namespace {

constexpr double kSymmetryTol = 1e-8;

double alternating(std::size_t k) { return (k % 2 == 0) ? 1.0 : -1.0; }

double trapezoid(const std::vector<double>& v, double step) {
    if (v.empty()) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += x;
    if (v.size() > 1) acc -= 0.5 * (v.front() + v.back());
    return acc * step;
}

}  // namespace

QuasiDistribution QuasiDistribution::from_values(UniformGrid omega, std::vector<double> values,
                                                 double realness_residual) {
    if (values.size() != omega.n) throw ConfigError("distribution: values do not match grid");
    QuasiDistribution d;
    d.omega = omega;
    d.values = std::move(values);
    d.realness_residual = realness_residual;
    d.norm = trapezoid(d.values, omega.step);
    d.min_value = d.values.empty() ? 0.0 : *std::min_element(d.values.begin(), d.values.end());
    std::vector<double> negative(d.values.size());
    std::transform(d.values.begin(), d.values.end(), negative.begin(),
                   [](double x) { return std::max(-x, 0.0); });
    d.negativity = trapezoid(negative, omega.step);
    return d;
}

double QuasiDistribution::at(double w) const {
    const double pos = (w - omega.start) / omega.step;
    if (pos < 0.0 || pos > static_cast<double>(omega.n - 1)) return 0.0;
    const double fl = std::min(std::floor(pos), static_cast<double>(omega.n - 2));
    const auto i = static_cast<std::size_t>(fl);
    const double f = pos - fl;
    return values[i] + f * (values[i + 1] - values[i]);
}

// ---------------------------------------------------------------------------

DephasingSeries forward_ft(const UniformGrid& omega, const std::vector<double>& weights,
                           const TimeGrid& grid) {
    grid.validate();
    const std::size_t n = grid.n;
    if (omega.n != n || weights.size() != n) {
        throw ConfigError("grid incompatibility: frequency and time grids differ in size");
    }
    const double product = omega.step * grid.dt() * static_cast<double>(n);
    if (std::abs(product - 2.0 * M_PI) > 1e-9 * 2.0 * M_PI) {
        throw ConfigError("grid incompatibility: d_omega * dt * N != 2 pi");
    }
    std::vector<Complex> in(n);
    double alternating_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        in[k] = alternating(k) * weights[k];
        alternating_sum += alternating(k) * weights[k];
    }
    const auto out = fft::dft(in, fft::Direction::backward);

    DephasingSeries s;
    s.grid = grid;
    s.kind = SeriesKind::ensemble;
    s.values.resize(n);
    for (std::size_t i = 1; i < n; ++i) {
        s.values[i] = omega.step * std::polar(1.0, omega.start * grid.t(i)) * out[i];
    }
    // (phi(-t_max) + phi(t_max)) / 2
    s.values[0] = omega.step * std::cos(omega.start * grid.t_max) * alternating_sum;
    return s;
}

DephasingSeries forward_ft(const QuasiDistribution& dist, const TimeGrid& grid) {
    return forward_ft(dist.omega, dist.values, grid);
}

QuasiDistribution inverse_ft(const DephasingSeries& series) {
    const TimeGrid& g = series.grid;
    g.validate();
    if (series.values.size() != g.n) throw ConfigError("series: values do not match grid");
    if (series.conjugate_symmetry_residual() > kSymmetryTol) {
        throw PreconditionError("series not conjugate-symmetric");
    }
    std::vector<Complex> in(g.n);
    for (std::size_t i = 0; i < g.n; ++i) in[i] = alternating(i) * series.values[i];
    const auto out = fft::dft(in, fft::Direction::forward);

    const double scale = g.dt() / (2.0 * M_PI);
    std::vector<double> values(g.n);
    double residual = 0.0;
    for (std::size_t k = 0; k < g.n; ++k) {
        const Complex v = scale * alternating(k) * out[k];
        values[k] = v.real();
        residual = std::max(residual, std::abs(v.imag()));
    }
    return QuasiDistribution::from_values(conjugate_grid(g), std::move(values), residual);
}

double roundtrip_error(const QuasiDistribution& dist) {
    const std::size_t n = dist.omega.n;
    if (!is_power_of_two(n) || n < 4) {
        throw ConfigError("roundtrip_error: grid size must be a power of two");
    }
    const TimeGrid grid{M_PI / dist.omega.step, n};
    const QuasiDistribution back = inverse_ft(forward_ft(dist, grid));
    double err = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        err = std::max(err, std::abs(back.values[k] - dist.at(back.omega[k])));
    }
    return err;
}

// ---------------------------------------------------------------------------

BochnerReport bochner_witness(const DephasingSeries& series, const std::vector<double>& times) {
    const auto m = static_cast<Eigen::Index>(times.size());
    if (m == 0) throw ConfigError("bochner_witness: empty time set");
    Matrix gram(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        gram(j, j) = series.at(0.0).real();
        for (Eigen::Index k = j + 1; k < m; ++k) {
            const Complex v = series.at(times[static_cast<std::size_t>(j)] -
                                        times[static_cast<std::size_t>(k)]);
            gram(j, k) = v;
            gram(k, j) = std::conj(v);
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    return {times, es.eigenvalues()(0), static_cast<std::size_t>(m)};
}

BochnerSearchResult bochner_search(const DephasingSeries& series, const BochnerSearchOptions& opt) {
    if (opt.min_set < 1 || opt.max_set < opt.min_set) {
        throw ConfigError("bochner_search: invalid set size range");
    }
    const double window = opt.window > 0.0 ? opt.window : series.grid.t_max / 4.0;
    if (window > series.grid.t_max) throw ConfigError("bochner_search: window exceeds the series range");

    std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> size_dist(opt.min_set, opt.max_set);
    std::uniform_real_distribution<double> time_dist(0.0, window);

    BochnerSearchResult result;
    result.best.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < opt.restarts; ++r) {
        std::vector<double> times(size_dist(rng));
        for (double& t : times) t = time_dist(rng);
        std::sort(times.begin(), times.end());
        BochnerReport report = bochner_witness(series, times);
        if (report.min_eigenvalue < result.best.min_eigenvalue) result.best = std::move(report);
        ++result.restarts_used;
    }
    return result;
}

// ---------------------------------------------------------------------------

NegativityLandscape negativity_landscape(double omega_c, const std::vector<double>& phases,
                                         double omega_lo, double omega_hi, const TimeGrid& grid) {
    if (!(omega_hi > omega_lo)) throw ConfigError("landscape: empty frequency window");
    grid.validate();
    const UniformGrid freq = conjugate_grid(grid);
    std::vector<std::size_t> rows;
    for (std::size_t k = 0; k < freq.n; ++k) {
        if (freq[k] >= omega_lo && freq[k] <= omega_hi) rows.push_back(k);
    }
    if (rows.empty()) throw ConfigError("landscape: frequency window contains no grid points");

    NegativityLandscape out;
    out.phases = phases;
    for (std::size_t k : rows) out.omega.push_back(freq[k]);
    out.cells.resize(phases.size());
    parallel_for(phases.size(), [&](std::size_t c) {
        const QuasiDistribution d = inverse_ft(ohmic_closed_forms(omega_c, phases[c], grid));
        auto& column = out.cells[c];
        column.reserve(rows.size());
        for (std::size_t k : rows) column.push_back(std::min(d.values[k], 0.0));
    });
    return out;
}

}  // namespace hens
