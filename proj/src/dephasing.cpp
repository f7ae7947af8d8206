#include "hens/dephasing.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>

#include "hens/error.hpp"
#include "hens/parallel.hpp"

namespace hens {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// 1 - cos x without cancellation
double one_minus_cos(double x) {
    const double s = std::sin(0.5 * x);
    return 2.0 * s * s;
}

// x - sin x without cancellation
double x_minus_sin(double x) {
    if (std::abs(x) < 1e-2) {
        const double x2 = x * x;
        return x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
    }
    return x - std::sin(x);
}

// 7-point Gauss / 15-point Kronrod pair on [-1, 1] (nonnegative abscissae).
constexpr std::array<double, 8> kKronrodNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kKronrodWeights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for nodes 1, 3, 5 and the center
constexpr std::array<double, 4> kGaussWeights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// Adaptive bisection on [a, b] until |K15 - G7| <= max(abs_tol, rel_tol |K15|).
template <class F>
double kronrod_adaptive(F& f, double a, double b, double abs_tol, double rel_tol, unsigned depth) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(mid);
    double kronrod = kKronrodWeights[7] * fc;
    double gauss = kGaussWeights[3] * fc;
    for (std::size_t i = 0; i < 7; ++i) {
        const double dx = half * kKronrodNodes[i];
        const double pair = f(mid - dx) + f(mid + dx);
        kronrod += kKronrodWeights[i] * pair;
        if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;
    const double err = std::abs(kronrod - gauss);
    if (depth == 0 || err <= std::max(abs_tol, rel_tol * std::abs(kronrod))) return kronrod;
    return kronrod_adaptive(f, a, mid, 0.5 * abs_tol, rel_tol, depth - 1) +
           kronrod_adaptive(f, mid, b, 0.5 * abs_tol, rel_tol, depth - 1);
}

// Integral of f over [0, upper_cutoff] split at the model breakpoints, with
// panels no wider than a quarter period of cos(w t).
template <class F>
double integrate_spectral(const SpectralDensityModel& model, double t, const QuadratureOptions& q,
                          F&& f) {
    const double upper = model.upper_cutoff();
    std::vector<double> edges{0.0};
    for (double b : model.breakpoints()) {
        if (b > 0.0 && b < upper) edges.push_back(b);
    }
    edges.push_back(upper);

    const double base = model.kind() == SpectralDensityModel::Kind::ohmic_exp_cutoff
                            ? 0.5 * model.omega_c()
                            : upper / 64.0;
    const double width = t != 0.0 ? std::min(base, M_PI / (4.0 * std::abs(t))) : base;

    // Neumaier summation over panels
    double sum = 0.0;
    double comp = 0.0;
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
        const double a = edges[s];
        const double len = edges[s + 1] - a;
        if (!(len > 0.0)) continue;
        const auto panels = static_cast<std::size_t>(std::ceil(len / width));
        const double h = len / static_cast<double>(panels);
        const double panel_abs_tol = q.abs_tol * h / upper;
        for (std::size_t p = 0; p < panels; ++p) {
            const double lo = a + static_cast<double>(p) * h;
            const double hi = p + 1 == panels ? edges[s + 1] : lo + h;
            const double v = kronrod_adaptive(f, lo, hi, panel_abs_tol, q.rel_tol, q.max_depth);
            const double next = sum + v;
            comp += std::abs(sum) >= std::abs(v) ? (sum - next) + v : (v - next) + sum;
            sum = next;
        }
    }
    return sum + comp;
}

// 4 J(w) / w^2 with the thermal factor coth(w / 2T)
double weighted_density(const SpectralDensityModel& model, double w, bool thermal) {
    double g = 4.0 * model.J(w) / (w * w);
    if (thermal && model.temperature() > 0.0) g /= std::tanh(0.5 * w / model.temperature());
    return g;
}

double decay_integral(const SpectralDensityModel& model, double t, bool thermal,
                      const QuadratureOptions& q) {
    if (t == 0.0) return 0.0;
    const double at = std::abs(t);
    return integrate_spectral(model, at, q, [&](double w) {
        return weighted_density(model, w, thermal) * one_minus_cos(w * at);
    });
}

double drift_integral(const SpectralDensityModel& model, double t, const QuadratureOptions& q) {
    if (t == 0.0) return 0.0;
    const double at = std::abs(t);
    const double v = integrate_spectral(model, at, q, [&](double w) {
        return weighted_density(model, w, false) * x_minus_sin(w * at);
    });
    return sign(t) * v;
}

void require_zero_temperature(const SpectralDensityModel& model) {
    if (model.temperature() != 0.0) {
        throw ConfigError("extended model implemented at T=0 only");
    }
}

}  // namespace

// ---------------------------------------------------------------------------

SpectralDensityModel SpectralDensityModel::ohmic(double omega_c, double temperature) {
    if (!(omega_c > 0.0)) throw ConfigError("ohmic spectral density: omega_c must be positive");
    if (!(temperature >= 0.0)) throw ConfigError("temperature must be nonnegative");
    SpectralDensityModel m;
    m.kind_ = Kind::ohmic_exp_cutoff;
    m.omega_c_ = omega_c;
    m.temperature_ = temperature;
    return m;
}

SpectralDensityModel SpectralDensityModel::tabulated(std::vector<double> omega,
                                                     std::vector<double> j, double temperature) {
    if (omega.size() != j.size() || omega.size() < 2) {
        throw ConfigError("tabulated spectral density: need at least two (omega, J) rows");
    }
    if (!(temperature >= 0.0)) throw ConfigError("temperature must be nonnegative");
    if (omega.front() < 0.0) throw ConfigError("tabulated spectral density: omega must be >= 0");
    for (std::size_t i = 0; i < omega.size(); ++i) {
        if (!std::isfinite(omega[i]) || !std::isfinite(j[i])) {
            throw ConfigError("tabulated spectral density: non-finite entry");
        }
        if (i > 0 && !(omega[i] > omega[i - 1])) {
            throw ConfigError("tabulated spectral density: omega must be strictly increasing");
        }
        if (j[i] < 0.0) throw ConfigError("tabulated spectral density has negative values");
    }
    SpectralDensityModel m;
    m.kind_ = Kind::tabulated;
    m.omega_c_ = omega.back();
    m.temperature_ = temperature;
    m.table_omega_ = std::move(omega);
    m.table_j_ = std::move(j);
    return m;
}

SpectralDensityModel SpectralDensityModel::load_table(const std::filesystem::path& path,
                                                      double temperature) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open spectral density table: " + path.string());
    std::vector<double> omega, j;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        double w = 0.0, v = 0.0;
        if (!(fields >> w)) continue;  // blank line
        std::string rest;
        if (!(fields >> v) || (fields >> rest)) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected two numeric columns");
        }
        omega.push_back(w);
        j.push_back(v);
    }
    return tabulated(std::move(omega), std::move(j), temperature);
}

double SpectralDensityModel::J(double omega) const {
    if (!(omega > 0.0)) return 0.0;
    if (kind_ == Kind::ohmic_exp_cutoff) return omega * std::exp(-omega / omega_c_);

    if (omega >= table_omega_.back()) return omega == table_omega_.back() ? table_j_.back() : 0.0;
    if (omega < table_omega_.front()) return table_j_.front() * omega / table_omega_.front();
    const auto hi = static_cast<std::size_t>(
        std::upper_bound(table_omega_.begin(), table_omega_.end(), omega) - table_omega_.begin());
    const std::size_t lo = hi - 1;
    const double f = (omega - table_omega_[lo]) / (table_omega_[hi] - table_omega_[lo]);
    return table_j_[lo] + f * (table_j_[hi] - table_j_[lo]);
}

double SpectralDensityModel::upper_cutoff(double tol) const {
    if (kind_ == Kind::tabulated) return table_omega_.back();
    return omega_c_ * std::max(40.0, 10.0 + 2.0 * std::log(1.0 / tol));
}

std::vector<double> SpectralDensityModel::breakpoints() const {
    std::vector<double> b = table_omega_;
    if (temperature_ > 0.0) b.push_back(temperature_);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

// ---------------------------------------------------------------------------

double phi_exponent(const SpectralDensityModel& model, double t, const QuadratureOptions& q) {
    return decay_integral(model, t, true, q);
}

double vartheta(const SpectralDensityModel& model, double phase, double t,
                const QuadratureOptions& q) {
    require_zero_temperature(model);
    if (t == 0.0) return 0.0;
    return std::cos(phase) * drift_integral(model, t, q) +
           sign(t) * std::sin(phase) * decay_integral(model, t, false, q);
}

// ---------------------------------------------------------------------------

DephasingSeries DephasingSeries::sample(const TimeGrid& grid,
                                        const std::function<Complex(double)>& f) {
    grid.validate();
    DephasingSeries s;
    s.grid = grid;
    s.values.resize(grid.n);
    for (std::size_t i = 1; i < grid.n; ++i) s.values[i] = f(grid.t(i));
    s.values[0] = 0.5 * (f(-grid.t_max) + f(grid.t_max));
    return s;
}

DephasingSeries DephasingSeries::sample_hermitian(const TimeGrid& grid,
                                                  const std::function<Complex(double)>& f) {
    grid.validate();
    const std::size_t n = grid.n;
    const std::size_t half = n / 2;
    // nonnegative times: indices half..n-1, plus t_max stored in slot n
    std::vector<Complex> positive(half + 1);
    parallel_for(half + 1, [&](std::size_t k) {
        positive[k] = f(k == half ? grid.t_max : grid.t(half + k));
    });
    DephasingSeries s;
    s.grid = grid;
    s.values.resize(n);
    for (std::size_t k = 0; k < half; ++k) s.values[half + k] = positive[k];
    for (std::size_t i = 1; i < half; ++i) s.values[i] = std::conj(s.values[n - i]);
    s.values[0] = positive[half].real();
    return s;
}

double DephasingSeries::conjugate_symmetry_residual() const {
    const std::size_t n = values.size();
    double r = std::abs(values[0].imag());
    for (std::size_t i = 1; i < n; ++i) {
        r = std::max(r, std::abs(values[n - i] - std::conj(values[i])));
    }
    return r;
}

double DephasingSeries::max_modulus() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v));
    return m;
}

Complex DephasingSeries::at(double t) const {
    const double x = t / grid.dt() + static_cast<double>(grid.n / 2);
    if (!(std::abs(t) <= grid.t_max * (1.0 + 1e-12))) {
        throw PreconditionError("time " + std::to_string(t) + " outside the series range");
    }
    const double fl = std::clamp(std::floor(x), 0.0, static_cast<double>(grid.n - 1));
    const auto i = static_cast<std::size_t>(fl);
    const double w = std::clamp(x - fl, 0.0, 1.0);
    const Complex a = values[i];
    const Complex b = values[(i + 1) % grid.n];
    return a + w * (b - a);
}

std::size_t DephasingSeries::index_of(double t) const {
    const double x = std::round(t / grid.dt() + static_cast<double>(grid.n / 2));
    return static_cast<std::size_t>(std::clamp(x, 0.0, static_cast<double>(grid.n - 1)));
}

DephasingSeries dephasing_conventional(const SpectralDensityModel& model, double omega0,
                                       const TimeGrid& grid, const QuadratureOptions& q) {
    auto s = DephasingSeries::sample_hermitian(grid, [&](double t) {
        return std::exp(Complex(-phi_exponent(model, t, q), omega0 * t));
    });
    s.omega0 = omega0;
    s.kind = SeriesKind::conventional;
    return s;
}

DephasingSeries dephasing_extended(const SpectralDensityModel& model, double phase,
                                   const TimeGrid& grid, const QuadratureOptions& q,
                                   double omega0) {
    require_zero_temperature(model);
    const double c = std::cos(phase);
    const double sn = std::sin(phase);
    auto s = DephasingSeries::sample_hermitian(grid, [&](double t) {
        if (t == 0.0) return Complex(1.0);
        const double decay = decay_integral(model, t, false, q);
        const double theta = c * drift_integral(model, t, q) + sign(t) * sn * decay;
        return std::exp(Complex(-decay, omega0 * t - theta));
    });
    s.omega0 = omega0;
    s.kind = SeriesKind::extended;
    s.phase = phase;
    return s;
}

// ---------------------------------------------------------------------------

Complex ohmic_phi(double omega_c, double t) {
    const double u = 1.0 + omega_c * omega_c * t * t;
    return 1.0 / (u * u);
}

Complex ohmic_phi_extended(double omega_c, double phase, double t) {
    const double x = omega_c * t;
    const double log_u = std::log1p(x * x);
    const double modulus = std::exp(-2.0 * log_u);
    const double angle =
        -4.0 * std::cos(phase) * (x - std::atan(x)) - 2.0 * sign(t) * std::sin(phase) * log_u;
    return std::polar(modulus, angle);
}

double ohmic_distribution(double omega_c, double omega) {
    const double a = std::abs(omega);
    return (omega_c + a) * std::exp(-a / omega_c) / (4.0 * omega_c * omega_c);
}

DephasingSeries ohmic_closed_forms(double omega_c, std::optional<double> phase,
                                   const TimeGrid& grid, double omega0) {
    if (!(omega_c > 0.0)) throw ConfigError("ohmic spectral density: omega_c must be positive");
    DephasingSeries s;
    if (phase) {
        const double p = *phase;
        s = DephasingSeries::sample_hermitian(grid, [&](double t) {
            return std::polar(1.0, omega0 * t) * ohmic_phi_extended(omega_c, p, t);
        });
        s.kind = SeriesKind::extended;
        s.phase = p;
    } else {
        s = DephasingSeries::sample_hermitian(grid, [&](double t) {
            return std::polar(1.0, omega0 * t) * ohmic_phi(omega_c, t);
        });
        s.kind = SeriesKind::conventional;
    }
    s.omega0 = omega0;
    return s;
}

// ---------------------------------------------------------------------------

MasterCoefficients master_coeffs(const DephasingSeries& series, std::optional<double> t_lo,
                                 std::optional<double> t_hi) {
    const TimeGrid& g = series.grid;
    const std::size_t n = g.n;
    const double dt = g.dt();
    const double half = static_cast<double>(n / 2);

    // index 0 is the folded endpoint and never enters a stencil
    std::size_t i_lo = 3;
    std::size_t i_hi = n - 3;
    if (t_lo) i_lo = std::max(i_lo, static_cast<std::size_t>(std::max(0.0, std::ceil(*t_lo / dt + half - 1e-9))));
    if (t_hi) {
        const double x = std::floor(*t_hi / dt + half + 1e-9);
        i_hi = x < 0.0 ? 0 : std::min(i_hi, static_cast<std::size_t>(x));
    }
    if (i_lo > i_hi) throw ConfigError("master_coeffs: empty time range");

    const std::size_t s0 = i_lo - 2;
    const std::size_t s1 = i_hi + 2;
    std::vector<double> log_mod(s1 - s0 + 1);
    std::vector<double> arg(s1 - s0 + 1);
    for (std::size_t i = s0; i <= s1; ++i) {
        const Complex v = series.values[i];
        if (!(std::abs(v) > 1e-14)) {
            throw PreconditionError("coefficient singularity at t = " + std::to_string(g.t(i)));
        }
        log_mod[i - s0] = std::log(std::abs(v));
        double a = std::arg(v);
        if (i > s0) {
            // a zero of phi between samples shows up as a phase jump near pi
            const double prev = arg[i - s0 - 1];
            a += 2.0 * M_PI * std::round((prev - a) / (2.0 * M_PI));
            if (std::abs(a - prev) > 0.5 * M_PI) {
                throw PreconditionError("coefficient singularity near t = " + std::to_string(g.t(i)));
            }
        }
        arg[i - s0] = a;
    }

    auto derivative = [&](const std::vector<double>& f, std::size_t i) {
        const std::size_t k = i - s0;
        return (f[k - 2] - 8.0 * f[k - 1] + 8.0 * f[k + 1] - f[k + 2]) / (12.0 * dt);
    };

    MasterCoefficients out;
    out.epsilon.t0 = out.gamma.t0 = g.t(i_lo);
    out.epsilon.dt = out.gamma.dt = dt;
    for (std::size_t i = i_lo; i <= i_hi; ++i) {
        out.epsilon.values.push_back(0.5 * derivative(arg, i));
        out.gamma.values.push_back(-0.5 * derivative(log_mod, i));
    }
    return out;
}

MasterTrajectory propagate_master(const DensityMatrix& rho0, const RealSeries& epsilon,
                                  const RealSeries& gamma) {
    if (rho0.dim() != 2) throw ConfigError("propagate_master: qubit state required");
    const double dt = epsilon.dt;
    if (epsilon.size() != gamma.size() || std::abs(epsilon.dt - gamma.dt) > 1e-12 * dt ||
        std::abs(epsilon.t0 - gamma.t0) > 1e-9 * dt || !(dt > 0.0)) {
        throw ConfigError("grid misalignment");
    }
    const double x0 = -epsilon.t0 / dt;
    const double r0 = std::round(x0);
    if (std::abs(x0 - r0) > 1e-6 || r0 < 0.0 || r0 >= static_cast<double>(epsilon.size())) {
        throw ConfigError("grid misalignment: t = 0 is not a coefficient grid point");
    }
    const auto i0 = static_cast<std::size_t>(r0);

    const Matrix sz = HermitianOperator::sigma_z().matrix();
    const Complex I(0.0, 1.0);
    auto rhs = [&](const Matrix& r, std::size_t i) -> Matrix {
        const double e = epsilon.values[i];
        const double g = gamma.values[i];
        return -I * e * (sz * r - r * sz) + g * (sz * r * sz - r);
    };

    MasterTrajectory traj;
    Matrix rho = rho0.matrix();
    traj.times.push_back(0.0);
    traj.states.push_back(rho);
    const double h = 2.0 * dt;
    for (std::size_t i = i0; i + 2 < epsilon.size(); i += 2) {
        const Matrix k1 = rhs(rho, i);
        const Matrix k2 = rhs(rho + 0.5 * h * k1, i + 1);
        const Matrix k3 = rhs(rho + 0.5 * h * k2, i + 1);
        const Matrix k4 = rhs(rho + h * k3, i + 2);
        rho += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        traj.times.push_back(static_cast<double>(i + 2 - i0) * dt);
        traj.states.push_back(rho);
    }
    return traj;
}

std::vector<Complex> extended_coherence(Complex rho1_coherence0, double p_up, double p_down,
                                        const DephasingSeries& series) {
    if (!(p_up >= 0.0 && p_down >= 0.0) || std::abs(p_up + p_down - 1.0) > 1e-10) {
        throw ConfigError("invalid populations");
    }
    std::vector<Complex> out(series.values.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Complex phi = series.values[i];
        out[i] = rho1_coherence0 * (p_up * phi + p_down * std::conj(phi));
    }
    return out;
}

}  // namespace hens
