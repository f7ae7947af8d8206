#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "hens/dephasing.hpp"
#include "hens/error.hpp"
#include "oracles.hpp"

using namespace hens;

TEST_CASE("phi_exponent: Ohmic zero-temperature values") {
    const auto m1 = SpectralDensityModel::ohmic(1.0);
    CHECK(phi_exponent(m1, 0.0) == 0.0);
    CHECK(phi_exponent(m1, 1.0) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(std::exp(-phi_exponent(m1, 1.0)) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("phi_exponent: quadrature matches 2 ln(1 + wc^2 t^2) on [0, 50]") {
    for (double wc : {1.0, 3.0}) {
        const auto m = SpectralDensityModel::ohmic(wc);
        double worst = 0.0;
        for (int i = 0; i <= 100; ++i) {
            const double t = 0.5 * i;
            worst = std::max(worst, std::abs(phi_exponent(m, t) - oracle::ohmic_phi_exponent(wc, t)));
        }
        CHECK(worst <= 1e-8);
    }
}

TEST_CASE("phi_exponent: even in t") {
    oracle::Gen gen(3);
    const auto m = SpectralDensityModel::ohmic(2.0, 0.3);
    for (int i = 0; i < 20; ++i) {
        const double t = gen.uniform(-20.0, 20.0);
        CHECK(phi_exponent(m, -t) == phi_exponent(m, t));
        CHECK(phi_exponent(m, t) >= 0.0);
    }
}

TEST_CASE("phi_exponent: finite temperature against the high-temperature expansion") {
    // coth(x) = 1/x + x/3 + O(x^3):
    // Phi ~ 8T [t atan(wc t) - ln(1 + wc^2 t^2) / (2 wc)] + (2 wc / 3T) wc^2 t^2 / (1 + wc^2 t^2)
    const double wc = 1.0;
    const double temp = 50.0;
    const auto m = SpectralDensityModel::ohmic(wc, temp);
    for (double t : {0.1, 0.5, 1.0, 2.0}) {
        const double x = wc * t;
        const double expansion = 8.0 * temp * (t * std::atan(x) - std::log1p(x * x) / (2.0 * wc)) +
                                 2.0 * wc / (3.0 * temp) * x * x / (1.0 + x * x);
        CHECK(phi_exponent(m, t) == doctest::Approx(expansion).epsilon(1e-7));
    }
    // thermal factor only increases the exponent
    const auto cold = SpectralDensityModel::ohmic(wc);
    const auto warm = SpectralDensityModel::ohmic(wc, 0.2);
    for (double t : {0.5, 3.0, 10.0}) CHECK(phi_exponent(warm, t) > phi_exponent(cold, t));
}

TEST_CASE("vartheta: Ohmic values and symmetry") {
    const auto m = SpectralDensityModel::ohmic(1.0);
    CHECK(vartheta(m, 0.3, 0.0) == 0.0);
    CHECK(vartheta(m, 0.0, 1.0) == doctest::Approx(4.0 - M_PI).epsilon(1e-12));
    CHECK(vartheta(m, M_PI / 2, 1.0) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    oracle::Gen gen(5);
    for (int i = 0; i < 20; ++i) {
        const double t = gen.uniform(-30.0, 30.0);
        const double ph = gen.uniform(0.0, 2.0 * M_PI);
        CHECK(vartheta(m, ph, -t) == doctest::Approx(-vartheta(m, ph, t)).epsilon(1e-14));
        CHECK(std::abs(vartheta(m, ph, t) - oracle::ohmic_vartheta(1.0, ph, t)) < 1e-8);
    }
}

TEST_CASE("vartheta: finite temperature is rejected") {
    const auto m = SpectralDensityModel::ohmic(1.0, 0.5);
    CHECK_THROWS_WITH_AS(vartheta(m, 0.1, 1.0), "extended model implemented at T=0 only", ConfigError);
    CHECK_THROWS_AS(dephasing_extended(m, 0.1, TimeGrid{10.0, 64}), ConfigError);
}

TEST_CASE("dephasing_conventional: values and series invariants") {
    const TimeGrid grid{4.0, 64};  // t = 1 is a grid point
    for (auto [wc, expected] : {std::pair{1.0, 0.25}, std::pair{3.0, 0.01}}) {
        const auto s = dephasing_conventional(SpectralDensityModel::ohmic(wc), 0.0, grid);
        const std::size_t i1 = s.index_of(1.0);
        REQUIRE(grid.t(i1) == 1.0);
        CHECK(std::abs(s.values[i1] - Complex(expected)) < 1e-10);
        CHECK(s.values[grid.zero_index()] == Complex(1.0));
        CHECK(s.conjugate_symmetry_residual() <= 1e-12);
        CHECK(s.max_modulus() <= 1.0 + 1e-12);
    }
}

TEST_CASE("dephasing_conventional: omega0 rotates the factor") {
    const TimeGrid grid{4.0, 64};
    const double w0 = 0.7;
    const auto s = dephasing_conventional(SpectralDensityModel::ohmic(1.0, 0.1), w0, grid);
    for (std::size_t i = 1; i < grid.n; ++i) {
        CHECK(std::arg(s.values[i] * std::polar(1.0, -w0 * grid.t(i))) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("ohmic_closed_forms agree with the quadrature series on [-50, 50]") {
    const TimeGrid grid{50.0, 512};
    const auto m = SpectralDensityModel::ohmic(1.0);

    const auto quad = dephasing_conventional(m, 0.0, grid);
    const auto exact = ohmic_closed_forms(1.0, std::nullopt, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.n; ++i) worst = std::max(worst, std::abs(quad.values[i] - exact.values[i]));
    CHECK(worst <= 1e-8);

    for (double phase : {M_PI / 4, M_PI / 2, 2.0}) {
        const auto qx = dephasing_extended(m, phase, grid);
        const auto ex = ohmic_closed_forms(1.0, phase, grid);
        double w = 0.0;
        for (std::size_t i = 0; i < grid.n; ++i) w = std::max(w, std::abs(qx.values[i] - ex.values[i]));
        CHECK(w <= 1e-8);
        CHECK(qx.conjugate_symmetry_residual() <= 1e-12);
    }
}

TEST_CASE("ohmic closed forms: formula checks") {
    CHECK(ohmic_phi(3.0, 1.0).real() == doctest::Approx(0.01).epsilon(1e-14));
    // phase pi/2, wc = 1: (1 + t^2)^(-2 (1 + i sign t))
    for (double t : {-3.0, -0.4, 0.0, 0.9, 5.0}) {
        const Complex expected = std::pow(Complex(1.0 + t * t), Complex(-2.0, -2.0 * oracle::sgn(t)));
        CHECK(std::abs(ohmic_phi_extended(1.0, M_PI / 2, t) - expected) < 1e-14);
        // modulus independent of the phase; conjugate symmetry of the formula
        CHECK(std::abs(ohmic_phi_extended(1.0, 1.1, t)) == doctest::Approx(ohmic_phi(1.0, t).real()).epsilon(1e-14));
        CHECK(std::abs(ohmic_phi_extended(2.0, 0.7, -t) - std::conj(ohmic_phi_extended(2.0, 0.7, t))) < 1e-15);
        CHECK(std::abs(ohmic_phi_extended(1.0, 0.7, t) - oracle::ohmic_phi_extended(1.0, 0.7, t)) < 1e-14);
    }
    CHECK(ohmic_phi_extended(1.0, 0.3, 0.0) == Complex(1.0));
    CHECK(ohmic_distribution(1.0, 0.0) == 0.25);
}

TEST_CASE("dephasing_extended: |phi_X| equals exp(-Phi) for any phase") {
    const TimeGrid grid{8.0, 64};
    const auto m = SpectralDensityModel::ohmic(1.0);
    const auto conv = dephasing_conventional(m, 0.0, grid);
    const auto ext = dephasing_extended(m, 1.3, grid);
    // index 0 is the folded endpoint, whose modulus depends on the phase
    for (std::size_t i = 1; i < grid.n; ++i) {
        CHECK(std::abs(ext.values[i]) == doctest::Approx(std::abs(conv.values[i])).epsilon(1e-12));
    }
    CHECK(ext.values[grid.zero_index()] == Complex(1.0));
}

TEST_CASE("tabulated spectral density") {
    SUBCASE("Ohmic samples reproduce the analytic exponent") {
        std::vector<double> w, j;
        for (int i = 1; i <= 8000; ++i) {
            w.push_back(0.005 * i);
            j.push_back(w.back() * std::exp(-w.back()));
        }
        const auto m = SpectralDensityModel::tabulated(w, j);
        for (double t : {0.5, 1.0, 4.0}) {
            CHECK(phi_exponent(m, t) == doctest::Approx(oracle::ohmic_phi_exponent(1.0, t)).epsilon(1e-4));
        }
        CHECK(m.J(0.0025) == doctest::Approx(0.0025 * std::exp(-0.005)).epsilon(1e-12));
        CHECK(m.J(100.0) == 0.0);
    }
    SUBCASE("file round trip and validation") {
        const auto path = std::filesystem::temp_directory_path() / "hens_table_test.txt";
        {
            std::ofstream out(path);
            out << "# omega J\n0.0 0.0\n1.0, 0.5\n\n2.0 0.25\n";
        }
        const auto m = SpectralDensityModel::load_table(path);
        CHECK(m.J(1.5) == doctest::Approx(0.375));
        {
            std::ofstream out(path);
            out << "0.0 0.0\n1.0 -0.5\n";
        }
        CHECK_THROWS_WITH_AS(SpectralDensityModel::load_table(path),
                             "tabulated spectral density has negative values", ConfigError);
        {
            std::ofstream out(path);
            out << "1.0 0.1\n0.5 0.2\n";
        }
        CHECK_THROWS_AS(SpectralDensityModel::load_table(path), ConfigError);
        std::filesystem::remove(path);
    }
}

TEST_CASE("master_coeffs: conventional Ohmic has gamma = 2t/(1+t^2), eps = 0") {
    const TimeGrid grid{20.0, 4096};
    const auto s = ohmic_closed_forms(1.0, std::nullopt, grid);
    const auto c = master_coeffs(s, -10.0, 10.0);
    for (std::size_t i = 0; i < c.gamma.size(); ++i) {
        const double t = c.gamma.t(i);
        CHECK(c.gamma.values[i] == doctest::Approx(2.0 * t / (1.0 + t * t)).epsilon(1e-8).scale(1.0));
        CHECK(std::abs(c.epsilon.values[i]) < 1e-12);
    }
    const std::size_t i0 = static_cast<std::size_t>(std::llround(-c.gamma.t0 / c.gamma.dt));
    CHECK(std::abs(c.gamma.t(i0)) < 1e-12);
    CHECK(std::abs(c.gamma.values[i0]) < 1e-12);
}

TEST_CASE("master_coeffs: delta ensemble gives a pure rotation") {
    const TimeGrid grid{10.0, 1024};
    const double w0 = 1.3;
    const auto s = DephasingSeries::sample(grid, [&](double t) { return std::polar(1.0, w0 * t); });
    const auto c = master_coeffs(s);
    for (std::size_t i = 0; i < c.gamma.size(); ++i) {
        CHECK(std::abs(c.gamma.values[i]) < 1e-9);
        CHECK(c.epsilon.values[i] == doctest::Approx(w0 / 2).epsilon(1e-9));
    }
}

TEST_CASE("master_coeffs: a vanishing factor is a coefficient singularity") {
    const TimeGrid grid{10.0, 256};
    const auto s = DephasingSeries::sample(grid, [](double t) { return Complex(std::cos(t)); });
    CHECK_THROWS_AS(master_coeffs(s), PreconditionError);
    try {
        master_coeffs(s);
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("coefficient singularity") != std::string::npos);
    }
    // a subrange avoiding the zeros of cos(t) is fine
    CHECK_NOTHROW(master_coeffs(s, -1.0, 1.0));
}

TEST_CASE("propagate_master: constant eps, no gamma is a rotation") {
    RealSeries eps{-1.0, 0.01, std::vector<double>(401, 0.35)};
    RealSeries gam{-1.0, 0.01, std::vector<double>(401, 0.0)};
    oracle::Gen gen(9);
    const DensityMatrix rho0(gen.density(2));
    const auto traj = propagate_master(rho0, eps, gam);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double t = traj.times[k];
        const Matrix u = oracle::rz(0.7, t);  // eps sigma_z = (0.7 / 2) sigma_z
        // RK4 global error ~ t (0.7 h)^4 / 120 with h = 0.02
        CHECK((traj.states[k] - u * rho0.matrix() * u.adjoint()).cwiseAbs().maxCoeff() < 1e-9);
    }
    CHECK(traj.times.back() == doctest::Approx(3.0));
}

TEST_CASE("propagate_master: Ohmic coefficients reproduce phi_o1") {
    const TimeGrid grid{20.0, 4096};
    const auto s = ohmic_closed_forms(1.0, std::nullopt, grid);
    const auto c = master_coeffs(s, -1.0, 10.0);
    Eigen::VectorXcd plus(2);
    plus << 1.0, 1.0;
    const auto rho0 = DensityMatrix::pure(plus);
    const auto traj = propagate_master(rho0, c.epsilon, c.gamma);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double t = traj.times[k];
        const double ratio = std::abs(coherence(traj.states[k])) / std::abs(coherence(rho0));
        CHECK(ratio == doctest::Approx(oracle::ohmic_phi(1.0, t)).epsilon(1e-5));
        CHECK(traj.states[k](0, 0).real() == doctest::Approx(0.5).epsilon(1e-14));
    }
}

TEST_CASE("propagate_master: maximally mixed input is stationary; misaligned grids rejected") {
    RealSeries eps{0.0, 0.1, std::vector<double>(21, 0.2)};
    RealSeries gam{0.0, 0.1, std::vector<double>(21, 0.5)};
    const auto traj = propagate_master(DensityMatrix::maximally_mixed(2), eps, gam);
    for (const auto& st : traj.states) {
        CHECK((st - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
    }
    RealSeries shifted{0.05, 0.1, std::vector<double>(21, 0.5)};
    CHECK_THROWS_WITH_AS(propagate_master(DensityMatrix::maximally_mixed(2), eps, shifted),
                         "grid misalignment", ConfigError);
}

TEST_CASE("extended_coherence: limiting populations") {
    const TimeGrid grid{5.0, 64};
    const auto s = ohmic_closed_forms(1.0, 0.9, grid);
    const Complex c0(0.3, -0.2);
    const auto up = extended_coherence(c0, 1.0, 0.0, s);
    const auto mixed = extended_coherence(c0, 0.5, 0.5, s);
    for (std::size_t i = 0; i < grid.n; ++i) {
        CHECK(std::abs(up[i] - c0 * s.values[i]) < 1e-15);
        CHECK(std::abs(mixed[i] - c0 * s.values[i].real()) < 1e-15);
    }
    CHECK(std::abs(extended_coherence(c0, 0.2, 0.8, s)[grid.zero_index()] - c0) < 1e-15);
    CHECK_THROWS_AS(extended_coherence(c0, 0.7, 0.7, s), ConfigError);
}

TEST_CASE("TimeGrid validation") {
    CHECK_THROWS_AS((TimeGrid{1.0, 100}.validate()), ConfigError);
    CHECK_THROWS_AS((TimeGrid{-1.0, 64}.validate()), ConfigError);
    CHECK_NOTHROW((TimeGrid{1.0, 64}.validate()));
}
