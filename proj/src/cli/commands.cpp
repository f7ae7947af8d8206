#include "hens/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <unistd.h>

#include "CLI11.hpp"
#include "hens/cli/output.hpp"
#include "hens/ensemble.hpp"
#include "hens/error.hpp"
#include "hens/spectral.hpp"
#include "json.hpp"

namespace hens::cli {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

fs::path prepare_output_dir(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec || !fs::is_directory(cfg.output_dir) || ::access(cfg.output_dir.c_str(), W_OK) != 0) {
        throw ConfigError("output directory not writable: " + cfg.output_dir.string());
    }
    return cfg.output_dir;
}

fs::path write_json_file(const fs::path& dir, const std::string& name, const ordered_json& j) {
    const auto path = dir / name;
    write_atomic(path, j.dump(2) + "\n");
    return path;
}

bool use_closed_forms(const RunConfig& cfg) {
    const bool ohmic_zero_t = cfg.model.kind == "ohmic" && cfg.model.temperature == 0.0;
    if (cfg.method == "analytic" && !ohmic_zero_t) {
        throw ConfigError("method 'analytic' requires the Ohmic model at T = 0");
    }
    return cfg.method == "analytic" || (cfg.method == "auto" && ohmic_zero_t);
}

double require_phase(const RunConfig& cfg) {
    if (!cfg.phase) throw ConfigError("the extended model needs a phase (--phase)");
    return *cfg.phase;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError("not a number in " + where + ": '" + s + "'");
    }
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    if (used != s.size()) throw ConfigError("not a number in " + where + ": '" + s + "'");
    return v;
}

// ---------------------------------------------------------------------------
// simulate helpers

DensityMatrix initial_state(const SimulateConfig& sim, std::size_t dim) {
    if (sim.rho0_matrix) {
        if (static_cast<std::size_t>(sim.rho0_matrix->rows()) != dim) {
            throw ConfigError("simulate.rho0 has the wrong dimension");
        }
        return DensityMatrix(*sim.rho0_matrix);
    }
    const std::string& r = sim.rho0;
    if (r == "mixed") return DensityMatrix::maximally_mixed(dim);
    if (r == "up") return DensityMatrix::basis_state(dim, 0);
    if (r == "down") {
        if (dim != 2) throw ConfigError("simulate.rho0 'down' needs a qubit");
        return DensityMatrix::basis_state(dim, 1);
    }
    if (r == "plus") {
        const Eigen::VectorXcd psi = Eigen::VectorXcd::Constant(static_cast<Eigen::Index>(dim), 1.0 / std::sqrt(static_cast<double>(dim)));
        return DensityMatrix::pure(psi);
    }
    if (r.rfind("basis:", 0) == 0) {
        const double k = parse_double(r.substr(6), "simulate.rho0");
        if (k < 0 || k >= static_cast<double>(dim) || k != std::floor(k)) throw ConfigError("simulate.rho0 basis index out of range");
        return DensityMatrix::basis_state(dim, static_cast<std::size_t>(k));
    }
    throw ConfigError("simulate.rho0 must be plus | up | down | mixed | basis:k | a matrix");
}

// Quasi-average phi(t) = sum_k c_k w_k exp(i w_k t) d_omega, for weights that
// need not be a probability distribution.
Complex quasi_factor(const UniformGrid& g, const std::vector<double>& w, double t) {
    Complex acc = 0.0;
    for (std::size_t k = 0; k < g.n; ++k) {
        if (w[k] == 0.0) continue;
        const double c = (k == 0 || k + 1 == g.n) ? 0.5 : 1.0;
        acc += c * w[k] * std::polar(1.0, g[k] * t);
    }
    return acc * g.step;
}

DensityMatrix scale_coherence(const DensityMatrix& rho, Complex phi) {
    Matrix m = rho.matrix();
    m(1, 0) *= phi;
    m(0, 1) *= std::conj(phi);
    return DensityMatrix(m);
}

struct Weights {
    UniformGrid grid;
    std::vector<double> values;
};

Weights read_weights(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open weights file: " + path.string());
    std::vector<double> w, v;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double a = 0.0, b = 0.0;
        if (!(ss >> a)) continue;
        if (!(ss >> b)) throw ConfigError("weights file: expected two columns");
        w.push_back(a);
        v.push_back(b);
    }
    if (w.size() < 2) throw ConfigError("weights file: need at least two rows");
    const double step = (w.back() - w.front()) / static_cast<double>(w.size() - 1);
    if (!(step > 0.0)) throw ConfigError("weights file: frequencies must increase");
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (std::abs(w[k] - (w.front() + static_cast<double>(k) * step)) > 1e-9 * std::max(1.0, std::abs(w[k]))) {
            throw ConfigError("weights file: frequencies must be uniformly spaced");
        }
    }
    return {UniformGrid{w.front(), step, w.size()}, std::move(v)};
}

// Series on a grid whose spacing divides the output step into RK4 stages.
DephasingSeries master_series(const SimulateConfig& sim, const std::function<Complex(double)>& phi, double scale) {
    const double h = sim.t_end / static_cast<double>(sim.steps);
    const double target = 0.005 / scale;
    const auto q = static_cast<std::size_t>(std::max(1.0, std::ceil(h / (2.0 * target))));
    const double dt = h / (2.0 * static_cast<double>(q));
    std::size_t n = 4;
    while (0.5 * static_cast<double>(n) * dt < sim.t_end + 6.0 * dt) n *= 2;
    return DephasingSeries::sample_hermitian(TimeGrid{0.5 * static_cast<double>(n) * dt, n}, phi);
}

std::vector<DensityMatrix> master_path(const DephasingSeries& series, const DensityMatrix& rho0,
                                       const std::vector<double>& times) {
    const double dt = series.grid.dt();
    const auto c = master_coeffs(series, -2.0 * dt, times.back() + 2.5 * dt);
    const auto traj = propagate_master(rho0, c.epsilon, c.gamma);
    std::vector<DensityMatrix> out;
    for (double t : times) {
        const auto k = static_cast<std::size_t>(std::llround(t / (2.0 * dt)));
        if (k >= traj.times.size() || std::abs(traj.times[k] - t) > 1e-9 * std::max(1.0, t)) {
            throw ConfigError("master path: output time not on the propagation grid");
        }
        const Matrix& m = traj.states[k];
        out.emplace_back(Matrix(0.5 * (m + m.adjoint())));
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

DephasingSeries build_series(const RunConfig& cfg, const TimeGrid& grid) {
    grid.validate();
    const bool extended = cfg.model.extended();
    if (use_closed_forms(cfg)) {
        return ohmic_closed_forms(cfg.model.omega_c, extended ? std::optional<double>(require_phase(cfg)) : std::nullopt,
                                  grid, cfg.omega0);
    }
    const auto model = cfg.model.build();
    if (extended) return dephasing_extended(model, require_phase(cfg), grid, {}, cfg.omega0);
    return dephasing_conventional(model, cfg.omega0, grid);
}

DephasingSeries read_series(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input series: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("input series is empty");
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "t" || header[1] != "re" || header[2] != "im") {
        throw ConfigError("input series: expected header t,re,im[,abs]");
    }
    std::vector<double> ts;
    std::vector<Complex> vs;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() < 3) throw ConfigError("input series: short row " + std::to_string(row));
        const std::string where = "input series row " + std::to_string(row);
        ts.push_back(parse_double(cells[0], where));
        vs.emplace_back(parse_double(cells[1], where), parse_double(cells[2], where));
    }
    const std::size_t n = ts.size();
    if (!is_power_of_two(n) || n < 4) throw ConfigError("input series: row count must be a power of two >= 4");
    const TimeGrid grid{-ts.front(), n};
    grid.validate();
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(ts[i] - grid.t(i)) > 1e-9 * grid.t_max) {
            throw ConfigError("input series: times must be t_i = (i - N/2) dt starting at -t_max");
        }
    }
    DephasingSeries s;
    s.grid = grid;
    s.values = std::move(vs);
    return s;
}

std::vector<fs::path> cmd_dephase(const RunConfig& cfg) {
    const auto dir = prepare_output_dir(cfg);
    const TimeGrid grid = cfg.grid.time_grid();
    const auto s = build_series(cfg, grid);
    Table t{{"t", "re", "im", "abs"}, {}};
    t.rows.reserve(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const Complex v = s.values[i];
        t.rows.push_back({grid.t(i), v.real(), v.imag(), std::abs(v)});
    }
    return {write_table(dir, "phi", t, cfg.output_format)};
}

std::vector<fs::path> cmd_invert(const RunConfig& cfg) {
    const auto dir = prepare_output_dir(cfg);
    const auto series = cfg.input ? read_series(*cfg.input) : build_series(cfg, cfg.grid.time_grid());
    const auto d = inverse_ft(series);

    Table t{{"omega", "wp"}, {}};
    double window_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < d.omega.n; ++k) {
        const double w = d.omega[k];
        if (w < cfg.grid.omega_lo || w > cfg.grid.omega_hi) continue;
        t.rows.push_back({w, d.values[k]});
        window_min = std::min(window_min, d.values[k]);
    }
    ordered_json diag;
    diag["norm"] = d.norm;
    diag["min_value"] = d.min_value;
    diag["negativity"] = d.negativity;
    diag["realness_residual"] = d.realness_residual;
    diag["conjugate_symmetry_residual"] = series.conjugate_symmetry_residual();
    diag["window_min_value"] = std::isfinite(window_min) ? ordered_json(window_min) : ordered_json(nullptr);
    diag["n"] = series.grid.n;
    diag["t_max"] = series.grid.t_max;
    diag["d_omega"] = d.omega.step;
    diag["source"] = cfg.input ? cfg.input->string() : cfg.model.type;
    return {write_table(dir, "wp", t, cfg.output_format), write_json_file(dir, "diagnostics.json", diag)};
}

std::vector<fs::path> cmd_landscape(const RunConfig& cfg) {
    if (cfg.model.kind != "ohmic" || cfg.model.temperature != 0.0) {
        throw ConfigError("landscape requires the Ohmic model at T = 0");
    }
    if (cfg.omega0 != 0.0) throw ConfigError("landscape is computed at omega0 = 0");
    const auto dir = prepare_output_dir(cfg);
    const auto phases = cfg.phase_grid();
    const auto l = negativity_landscape(cfg.model.omega_c, phases, cfg.grid.omega_lo, cfg.grid.omega_hi,
                                        cfg.grid.time_grid());
    Table t;
    t.columns.push_back("omega");
    for (double p : phases) t.columns.push_back(format_number(p));
    for (std::size_t k = 0; k < l.omega.size(); ++k) {
        std::vector<Cell> row{l.omega[k]};
        for (std::size_t c = 0; c < phases.size(); ++c) row.emplace_back(l.cells[c][k]);
        t.rows.push_back(std::move(row));
    }
    return {write_table(dir, "landscape", t, cfg.output_format)};
}

std::vector<fs::path> cmd_witness(const RunConfig& cfg) {
    const auto dir = prepare_output_dir(cfg);
    const auto series = build_series(cfg, cfg.grid.time_grid());
    BochnerSearchOptions opt;
    opt.restarts = cfg.witness.restarts;
    opt.min_set = cfg.witness.min_set;
    opt.max_set = cfg.witness.max_set;
    opt.window = cfg.witness.window;
    opt.seed = cfg.seed;
    const auto r = bochner_search(series, opt);

    ordered_json j;
    j["times"] = r.best.times;
    j["min_eigenvalue"] = r.best.min_eigenvalue;
    j["matrix_dim"] = r.best.matrix_dim;
    j["restarts"] = r.restarts_used;
    j["seed"] = cfg.seed;
    j["model_type"] = cfg.model.type;
    j["phase"] = cfg.phase ? ordered_json(*cfg.phase) : ordered_json(nullptr);
    j["positive_definite_violated"] = r.best.min_eigenvalue < -1e-10;
    return {write_json_file(dir, "bochner.json", j)};
}

std::vector<fs::path> cmd_simulate(const RunConfig& cfg) {
    const auto dir = prepare_output_dir(cfg);
    const SimulateConfig& sim = cfg.simulate;
    const auto times = sim.time_points();
    const std::string kind = cfg.ensemble.kind;
    const bool explicit_paths = !sim.paths.empty();
    auto wants = [&](const std::string& p) {
        return std::find(sim.paths.begin(), sim.paths.end(), p) != sim.paths.end();
    };

    std::vector<std::string> paths = sim.paths;
    if (!explicit_paths) {
        if (kind == "cnot") paths = {"he", "dilation", "cnot"};
        else if (kind == "discrete") paths = {"he", "dilation"};
        else paths = {"he", "dilation", "mc", "master"};
        if (kind == "spectral" && !sim.uniform()) paths.pop_back();  // master needs uniform times
    }
    for (const auto& p : paths) {
        if ((p == "mc" || p == "master") && kind != "spectral") {
            throw ConfigError("path '" + p + "' is available for spectral ensembles only");
        }
        if (p == "cnot" && kind != "cnot") throw ConfigError("path 'cnot' needs the cnot ensemble");
        if (p == "master" && !sim.uniform()) throw ConfigError("path 'master' needs uniform times (t_end, steps)");
    }

    std::map<std::string, std::vector<DensityMatrix>> results;
    ordered_json report;
    bool nonclassical = false;
    std::optional<bool> classical_ok;
    double max_offdiag = 0.0;

    auto run_dilation = [&](const HamiltonianEnsemble& ens, const DensityMatrix& rho0) {
        const auto d = dilate(ens);
        bool ok = true;
        double vs_he = 0.0;
        auto& out = results["dilation"];
        for (double t : times) {
            auto r = joint_evolve_reduce(d, rho0, t);
            ok = ok && r.classical_ok;
            max_offdiag = std::max(max_offdiag, r.max_offdiag_block);
            vs_he = std::max(vs_he, trace_distance(r.reduced, he_average(ens, rho0, t)));
            out.push_back(std::move(r.reduced));
        }
        // against the average over the same (possibly discretized) member list
        report["dilation_vs_member_average"] = vs_he;
        classical_ok = ok;
        report["dilation_env_dim"] = d.env_dim;
        report["centering_residual"] = d.centering_residual;
    };

    std::size_t dim = 2;
    if (kind == "cnot" || kind == "discrete") {
        std::optional<HamiltonianEnsemble> ens;
        if (kind == "cnot") {
            ens = cnot_ensemble(cfg.ensemble.a, cfg.ensemble.j);
        } else {
            if (cfg.ensemble.members.empty()) throw ConfigError("discrete ensemble needs ensemble.members");
            std::vector<EnsembleMember> members;
            for (const auto& m : cfg.ensemble.members) members.push_back({m.probability, HermitianOperator(m.hamiltonian)});
            ens = HamiltonianEnsemble(std::move(members));
        }
        dim = ens->dim();
        const DensityMatrix rho0 = initial_state(sim, dim);
        for (const auto& p : paths) {
            auto& out = results[p];
            if (p == "he") {
                for (double t : times) out.push_back(he_average(*ens, rho0, t));
            } else if (p == "cnot") {
                for (double t : times) out.push_back(cnot_example(cfg.ensemble.a, cfg.ensemble.j, t, rho0));
            } else if (p == "dilation") {
                run_dilation(*ens, rho0);
            }
        }
    } else {
        const DensityMatrix rho0 = initial_state(sim, 2);
        Weights w;
        std::function<Complex(double)> phi_model;
        double scale = 1.0;
        if (cfg.ensemble.source == "file") {
            if (cfg.ensemble.weights_file.empty()) throw ConfigError("ensemble.weights_file is required for source 'file'");
            w = read_weights(cfg.ensemble.weights_file);
            scale = std::max(std::abs(w.grid.start), std::abs(w.grid.back())) / 20.0;
        } else {
            const auto series = build_series(cfg, cfg.grid.time_grid());
            const auto d = inverse_ft(series);
            w = {d.omega, d.values};
            scale = cfg.model.kind == "ohmic" ? cfg.model.omega_c : cfg.model.build().upper_cutoff() / 40.0;
            const bool closed = use_closed_forms(cfg);
            const bool extended = cfg.model.extended();
            const double wc = cfg.model.omega_c;
            const double omega0 = cfg.omega0;
            const double phase = extended ? require_phase(cfg) : 0.0;
            auto model = std::make_shared<SpectralDensityModel>(closed ? SpectralDensityModel::ohmic(wc) : cfg.model.build());
            phi_model = [=](double t) -> Complex {
                const Complex shift = std::polar(1.0, omega0 * t);
                if (closed) return shift * (extended ? ohmic_phi_extended(wc, phase, t) : ohmic_phi(wc, t));
                if (!extended) return shift * std::exp(-phi_exponent(*model, t));
                return shift * std::exp(Complex(-phi_exponent(*model, t), -vartheta(*model, phase, t)));
            };
        }

        std::optional<SpectralEnsemble> ens;
        try {
            ens.emplace(w.grid, w.values);
        } catch (const SamplingError&) {
            // negative weights: a nonclassicality flag when only deterministic paths are asked for
            if (!explicit_paths || wants("mc")) throw;
            if (wants("dilation")) throw SamplingError("not a probability distribution — cannot build a dilation");
            nonclassical = true;
        }
        report["negative_weights"] = nonclassical;

        for (const auto& p : paths) {
            auto& out = results[p];
            if (p == "he") {
                for (double t : times) {
                    out.push_back(ens ? spectral_average(*ens, rho0, t)
                                      : scale_coherence(rho0, quasi_factor(w.grid, w.values, t)));
                }
            } else if (p == "dilation") {
                run_dilation(discretize(*ens, cfg.ensemble.dilation_members), rho0);
            } else if (p == "mc") {
                const auto est = mc_average(*ens, rho0, times, sim.mc_samples, cfg.seed);
                double worst = 0.0;
                for (const auto& e : est) {
                    out.push_back(e.state);
                    worst = std::max(worst, e.stderr_coherence);
                }
                report["mc_samples"] = sim.mc_samples;
                report["mc_max_stderr"] = worst;
            } else if (p == "master") {
                std::function<Complex(double)> phi = phi_model;
                if (!phi) {
                    const Weights copy = w;
                    phi = [copy](double t) { return quasi_factor(copy.grid, copy.values, t); };
                }
                for (auto& s : master_path(master_series(sim, phi, scale), rho0, times)) out.push_back(std::move(s));
            }
        }
    }

    // state table
    Table t;
    t.columns = {"t", "path"};
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            t.columns.push_back("re_" + std::to_string(i) + std::to_string(j));
            t.columns.push_back("im_" + std::to_string(i) + std::to_string(j));
        }
    }
    for (std::size_t k = 0; k < times.size(); ++k) {
        for (const auto& p : paths) {
            const Matrix& m = results.at(p)[k].matrix();
            std::vector<Cell> row{times[k], p};
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                for (Eigen::Index j = 0; j < m.cols(); ++j) {
                    row.emplace_back(m(i, j).real());
                    row.emplace_back(m(i, j).imag());
                }
            }
            t.rows.push_back(std::move(row));
        }
    }

    ordered_json distances = ordered_json::object();
    for (std::size_t a = 0; a < paths.size(); ++a) {
        for (std::size_t b = a + 1; b < paths.size(); ++b) {
            double worst = 0.0;
            for (std::size_t k = 0; k < times.size(); ++k) {
                worst = std::max(worst, trace_distance(results.at(paths[a])[k], results.at(paths[b])[k]));
            }
            distances[paths[a] + "|" + paths[b]] = worst;
        }
    }
    ordered_json j;
    j["ensemble"] = kind;
    j["paths"] = paths;
    j["max_trace_distance"] = distances;
    j["classical_ok"] = classical_ok ? ordered_json(*classical_ok) : ordered_json(nullptr);
    j["max_offdiag_block"] = classical_ok ? ordered_json(max_offdiag) : ordered_json(nullptr);
    j["nonclassical"] = nonclassical;
    for (auto& [key, value] : report.items()) j[key] = value;

    return {write_table(dir, "state", t, cfg.output_format), write_json_file(dir, "consistency.json", j)};
}

// ---------------------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hamiltonian-ensemble dephasing toolkit", "hens"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "hens 1.0.0");

    std::string config_file;
    app.add_option("--config", config_file, "JSON run configuration");
    std::map<std::string, std::string> values;
    for (const auto& path : override_paths()) {
        app.add_option(flag_name(path), values[path], "sets " + path);
    }

    struct Sub {
        const char* name;
        const char* help;
        std::vector<fs::path> (*fn)(const RunConfig&);
    };
    const std::vector<Sub> subs{
        {"dephase", "write the dephasing factor phi(t) to phi.csv", cmd_dephase},
        {"invert", "recover the (quasi-)distribution into wp.csv and diagnostics.json", cmd_invert},
        {"landscape", "negative part of the extended distribution over (omega, phase)", cmd_landscape},
        {"witness", "randomized Bochner positive-definiteness search into bochner.json", cmd_witness},
        {"simulate", "ensemble, dilation, Monte Carlo, and master-equation dynamics", cmd_simulate},
    };
    for (const auto& s : subs) app.add_subcommand(s.name, s.help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "hens: error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        std::vector<Override> overrides;
        for (const auto& path : override_paths()) {
            if (app.count(flag_name(path)) > 0) overrides.push_back({path, values[path]});
        }
        const RunConfig cfg = load_config(config_file.empty() ? std::nullopt : std::optional<fs::path>(config_file),
                                          overrides);
        for (const auto& s : subs) {
            if (app.got_subcommand(s.name)) {
                for (const auto& p : s.fn(cfg)) out << p.string() << "\n";
            }
        }
        return kExitOk;
    } catch (const SamplingError& e) {
        err << "hens: error: " << e.what() << "\n";
        return kExitSampling;
    } catch (const PreconditionError& e) {
        err << "hens: error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const ConfigError& e) {
        err << "hens: error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "hens: error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace hens::cli
