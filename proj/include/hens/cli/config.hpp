#pragma once

// Run configuration: a JSON document, optionally overridden field by field
// from the command line (flag --a-b-c sets field a.b_c).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hens/core.hpp"
#include "hens/dephasing.hpp"
#include "hens/grid.hpp"

namespace hens::cli {

struct ModelConfig {
    std::string kind = "ohmic";  // ohmic | table
    double omega_c = 1.0;
    std::filesystem::path table;
    double temperature = 0.0;
    std::string type = "conventional";  // conventional | extended

    bool extended() const { return type == "extended"; }
    SpectralDensityModel build() const;
};

struct GridConfig {
    double t_max = 200.0;
    std::size_t n = std::size_t{1} << 16;
    double omega_lo = -10.0;
    double omega_hi = 10.0;

    TimeGrid time_grid() const { return {t_max, n}; }
};

struct WitnessConfig {
    std::size_t restarts = 10000;
    std::size_t min_set = 2;
    std::size_t max_set = 8;
    double window = 0.0;  // 0: t_max / 4
};

struct DiscreteMember {
    double probability;
    Matrix hamiltonian;
};

struct EnsembleConfig {
    std::string kind = "spectral";  // discrete | spectral | cnot
    std::vector<DiscreteMember> members;
    std::string source = "model";   // spectral: model | file
    std::filesystem::path weights_file;
    std::size_t dilation_members = 32;
    double a = 0.5;                 // cnot
    double j = 1.0;
};

struct SimulateConfig {
    std::vector<double> times;  // explicit list; otherwise t_end / steps
    double t_end = 10.0;
    std::size_t steps = 100;
    std::vector<std::string> paths;  // empty: every path applicable to the ensemble
    std::string rho0 = "plus";       // plus | up | down | mixed | basis:k
    std::optional<Matrix> rho0_matrix;
    std::size_t mc_samples = 100000;

    bool uniform() const { return times.empty(); }
    std::vector<double> time_points() const;
};

struct RunConfig {
    ModelConfig model;
    double omega0 = 0.0;
    std::optional<double> phase;
    std::vector<double> phases;  // landscape columns
    std::size_t phase_count = 64;
    GridConfig grid;
    std::filesystem::path output_dir = ".";
    std::string output_format = "csv";  // csv | json
    std::uint64_t seed = 1;
    std::string method = "auto";  // auto | analytic | quadrature
    std::optional<std::filesystem::path> input;
    WitnessConfig witness;
    EnsembleConfig ensemble;
    SimulateConfig simulate;

    // Landscape phases: the explicit list, else phase_count values 2 pi k / count.
    std::vector<double> phase_grid() const;
};

// One command-line override: a dotted field path and its raw text. The text is
// read as JSON when it parses, otherwise as a string; comma lists become arrays
// for list-valued fields.
struct Override {
    std::string path;
    std::string text;
};

// Parses the optional config file, applies the overrides, fills defaults that
// depend on other fields (grid.t_max = 200 / omega_c, window = +-10 omega_c),
// and validates. Throws ConfigError.
RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::vector<Override>& overrides);

RunConfig parse_config_text(const std::string& json_text, const std::vector<Override>& overrides = {});

// Field paths that can be overridden, in flag order. Flag names are derived by
// replacing '.' and '_' with '-'.
const std::vector<std::string>& override_paths();
std::string flag_name(const std::string& path);

}  // namespace hens::cli
