#pragma once

#include <iosfwd>
#include <vector>

#include "hens/cli/config.hpp"
#include "hens/dephasing.hpp"

namespace hens::cli {

// Exit codes
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitPrecondition = 3;
inline constexpr int kExitSampling = 4;

// Parses argv, runs one subcommand, and maps errors to exit codes. Diagnostics
// go to err as a single line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// The dephasing factor of the configured model on grid. method "auto" uses the
// closed forms for the Ohmic bath at T = 0 and quadrature otherwise.
DephasingSeries build_series(const RunConfig& cfg, const TimeGrid& grid);

// Reads a phi.csv file (columns t, re, im[, abs]) back into a series.
DephasingSeries read_series(const std::filesystem::path& path);

// Subcommands; each writes its files into cfg.output_dir and returns the paths written.
std::vector<std::filesystem::path> cmd_dephase(const RunConfig& cfg);
std::vector<std::filesystem::path> cmd_invert(const RunConfig& cfg);
std::vector<std::filesystem::path> cmd_landscape(const RunConfig& cfg);
std::vector<std::filesystem::path> cmd_witness(const RunConfig& cfg);
std::vector<std::filesystem::path> cmd_simulate(const RunConfig& cfg);

}  // namespace hens::cli
