#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace hens::cli {

// Shortest text that round-trips to the same double, capped at 17 significant
// digits. Non-finite values become "nan", "inf", "-inf".
std::string format_number(double x);

using Cell = std::variant<double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

// CSV: header row, comma separated, '\n' line endings.
std::string to_csv(const Table& t);

// {"columns": [...], "rows": [[...], ...]} with the same number formatting
// as the CSV (non-finite numbers become null).
std::string to_json(const Table& t);

// Writes to a temporary file in the same directory, then renames over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// Writes <dir>/<stem>.csv or <dir>/<stem>.json; returns the path written.
std::filesystem::path write_table(const std::filesystem::path& dir, const std::string& stem,
                                  const Table& t, const std::string& format);

}  // namespace hens::cli
