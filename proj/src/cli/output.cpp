#include "hens/cli/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>
#include <unistd.h>

#include "hens/error.hpp"

namespace hens::cli {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return std::signbit(x) ? "-0" : "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

std::string cell_text(const Cell& c, bool json) {
    if (const double* x = std::get_if<double>(&c)) {
        if (json && !std::isfinite(*x)) return "null";
        return format_number(*x);
    }
    const auto& s = std::get<std::string>(c);
    if (!json) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    return out + "\"";
}

}  // namespace

std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += cell_text(row[i], false);
        }
        out += '\n';
    }
    return out;
}

std::string to_json(const Table& t) {
    std::string out = "{\"columns\":[";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + cell_text(t.columns[i], true);
    out += "],\"rows\":[";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out += r ? ",\n[" : "\n[";
        for (std::size_t i = 0; i < t.rows[r].size(); ++i) {
            if (i) out += ',';
            out += cell_text(t.rows[r][i], true);
        }
        out += ']';
    }
    out += "\n]}\n";
    return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.parent_path() / ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write output file: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw ConfigError("cannot write output file: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw ConfigError("cannot write output file: " + path.string());
    }
}

std::filesystem::path write_table(const std::filesystem::path& dir, const std::string& stem, const Table& t,
                                  const std::string& format) {
    const bool json = format == "json";
    const auto path = dir / (stem + (json ? ".json" : ".csv"));
    write_atomic(path, json ? to_json(t) : to_csv(t));
    return path;
}

}  // namespace hens::cli
