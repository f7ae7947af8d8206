#include "hens/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hens/error.hpp"
#include "json.hpp"

namespace hens::cli {

using nlohmann::json;

namespace {

const std::vector<std::string> kListFields{"phases", "simulate.times", "simulate.paths"};

json::json_pointer pointer_of(const std::string& path) {
    std::string p = "/";
    for (char c : path) p += c == '.' ? '/' : c;
    return json::json_pointer(p);
}

json parse_override(const std::string& path, const std::string& text) {
    const bool list = std::find(kListFields.begin(), kListFields.end(), path) != kListFields.end();
    if (list && (text.empty() || text.front() != '[')) {
        json arr = json::array();
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            try {
                arr.push_back(json::parse(item));
            } catch (const json::parse_error&) {
                arr.push_back(item);
            }
        }
        return arr;
    }
    try {
        return json::parse(text);
    } catch (const json::parse_error&) {
        return text;
    }
}

template <class T>
T get(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: field " + where + key + " has the wrong type");
    }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
    if (!j.is_object()) throw ConfigError("config: " + (where.empty() ? std::string("document") : where) + " must be an object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || item.key() == k;
        if (!ok) throw ConfigError("config: unknown field " + where + item.key());
    }
}

Matrix parse_matrix(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ConfigError("config: " + what + " must be a square array");
    const auto d = static_cast<Eigen::Index>(j.size());
    Matrix m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) {
            throw ConfigError("config: " + what + " must be a square array");
        }
        for (Eigen::Index c = 0; c < d; ++c) {
            const json& x = row[static_cast<std::size_t>(c)];
            if (x.is_number()) {
                m(r, c) = x.get<double>();
            } else if (x.is_array() && x.size() == 2 && x[0].is_number() && x[1].is_number()) {
                m(r, c) = Complex(x[0].get<double>(), x[1].get<double>());
            } else {
                throw ConfigError("config: " + what + " entries must be numbers or [re, im] pairs");
            }
        }
    }
    return m;
}

std::size_t get_size(const json& j, const char* key, std::size_t fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::size_t>(v.get<long long>());
    if (v.is_number_float()) {
        const double x = v.get<double>();
        if (x >= 0.0 && x == std::floor(x) && x < 1e18) return static_cast<std::size_t>(x);
    }
    throw ConfigError("config: field " + where + key + " must be a nonnegative integer");
}

RunConfig from_json(const json& doc) {
    reject_unknown(doc, {"model", "omega0", "phase", "phases", "phase_count", "grid", "output", "seed",
                         "method", "input", "witness", "ensemble", "simulate"},
                   "");
    RunConfig c;

    const json model = doc.value("model", json::object());
    reject_unknown(model, {"kind", "omega_c", "table", "temperature", "type"}, "model.");
    c.model.kind = get<std::string>(model, "kind", c.model.kind, "model.");
    c.model.omega_c = get<double>(model, "omega_c", c.model.omega_c, "model.");
    c.model.table = get<std::string>(model, "table", "", "model.");
    c.model.temperature = get<double>(model, "temperature", 0.0, "model.");
    c.model.type = get<std::string>(model, "type", c.model.type, "model.");

    c.omega0 = get<double>(doc, "omega0", 0.0, "");
    if (doc.contains("phase") && !doc.at("phase").is_null()) c.phase = get<double>(doc, "phase", 0.0, "");
    c.phases = get<std::vector<double>>(doc, "phases", {}, "");
    c.phase_count = get_size(doc, "phase_count", c.phase_count, "");

    const json grid = doc.value("grid", json::object());
    reject_unknown(grid, {"t_max", "n", "omega_lo", "omega_hi"}, "grid.");
    const double wc = c.model.kind == "ohmic" ? c.model.omega_c : 1.0;
    c.grid.t_max = get<double>(grid, "t_max", 200.0 / wc, "grid.");
    c.grid.n = get_size(grid, "n", c.grid.n, "grid.");
    c.grid.omega_lo = get<double>(grid, "omega_lo", -10.0 * wc, "grid.");
    c.grid.omega_hi = get<double>(grid, "omega_hi", 10.0 * wc, "grid.");

    const json output = doc.value("output", json::object());
    reject_unknown(output, {"dir", "format"}, "output.");
    c.output_dir = get<std::string>(output, "dir", ".", "output.");
    c.output_format = get<std::string>(output, "format", "csv", "output.");

    if (doc.contains("seed")) {
        const json& s = doc.at("seed");
        if (!s.is_number_integer()) throw ConfigError("config: field seed must be an integer");
        c.seed = s.is_number_unsigned() ? s.get<std::uint64_t>() : static_cast<std::uint64_t>(s.get<std::int64_t>());
    }
    c.method = get<std::string>(doc, "method", c.method, "");
    if (doc.contains("input")) c.input = get<std::string>(doc, "input", "", "");

    const json witness = doc.value("witness", json::object());
    reject_unknown(witness, {"restarts", "min_set", "max_set", "window"}, "witness.");
    c.witness.restarts = get_size(witness, "restarts", c.witness.restarts, "witness.");
    c.witness.min_set = get_size(witness, "min_set", c.witness.min_set, "witness.");
    c.witness.max_set = get_size(witness, "max_set", c.witness.max_set, "witness.");
    c.witness.window = get<double>(witness, "window", 0.0, "witness.");

    const json ens = doc.value("ensemble", json::object());
    reject_unknown(ens, {"kind", "members", "source", "weights_file", "dilation_members", "a", "j"}, "ensemble.");
    c.ensemble.kind = get<std::string>(ens, "kind", c.ensemble.kind, "ensemble.");
    c.ensemble.source = get<std::string>(ens, "source", c.ensemble.source, "ensemble.");
    c.ensemble.weights_file = get<std::string>(ens, "weights_file", "", "ensemble.");
    c.ensemble.dilation_members = get_size(ens, "dilation_members", c.ensemble.dilation_members, "ensemble.");
    c.ensemble.a = get<double>(ens, "a", c.ensemble.a, "ensemble.");
    c.ensemble.j = get<double>(ens, "j", c.ensemble.j, "ensemble.");
    if (ens.contains("members")) {
        const json& members = ens.at("members");
        if (!members.is_array()) throw ConfigError("config: ensemble.members must be an array");
        for (const auto& m : members) {
            if (!m.is_object()) throw ConfigError("config: ensemble member must be an object");
            reject_unknown(m, {"p", "h"}, "ensemble.members[].");
            if (!m.contains("p") || !m.contains("h")) throw ConfigError("config: ensemble member needs p and h");
            c.ensemble.members.push_back({get<double>(m, "p", 0.0, "ensemble.members[]."),
                                          parse_matrix(m.at("h"), "ensemble member h")});
        }
    }

    const json sim = doc.value("simulate", json::object());
    reject_unknown(sim, {"times", "t_end", "steps", "paths", "rho0", "mc_samples"}, "simulate.");
    c.simulate.times = get<std::vector<double>>(sim, "times", {}, "simulate.");
    c.simulate.t_end = get<double>(sim, "t_end", c.simulate.t_end, "simulate.");
    c.simulate.steps = get_size(sim, "steps", c.simulate.steps, "simulate.");
    c.simulate.paths = get<std::vector<std::string>>(sim, "paths", {}, "simulate.");
    if (sim.contains("rho0")) {
        if (sim.at("rho0").is_string()) {
            c.simulate.rho0 = sim.at("rho0").get<std::string>();
        } else {
            c.simulate.rho0_matrix = parse_matrix(sim.at("rho0"), "simulate.rho0");
            c.simulate.rho0 = "matrix";
        }
    }
    c.simulate.mc_samples = get_size(sim, "mc_samples", c.simulate.mc_samples, "simulate.");
    return c;
}

void one_of(const std::string& value, std::initializer_list<const char*> allowed, const char* field) {
    for (const char* a : allowed) {
        if (value == a) return;
    }
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : " | ") + a;
    throw ConfigError(std::string("config: ") + field + " must be one of " + list + " (got '" + value + "')");
}

void validate(const RunConfig& c) {
    one_of(c.model.kind, {"ohmic", "table"}, "model.kind");
    one_of(c.model.type, {"conventional", "extended"}, "model.type");
    one_of(c.output_format, {"csv", "json"}, "output.format");
    one_of(c.method, {"auto", "analytic", "quadrature"}, "method");
    one_of(c.ensemble.kind, {"discrete", "spectral", "cnot"}, "ensemble.kind");
    one_of(c.ensemble.source, {"model", "file"}, "ensemble.source");
    if (!(c.model.omega_c > 0.0) || !std::isfinite(c.model.omega_c)) throw ConfigError("config: model.omega_c must be positive");
    if (!(c.model.temperature >= 0.0)) throw ConfigError("config: model.temperature must be nonnegative");
    if (c.model.kind == "table" && c.model.table.empty()) throw ConfigError("config: model.table is required for kind 'table'");
    c.grid.time_grid().validate();
    if (!(c.grid.omega_hi > c.grid.omega_lo)) throw ConfigError("config: grid.omega_hi must exceed grid.omega_lo");
    if (c.phases.empty() && c.phase_count < 1) throw ConfigError("config: phase_count must be >= 1");
    if (c.witness.min_set < 1 || c.witness.max_set < c.witness.min_set) {
        throw ConfigError("config: witness set sizes must satisfy 1 <= min_set <= max_set");
    }
    if (c.simulate.uniform() && (c.simulate.steps < 1 || !(c.simulate.t_end > 0.0))) {
        throw ConfigError("config: simulate needs t_end > 0 and steps >= 1");
    }
    for (const auto& p : c.simulate.paths) one_of(p, {"he", "dilation", "mc", "master", "cnot"}, "simulate.paths[]");
    if (c.ensemble.dilation_members < 1) throw ConfigError("config: ensemble.dilation_members must be >= 1");
}

}  // namespace

SpectralDensityModel ModelConfig::build() const {
    if (kind == "table") return SpectralDensityModel::load_table(table, temperature);
    return SpectralDensityModel::ohmic(omega_c, temperature);
}

std::vector<double> SimulateConfig::time_points() const {
    if (!times.empty()) return times;
    std::vector<double> out(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) out[k] = t_end * static_cast<double>(k) / static_cast<double>(steps);
    return out;
}

std::vector<double> RunConfig::phase_grid() const {
    if (!phases.empty()) return phases;
    std::vector<double> out(phase_count);
    for (std::size_t k = 0; k < phase_count; ++k) {
        out[k] = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(phase_count);
    }
    return out;
}

const std::vector<std::string>& override_paths() {
    static const std::vector<std::string> paths{
        "model.kind", "model.omega_c", "model.table", "model.temperature", "model.type",
        "omega0", "phase", "phases", "phase_count",
        "grid.t_max", "grid.n", "grid.omega_lo", "grid.omega_hi",
        "output.dir", "output.format", "seed", "method", "input",
        "witness.restarts", "witness.min_set", "witness.max_set", "witness.window",
        "ensemble.kind", "ensemble.source", "ensemble.weights_file", "ensemble.dilation_members",
        "ensemble.a", "ensemble.j", "ensemble.members",
        "simulate.times", "simulate.t_end", "simulate.steps", "simulate.paths", "simulate.rho0",
        "simulate.mc_samples"};
    return paths;
}

std::string flag_name(const std::string& path) {
    std::string f = "--";
    for (char c : path) f += (c == '.' || c == '_') ? '-' : c;
    return f;
}

RunConfig parse_config_text(const std::string& json_text, const std::vector<Override>& overrides) {
    json doc;
    try {
        doc = json_text.empty() ? json::object() : json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: document must be a JSON object");
    for (const auto& o : overrides) {
        // strings such as "table" must not be read as JSON for string-valued fields
        json value = parse_override(o.path, o.text);
        const bool string_field = o.path == "model.kind" || o.path == "model.type" || o.path == "model.table" ||
                                  o.path == "output.dir" || o.path == "output.format" || o.path == "method" ||
                                  o.path == "input" || o.path == "ensemble.kind" || o.path == "ensemble.source" ||
                                  o.path == "ensemble.weights_file" || o.path == "simulate.rho0";
        if (string_field && !value.is_string() && !(o.path == "simulate.rho0" && value.is_array())) value = o.text;
        try {
            doc[pointer_of(o.path)] = value;
        } catch (const json::exception& e) {
            throw ConfigError("config: cannot set " + o.path + ": " + e.what());
        }
    }
    RunConfig c = from_json(doc);
    validate(c);
    return c;
}

RunConfig load_config(const std::optional<std::filesystem::path>& file, const std::vector<Override>& overrides) {
    std::string text;
    if (file) {
        std::ifstream in(*file);
        if (!in) throw ConfigError("cannot open config file: " + file->string());
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    return parse_config_text(text, overrides);
}

}  // namespace hens::cli
