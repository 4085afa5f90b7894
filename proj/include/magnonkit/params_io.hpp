#pragma once

// File formats: the JSON parameter file (strict schema, units mandatory,
// unknown keys rejected with the offending key named), CSV tables with
// mandatory headers and '#' comments, and the JSON fit/derivation report.

#include "hybrid_model.hpp"
#include "units.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace magnonkit {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Parameter file.

struct ExperimentConstants {
    double readout_power_w = 0.0;      // W
    double readout_freq_mhz = 0.0;     // dressed probe frequency w_p^g
    double mw_freq_mhz = 0.0;          // Kittel drive frequency
    double mw_detuning_mhz = 0.0;      // Delta_mw
    double t1_us = 0.0;                // transmon T1
    double t2_star_us = 0.0;           // transmon T2*
    double g_qm_mhz = 0.0;             // measured qubit-magnon coupling
};

struct ParameterFile {
    SystemParams system;
    ExperimentConstants constants;
    std::vector<int> truncation;       // cavity..., transmon, magnon dims
    std::string probe_mode = "te103";
    std::string coupler_mode = "te102";

    ModeLayout layout() const
    {
        if (truncation.empty()) return default_layout(system.n_cavity_modes());
        std::vector<std::string> labels;
        for (std::size_t p = 0; p < system.n_cavity_modes(); ++p)
            labels.push_back(cavity_label(p));
        labels.emplace_back(kTransmonLabel);
        labels.emplace_back(kKittelLabel);
        if (truncation.size() != labels.size())
            throw std::invalid_argument("ParameterFile: truncation list must have one entry per mode");
        return ModeLayout(truncation, labels);
    }
};

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                                const std::string& where)
{
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw std::invalid_argument("parameter file: unknown key '" + where + key + "'");
    }
}

inline const json& require_key(const json& obj, const std::string& key,
                               const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end())
        throw std::invalid_argument("parameter file: missing required key '" + where + key + "'");
    return *it;
}

inline std::string require_string(const json& obj, const std::string& key,
                                  const std::string& where)
{
    const json& v = require_key(obj, key, where);
    if (!v.is_string())
        throw std::invalid_argument("parameter file: key '" + where + key +
                                    "' must be a string carrying a unit");
    return v.get<std::string>();
}

inline double freq_mhz(const json& obj, const std::string& key, const std::string& where)
{
    try {
        return parse_freq_mhz(require_string(obj, key, where));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("parameter file: key '" + where + key + "': " + e.what());
    }
}

}  // namespace detail

inline ParameterFile parse_parameter_file(const json& doc)
{
    using detail::freq_mhz;
    using detail::require_key;
    using detail::require_string;

    if (!doc.is_object())
        throw std::invalid_argument("parameter file: top level must be an object");
    detail::reject_unknown_keys(
        doc, {"cavity_modes", "qubit", "magnon", "drive", "truncation", "probe_mode",
              "coupler_mode"},
        "");

    ParameterFile pf;

    const json& modes = require_key(doc, "cavity_modes", "");
    if (!modes.is_array() || modes.empty())
        throw std::invalid_argument("parameter file: 'cavity_modes' must be a non-empty array");
    bool linewidths_ended = false;
    for (std::size_t p = 0; p < modes.size(); ++p) {
        const json& m = modes[p];
        const std::string where = "cavity_modes[" + std::to_string(p) + "].";
        detail::reject_unknown_keys(
            m, {"label", "frequency", "g_qubit", "g_magnon", "kappa", "kappa_cpl", "kappa_int"},
            where);
        const std::string label = require_string(m, "label", where);
        if (label != cavity_label(p))
            throw std::invalid_argument("parameter file: key '" + where +
                                        "label': expected '" + cavity_label(p) +
                                        "' (modes must be listed in order)");
        pf.system.cavity_bare_freqs.push_back(freq_mhz(m, "frequency", where));
        pf.system.qubit_cavity_couplings.push_back(freq_mhz(m, "g_qubit", where));
        pf.system.magnon_cavity_couplings.push_back(freq_mhz(m, "g_magnon", where));

        const bool has_cpl = m.contains("kappa_cpl"), has_int = m.contains("kappa_int");
        if (has_cpl != has_int)
            throw std::invalid_argument("parameter file: '" + where +
                                        "': kappa_cpl and kappa_int must be given together");
        if (!has_cpl) {
            if (m.contains("kappa"))
                throw std::invalid_argument("parameter file: '" + where +
                                            "kappa': total without kappa_cpl/kappa_int");
            linewidths_ended = true;
            continue;
        }
        if (linewidths_ended)
            throw std::invalid_argument(
                "parameter file: '" + where +
                "': linewidths must cover a contiguous leading set of modes");
        const double cpl = freq_mhz(m, "kappa_cpl", where);
        const double kint = freq_mhz(m, "kappa_int", where);
        // The total is derived; a quoted total is only consistency-checked
        // loosely, since published values are rounded.
        if (m.contains("kappa") &&
            std::abs(freq_mhz(m, "kappa", where) - (cpl + kint)) > 0.02)
            throw std::invalid_argument("parameter file: '" + where +
                                        "kappa' inconsistent with kappa_cpl + kappa_int");
        pf.system.cavity_linewidths_cpl.push_back(cpl);
        pf.system.cavity_linewidths_int.push_back(kint);
        pf.system.cavity_linewidths.push_back(cpl + kint);
    }

    const json& q = require_key(doc, "qubit", "");
    detail::reject_unknown_keys(
        q, {"frequency", "anharmonicity", "gamma0", "t1", "t2_star"}, "qubit.");
    pf.system.qubit_bare_freq = freq_mhz(q, "frequency", "qubit.");
    pf.system.bare_anharmonicity = freq_mhz(q, "anharmonicity", "qubit.");
    if (q.contains("gamma0")) pf.system.qubit_linewidth0 = freq_mhz(q, "gamma0", "qubit.");
    if (q.contains("t1")) pf.constants.t1_us = parse_time_us(require_string(q, "t1", "qubit."));
    if (q.contains("t2_star"))
        pf.constants.t2_star_us = parse_time_us(require_string(q, "t2_star", "qubit."));

    const json& mg = require_key(doc, "magnon", "");
    detail::reject_unknown_keys(mg, {"frequency", "gamma", "g_qm"}, "magnon.");
    pf.system.magnon_bare_freq = freq_mhz(mg, "frequency", "magnon.");
    if (mg.contains("gamma")) pf.system.magnon_linewidth = freq_mhz(mg, "gamma", "magnon.");
    if (mg.contains("g_qm")) pf.constants.g_qm_mhz = freq_mhz(mg, "g_qm", "magnon.");

    if (doc.contains("drive")) {
        const json& d = doc["drive"];
        detail::reject_unknown_keys(
            d, {"readout_power", "readout_frequency", "mw_frequency", "mw_detuning"},
            "drive.");
        if (d.contains("readout_power"))
            pf.constants.readout_power_w =
                parse_power(require_string(d, "readout_power", "drive."));
        if (d.contains("readout_frequency"))
            pf.constants.readout_freq_mhz = freq_mhz(d, "readout_frequency", "drive.");
        if (d.contains("mw_frequency"))
            pf.constants.mw_freq_mhz = freq_mhz(d, "mw_frequency", "drive.");
        if (d.contains("mw_detuning"))
            pf.constants.mw_detuning_mhz = freq_mhz(d, "mw_detuning", "drive.");
    }

    if (doc.contains("truncation")) {
        const json& t = doc["truncation"];
        if (!t.is_array())
            throw std::invalid_argument("parameter file: 'truncation' must be an array of ints");
        for (const auto& v : t) {
            if (!v.is_number_integer())
                throw std::invalid_argument("parameter file: 'truncation' entries must be ints");
            pf.truncation.push_back(v.get<int>());
        }
    }
    if (doc.contains("probe_mode")) pf.probe_mode = require_string(doc, "probe_mode", "");
    if (doc.contains("coupler_mode")) pf.coupler_mode = require_string(doc, "coupler_mode", "");

    pf.system.validate();
    pf.layout();  // validates truncation length
    return pf;
}

inline ParameterFile load_parameter_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open parameter file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("parameter file '" + path + "': " + e.what());
    }
    return parse_parameter_file(doc);
}

// ---------------------------------------------------------------------------
// CSV tables. Header row mandatory; '#' starts a comment line; all data
// cells must parse as doubles.

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t n_rows() const { return rows.size(); }

    std::size_t col(const std::string& name) const
    {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        std::string have;
        for (const auto& c : columns) have += (have.empty() ? "" : ", ") + c;
        throw std::invalid_argument("CSV: missing required column '" + name +
                                    "' (found: " + have + ")");
    }

    std::vector<double> column(const std::string& name) const
    {
        const std::size_t i = col(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[i]);
        return out;
    }
};

namespace detail {

inline std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace detail

inline CsvTable read_csv(std::istream& in)
{
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = detail::trim(line);
        if (s.empty() || s.front() == '#') continue;
        if (t.columns.empty()) {
            t.columns = detail::split_csv_line(s);
            if (t.columns.empty())
                throw std::invalid_argument("CSV: empty header row");
            continue;
        }
        const auto cells = detail::split_csv_line(s);
        if (cells.size() != t.columns.size())
            throw std::invalid_argument("CSV line " + std::to_string(lineno) + ": expected " +
                                        std::to_string(t.columns.size()) + " cells, got " +
                                        std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(cells[i], &pos);
                if (pos != cells[i].size()) throw std::invalid_argument("trailing characters");
                row.push_back(v);
            } catch (const std::exception&) {
                throw std::invalid_argument("CSV line " + std::to_string(lineno) + ", column '" +
                                            t.columns[i] + "': cannot parse '" + cells[i] + "'");
            }
        }
        t.rows.push_back(std::move(row));
    }
    if (t.columns.empty())
        throw std::invalid_argument("CSV: no header row found");
    return t;
}

inline CsvTable load_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open data file '" + path + "'");
    return read_csv(in);
}

inline void write_csv(std::ostream& out, const CsvTable& t)
{
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out << (i ? "," : "") << t.columns[i];
    out << "\n";
    out << std::setprecision(17);
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

inline void save_csv(const std::string& path, const CsvTable& t)
{
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open output file '" + path + "'");
    write_csv(out, t);
}

// ---------------------------------------------------------------------------
// Report: machine-readable result document with input digests.

// FNV-1a, enough for content traceability (not security).
inline std::uint64_t fnv1a_digest(const std::string& content)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : content) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string file_digest(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open file '" + path + "' for digest");
    std::ostringstream ss;
    ss << in.rdbuf();
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a_digest(ss.str());
    return hex.str();
}

struct Report {
    std::string command;
    std::map<std::string, std::string> input_digests;   // path -> fnv1a hex
    json estimates = json::object();                    // name -> {value, ci95}
    json derived = json::object();                      // name -> value
    std::vector<std::string> warnings;

    void add_input(const std::string& path) { input_digests[path] = file_digest(path); }

    void add_estimate(const std::string& name, double value, double ci95)
    {
        estimates[name] = {{"value", value}, {"ci95", ci95}};
    }

    json to_json() const
    {
        json j;
        j["command"] = command;
        j["inputs"] = input_digests;
        j["estimates"] = estimates;
        j["derived"] = derived;
        j["warnings"] = warnings;
        return j;
    }

    // nlohmann serializes doubles with shortest-round-trip precision, so the
    // document reparses bit-exactly.
    std::string to_string() const { return to_json().dump(2) + "\n"; }
};

}  // namespace magnonkit
