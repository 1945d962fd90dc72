#pragma once

// Flat key = value run configuration. Lines starting with '#' are comments.
// Command-line overrides use the same "key=value" syntax.

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bicshg/structure.hpp"

namespace bicshg::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class OutputFormat { csv, json };

struct RunConfig {
    StructureParams structure{};

    // trace
    double h_min = 0.05;
    double h_max = 1.5;
    double h_step = 0.01;
    std::string parity = "both";  // symmetric | antisymmetric | both

    // bound-states, efficiency
    int n_max = 3;

    // efficiency sweeps: none | R | kx
    std::string sweep = "none";
    double sweep_min = 0.05;
    double sweep_max = 0.25;
    double sweep_step = 0.01;

    // validity grid around h_b(n)
    int n = 1;
    double nu_min = 1e-8;
    double nu_max = 1e-4;
    int nu_points = 41;
    double dh_max = 0.02;
    int h_points = 81;

    // optimal
    int sweep_points = 41;

    double sum_tol = 1e-10;
    int threads = 0;
    OutputFormat format = OutputFormat::csv;

    // Echoed into output headers, in insertion order of the key table.
    [[nodiscard]] std::vector<std::pair<std::string, std::string>> echo() const;
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const char* b = v.data();
    const char* e = v.data() + v.size();
    auto [p, ec] = std::from_chars(b, e, out);
    if (ec != std::errc() || p != e) throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    return out;
}

inline int parse_int(const std::string& key, const std::string& v) {
    int out = 0;
    const char* b = v.data();
    const char* e = v.data() + v.size();
    auto [p, ec] = std::from_chars(b, e, out);
    if (ec != std::errc() || p != e) throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
    return out;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace detail

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "R",         "eps_c",     "chi_c",      "kx",        "h_min",   "h_max",   "h_step",    "parity",
        "n_max",     "sweep",     "sweep_min",  "sweep_max", "sweep_step", "n",     "nu_min",    "nu_max",
        "nu_points", "dh_max",    "h_points",   "sweep_points", "sum_tol", "threads", "format"};
    return keys;
}

inline void set_value(RunConfig& c, const std::string& key, const std::string& raw) {
    using detail::parse_double;
    using detail::parse_int;
    const std::string v = detail::trim(raw);
    if (key == "R") c.structure.R = parse_double(key, v);
    else if (key == "eps_c") c.structure.eps_c = parse_double(key, v);
    else if (key == "chi_c") c.structure.chi_c = parse_double(key, v);
    else if (key == "kx") c.structure.kx = parse_double(key, v);
    else if (key == "h_min") c.h_min = parse_double(key, v);
    else if (key == "h_max") c.h_max = parse_double(key, v);
    else if (key == "h_step") c.h_step = parse_double(key, v);
    else if (key == "parity") {
        if (v != "symmetric" && v != "antisymmetric" && v != "both")
            throw ConfigError("key 'parity': expected symmetric, antisymmetric or both, got '" + v + "'");
        c.parity = v;
    } else if (key == "n_max") c.n_max = parse_int(key, v);
    else if (key == "sweep") {
        if (v != "none" && v != "R" && v != "kx")
            throw ConfigError("key 'sweep': expected none, R or kx, got '" + v + "'");
        c.sweep = v;
    } else if (key == "sweep_min") c.sweep_min = parse_double(key, v);
    else if (key == "sweep_max") c.sweep_max = parse_double(key, v);
    else if (key == "sweep_step") c.sweep_step = parse_double(key, v);
    else if (key == "n") c.n = parse_int(key, v);
    else if (key == "nu_min") c.nu_min = parse_double(key, v);
    else if (key == "nu_max") c.nu_max = parse_double(key, v);
    else if (key == "nu_points") c.nu_points = parse_int(key, v);
    else if (key == "dh_max") c.dh_max = parse_double(key, v);
    else if (key == "h_points") c.h_points = parse_int(key, v);
    else if (key == "sweep_points") c.sweep_points = parse_int(key, v);
    else if (key == "sum_tol") c.sum_tol = parse_double(key, v);
    else if (key == "threads") c.threads = parse_int(key, v);
    else if (key == "format") {
        if (v == "csv") c.format = OutputFormat::csv;
        else if (v == "json") c.format = OutputFormat::json;
        else throw ConfigError("key 'format': expected csv or json, got '" + v + "'");
    } else
        throw ConfigError("unknown key '" + key + "'");
}

// "key=value" as given to --set.
inline void apply_override(RunConfig& c, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("--set '" + assignment + "': expected key=value");
    const std::string key = detail::trim(assignment.substr(0, eq));
    try {
        set_value(c, key, assignment.substr(eq + 1));
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("--set: ") + e.what());
    }
}

inline void parse_config_text(RunConfig& c, const std::string& text, const std::string& source = "<config>") {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(t.substr(0, eq));
        try {
            set_value(c, key, t.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline void load_config_file(RunConfig& c, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    parse_config_text(c, ss.str(), path);
}

// Checks shared by every command plus the command-specific ranges.
inline void validate(const RunConfig& c, const std::string& command) {
    try {
        c.structure.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(c.sum_tol >= 1e-15)) throw ConfigError("sum_tol must be at least 1e-15");
    if (c.threads < 0) throw ConfigError("threads must be >= 0");
    if (command == "trace") {
        if (!(c.h_min > 0.0)) throw ConfigError("h_min must be positive");
        if (!(c.h_step > 0.0)) throw ConfigError("h_step must be positive");
        if (!(c.h_max >= c.h_min)) throw ConfigError("empty h range: h_max < h_min");
    }
    if (command == "bound-states" || command == "efficiency") {
        if (c.n_max < 0) throw ConfigError("n_max must be >= 0");
    }
    if (command == "efficiency" && c.sweep != "none") {
        if (!(c.sweep_step > 0.0)) throw ConfigError("sweep_step must be positive");
        if (!(c.sweep_max >= c.sweep_min)) throw ConfigError("empty sweep range: sweep_max < sweep_min");
    }
    if (command == "validity") {
        if (c.n < 1) throw ConfigError("n must be >= 1");
        if (!(c.nu_min > 0.0 && c.nu_max >= c.nu_min)) throw ConfigError("need 0 < nu_min <= nu_max");
        if (c.nu_points < 1 || c.h_points < 1) throw ConfigError("grid sizes must be >= 1");
        if (!(c.dh_max > 0.0)) throw ConfigError("dh_max must be positive");
    }
    if (command == "optimal") {
        if (c.n < 1) throw ConfigError("n must be >= 1");
        if (!(c.structure.chi_c > 0.0)) throw ConfigError("optimal needs chi_c > 0");
        if (c.sweep_points < 3) throw ConfigError("sweep_points must be >= 3");
    }
    if (command == "efficiency" || command == "validity" || command == "optimal") {
        if (c.structure.kx >= 0.5 * pi && c.sweep != "kx")
            throw ConfigError("second-harmonic commands need kx < pi/2");
        if (c.sweep == "kx" && command == "efficiency" && c.sweep_max >= 0.5 * pi)
            throw ConfigError("kx sweep must stay below pi/2");
    }
}

inline std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
    using detail::fmt;
    return {{"R", fmt(structure.R)},
            {"eps_c", fmt(structure.eps_c)},
            {"chi_c", fmt(structure.chi_c)},
            {"kx", fmt(structure.kx)},
            {"h_min", fmt(h_min)},
            {"h_max", fmt(h_max)},
            {"h_step", fmt(h_step)},
            {"parity", parity},
            {"n_max", std::to_string(n_max)},
            {"sweep", sweep},
            {"sweep_min", fmt(sweep_min)},
            {"sweep_max", fmt(sweep_max)},
            {"sweep_step", fmt(sweep_step)},
            {"n", std::to_string(n)},
            {"nu_min", fmt(nu_min)},
            {"nu_max", fmt(nu_max)},
            {"nu_points", std::to_string(nu_points)},
            {"dh_max", fmt(dh_max)},
            {"h_points", std::to_string(h_points)},
            {"sweep_points", std::to_string(sweep_points)},
            {"sum_tol", fmt(sum_tol)}};
}

}  // namespace bicshg::cli
