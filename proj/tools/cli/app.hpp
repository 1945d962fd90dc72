#pragma once

#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace bicshg::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalFailure = 3, kValidityViolation = 4 };

// Prints the failure and maps it to an exit code. Unknown exceptions are
// rethrown.
inline int report_error(std::exception_ptr e, std::ostream& err) {
    try {
        std::rethrow_exception(e);
    } catch (const ConfigError& x) {
        err << "config error: " << x.what() << "\n";
        return kConfigError;
    } catch (const std::invalid_argument& x) {
        err << "config error: " << x.what() << "\n";
        return kConfigError;
    } catch (const ValidityError& x) {
        err << "validity violation: " << x.what() << "\n";
        return kValidityViolation;
    } catch (const NumericalError& x) {
        err << "numerical failure: " << x.what() << "\n";
        return kNumericalFailure;
    }
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Resonances, bound states in the continuum and second-harmonic conversion of a double "
                 "array of nonlinear dielectric cylinders"};
    app.require_subcommand(1, 1);

    std::string config_path, out_path, format;
    std::vector<std::string> overrides;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"trace", "resonance curves k_r(h) and widths"},
        {"bound-states", "bound states in the continuum h_b(n), k_b(n)"},
        {"efficiency", "conversion efficiency at the bound states, optionally swept in R or kx"},
        {"validity", "tau_+ + tau_- over a (nu, h) grid around h_b(n)"},
        {"optimal", "optimal distance between the arrays"}};
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "flat key = value configuration file");
        sub->add_option("--set", overrides, "override a configuration key (key=value)")->take_all();
        sub->add_option("--out", out_path, "output file (default: stdout)");
        sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        RunConfig cfg;
        if (!config_path.empty()) load_config_file(cfg, config_path);
        for (const auto& o : overrides) apply_override(cfg, o);
        if (!format.empty()) set_value(cfg, "format", format);

        const Table t = run_command(command, cfg);
        if (out_path.empty()) {
            write_table(out, t, cfg);
        } else {
            std::ofstream f(out_path);
            if (!f) throw ConfigError("cannot open output file '" + out_path + "'");
            write_table(f, t, cfg);
        }
    } catch (...) {
        return report_error(std::current_exception(), err);
    }
    return kOk;
}

}  // namespace bicshg::cli
