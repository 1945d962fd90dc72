#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bicshg/bicshg.hpp"
#include "config.hpp"

namespace bicshg::cli {

using Cell = std::variant<double, long, std::string, bool>;

struct Table {
    std::string command;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::pair<std::string, std::string>> notes;  // extra metadata lines
};

inline std::string format_cell(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) return detail::fmt(v);
            else if constexpr (std::is_same_v<T, long>) return std::to_string(v);
            else if constexpr (std::is_same_v<T, bool>) return v ? "1" : "0";
            else return v;
        },
        c);
}

inline void write_csv(std::ostream& out, const Table& t, const RunConfig& cfg) {
    out << "# bic-shg schema v1\n";
    out << "# command: " << t.command << "\n";
    for (const auto& [k, v] : cfg.echo()) out << "# " << k << " = " << v << "\n";
    for (const auto& [k, v] : t.notes) out << "# " << k << " = " << v << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
        out << "\n";
    }
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
    return std::visit(
        [](const auto& v) -> nlohmann::ordered_json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(v)) return nullptr;
                return std::stod(detail::fmt(v));
            } else
                return v;
        },
        c);
}

inline void write_json(std::ostream& out, const Table& t, const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["schema"] = "bic-shg schema v1";
    j["command"] = t.command;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
    for (const auto& [k, v] : cfg.echo()) inputs[k] = v;
    j["inputs"] = inputs;
    nlohmann::ordered_json notes = nlohmann::ordered_json::object();
    for (const auto& [k, v] : t.notes) notes[k] = v;
    j["notes"] = notes;
    j["columns"] = t.columns;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json r = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = cell_json(row[i]);
        rows.push_back(r);
    }
    j["rows"] = rows;
    out << j.dump(2) << "\n";
}

inline void write_table(std::ostream& out, const Table& t, const RunConfig& cfg) {
    if (cfg.format == OutputFormat::json) write_json(out, t, cfg);
    else write_csv(out, t, cfg);
}

inline ResonanceOptions resonance_options(const RunConfig& c) {
    ResonanceOptions o;
    o.sums.tol = c.sum_tol;
    return o;
}

inline std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (long i = 0; i < n; ++i) out.push_back(lo + step * static_cast<double>(i));
    return out;
}

inline std::vector<Parity> parities(const std::string& p) {
    if (p == "symmetric") return {Parity::symmetric};
    if (p == "antisymmetric") return {Parity::antisymmetric};
    return {Parity::symmetric, Parity::antisymmetric};
}

inline Table cmd_trace(const RunConfig& c) {
    Table t{"trace", {"parity", "h", "k_r", "Gamma"}, {}, {}};
    const auto opt = resonance_options(c);
    const auto curves = parallel_map(
        parities(c.parity),
        [&](Parity p) { return trace_curve(p, c.structure, {c.h_min, c.h_max}, c.h_step, opt); },
        static_cast<unsigned>(c.threads));
    for (const auto& curve : curves)
        for (const ResonancePoint& r : curve)
            t.rows.push_back({std::string(to_string(r.parity)), r.h, r.kr, r.gamma});
    return t;
}

inline Table cmd_bound_states(const RunConfig& c) {
    Table t{"bound-states", {"n", "parity", "h_b", "k_b", "k_zb", "k_b_estimate", "k_b_minus_estimate"}, {}, {}};
    const auto opt = resonance_options(c);
    const double est = bound_state_k_estimate(c.structure);
    for (Parity p : parities(c.parity)) {
        std::vector<int> ns;
        for (int n = 1; n <= c.n_max; ++n) ns.push_back(n);
        const auto states = parallel_map(
            ns, [&](int n) { return find_bound_state(n, p, c.structure, opt); }, static_cast<unsigned>(c.threads));
        for (const BoundState& b : states)
            t.rows.push_back({static_cast<long>(b.n), std::string(to_string(p)), b.hb, b.kb, b.kzb, est, b.kb - est});
    }
    return t;
}

inline Table cmd_efficiency(const RunConfig& c) {
    Table t{"efficiency",
            {"n", "R", "kx", "h_b", "k_b", "sigma2_max_exact", "sigma2_max_leading", "sigma2_max_m0", "delta0_kb",
             "solid"},
            {},
            {}};
    const auto opt = resonance_options(c);
    struct Point {
        int n;
        StructureParams p;
    };
    std::vector<StructureParams> ps;
    if (c.sweep == "none") ps.push_back(c.structure);
    else
        for (double v : grid(c.sweep_min, c.sweep_max, c.sweep_step)) {
            StructureParams p = c.structure;
            (c.sweep == "R" ? p.R : p.kx) = v;
            p.validate();
            ps.push_back(p);
        }
    std::vector<Point> pts;
    for (int n = 1; n <= c.n_max; ++n)
        for (const auto& p : ps) pts.push_back({n, p});
    const auto res = parallel_map(
        pts,
        [&](const Point& pt) {
            const BoundState bs = find_bound_state(pt.n, Parity::symmetric, pt.p, opt);
            const BicConstants bc = bic_constants(bs, pt.p, opt.sums);
            return std::pair{bs, efficiency_estimates(bc, pt.p)};
        },
        static_cast<unsigned>(c.threads));
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& [bs, e] = res[i];
        t.rows.push_back({static_cast<long>(pts[i].n), pts[i].p.R, pts[i].p.kx, bs.hb, bs.kb, e.exact, e.leading, e.m0,
                          e.delta0, e.subwavelength_ok});
    }
    return t;
}

inline Table cmd_validity(const RunConfig& c) {
    Table t{"validity", {"nu", "h", "tau_sum", "valid"}, {}, {}};
    const auto opt = resonance_options(c);
    const BoundState bs = find_bound_state(c.n, Parity::symmetric, c.structure, opt);
    t.notes.push_back({"h_b", detail::fmt(bs.hb)});
    t.notes.push_back({"k_b", detail::fmt(bs.kb)});

    std::vector<double> hs;
    for (int i = 0; i < c.h_points; ++i)
        hs.push_back(c.h_points == 1 ? bs.hb : bs.hb - c.dh_max + 2.0 * c.dh_max * i / (c.h_points - 1));
    std::vector<double> nus;
    for (int j = 0; j < c.nu_points; ++j)
        nus.push_back(c.nu_points == 1 ? c.nu_min
                                       : c.nu_min * std::pow(c.nu_max / c.nu_min, static_cast<double>(j) / (c.nu_points - 1)));

    // For each h: tau_+ + tau_- for every nu.
    const auto columns = parallel_map(
        hs,
        [&](double h) {
            const double k = resonance_k(h, Parity::symmetric, c.structure, opt);
            const SHCoupling cpl = sh_coupling(h, k, c.structure, opt.sums);
            const ZetaXi zx = zeta_xi(h, k, 1.0, cpl, c.structure);
            const double phi = std::cos(h * normal_wavenumber(k, c.structure.kx));
            std::vector<std::pair<double, bool>> col;
            for (double nu : nus) {
                if (std::abs(phi) <= FieldOptions{}.phi_zero) {
                    col.push_back({std::cbrt(nu * nu * std::norm(zx.zeta)), true});
                    continue;
                }
                const CardanoResult r = cardano_analysis(phi, nu, zx.zeta, zx.xi);
                col.push_back({r.tau_sum(), r.valid});
            }
            return col;
        },
        static_cast<unsigned>(c.threads));
    for (std::size_t j = 0; j < nus.size(); ++j)
        for (std::size_t i = 0; i < hs.size(); ++i)
            t.rows.push_back({nus[j], hs[i], columns[i][j].first, columns[i][j].second});
    return t;
}

inline Table cmd_optimal(const RunConfig& c) {
    Table t{"optimal",
            {"side", "h_opt", "dh", "dh_leading", "h_sweep", "dh_sweep", "sigma2", "sigma2_sweep", "sigma2_max_exact",
             "tau_sum", "sigma1_plus_sigma2", "conservation_residual"},
            {},
            {}};
    FieldOptions fo;
    fo.resonance = resonance_options(c);
    const BoundState bs = find_bound_state(c.n, Parity::symmetric, c.structure, fo.resonance);
    const BicConstants bc = bic_constants(bs, c.structure, fo.resonance.sums);
    const OptimalDistance od = optimal_distance(bc, c.structure, fo);
    t.notes.push_back({"h_b", detail::fmt(bs.hb)});
    t.notes.push_back({"k_b", detail::fmt(bs.kb)});
    t.notes.push_back({"phi_opt", detail::fmt(od.phi_opt)});
    t.notes.push_back({"condition_residual", detail::fmt(od.condition_residual)});

    const std::vector<std::pair<std::string, OptimalSide>> sides{{"below", od.below}, {"above", od.above}};
    const auto rows = parallel_map(
        sides,
        [&](const std::pair<std::string, OptimalSide>& s) {
            const double d = s.second.dh;
            const double lo = bs.hb + (d > 0 ? 0.3 * d : 3.0 * d);
            const double hi = bs.hb + (d > 0 ? 3.0 * d : 0.3 * d);
            const oracle::SweepMaximum sw = oracle::sweep_argmax_sigma2(c.structure, lo, hi, c.sweep_points, fo);
            const NonlinearSolution sol = solve_fields(s.second.h, c.structure, 1.0, fo);
            const ConservationReport cr = conservation_check(sol, bc, c.structure);
            const double dh_lead = d > 0 ? od.dh_leading : -od.dh_leading;
            return std::vector<Cell>{s.first,       s.second.h,       d,          dh_lead,
                                     sw.h_star,     sw.h_star - bs.hb, s.second.sigma2, sw.sigma2_star,
                                     sigma2_max(bc), s.second.tau_sum, cr.total(), cr.residual};
        },
        static_cast<unsigned>(c.threads));
    for (const auto& r : rows) t.rows.push_back(r);
    return t;
}

inline Table run_command(const std::string& command, const RunConfig& c) {
    validate(c, command);
    if (command == "trace") return cmd_trace(c);
    if (command == "bound-states") return cmd_bound_states(c);
    if (command == "efficiency") return cmd_efficiency(c);
    if (command == "validity") return cmd_validity(c);
    if (command == "optimal") return cmd_optimal(c);
    throw ConfigError("unknown command '" + command + "'");
}

}  // namespace bicshg::cli
