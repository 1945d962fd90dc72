#pragma once

// Resonance curves k = k_r(h) of the double array, their widths, and the
// bound states in the radiation continuum where the width vanishes. All
// quantities live in the window kx < k < 2 pi - kx where exactly one
// fundamental diffraction channel is open.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "bicshg/dispersion.hpp"
#include "bicshg/roots.hpp"

namespace bicshg {

enum class Parity : int { symmetric = +1, antisymmetric = -1 };

inline double sign_of(Parity p) { return static_cast<int>(p) > 0 ? 1.0 : -1.0; }
inline const char* to_string(Parity p) { return p == Parity::symmetric ? "+1" : "-1"; }

struct ResonancePoint {
    double h = 0.0;
    double kr = 0.0;
    double gamma = 0.0;
    Parity parity = Parity::symmetric;
};

struct BoundState {
    int n = 0;
    double hb = 0.0;
    double kb = 0.0;
    double kzb = 0.0;
    Parity parity = Parity::symmetric;
};

struct ResonanceOptions {
    SumOptions sums{};
    int scan_points = 200;          // cold-start bracket scan in k
    double scan_margin = 1e-5;      // keep the scan this far inside the window
    double k2_tol = 1e-12;          // absolute tolerance on k^2
    double fd_rel_step = 1e-6;      // central difference step, relative to k^2
    double min_derivative = 1e-12;  // |d Re / d k^2| below this is degenerate
};

// 1 - alpha - beta (symmetric) or 1 - alpha + beta (antisymmetric) at k.
inline cplx resonance_determinant(double k, double h, Parity parity, const StructureParams& params,
                                  const SumOptions& sums = {}) {
    const CouplingMatrix H = coupling_matrix(k, params.kx, h, params, sums);
    return 1.0 - H.alpha - sign_of(parity) * H.beta;
}

inline double resonance_function(double k, double h, Parity parity, const StructureParams& params,
                                  const SumOptions& sums = {}) {
    return resonance_determinant(k, h, parity, params, sums).real();
}

struct KBracket {
    double lo = 0.0;
    double hi = 0.0;
};

// Sign changes of Re{1 - alpha -/+ beta} on a uniform k grid across the
// one-channel window, ordered by k.
inline std::vector<KBracket> scan_brackets(double h, Parity parity, const StructureParams& params,
                                           const ResonanceOptions& opt = {}) {
    const double lo = params.kx + opt.scan_margin;
    const double hi = diffraction_threshold(params.kx) - opt.scan_margin;
    std::vector<KBracket> out;
    double k_prev = lo;
    double f_prev = resonance_function(lo, h, parity, params, opt.sums);
    for (int i = 1; i < opt.scan_points; ++i) {
        const double k = lo + (hi - lo) * i / (opt.scan_points - 1);
        const double f = resonance_function(k, h, parity, params, opt.sums);
        if ((f > 0) != (f_prev > 0)) out.push_back({k_prev, k});
        k_prev = k;
        f_prev = f;
    }
    return out;
}

// Root of Re{1 - alpha -/+ beta} = 0 in the variable k^2 inside the bracket.
inline double resonance_k(double h, Parity parity, const StructureParams& params, KBracket bracket,
                          const ResonanceOptions& opt = {}) {
    if (!(h > 0.0)) throw std::invalid_argument("resonance_k: h must be positive");
    if (!(bracket.lo > params.kx && bracket.hi < diffraction_threshold(params.kx) && bracket.lo < bracket.hi))
        throw std::invalid_argument("resonance_k: bracket must lie inside (kx, 2 pi - kx)");
    auto F = [&](double k2) { return resonance_function(std::sqrt(k2), h, parity, params, opt.sums); };
    const double s_lo = bracket.lo * bracket.lo, s_hi = bracket.hi * bracket.hi;
    const double f_lo = F(s_lo), f_hi = F(s_hi);
    if ((f_lo > 0) == (f_hi > 0) && f_lo != 0.0 && f_hi != 0.0)
        throw NoBracket("no sign change of Re{1-alpha" + std::string(parity == Parity::symmetric ? "-" : "+") +
                        "beta} in [" + std::to_string(bracket.lo) + ", " + std::to_string(bracket.hi) +
                        "] at h=" + std::to_string(h));
    return std::sqrt(roots::bracketed_root(F, s_lo, s_hi, f_lo, f_hi, opt.k2_tol));
}

// Cold start: the resonance adjacent to the diffraction threshold, i.e. the
// highest sign change in the window. This is the branch carrying the bound
// states.
inline double resonance_k(double h, Parity parity, const StructureParams& params,
                          const ResonanceOptions& opt = {}) {
    const auto brackets = scan_brackets(h, parity, params, opt);
    if (brackets.empty())
        throw NoBracket("no resonance of parity " + std::string(to_string(parity)) + " in the one-channel window at h=" +
                        std::to_string(h));
    return resonance_k(h, parity, params, brackets.back(), opt);
}

// Width from linearizing Re{.} in k^2 at the resonance,
//   Gamma = Im{1 - alpha -/+ beta} / d_{k^2} Re{1 - alpha -/+ beta},
// which places the pole at k_r^2 - i Gamma with Gamma >= 0.
inline double width(double h, double kr, Parity parity, const StructureParams& params,
                    const ResonanceOptions& opt = {}) {
    if (!(opt.fd_rel_step > 0.0)) throw std::invalid_argument("width: fd step must be positive");
    const double s = kr * kr;
    const double ds = opt.fd_rel_step * s;
    const double f_plus = resonance_function(std::sqrt(s + ds), h, parity, params, opt.sums);
    const double f_minus = resonance_function(std::sqrt(s - ds), h, parity, params, opt.sums);
    const double deriv = (f_plus - f_minus) / (2.0 * ds);
    if (std::abs(deriv) < opt.min_derivative)
        throw DegenerateDerivative("d Re/d k^2 = " + std::to_string(deriv) + " at h=" + std::to_string(h));
    const double im = resonance_determinant(kr, h, parity, params, opt.sums).imag();
    double gamma = im / deriv;
    if (gamma < 0.0) {
        if (gamma < -1e-12) throw NumericalError("width: negative width " + std::to_string(gamma));
        gamma = 0.0;
    }
    return gamma;
}

inline ResonancePoint resonance_point(double h, Parity parity, const StructureParams& params,
                                      const ResonanceOptions& opt = {}) {
    const double kr = resonance_k(h, parity, params, opt);
    return {h, kr, width(h, kr, parity, params, opt), parity};
}

namespace detail {

// Continuation step: look for the sign change closest to the previous k_r in
// windows of growing size.
inline std::optional<double> continue_resonance(double h, double k_prev, Parity parity,
                                                const StructureParams& params, const ResonanceOptions& opt) {
    const double lo_lim = params.kx + opt.scan_margin;
    const double hi_lim = diffraction_threshold(params.kx) - opt.scan_margin;
    double half = 0.01;
    for (int attempt = 0; attempt < 6; ++attempt, half *= 2.0) {
        const double lo = std::max(lo_lim, k_prev - half);
        const double hi = std::min(hi_lim, k_prev + half);
        constexpr int kLocal = 17;
        std::optional<KBracket> best;
        double best_dist = 0.0;
        double k_a = lo;
        double f_a = resonance_function(lo, h, parity, params, opt.sums);
        for (int i = 1; i < kLocal; ++i) {
            const double k_b = lo + (hi - lo) * i / (kLocal - 1);
            const double f_b = resonance_function(k_b, h, parity, params, opt.sums);
            if ((f_a > 0) != (f_b > 0)) {
                const double dist = std::abs(0.5 * (k_a + k_b) - k_prev);
                if (!best || dist < best_dist) {
                    best = KBracket{k_a, k_b};
                    best_dist = dist;
                }
            }
            k_a = k_b;
            f_a = f_b;
        }
        if (best) return resonance_k(h, parity, params, *best, opt);
    }
    return std::nullopt;
}

}  // namespace detail

struct HRange {
    double lo = 0.0;
    double hi = 0.0;
};

// Natural continuation of the resonance curve in h on the grid lo, lo+step,
// ..., hi. Leading h values where the branch does not exist yet are skipped
// (the antisymmetric curve emerges only at larger separations); losing the
// curve once it has been found is an error.
inline std::vector<ResonancePoint> trace_curve(Parity parity, const StructureParams& params, HRange range,
                                               double step, const ResonanceOptions& opt = {}) {
    if (!(step > 0.0)) throw std::invalid_argument("trace_curve: step must be positive");
    if (!(range.lo > 0.0 && range.hi >= range.lo)) throw std::invalid_argument("trace_curve: empty or invalid h range");
    const auto n = static_cast<long>(std::floor((range.hi - range.lo) / step + 1e-9)) + 1;
    std::vector<ResonancePoint> out;
    out.reserve(static_cast<std::size_t>(n));
    std::optional<double> k_prev;
    for (long i = 0; i < n; ++i) {
        const double h = range.lo + step * static_cast<double>(i);
        double kr = 0.0;
        if (!k_prev) {
            const auto brackets = scan_brackets(h, parity, params, opt);
            if (brackets.empty()) continue;
            kr = resonance_k(h, parity, params, brackets.back(), opt);
        } else {
            const auto next = detail::continue_resonance(h, *k_prev, parity, params, opt);
            if (!next) throw CurveLost("continuation failed at h=" + std::to_string(h));
            kr = *next;
        }
        out.push_back({h, kr, width(h, kr, parity, params, opt), parity});
        k_prev = kr;
    }
    return out;
}

// Phase condition for a bound state: h kz = (n - 1/2) pi on the symmetric
// branch (cos(h kz) = 0), h kz = n pi on the antisymmetric one (sin = 0).
inline double bound_state_phase(int n, Parity parity) {
    return parity == Parity::symmetric ? (n - 0.5) * pi : n * pi;
}

inline BoundState find_bound_state(int n, Parity parity, const StructureParams& params,
                                   const ResonanceOptions& opt = {}) {
    if (n < 1) throw std::invalid_argument("find_bound_state: n must be >= 1");
    const double target = bound_state_phase(n, parity);
    auto G = [&](double h) {
        const double kr = resonance_k(h, parity, params, opt);
        return h * normal_wavenumber(kr, params.kx) - target;
    };
    // k_r(h) varies slowly; a couple of fixed-point sweeps give a good guess.
    double h = target / normal_wavenumber(diffraction_threshold(params.kx), params.kx);
    try {
        for (int i = 0; i < 3; ++i) h = target / normal_wavenumber(resonance_k(h, parity, params, opt), params.kx);
    } catch (const NoBracket& e) {
        throw NotFound("bound state n=" + std::to_string(n) + ": " + e.what());
    }
    double width_h = 0.02 * h;
    for (int attempt = 0; attempt < 8; ++attempt, width_h *= 2.0) {
        const double lo = std::max(1e-3, h - width_h), hi = h + width_h;
        try {
            const double g_lo = G(lo), g_hi = G(hi);
            if ((g_lo > 0) == (g_hi > 0)) continue;
            const double hb = roots::bracketed_root(G, lo, hi, g_lo, g_hi, 1e-15);
            const double kb = resonance_k(hb, parity, params, opt);
            return {n, hb, kb, normal_wavenumber(kb, params.kx), parity};
        } catch (const NoBracket&) {
            continue;
        }
    }
    throw NotFound("bound state n=" + std::to_string(n) + " parity " + to_string(parity) +
                   " not found near h=" + std::to_string(h));
}

inline std::vector<BoundState> find_bound_states(Parity parity, const StructureParams& params, int n_max,
                                                 const ResonanceOptions& opt = {}) {
    if (n_max < 0) throw std::invalid_argument("find_bound_states: n_max must be >= 0");
    std::vector<BoundState> out;
    for (int n = 1; n <= n_max; ++n) out.push_back(find_bound_state(n, parity, params, opt));
    return out;
}

// First-order estimate of the bound-state wavenumber just below threshold.
inline double bound_state_k_estimate(const StructureParams& params) {
    const double kt = diffraction_threshold(params.kx);
    const double d0 = scattering_phase(kt, params);
    return kt - 8.0 * pi * pi * d0 * d0 / kt;
}

}  // namespace bicshg
