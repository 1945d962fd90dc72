#pragma once

// Far-field amplitudes of both harmonics, the conversion ratios sigma1 and
// sigma2, flux conservation, and the second-harmonic conversion efficiency.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "bicshg/roots.hpp"
#include "bicshg/shg.hpp"

namespace bicshg {

// Field values on the two cylinder rows at a point (h, k).
struct HarmonicFields {
    double h = 0.0;
    double k = 0.0;
    double nu = 0.0;
    cplx E1p, E1m, E2p, E2m;
};

inline HarmonicFields harmonic_fields(const NonlinearSolution& s) {
    return {s.h, s.k, s.nu, s.E1p, s.E1m, s.E2p, s.E2m};
}

struct SHAmplitude {
    int m = 0;
    double kzm = 0.0;
    cplx R;  // z -> -infinity
    cplx T;  // z -> +infinity
};

// Second-harmonic amplitudes in each open channel at (2k, 2kx). The rows
// radiate with strength E2 + nu E1^2.
inline std::vector<SHAmplitude> sh_amplitudes(const HarmonicFields& f, const StructureParams& params,
                                              double margin = SumOptions{}.threshold_margin) {
    const double q = 2.0 * f.k, qx = 2.0 * params.kx;
    const ChannelSet cs = channel_set(q, qx, open_channel_reach(q, qx), margin);
    const double d0 = scattering_phase(q, params);
    const cplx sp = f.E2p + f.nu * f.E1p * f.E1p;
    const cplx sm = f.E2m + f.nu * f.E1m * f.E1m;
    std::vector<SHAmplitude> out;
    for (const Channel& c : cs.channels) {
        if (!c.open) continue;
        const double kz = c.qzm.real();
        const cplx pref = two_pi * I * d0 / kz;
        const cplx up = std::exp(I * f.h * kz), down = std::exp(-I * f.h * kz);
        out.push_back({c.m, kz, pref * (sp * up + sm * down), pref * (sp * down + sm * up)});
    }
    return out;
}

inline double sigma2(const std::vector<SHAmplitude>& amps, double kz) {
    double s = 0.0;
    for (const SHAmplitude& a : amps) s += a.kzm * (std::norm(a.R) + std::norm(a.T));
    return s / (2.0 * kz);
}

inline double sigma2(const HarmonicFields& f, const StructureParams& params) {
    return sigma2(sh_amplitudes(f, params), normal_wavenumber(f.k, params.kx));
}

struct FundamentalAmplitudes {
    cplx R0;
    cplx T0;
};

// Reflection and transmission of the fundamental, including the rectification
// feedback 2 nu E2 conj(E1).
inline FundamentalAmplitudes fundamental_amplitudes(const HarmonicFields& f, const StructureParams& params) {
    const double kz = normal_wavenumber(f.k, params.kx);
    const cplx pref = two_pi * I * scattering_phase(f.k, params) / kz;
    const cplx sp = f.E1p + 2.0 * f.nu * f.E2p * std::conj(f.E1p);
    const cplx sm = f.E1m + 2.0 * f.nu * f.E2m * std::conj(f.E1m);
    const cplx up = std::exp(I * f.h * kz), down = std::exp(-I * f.h * kz);
    return {pref * (sp * up + sm * down), pref * (sp * down + sm * up)};
}

inline double sigma1(const FundamentalAmplitudes& a) { return std::norm(1.0 + a.T0) + std::norm(a.R0); }

inline double sigma1(const HarmonicFields& f, const StructureParams& params) {
    return sigma1(fundamental_amplitudes(f, params));
}

// The bracket 2 Im{c/(1+c)} |1+c|^2 - 2 Im{c}, c = a + b, which vanishes
// identically.
inline double ab_bracket(cplx a, cplx b) {
    const cplx c = a + b;
    return 2.0 * (c / (1.0 + c)).imag() * std::norm(1.0 + c) - 2.0 * c.imag();
}

// Quantities fixed by the bound state alone.
struct BicConstants {
    BoundState bs;
    SHCoupling coupling;
    cplx zeta_b;
    cplx xi_b;
    double delta0 = 0.0;       // delta0(k_b)
    double cos_sum = 0.0;      // sum over open SH channels of cos^2(h_b kzm)/kzm
    double Cb = 0.0;           // (16 pi delta0(k))^2 / kz |1+a+b|^2 cos_sum
    double Cb_from_amplitudes = 0.0;  // (4 pi delta0(2k))^2 / kz |1+a+b|^2 cos_sum
    double Cb_prime = 0.0;     // Cb |zeta_b|^2

    [[nodiscard]] cplx w() const { return zeta_b * xi_b; }
    [[nodiscard]] bool subwavelength_ok() const { return delta0 < 0.25; }
};

inline BicConstants bic_constants(const BoundState& bs, const StructureParams& params, const SumOptions& opt = {}) {
    if (bs.parity != Parity::symmetric)
        throw std::invalid_argument("bic_constants: second-harmonic analysis needs a symmetric bound state");
    BicConstants c;
    c.bs = bs;
    c.coupling = sh_coupling(bs.hb, bs.kb, params, opt);
    c.delta0 = scattering_phase(bs.kb, params);
    c.xi_b = I * 4.0 * pi * c.delta0 / bs.kzb;
    c.zeta_b = 1.0 / (2.0 * (c.coupling.a + c.coupling.b));

    const double q = 2.0 * bs.kb, qx = 2.0 * params.kx;
    const ChannelSet cs = channel_set(q, qx, open_channel_reach(q, qx), opt.threshold_margin);
    for (const Channel& ch : cs.channels) {
        if (!ch.open) continue;
        const double kz = ch.qzm.real();
        const double cs_ = std::cos(bs.hb * kz);
        c.cos_sum += cs_ * cs_ / kz;
    }
    const double one_ab = std::norm(1.0 + c.coupling.a + c.coupling.b);
    c.Cb = std::pow(16.0 * pi * c.delta0, 2) / bs.kzb * one_ab * c.cos_sum;
    c.Cb_from_amplitudes = std::pow(4.0 * pi * scattering_phase(q, params), 2) / bs.kzb * one_ab * c.cos_sum;
    c.Cb_prime = c.Cb * std::norm(c.zeta_b);
    return c;
}

// sigma2 near the bound state as a function of u = (nu |E1+| / phi)^2.
inline double sigma2_of_u(double u, double Cb_prime, cplx zeta_b, cplx xi_b) {
    if (!(u >= 0.0)) throw std::invalid_argument("sigma2_of_u: u must be >= 0");
    return Cb_prime * u / std::norm(u + zeta_b * xi_b);
}

inline double sigma2_max(const BicConstants& c) {
    return sigma2_of_u(std::abs(c.w()), c.Cb_prime, c.zeta_b, c.xi_b);
}

struct EfficiencyEstimates {
    double exact = 0.0;    // sigma2 at u = |zeta_b xi_b|
    double leading = 0.0;  // 8 pi delta0(k_b) cos_sum
    double m0 = 0.0;       // k_b^2 pi R^2 (eps_c - 1) / kzb
    double delta0 = 0.0;
    bool subwavelength_ok = false;
};

inline EfficiencyEstimates efficiency_estimates(const BicConstants& c, const StructureParams& params) {
    EfficiencyEstimates e;
    e.exact = sigma2_max(c);
    e.leading = 8.0 * pi * c.delta0 * c.cos_sum;
    e.m0 = c.bs.kb * c.bs.kb * pi * params.R * params.R * (params.eps_c - 1.0) / c.bs.kzb;
    e.delta0 = c.delta0;
    e.subwavelength_ok = c.subwavelength_ok();
    return e;
}

struct ConservationReport {
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double correction = 0.0;  // right-hand summand of the near-BIC balance
    double residual = 0.0;    // sigma1 + sigma2 - (1 + correction)
    bool correction_negative = false;

    [[nodiscard]] double total() const { return sigma1 + sigma2; }
};

inline ConservationReport conservation_check(const NonlinearSolution& sol, const BicConstants& c,
                                             const StructureParams& params, double tol = 1e-6) {
    const HarmonicFields f = harmonic_fields(sol);
    ConservationReport r;
    r.sigma1 = sigma1(f, params);
    r.sigma2 = sigma2(f, params);
    const double X = sol.E1_abs * sol.E1_abs;
    const double g = 4.0 * pi * c.delta0 / c.bs.kzb;
    const double lead = g * sol.phi * sol.nu * X;
    r.correction = 2.0 * lead * lead * ((1.0 / c.zeta_b).real() + sol.nu * sol.nu * X / std::norm(c.zeta_b));
    r.residual = r.total() - (1.0 + r.correction);
    r.correction_negative = r.correction <= 0.0;
    if (r.total() > 1.0 + tol)
        throw ConservationViolation("sigma1 + sigma2 = " + std::to_string(r.total()) + " at h=" + std::to_string(sol.h));
    return r;
}

struct FluxReport {
    FundamentalAmplitudes fundamental;
    std::vector<SHAmplitude> sh_amps;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double conservation_residual = 0.0;
    double Cb = 0.0;
    double Cb_prime = 0.0;
    double u = 0.0;
};

inline FluxReport flux_report(const NonlinearSolution& sol, const BicConstants& c, const StructureParams& params) {
    const HarmonicFields f = harmonic_fields(sol);
    FluxReport r;
    r.fundamental = fundamental_amplitudes(f, params);
    r.sh_amps = sh_amplitudes(f, params);
    r.sigma1 = sigma1(r.fundamental);
    r.sigma2 = sigma2(r.sh_amps, normal_wavenumber(sol.k, params.kx));
    r.conservation_residual = conservation_check(sol, c, params).residual;
    r.Cb = c.Cb;
    r.Cb_prime = c.Cb_prime;
    r.u = sol.phi != 0.0 ? std::pow(sol.nu * sol.E1_abs / sol.phi, 2) : std::numeric_limits<double>::infinity();
    return r;
}

struct OptimalSide {
    double h = 0.0;
    double dh = 0.0;
    double phi = 0.0;
    double sigma2 = 0.0;
    double tau_sum = 0.0;
};

struct OptimalDistance {
    double phi_opt = 0.0;          // |phi| solving the optimality condition
    OptimalSide below;             // h < h_b
    OptimalSide above;             // h > h_b
    double dh_leading = 0.0;       // quarter-power estimate of |h - h_b|
    double condition_residual = 0.0;
};

// Distance at which u = |zeta_b xi_b| on the resonance curve:
//   nu^2 / phi^4 = 2 |xi_b|^2 (|xi_b zeta_b| + Re{xi_b zeta_b}),
// solved on both sides of h_b.
inline OptimalDistance optimal_distance(const BicConstants& c, const StructureParams& params,
                                        const FieldOptions& opt = {}) {
    const double nu = params.nu();
    if (!(nu > 0.0)) throw std::invalid_argument("optimal_distance: chi_c must be positive");
    const cplx w = c.w();
    const double rhs = 2.0 * std::norm(c.xi_b) * (std::abs(w) + w.real());
    OptimalDistance out;
    out.phi_opt = std::pow(nu * nu / rhs, 0.25);
    const BoundState& bs = c.bs;
    out.dh_leading = std::pow(params.chi_c * params.chi_c /
                                  (8.0 * std::pow(pi, 5) * bs.kzb * std::pow(bs.kb * params.R, 6) *
                                   std::pow(params.eps_c - 1.0, 5)),
                              0.25);

    auto G = [&](double h) {
        const double k = resonance_k(h, Parity::symmetric, params, opt.resonance);
        return std::abs(std::cos(h * normal_wavenumber(k, params.kx))) - out.phi_opt;
    };
    if (!(out.phi_opt < 1.0))
        throw OutsideValidity("optimality condition needs |cos(h kz)| = " + std::to_string(out.phi_opt) + " > 1");
    // Search only up to just under half the spacing of the bound states,
    // where |cos(h kz)| grows monotonically with |h - h_b| and h stays > 0.
    const double d_max = 0.45 * pi / bs.kzb;
    auto side = [&](double sign) {
        const double guess = out.phi_opt / bs.kzb;
        double lo = 0.25 * guess, hi = std::min(4.0 * guess, d_max);
        for (int i = 0; i < 40 && hi < d_max && G(bs.hb + sign * hi) < 0.0; ++i) hi = std::min(2.0 * hi, d_max);
        if (G(bs.hb + sign * hi) < 0.0)
            throw OutsideValidity("optimal distance lies beyond |h - h_b| = " + std::to_string(d_max));
        for (int i = 0; i < 40 && G(bs.hb + sign * lo) > 0.0; ++i) lo *= 0.5;
        auto Gd = [&](double d) { return G(bs.hb + sign * d); };
        const double d = roots::bracketed_root(Gd, lo, hi, Gd(lo), Gd(hi), 1e-14 * std::max(1.0, bs.hb));
        OptimalSide s;
        s.h = bs.hb + sign * d;
        s.dh = sign * d;
        NonlinearSolution sol;
        try {
            sol = solve_fields(s.h, params, 1.0, opt);
        } catch (const InvalidRegion&) {
            throw OutsideValidity("optimal distance h=" + std::to_string(s.h) + " violates tau_+ + tau_- >= 0");
        }
        s.phi = sol.phi;
        s.sigma2 = sigma2(harmonic_fields(sol), params);
        s.tau_sum = sol.tau_plus + sol.tau_minus;
        return s;
    };
    out.below = side(-1.0);
    out.above = side(+1.0);
    const double phi4 = std::pow(out.above.phi, 4);
    out.condition_residual = (nu * nu / phi4 - rhs) / rhs;
    return out;
}

}  // namespace bicshg
