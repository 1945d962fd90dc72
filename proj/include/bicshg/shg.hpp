#pragma once

// Non-perturbative fundamental/second-harmonic fields on the cylinders near a
// symmetric bound state. Summing the two rows of the fundamental equation and
// eliminating the second harmonic reduces the problem to
//
//   E1+ = -phi / (nu^2 |E1+|^2 / zeta + phi^2 xi),
//
// whose modulus squared is a cubic in X = |E1+|^2 with a unique real root,
// obtained in closed form (Cardano).

#include <cmath>
#include <complex>
#include <string>
#include <tuple>

#include "bicshg/dispersion.hpp"
#include "bicshg/siegert.hpp"

namespace bicshg {

// Second-harmonic runs assume the open set at (2k, 2kx) is m in {0, +-1}.
inline void require_shg_kx(const StructureParams& params) {
    if (!(params.kx >= 0.0 && params.kx < 0.5 * pi))
        throw std::invalid_argument("second-harmonic analysis requires 0 <= kx < pi/2, got kx=" +
                                    std::to_string(params.kx));
}

// Entries of [1 - H2]^{-1} H2 = [[a, b], [b, a]] with H2 the coupling matrix
// at (2k, 2kx), plus the open-channel sums Sc, Ss.
struct SHCoupling {
    cplx a;
    cplx b;
    cplx alpha2;
    cplx beta2;
    double Sc = 0.0;
    double Ss = 0.0;
    cplx det;  // det(1 - H2)
};

// 16 pi delta0(k) sum_{open m} {cos^2, sin^2}(h kzm) / kzm over the
// second-harmonic channels.
inline std::pair<double, double> sh_channel_sums(double h, double k, const StructureParams& params,
                                                 double margin = SumOptions{}.threshold_margin) {
    const double q = 2.0 * k, qx = 2.0 * params.kx;
    const ChannelSet cs = channel_set(q, qx, open_channel_reach(q, qx), margin);
    double cos_sum = 0.0, sin_sum = 0.0;
    for (const Channel& c : cs.channels) {
        if (!c.open) continue;
        const double kz = c.qzm.real();
        const double cs_ = std::cos(h * kz), sn = std::sin(h * kz);
        cos_sum += cs_ * cs_ / kz;
        sin_sum += sn * sn / kz;
    }
    const double pref = 16.0 * pi * scattering_phase(k, params);
    return {pref * cos_sum, pref * sin_sum};
}

// a, b of [1 - H2]^{-1} H2 for H2 = [[alpha2, beta2], [beta2, alpha2]]. The
// matrix is diagonal in the (1, +-1) basis.
inline SHCoupling resolvent_entries(cplx alpha2, cplx beta2, double resonance_threshold = 1e-10) {
    const cplx s = alpha2 + beta2, d = alpha2 - beta2;
    const cplx det = (1.0 - s) * (1.0 - d);
    if (std::abs(det) < resonance_threshold)
        throw SecondHarmonicResonance("|det(1 - H2)| = " + std::to_string(std::abs(det)));
    const cplx c_sym = s / (1.0 - s), c_anti = d / (1.0 - d);
    SHCoupling c;
    c.a = 0.5 * (c_sym + c_anti);
    c.b = 0.5 * (c_sym - c_anti);
    c.alpha2 = alpha2;
    c.beta2 = beta2;
    c.det = det;
    return c;
}

inline SHCoupling sh_coupling(double h, double k, const StructureParams& params, const SumOptions& opt = {},
                              double resonance_threshold = 1e-10) {
    require_shg_kx(params);
    const CouplingMatrix H2 = coupling_matrix(2.0 * k, 2.0 * params.kx, h, params, opt);
    SHCoupling c;
    try {
        c = resolvent_entries(H2.alpha, H2.beta, resonance_threshold);
    } catch (const SecondHarmonicResonance& e) {
        throw SecondHarmonicResonance(std::string(e.what()) + " at h=" + std::to_string(h) + ", k=" + std::to_string(k));
    }
    std::tie(c.Sc, c.Ss) = sh_channel_sums(h, k, params, opt.threshold_margin);
    return c;
}

struct ZetaXi {
    cplx zeta;
    cplx xi;
    cplx inv_zeta;
};

// zeta and xi at field ratio mu = E1-/E1+. Uses Re{1 - alpha - beta} = 0,
// i.e. (h, k) on the symmetric resonance curve.
inline ZetaXi zeta_xi(double h, double k, cplx mu, const SHCoupling& c, const StructureParams& params,
                      double singular_threshold = 1e-14) {
    const double kz = normal_wavenumber(k, params.kx);
    const double d0 = scattering_phase(k, params);
    const double phi = std::cos(h * kz);
    const cplx xi = I * (two_pi * d0 / kz) * (1.0 + mu);
    const cplx inv_zeta = (1.0 + I * (4.0 * pi * d0 / kz) * phi * phi) *
                          (c.a + c.b * mu * mu + std::conj(mu) * (c.b + c.a * mu * mu));
    if (std::abs(inv_zeta) < singular_threshold)
        throw ZetaSingular("|1/zeta| = " + std::to_string(std::abs(inv_zeta)) + " at h=" + std::to_string(h));
    return {1.0 / inv_zeta, xi, inv_zeta};
}

// X^3 + c2 X^2 + c1 X + c0 = 0 for X = |E1+|^2.
struct CubicCoefficients {
    double c2 = 0.0;
    double c1 = 0.0;
    double c0 = 0.0;
};

inline CubicCoefficients cubic_coefficients(double phi, double nu, cplx zeta, cplx xi) {
    if (!(nu > 0.0)) throw std::invalid_argument("cubic_coefficients: nu must be positive");
    const cplx w = zeta * xi;
    const double r2 = (phi / nu) * (phi / nu);
    return {2.0 * r2 * w.real(), r2 * r2 * std::norm(w), -(phi * phi) / (nu * nu * nu * nu) * std::norm(zeta)};
}

// Real root of Y^3 + p Y + q = 0 when (4/27) p^3 + q^2 >= 0. The larger cube
// root is formed without cancellation and the second follows from the
// product rule t1 t2 = -p/3.
inline double depressed_cubic_real_root(double p, double q) {
    const double D = q * q + 4.0 / 27.0 * p * p * p;
    const double sd = std::sqrt(std::max(D, 0.0));
    const double big = q >= 0.0 ? -0.5 * (q + sd) : 0.5 * (-q + sd);
    const double t1 = std::cbrt(big);
    const double t2 = t1 != 0.0 ? -p / (3.0 * t1) : 0.0;
    return t1 + t2;
}

struct CardanoResult {
    double X = 0.0;              // |E1+|^2 (closed form, Newton-polished)
    double X_closed_form = 0.0;  // closed form before polishing
    double p = 0.0;              // depressed-cubic coefficients in X
    double q = 0.0;
    double D3 = 0.0;             // (4/27) p^3 + q^2
    double D3_factorized = 0.0;  // (phi^4/nu^12) | |zeta|^2 nu^2 - phi^4 rho / 2 |^2
    double tau_plus = 0.0;
    double tau_minus = 0.0;
    bool valid = false;          // unique real root and tau_+ + tau_- >= 0

    [[nodiscard]] double tau_sum() const { return tau_plus + tau_minus; }
};

// Closed-form analysis of the cubic without throwing on an invalid region.
// Internally works in u = (nu/phi)^2 X, where the cubic reads
//   u |u + zeta xi|^2 = t,  t = nu^2 |zeta|^2 / phi^4,
// so that coefficients stay O(1) for small nu.
inline CardanoResult cardano_analysis(double phi, double nu, cplx zeta, cplx xi) {
    if (!(nu > 0.0)) throw std::invalid_argument("cardano: nu must be positive");
    if (phi == 0.0) throw std::invalid_argument("cardano: phi must be nonzero");

    const cplx w = zeta * xi;
    const double rw = w.real();
    const double w2 = std::norm(w);
    const double re_w_sq = (w * w).real();
    const double pos = w2 - 2.0 * re_w_sq;  // > 0 near a bound state
    const double phi4 = phi * phi * phi * phi;
    const double t = nu * nu * std::norm(zeta) / phi4;

    // Depressed cubic in u: y^3 + p_u y + q_u = 0, u = y - (2/3) Re w.
    const double p_u = w2 - 4.0 / 3.0 * rw * rw;
    const double q_u = 2.0 / 27.0 * rw * (8.0 * rw * rw - 9.0 * w2) - t;
    const double D_u = q_u * q_u + 4.0 / 27.0 * p_u * p_u * p_u;
    const double D_scale = q_u * q_u + std::abs(4.0 / 27.0 * p_u * p_u * p_u);

    CardanoResult r;
    const double s2 = (phi / nu) * (phi / nu);  // X = s2 * u
    const double s6 = s2 * s2 * s2;
    r.p = s2 * s2 * p_u;
    r.q = s6 * q_u;
    r.D3 = s6 * s6 * D_u;

    // Cube-root arguments A+- of the closed form (scaled by phi^4).
    double A_plus = 0.5 * (-q_u + std::sqrt(std::max(D_u, 0.0)));
    double A_minus = 0.5 * (-q_u - std::sqrt(std::max(D_u, 0.0)));
    if (pos > 0.0) {
        const cplx rho = 4.0 / 27.0 * cplx(2.0 * rw * (2.0 * re_w_sq - 2.5 * w2), std::pow(pos, 1.5));
        const double mod = std::abs(t - 0.5 * rho);
        r.D3_factorized = s6 * s6 * mod * mod;
        if (D_u < -1e-12 * D_scale)
            throw NegativeDiscriminant("D3 < 0 although |zeta xi|^2 - 2 Re{(zeta xi)^2} > 0");
        A_plus = 0.5 * (t - 0.5 * rho.real() + mod);
        A_minus = 0.5 * (t - 0.5 * rho.real() - mod);
    } else {
        r.D3_factorized = std::numeric_limits<double>::quiet_NaN();
    }

    const double phi43 = std::cbrt(phi4);
    r.tau_plus = phi43 * (std::cbrt(A_plus) - rw / 3.0);
    r.tau_minus = phi43 * (std::cbrt(A_minus) - rw / 3.0);

    const bool unique = D_u >= -1e-12 * D_scale;
    const double roundoff =
        64.0 * std::numeric_limits<double>::epsilon() * phi43 *
        (std::abs(std::cbrt(A_plus)) + std::abs(std::cbrt(A_minus)) + std::abs(2.0 * rw / 3.0));
    r.valid = unique && r.tau_sum() >= -roundoff;
    if (!unique) return r;

    const double u_closed = depressed_cubic_real_root(p_u, q_u) - 2.0 / 3.0 * rw;
    r.X_closed_form = s2 * u_closed;

    // Safeguarded Newton polish of u |u + w|^2 - t on [0, hi]; f(0) = -t < 0.
    auto f = [&](double u) { return u * ((u + rw) * (u + rw) + (w2 - rw * rw)) - t; };
    auto df = [&](double u) { return 3.0 * u * u + 4.0 * rw * u + w2; };
    double lo = 0.0;
    double hi = std::max({u_closed, std::cbrt(t), t / std::max(w2, 1e-300), 1e-300});
    while (f(hi) < 0.0) hi *= 2.0;
    double u = (u_closed > lo && u_closed < hi) ? u_closed : 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double fu = f(u);
        if (fu == 0.0) break;
        (fu < 0.0 ? lo : hi) = u;
        const double d = df(u);
        double next = d != 0.0 ? u - fu / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - u) <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(u)) {
            u = next;
            break;
        }
        u = next;
    }
    r.X = s2 * u;
    return r;
}

inline CardanoResult cardano_unique_root(double phi, double nu, cplx zeta, cplx xi) {
    CardanoResult r = cardano_analysis(phi, nu, zeta, xi);
    if (!r.valid)
        throw InvalidRegion("tau_+ + tau_- = " + std::to_string(r.tau_sum()) + " at phi=" + std::to_string(phi) +
                            ", nu=" + std::to_string(nu));
    return r;
}

struct NonlinearSolution {
    double h = 0.0;
    double k = 0.0;
    double kz = 0.0;
    double phi = 0.0;
    double nu = 0.0;
    cplx mu{1.0, 0.0};
    SHCoupling coupling;
    cplx zeta;
    cplx xi;
    double E1_abs = 0.0;
    cplx E1p;
    cplx E1m;
    cplx E2p;
    cplx E2m;
    double tau_plus = 0.0;
    double tau_minus = 0.0;
    bool valid = false;
    bool from_limit = false;  // phi = 0: extrapolated along the curve

    [[nodiscard]] double e2_ratio() const {
        return E1_abs > 0.0 ? std::max(std::abs(E2p), std::abs(E2m)) / E1_abs : 0.0;
    }
    // Residual of E1+ = -phi / (nu^2 |E1+|^2 / zeta + phi^2 xi).
    [[nodiscard]] double implicit_residual() const {
        if (from_limit) return 0.0;
        const cplx rhs = -phi / (nu * nu * E1_abs * E1_abs / zeta + phi * phi * xi);
        return std::abs(E1p - rhs) / std::max(std::abs(E1p), 1e-300);
    }
};

struct FieldOptions {
    ResonanceOptions resonance{};
    double phi_zero = 1e-13;  // |phi| below this takes the limit path
};

// Fields at a given (h, k) on the symmetric resonance curve with field ratio mu.
inline NonlinearSolution solve_fields_at(double h, double k, const StructureParams& params, cplx mu = 1.0,
                                         const FieldOptions& opt = {}) {
    require_shg_kx(params);
    NonlinearSolution s;
    s.h = h;
    s.k = k;
    s.kz = normal_wavenumber(k, params.kx);
    s.phi = std::cos(h * s.kz);
    s.nu = params.nu();
    s.mu = mu;
    s.coupling = sh_coupling(h, k, params, opt.resonance.sums);
    const ZetaXi zx = zeta_xi(h, k, mu, s.coupling, params);
    s.zeta = zx.zeta;
    s.xi = zx.xi;
    if (std::abs(s.phi) <= opt.phi_zero)
        throw std::invalid_argument("solve_fields_at: phi = 0 needs the curve; use solve_fields");

    if (s.nu == 0.0) {
        s.E1p = -1.0 / (s.phi * s.xi);
        s.E1_abs = std::abs(s.E1p);
        s.valid = true;
    } else {
        const CardanoResult c = cardano_unique_root(s.phi, s.nu, s.zeta, s.xi);
        s.tau_plus = c.tau_plus;
        s.tau_minus = c.tau_minus;
        s.valid = c.valid;
        s.E1_abs = std::sqrt(c.X);
        s.E1p = -s.phi / (s.nu * s.nu * c.X / s.zeta + s.phi * s.phi * s.xi);
    }
    s.E1m = mu * s.E1p;
    const cplx sq = s.E1p * s.E1p;
    s.E2p = s.nu * sq * (s.coupling.a + s.coupling.b * mu * mu);
    s.E2m = s.nu * sq * (s.coupling.b + s.coupling.a * mu * mu);
    return s;
}

// Fields at separation h on the symmetric resonance curve, mu at its
// bound-state limit. At phi = 0 the fields are extrapolated from the
// one-sided samples h + 1e-4 and h + 1e-5 assuming E(dh) = c0 + c1 dh^{1/3}.
inline NonlinearSolution solve_fields(double h, const StructureParams& params, cplx mu_limit = 1.0,
                                      const FieldOptions& opt = {}) {
    const double k = resonance_k(h, Parity::symmetric, params, opt.resonance);
    const double phi = std::cos(h * normal_wavenumber(k, params.kx));
    if (std::abs(phi) > opt.phi_zero) return solve_fields_at(h, k, params, mu_limit, opt);

    constexpr double d1 = 1e-4, d2 = 1e-5;
    const NonlinearSolution s1 = solve_fields(h + d1, params, mu_limit, opt);
    const NonlinearSolution s2 = solve_fields(h + d2, params, mu_limit, opt);
    const double r1 = std::cbrt(d1), r2 = std::cbrt(d2);
    auto extrap = [&](cplx v1, cplx v2) { return (v2 * r1 - v1 * r2) / (r1 - r2); };

    NonlinearSolution s = s2;
    s.h = h;
    s.k = k;
    s.kz = normal_wavenumber(k, params.kx);
    s.phi = 0.0;
    s.coupling = sh_coupling(h, k, params, opt.resonance.sums);
    const ZetaXi zx = zeta_xi(h, k, mu_limit, s.coupling, params);
    s.zeta = zx.zeta;
    s.xi = zx.xi;
    s.E1p = extrap(s1.E1p, s2.E1p);
    s.E1_abs = std::abs(s.E1p);
    s.E1m = mu_limit * s.E1p;
    const cplx sq = s.E1p * s.E1p;
    s.E2p = s.nu * sq * (s.coupling.a + s.coupling.b * mu_limit * mu_limit);
    s.E2m = s.nu * sq * (s.coupling.b + s.coupling.a * mu_limit * mu_limit);
    // phi = 0: tau_+ = (nu |zeta|)^{2/3}, tau_- = 0.
    s.tau_plus = std::cbrt(s.nu * s.nu * std::norm(s.zeta));
    s.tau_minus = 0.0;
    s.valid = s1.valid && s2.valid;
    s.from_limit = true;
    return s;
}

}  // namespace bicshg
