#pragma once

// Brute-force reference solvers used to validate the closed-form pipeline.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "bicshg/flux.hpp"

namespace bicshg::oracle {

struct OracleConfig {
    int max_iter = 2000;
    double damping = 0.5;
    double tol = 1e-15;
    int newton_max_iter = 60;
    int homotopy_steps = 40;
    int sweep_points = 41;

    void validate() const {
        if (max_iter < 1) throw std::invalid_argument("OracleConfig: max_iter must be >= 1");
        if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("OracleConfig: damping must lie in (0, 1]");
        if (!(tol > 0.0)) throw std::invalid_argument("OracleConfig: tol must be positive");
    }
};

struct CoupledSolution {
    HarmonicFields fields;
    double residual = 0.0;  // max row residual / max(1, max |E|)
    int iterations = 0;
    bool converged = false;
    bool used_newton = false;
};

namespace detail {

using Vec4 = std::array<cplx, 4>;  // E1+, E1-, E2+, E2-

struct System {
    CouplingMatrix H;
    CouplingMatrix H2;
    double h = 0.0;
    double kz = 0.0;
    double nu = 0.0;

    [[nodiscard]] std::pair<cplx, cplx> source() const {
        return {std::exp(I * h * kz), std::exp(-I * h * kz)};
    }

    // Residuals of [1-H]E1 - 2 nu H[conj(E1) E2] - s and [1-H2]E2 - nu H2 E1^2.
    [[nodiscard]] Vec4 residual(const Vec4& x, double nu_) const {
        const auto [s_p, s_m] = source();
        const auto [h1p, h1m] = H.apply(x[0], x[1]);
        const auto [hrp, hrm] = H.apply(std::conj(x[0]) * x[2], std::conj(x[1]) * x[3]);
        const auto [h2p, h2m] = H2.apply(x[2], x[3]);
        const auto [hsp, hsm] = H2.apply(x[0] * x[0], x[1] * x[1]);
        return {x[0] - h1p - 2.0 * nu_ * hrp - s_p, x[1] - h1m - 2.0 * nu_ * hrm - s_m,
                x[2] - h2p - nu_ * hsp, x[3] - h2m - nu_ * hsm};
    }

    // Solve [1 - M] y = r for a symmetric coupling matrix M.
    static std::pair<cplx, cplx> solve(const CouplingMatrix& M, cplx rp, cplx rm) {
        const cplx a = 1.0 - M.alpha, b = -M.beta;
        const cplx det = a * a - b * b;
        return {(a * rp - b * rm) / det, (a * rm - b * rp) / det};
    }

    // One sweep of the fixed-point map.
    [[nodiscard]] Vec4 map(const Vec4& x, double nu_) const {
        const auto [s_p, s_m] = source();
        const auto [hrp, hrm] = H.apply(std::conj(x[0]) * x[2], std::conj(x[1]) * x[3]);
        const auto [e1p, e1m] = solve(H, s_p + 2.0 * nu_ * hrp, s_m + 2.0 * nu_ * hrm);
        const auto [hsp, hsm] = H2.apply(e1p * e1p, e1m * e1m);
        const auto [e2p, e2m] = solve(H2, nu_ * hsp, nu_ * hsm);
        return {e1p, e1m, e2p, e2m};
    }
};

inline double max_abs(const Vec4& r) {
    double m = 0.0;
    for (const cplx& v : r) {
        const double a = std::abs(v);
        if (!(a <= m)) m = a;  // NaN propagates
    }
    return m;
}

// Residual relative to the field scale (fields grow like 1/|phi| near h_b).
inline double scaled_residual(const System& sys, const Vec4& x, double nu_) {
    return max_abs(sys.residual(x, nu_)) / std::max(1.0, max_abs(x));
}

// Newton on the 8 real unknowns with a forward-difference Jacobian (the
// system is not holomorphic because of conj(E1)).
inline bool newton(const System& sys, Vec4& x, double nu_, double tol, int max_iter, int& iters) {
    auto pack = [](const Vec4& r) {
        Eigen::Matrix<double, 8, 1> v;
        for (int i = 0; i < 4; ++i) {
            v(2 * i) = r[i].real();
            v(2 * i + 1) = r[i].imag();
        }
        return v;
    };
    for (int it = 0; it < max_iter; ++it, ++iters) {
        const Vec4 r = sys.residual(x, nu_);
        if (scaled_residual(sys, x, nu_) < tol) return true;
        const auto F = pack(r);
        Eigen::Matrix<double, 8, 8> J;
        for (int j = 0; j < 8; ++j) {
            Vec4 xp = x;
            const double scale = std::max(1.0, std::abs(x[j / 2]));
            const double step = 1e-7 * scale;
            xp[j / 2] += (j % 2 == 0) ? cplx(step, 0.0) : cplx(0.0, step);
            J.col(j) = (pack(sys.residual(xp, nu_)) - F) / step;
        }
        const Eigen::Matrix<double, 8, 1> dx = J.fullPivLu().solve(-F);
        if (!dx.allFinite()) return false;
        for (int i = 0; i < 4; ++i) x[i] += cplx(dx(2 * i), dx(2 * i + 1));
    }
    return scaled_residual(sys, x, nu_) < tol;
}

}  // namespace detail

// Both matrix equations of the two-harmonic model solved directly for the four
// row values, without the field-ratio reduction. Damped fixed-point iteration
// from the linear solution; on stall, Newton continued in nu from zero.
inline CoupledSolution iterate_coupled_system(double h, double k, const StructureParams& params,
                                              const OracleConfig& cfg = {}, const SumOptions& sums = {}) {
    cfg.validate();
    require_shg_kx(params);
    detail::System sys{coupling_matrix(k, params.kx, h, params, sums),
                       coupling_matrix(2.0 * k, 2.0 * params.kx, h, params, sums), h,
                       normal_wavenumber(k, params.kx), params.nu()};

    CoupledSolution out;
    detail::Vec4 x = sys.map({0.0, 0.0, 0.0, 0.0}, 0.0);
    const detail::Vec4 linear = x;
    for (int it = 0; it < cfg.max_iter; ++it) {
        ++out.iterations;
        const detail::Vec4 next = sys.map(x, sys.nu);
        for (int i = 0; i < 4; ++i) x[i] = (1.0 - cfg.damping) * x[i] + cfg.damping * next[i];
        const double r = detail::scaled_residual(sys, x, sys.nu);
        if (!std::isfinite(r)) break;
        if (r < cfg.tol) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged) {
        out.used_newton = true;
        x = linear;
        bool ok = true;
        for (int s = 1; s <= cfg.homotopy_steps && ok; ++s) {
            // Geometric ramp: the solution changes fastest at small nu.
            const double frac = std::pow(1e-8, 1.0 - static_cast<double>(s) / cfg.homotopy_steps);
            const double nu_s = s == cfg.homotopy_steps ? sys.nu : sys.nu * frac;
            ok = detail::newton(sys, x, nu_s, s == cfg.homotopy_steps ? cfg.tol : 1e-9, cfg.newton_max_iter,
                                out.iterations);
        }
        out.converged = ok;
    }
    out.residual = detail::scaled_residual(sys, x, sys.nu);
    out.fields = {h, k, sys.nu, x[0], x[1], x[2], x[3]};
    if (!out.converged)
        throw NoConvergence("coupled system at h=" + std::to_string(h) + ": scaled residual " + std::to_string(out.residual));
    return out;
}

// All real roots of X^3 + c2 X^2 + c1 X + c0 by bisection between the
// critical points, inside the Cauchy bound.
inline std::vector<double> numeric_cubic_roots(double c2, double c1, double c0) {
    auto f = [&](double x) { return ((x + c2) * x + c1) * x + c0; };
    const double B = 1.0 + std::max({std::abs(c2), std::abs(c1), std::abs(c0)});
    std::vector<double> knots{-B};
    const double disc = c2 * c2 - 3.0 * c1;  // f' = 3x^2 + 2 c2 x + c1
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        const double r1 = c2 > 0.0 ? (-c2 - s) / 3.0 : (-c2 + s) / 3.0;
        const double r2 = r1 != 0.0 ? c1 / (3.0 * r1) : 0.0;
        knots.push_back(std::min(r1, r2));
        knots.push_back(std::max(r1, r2));
    }
    knots.push_back(B);

    std::vector<double> roots;
    auto add = [&](double x) {
        for (double r : roots)
            if (std::abs(r - x) <= 1e-12 * std::max(1.0, std::abs(x))) return;
        roots.push_back(x);
    };
    for (std::size_t i = 1; i + 1 < knots.size(); ++i)
        if (f(knots[i]) == 0.0) add(knots[i]);
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        double lo = knots[i], hi = knots[i + 1];
        double flo = f(lo), fhi = f(hi);
        if (flo == 0.0 || fhi == 0.0 || (flo > 0) == (fhi > 0)) continue;
        for (int it = 0; it < 2000; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            const double fm = f(mid);
            if (fm == 0.0) {
                lo = hi = mid;
                break;
            }
            ((fm > 0) == (flo > 0) ? lo : hi) = mid;
        }
        add(0.5 * (lo + hi));
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

struct SweepMaximum {
    double h_star = 0.0;
    double sigma2_star = 0.0;
};

// Maximum of sigma2(h) along the symmetric resonance curve inside
// [lo, hi] (one side of h_b): grid search then Brent refinement.
inline SweepMaximum sweep_argmax_sigma2(const StructureParams& params, double lo, double hi, int n_points,
                                        const FieldOptions& opt = {}) {
    if (!(hi > lo) || n_points < 3) throw std::invalid_argument("sweep_argmax_sigma2: bad window");
    auto s2 = [&](double h) {
        try {
            return sigma2(harmonic_fields(solve_fields(h, params, 1.0, opt)), params);
        } catch (const InvalidRegion&) {
            return 0.0;
        }
    };
    int best = 0;
    double best_val = -1.0;
    std::vector<double> hs(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        hs[i] = lo + (hi - lo) * i / (n_points - 1);
        const double v = s2(hs[i]);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    const double a = hs[std::max(0, best - 1)], b = hs[std::min(n_points - 1, best + 1)];
    const auto [x, fx] = roots::maximize_unimodal(s2, a, b, 48);
    return fx >= best_val ? SweepMaximum{x, fx} : SweepMaximum{hs[best], best_val};
}

// Direct partial sums of the regularized alpha series over |m| <= M and 2M,
// Richardson-extrapolated (the remainder decays like 1/M).
inline cplx alpha_reference(double q, double qx, const StructureParams& params, int M = 1 << 20) {
    auto partial = [&](int N) {
        long double re = 0.0L, im = 0.0L;
        for (int n = N; n >= 1; --n) {
            const cplx t = alpha_term(q, qx, n) + alpha_term(q, qx, -n);
            re += t.real();
            im += t.imag();
        }
        const cplx t0 = alpha_term(q, qx, 0);
        return cplx(static_cast<double>(re + t0.real()), static_cast<double>(im + t0.imag()));
    };
    const cplx s = 2.0 * partial(2 * M) - partial(M);
    return two_pi * I * scattering_phase(q, params) * (s + (I / pi) * std::log(two_pi * params.R));
}

}  // namespace bicshg::oracle
