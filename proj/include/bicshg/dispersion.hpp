#pragma once

// Point-scatterer (subwavelength) description of the double array: channel
// wavenumbers, the self-action alpha, the cross-array coupling beta, and the
// far-field amplitudes radiated by the two cylinder rows.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <string>
#include <vector>

#include "bicshg/errors.hpp"
#include "bicshg/structure.hpp"

namespace bicshg {

struct SumOptions {
    double tol = 1e-10;               // absolute accuracy of the bracketed lattice sums
    double threshold_margin = 1e-6;   // min allowed |q - |qx + 2 pi m||
};

struct Channel {
    int m = 0;
    cplx qzm;        // real positive (open) or positive imaginary (closed)
    bool open = false;
};

struct ChannelSet {
    double q = 0.0;
    double qx = 0.0;
    std::vector<Channel> channels;  // ordered by m ascending

    [[nodiscard]] std::vector<Channel> open_channels() const {
        std::vector<Channel> out;
        std::copy_if(channels.begin(), channels.end(), std::back_inserter(out),
                     [](const Channel& c) { return c.open; });
        return out;
    }
    [[nodiscard]] std::size_t open_count() const {
        return static_cast<std::size_t>(
            std::count_if(channels.begin(), channels.end(), [](const Channel& c) { return c.open; }));
    }
};

// Two-case rule: sqrt(q^2 - t^2) on the positive real axis when the channel
// propagates, i*sqrt(t^2 - q^2) otherwise. Never a generic complex sqrt.
inline cplx channel_wavenumber(double q, double tangential) {
    const double t2 = tangential * tangential;
    const double q2 = q * q;
    if (q2 > t2) return {std::sqrt(q2 - t2), 0.0};
    return {0.0, std::sqrt(t2 - q2)};
}

inline cplx channel_wavenumber(double q, double qx, int m) {
    return channel_wavenumber(q, qx + two_pi * m);
}

// Distance of q to the nearest diffraction threshold |qx + 2 pi m|.
inline double threshold_distance(double q, double qx) {
    double best = std::abs(q - std::abs(qx));
    for (double target : {q, -q}) {
        const double mc = (target - qx) / two_pi;
        for (double m : {std::floor(mc), std::ceil(mc)})
            best = std::min(best, std::abs(q - std::abs(qx + two_pi * m)));
    }
    return best;
}

inline void check_threshold(double q, double qx, double margin) {
    const double d = threshold_distance(q, qx);
    if (d < margin)
        throw ThresholdProximity("q=" + std::to_string(q) + " lies within " + std::to_string(d) +
                                 " of a diffraction threshold (qx=" + std::to_string(qx) + ")");
}

inline ChannelSet channel_set(double q, double qx, int m_max, double margin = SumOptions{}.threshold_margin) {
    if (!(q > 0.0)) throw std::invalid_argument("channel_set: q must be positive");
    if (m_max < 0) throw std::invalid_argument("channel_set: m_max must be >= 0");
    check_threshold(q, qx, margin);
    ChannelSet cs{q, qx, {}};
    cs.channels.reserve(2 * static_cast<std::size_t>(m_max) + 1);
    for (int m = -m_max; m <= m_max; ++m) {
        const cplx qz = channel_wavenumber(q, qx, m);
        cs.channels.push_back({m, qz, qz.imag() == 0.0});
    }
    return cs;
}

// Smallest |m| range that contains every open channel at (q, qx).
inline int open_channel_reach(double q, double qx) {
    return static_cast<int>(std::ceil((q + std::abs(qx)) / two_pi)) + 1;
}

// m-th regularized term of the alpha series: 1/q_{z,m} - 1/(2 pi i (|m|+1)).
inline cplx alpha_term(double q, double qx, int m) {
    return 1.0 / channel_wavenumber(q, qx, m) - 1.0 / (two_pi * I * static_cast<double>(std::abs(m) + 1));
}

namespace detail {

// Closed-channel remainder of the alpha series on one side of m = 0,
//   f(n) = 1/sqrt((2 pi n + c)^2 - q^2) - 1/(2 pi (n + 1)),  n >= 1,
// where c = +qx for m = n and c = -qx for m = -n. The regularized term equals
// -i f(n). Derivatives are in n.
struct AlphaTail {
    double q;
    double c;

    [[nodiscard]] double y(double n) const { return two_pi * n + c; }

    [[nodiscard]] double f(double n) const {
        const double yy = y(n);
        return 1.0 / std::sqrt(yy * yy - q * q) - 1.0 / (two_pi * (n + 1.0));
    }
    [[nodiscard]] double d1(double n) const {
        const double yy = y(n), s = yy * yy - q * q;
        return -two_pi * yy / (s * std::sqrt(s)) + 1.0 / (two_pi * (n + 1.0) * (n + 1.0));
    }
    [[nodiscard]] double d3(double n) const {
        const double yy = y(n), s = yy * yy - q * q;
        const double h3 = -3.0 * yy * (2.0 * yy * yy + 3.0 * q * q) / (s * s * s * std::sqrt(s));
        const double np1 = n + 1.0;
        return two_pi * two_pi * two_pi * h3 + 6.0 / (two_pi * np1 * np1 * np1 * np1);
    }
    // Integral of f from n to infinity.
    [[nodiscard]] double integral(double n) const {
        return (std::log(2.0 * two_pi / q) - std::acosh(y(n) / q) + std::log(n + 1.0)) / two_pi;
    }
    // Euler-Maclaurin estimate of sum_{j > n} f(j).
    [[nodiscard]] double tail(double n) const {
        return integral(n) - 0.5 * f(n) - d1(n) / 12.0 + d3(n) / 720.0;
    }
    // Size of the first neglected Euler-Maclaurin correction is far below
    // the last retained one; the retained f''' term bounds the error.
    [[nodiscard]] double error_bound(double n) const { return std::abs(d3(n)) / 720.0; }
};

inline double alpha_truncation_bound(double q, double qx, int n) {
    return AlphaTail{q, qx}.error_bound(n) + AlphaTail{q, -qx}.error_bound(n);
}

}  // namespace detail

// Bracketed sum of the alpha series, sum_m alpha_term(m), accurate to tol.
// The explicit part runs over |m| <= M; the closed-channel remainder on each
// side is added through its Euler-Maclaurin expansion. M doubles until the
// remainder bound drops below tol.
inline cplx alpha_series(double q, double qx, double tol, int* m_used = nullptr) {
    int M = std::max(16, open_channel_reach(q, qx) + 4);
    while (detail::alpha_truncation_bound(q, qx, M) > 0.25 * tol) {
        if (M > (1 << 22)) throw NumericalError("alpha: truncation did not reach tol=" + std::to_string(tol));
        M *= 2;
    }
    cplx sum = alpha_term(q, qx, 0);
    for (int n = 1; n <= M; ++n) sum += alpha_term(q, qx, n) + alpha_term(q, qx, -n);
    const double tails = detail::AlphaTail{q, qx}.tail(M) + detail::AlphaTail{q, -qx}.tail(M);
    sum += -I * tails;
    if (m_used) *m_used = M;
    return sum;
}

// Self-action of a cylinder row on itself (the diagonal of the coupling matrix).
inline cplx alpha(double q, double qx, const StructureParams& params, const SumOptions& opt = {}) {
    if (!(opt.tol >= 1e-15)) throw std::invalid_argument("alpha: tol must be at least 1e-15");
    check_threshold(q, qx, opt.threshold_margin);
    const cplx s = alpha_series(q, qx, opt.tol);
    return two_pi * I * scattering_phase(q, params) * (s + (I / pi) * std::log(two_pi * params.R));
}

// Magnitude of the closed-channel beta term at index m, e^{-2h|q_zm|}/|q_zm|.
inline double beta_closed_magnitude(double q, double qx, double h, int m) {
    const cplx qz = channel_wavenumber(q, qx, m);
    return std::exp(-2.0 * h * qz.imag()) / std::abs(qz);
}

// Coupling between the rows at z = +h and z = -h.
inline cplx beta(double q, double qx, double h, const StructureParams& params, const SumOptions& opt = {}) {
    if (!(h > 0.0)) throw std::invalid_argument("beta: h must be positive");
    if (!(opt.tol >= 1e-15)) throw std::invalid_argument("beta: tol must be at least 1e-15");
    check_threshold(q, qx, opt.threshold_margin);

    auto term = [&](int m) {
        const cplx qz = channel_wavenumber(q, qx, m);
        return std::exp(2.0 * I * h * qz) / qz;
    };
    // Successive closed |q_zm| differ by at least 2 pi, so the tail after a
    // closed term t is bounded by t r / (1 - r), r = e^{-4 pi h}.
    const double r = std::exp(-4.0 * pi * h);
    const int reach = open_channel_reach(q, qx);
    constexpr int kMaxTerms = 10'000'000;

    cplx sum = term(0);
    for (int sign : {+1, -1}) {
        for (int n = 1;; ++n) {
            if (n > kMaxTerms) throw NumericalError("beta: closed-channel tail did not converge (h too small)");
            const int m = sign * n;
            sum += term(m);
            if (n > reach) {
                const double bound = beta_closed_magnitude(q, qx, h, m) * r / (1.0 - r);
                if (bound < 0.5 * opt.tol) break;
            }
        }
    }
    return two_pi * I * scattering_phase(q, params) * sum;
}

// Symmetric 2x2 action of the point-scatterer operator on the two values
// psi(0, +h), psi(0, -h): psi_pm -> alpha psi_pm + beta psi_mp.
struct CouplingMatrix {
    cplx alpha;
    cplx beta;
    double q = 0.0;
    double qx = 0.0;
    double h = 0.0;

    [[nodiscard]] cplx sym() const { return alpha + beta; }    // eigenvalue on (1, 1)
    [[nodiscard]] cplx antisym() const { return alpha - beta; }  // eigenvalue on (1, -1)

    // det(1 - H) = (1 - alpha - beta)(1 - alpha + beta)
    [[nodiscard]] cplx det_one_minus() const { return (1.0 - alpha) * (1.0 - alpha) - beta * beta; }

    [[nodiscard]] std::pair<cplx, cplx> apply(cplx plus, cplx minus) const {
        return {alpha * plus + beta * minus, beta * plus + alpha * minus};
    }
};

inline CouplingMatrix coupling_matrix(double q, double qx, double h, const StructureParams& params,
                                      const SumOptions& opt = {}) {
    return {alpha(q, qx, params, opt), beta(q, qx, h, params, opt), q, qx, h};
}

struct FarFieldAmplitude {
    int m = 0;
    double qzm = 0.0;
    cplx reflected;    // z -> -infinity
    cplx transmitted;  // z -> +infinity
};

// Outgoing plane-wave amplitudes in every open channel radiated by the two
// rows carrying values psi_plus at z = +h and psi_minus at z = -h.
inline std::vector<FarFieldAmplitude> far_field_coefficients(double q, double qx, double h, cplx psi_plus,
                                                             cplx psi_minus, const StructureParams& params,
                                                             double margin = SumOptions{}.threshold_margin) {
    const ChannelSet cs = channel_set(q, qx, open_channel_reach(q, qx), margin);
    const double d0 = scattering_phase(q, params);
    std::vector<FarFieldAmplitude> out;
    for (const Channel& c : cs.channels) {
        if (!c.open) continue;
        const double kz = c.qzm.real();
        const cplx up = std::exp(I * h * kz), down = std::exp(-I * h * kz);
        const cplx pref = two_pi * I * d0 / kz;
        out.push_back({c.m, kz, pref * (psi_plus * up + psi_minus * down),
                       pref * (psi_plus * down + psi_minus * up)});
    }
    return out;
}

}  // namespace bicshg
