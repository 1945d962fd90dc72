#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bicshg {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// Geometry and material of the double array. Lengths are in units of the
// array period; the incident amplitude is fixed to one.
struct StructureParams {
    double R = 0.1;      // cylinder radius, 0 < R < 1/2
    double eps_c = 2.0;  // linear dielectric constant, > 1
    double chi_c = 0.0;  // second-order susceptibility, >= 0
    double kx = 0.0;     // Bloch momentum, 0 <= kx < pi

    // Reduced nonlinear coupling nu = chi_c / (4 pi (eps_c - 1)).
    [[nodiscard]] double nu() const { return chi_c / (4.0 * pi * (eps_c - 1.0)); }

    void validate() const {
        if (!(R > 0.0 && R < 0.5))
            throw std::invalid_argument("StructureParams: R must lie in (0, 0.5), got " + std::to_string(R));
        if (!(eps_c > 1.0))
            throw std::invalid_argument("StructureParams: eps_c must exceed 1, got " + std::to_string(eps_c));
        if (!(chi_c >= 0.0) || !std::isfinite(chi_c))
            throw std::invalid_argument("StructureParams: chi_c must be finite and >= 0");
        if (!(kx >= 0.0 && kx < pi))
            throw std::invalid_argument("StructureParams: kx must lie in [0, pi), got " + std::to_string(kx));
    }

    [[nodiscard]] StructureParams with_chi(double chi) const {
        StructureParams p = *this;
        p.chi_c = chi;
        return p;
    }
};

// Scattering phase of a plane wave with wavenumber q on one cylinder.
inline double scattering_phase(double q, const StructureParams& params) {
    if (q < 0.0) throw std::invalid_argument("scattering_phase: q must be >= 0");
    const double qR = q * params.R;
    return qR * qR * (params.eps_c - 1.0) / 4.0;
}

// Normal wavenumber of the single open fundamental channel.
inline double normal_wavenumber(double k, double kx) { return std::sqrt(k * k - kx * kx); }

// Upper edge of the one-open-channel window for the fundamental harmonic.
inline double diffraction_threshold(double kx) { return two_pi - kx; }

}  // namespace bicshg
