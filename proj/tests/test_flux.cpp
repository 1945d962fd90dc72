#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bicshg/flux.hpp"
#include "bicshg/oracle.hpp"

using namespace bicshg;

namespace {

const StructureParams kBase{0.1, 2.0, 1e-4, 0.0};

BicConstants constants(const StructureParams& p) { return bic_constants(find_bound_state(1, Parity::symmetric, p), p); }

}  // namespace

TEST(Amplitudes, SecondHarmonicVanishesWithoutNonlinearity) {
    const StructureParams p = kBase.with_chi(0.0);
    const BicConstants c = constants(p);
    const NonlinearSolution s = solve_fields(c.bs.hb + 0.01, p);
    for (const SHAmplitude& a : sh_amplitudes(harmonic_fields(s), p)) {
        EXPECT_EQ(a.R, cplx(0.0));
        EXPECT_EQ(a.T, cplx(0.0));
    }
    EXPECT_EQ(sigma2(harmonic_fields(s), p), 0.0);
}

TEST(Amplitudes, SymmetricFieldsRadiateEquallyBothWays) {
    const BicConstants c = constants(kBase);
    const NonlinearSolution s = solve_fields(c.bs.hb + 0.005, kBase);
    const auto amps = sh_amplitudes(harmonic_fields(s), kBase);
    EXPECT_EQ(amps.size(), 3u);
    for (const SHAmplitude& a : amps) EXPECT_LT(std::abs(a.R - a.T), 1e-14 * std::max(1.0, std::abs(a.R)));
}

TEST(Amplitudes, AgreeWithGenericFarField) {
    const HarmonicFields f{0.3, 5.9, 0.01, {0.3, -0.2}, {-0.1, 0.4}, {0.05, 0.02}, {-0.03, 0.07}};
    const StructureParams p{0.1, 2.0, 0.0, 0.25};
    const auto amps = sh_amplitudes(f, p);
    const auto ref = far_field_coefficients(2.0 * f.k, 2.0 * p.kx, f.h, f.E2p + f.nu * f.E1p * f.E1p,
                                            f.E2m + f.nu * f.E1m * f.E1m, p);
    ASSERT_EQ(amps.size(), ref.size());
    for (std::size_t i = 0; i < amps.size(); ++i) {
        EXPECT_EQ(amps[i].m, ref[i].m);
        EXPECT_LT(std::abs(amps[i].R - ref[i].reflected), 1e-15);
        EXPECT_LT(std::abs(amps[i].T - ref[i].transmitted), 1e-15);
    }
}

TEST(Amplitudes, SigmaTwoInvariantUnderChannelMirror) {
    // At kx = 0 the m and -m channels carry identical flux.
    const BicConstants c = constants(kBase);
    const auto amps = sh_amplitudes(harmonic_fields(solve_fields(c.bs.hb - 0.004, kBase)), kBase);
    const SHAmplitude* plus = nullptr;
    const SHAmplitude* minus = nullptr;
    for (const auto& a : amps) {
        if (a.m == 1) plus = &a;
        if (a.m == -1) minus = &a;
    }
    ASSERT_TRUE(plus && minus);
    EXPECT_NEAR(std::norm(plus->R), std::norm(minus->R), 1e-14);
    EXPECT_NEAR(std::norm(plus->T), std::norm(minus->T), 1e-14);
}

TEST(Conservation, LinearUnitarityOffResonance) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uh(0.1, 1.0), uk(0.3, 6.0), ukx(0.0, 0.2);
    for (int i = 0; i < 20; ++i) {
        const StructureParams p{0.1, 2.0, 0.0, ukx(rng)};
        const double k = std::max(uk(rng), p.kx + 0.1);
        const auto sol = oracle::iterate_coupled_system(uh(rng), k, p);
        EXPECT_NEAR(sigma1(sol.fields, p), 1.0, 1e-10);
    }
}

TEST(Conservation, FullReflectionOnResonanceCurve) {
    const StructureParams p = kBase.with_chi(0.0);
    const BicConstants c = constants(p);
    const NonlinearSolution s = solve_fields(c.bs.hb + 1e-5, p);
    const FundamentalAmplitudes a = fundamental_amplitudes(harmonic_fields(s), p);
    EXPECT_NEAR(std::abs(a.R0), 1.0, 1e-4);
    EXPECT_LT(std::abs(1.0 + a.T0), 1e-2);
}

TEST(Conservation, NonlinearBalanceIsExact) {
    const BicConstants c = constants(kBase);
    for (double dh : {-0.02, -1e-3, -1e-5, 1e-5, 1e-3, 0.02}) {
        const NonlinearSolution s = solve_fields(c.bs.hb + dh, kBase);
        const ConservationReport r = conservation_check(s, c, kBase);
        EXPECT_NEAR(r.total(), 1.0, 1e-10) << "dh=" << dh;
        EXPECT_GE(r.sigma1, 0.0);
        EXPECT_GE(r.sigma2, 0.0);
        EXPECT_LE(r.sigma2, 1.0);
        EXPECT_TRUE(r.correction_negative);
    }
}

TEST(Conservation, ViolationIsReported) {
    const BicConstants c = constants(kBase);
    NonlinearSolution s = solve_fields(c.bs.hb + 0.01, kBase);
    s.E1p *= 2.0;
    s.E1m *= 2.0;
    EXPECT_THROW(conservation_check(s, c, kBase), ConservationViolation);
}

TEST(Conservation, BracketIdentity) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
        const cplx a(u(rng), u(rng)), b(u(rng), u(rng));
        if (std::abs(1.0 + a + b) < 1e-3) continue;
        EXPECT_LT(std::abs(ab_bracket(a, b)), 1e-12 * std::max(1.0, std::norm(1.0 + a + b)));
    }
}

TEST(BicConstantsTest, TwoPrefactorFormsAgree) {
    // delta0(2k) = 4 delta0(k), so (4 pi delta0(2k))^2 = (16 pi delta0(k))^2.
    for (double R : {0.05, 0.1, 0.15}) {
        const BicConstants c = constants({R, 2.0, 1e-4, 0.0});
        EXPECT_NEAR(c.Cb_from_amplitudes / c.Cb, 1.0, 1e-13);
        EXPECT_NEAR(c.Cb_prime, c.Cb * std::norm(c.zeta_b), 1e-15);
    }
}

TEST(BicConstantsTest, InverseZetaNearMinusFour) {
    for (double R : {0.01, 0.03, 0.1}) {
        const BicConstants c = constants({R, 2.0, 1e-4, 0.0});
        const cplx inv = 1.0 / c.zeta_b;
        EXPECT_LE(std::abs(inv.real() + 4.0), 20.0 * c.delta0) << "R=" << R;
    }
}

TEST(BicConstantsTest, AntisymmetricRejected) {
    const StructureParams p{0.08, 2.0, 1e-4, 0.0};
    EXPECT_THROW(bic_constants(find_bound_state(2, Parity::antisymmetric, p), p), std::invalid_argument);
}

TEST(Efficiency, PrincipalPartMatchesFullSigmaTwo) {
    const BicConstants c = constants(kBase);
    auto deviation = [&](double dh) {
        const NonlinearSolution s = solve_fields(c.bs.hb + dh, kBase);
        const double u = std::pow(s.nu * s.E1_abs / s.phi, 2);
        const double model = sigma2_of_u(u, c.Cb_prime, c.zeta_b, c.xi_b);
        return std::abs(model / sigma2(harmonic_fields(s), kBase) - 1.0);
    };
    for (double dh : {-5e-4, -1e-4, 1e-4, 5e-4}) EXPECT_LT(deviation(dh), 1e-2) << "dh=" << dh;
    EXPECT_LT(deviation(1e-4), deviation(1e-3));
}

TEST(Efficiency, MaximumAtModulusOfW) {
    const BicConstants c = constants(kBase);
    const double um = std::abs(c.w());
    const double best = sigma2_max(c);
    for (double f : {0.5, 0.9, 0.99, 1.01, 1.1, 2.0})
        EXPECT_LT(sigma2_of_u(f * um, c.Cb_prime, c.zeta_b, c.xi_b), best);
    EXPECT_THROW(sigma2_of_u(-1.0, c.Cb_prime, c.zeta_b, c.xi_b), std::invalid_argument);
}

TEST(Efficiency, EstimatesAtSmallRadius) {
    const StructureParams p{0.03, 2.0, 1e-4, 0.0};
    const EfficiencyEstimates e = efficiency_estimates(constants(p), p);
    EXPECT_TRUE(e.subwavelength_ok);
    EXPECT_GT(e.exact, 0.0);
    EXPECT_LE(e.exact, 1.0);
    EXPECT_LE(e.m0, e.leading);
    EXPECT_NEAR(e.exact / e.leading, 1.0, 0.2);
}

TEST(Efficiency, IndependentOfNonlinearCoefficient) {
    const double s1 = sigma2_max(constants(kBase.with_chi(1e-5)));
    const double s2 = sigma2_max(constants(kBase.with_chi(1e-3)));
    EXPECT_NEAR(s1, s2, 1e-12);
}

TEST(Optimal, MatchesSweepMaximum) {
    const BicConstants c = constants(kBase);
    const OptimalDistance od = optimal_distance(c, kBase);
    EXPECT_LT(std::abs(od.condition_residual), 1e-8);
    for (const OptimalSide* s : {&od.below, &od.above}) {
        const double lo = s->dh < 0 ? c.bs.hb + 4.0 * s->dh : c.bs.hb + 0.25 * s->dh;
        const double hi = s->dh < 0 ? c.bs.hb + 0.25 * s->dh : c.bs.hb + 4.0 * s->dh;
        const oracle::SweepMaximum m = oracle::sweep_argmax_sigma2(kBase, lo, hi, 41);
        EXPECT_NEAR((m.h_star - c.bs.hb) / s->dh, 1.0, 0.05);
        EXPECT_NEAR(m.sigma2_star / s->sigma2, 1.0, 1e-3);
    }
}

TEST(Optimal, LocalMaximum) {
    const BicConstants c = constants(kBase);
    const OptimalDistance od = optimal_distance(c, kBase);
    for (const OptimalSide* s : {&od.below, &od.above})
        for (double f : {0.8, 1.25}) {
            const double h = c.bs.hb + f * s->dh;
            EXPECT_LT(sigma2(harmonic_fields(solve_fields(h, kBase)), kBase), s->sigma2);
        }
}

TEST(Optimal, DistanceScalesWithSquareRootOfChi) {
    const BicConstants c = constants(kBase);
    const double d1 = optimal_distance(c, kBase.with_chi(1e-5)).above.dh;
    const double d2 = optimal_distance(c, kBase.with_chi(1e-3)).above.dh;
    EXPECT_NEAR(d2 / d1, 10.0, 0.2);
}

TEST(Optimal, EfficiencyIndependentOfChi) {
    const BicConstants c = constants(kBase);
    // The field value at the optimum approaches sigma2_max as the optimal
    // distance (and with it the correction) shrinks with chi.
    double prev = 1e300;
    for (double chi : {1e-3, 1e-4, 1e-5}) {
        const OptimalDistance od = optimal_distance(c, kBase.with_chi(chi));
        const double dev = std::abs(od.above.sigma2 / sigma2_max(c) - 1.0);
        EXPECT_LT(dev, prev) << "chi=" << chi;
        EXPECT_GE(od.above.tau_sum, 0.0);
        prev = dev;
    }
    EXPECT_LT(prev, 1e-2);
}

TEST(Optimal, StrongNonlinearityHasNoNearbyOptimum) {
    const BicConstants c = constants(kBase);
    EXPECT_THROW(optimal_distance(c, kBase.with_chi(5.0)), OutsideValidity);
}

TEST(Optimal, RequiresNonlinearity) {
    const BicConstants c = constants(kBase);
    EXPECT_THROW(optimal_distance(c, kBase.with_chi(0.0)), std::invalid_argument);
}
