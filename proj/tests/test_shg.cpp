#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bicshg/flux.hpp"
#include "bicshg/oracle.hpp"

using namespace bicshg;

namespace {

const StructureParams kBase{0.1, 2.0, 1e-4, 0.0};

struct NearBic {
    BoundState bs;
    BicConstants c;
};

NearBic near_bic(const StructureParams& p) {
    const BoundState bs = find_bound_state(1, Parity::symmetric, p);
    return {bs, bic_constants(bs, p)};
}

}  // namespace

TEST(SHCouplingTest, ChannelSumsMatchImaginaryPart) {
    // Im{alpha2 + beta2} = 16 pi delta0(k) sum cos^2/kzm is exact, not a
    // small-radius statement.
    for (double kx : {0.0, 0.3, 1.2})
        for (double h : {0.2, 0.45, 0.8}) {
            const StructureParams p{0.12, 2.5, 0.0, kx};
            const double k = 5.5 - kx;
            const SHCoupling c = sh_coupling(h, k, p);
            EXPECT_NEAR(c.Sc, (c.alpha2 + c.beta2).imag(), 1e-9) << kx << " " << h;
            EXPECT_NEAR(c.Ss, (c.alpha2 - c.beta2).imag(), 1e-9) << kx << " " << h;
        }
}

TEST(SHCouplingTest, ResolventMatchesDirectInverse) {
    const StructureParams p{0.1, 2.0, 0.0, 0.2};
    const SHCoupling c = sh_coupling(0.3, 5.9, p);
    const cplx A = c.alpha2, B = c.beta2;
    const cplx det = (1.0 - A) * (1.0 - A) - B * B;
    const cplx a = ((1.0 - A) * A + B * B) / det;
    const cplx b = B / det;
    EXPECT_LT(std::abs(c.a - a), 1e-12);
    EXPECT_LT(std::abs(c.b - b), 1e-12);
    EXPECT_LT(std::abs(c.det - det), 1e-12);
}

TEST(SHCouplingTest, VanishingCouplingGivesZeroResolvent) {
    const SHCoupling c = resolvent_entries(0.0, 0.0);
    EXPECT_EQ(c.a, cplx(0.0));
    EXPECT_EQ(c.b, cplx(0.0));
    EXPECT_THROW(resolvent_entries(1.0, 0.0), SecondHarmonicResonance);
}

TEST(SHCouplingTest, RejectsObliqueBeyondQuarter) {
    EXPECT_THROW(sh_coupling(0.3, 4.0, {0.1, 2.0, 0.0, 1.8}), std::invalid_argument);
}

TEST(SHCouplingTest, EigenvaluesNearBoundState) {
    // Re(alpha2 + beta2) - 2 is O(delta0); Re(alpha2 - beta2) is
    // O(delta0 ln delta0) and shrinks with R.
    double prev_minus = 0.0;
    for (double R : {0.1, 0.05, 0.02, 0.01}) {
        const NearBic nb = near_bic({R, 2.0, 1e-4, 0.0});
        const double d0 = nb.c.delta0;
        const double psi_plus = (nb.c.coupling.alpha2 + nb.c.coupling.beta2).real();
        const double psi_minus = (nb.c.coupling.alpha2 - nb.c.coupling.beta2).real();
        EXPECT_LE(std::abs(psi_plus - 2.0), 8.0 * d0) << "R=" << R;
        EXPECT_LE(std::abs(psi_minus), 10.0 * d0 * std::abs(std::log(d0))) << "R=" << R;
        if (prev_minus > 0.0) EXPECT_LT(psi_minus, prev_minus);
        prev_minus = psi_minus;
    }
}

TEST(ZetaXiTest, BoundStateValues) {
    const NearBic nb = near_bic(kBase);
    EXPECT_NEAR(nb.c.xi_b.real(), 0.0, 1e-15);
    EXPECT_NEAR(nb.c.xi_b.imag(), 4.0 * pi * nb.c.delta0 / nb.bs.kzb, 1e-14);
    // At phi = 0, mu = 1 the general expression reduces to 1/(2(a+b)).
    const ZetaXi zx = zeta_xi(nb.bs.hb, nb.bs.kb, 1.0, nb.c.coupling, kBase);
    EXPECT_LT(std::abs(zx.zeta - nb.c.zeta_b), 1e-6 * std::abs(nb.c.zeta_b));
    EXPECT_LT(std::abs(zx.xi - nb.c.xi_b), 1e-12);
}

TEST(ZetaXiTest, SmallRadiusLimit) {
    // zeta_b -> -1/4 - 2 pi i delta0 sum cos^2/kzm, with an O(delta0) error.
    for (double R : {0.01, 0.03, 0.1})
        for (double kx : {0.0, 0.3}) {
            const NearBic nb = near_bic({R, 2.0, 1e-4, kx});
            const cplx approx = -0.25 - 2.0 * pi * I * nb.c.delta0 * nb.c.cos_sum;
            EXPECT_LE(std::abs(nb.c.zeta_b - approx), nb.c.delta0) << "R=" << R << " kx=" << kx;
        }
}

TEST(ZetaXiTest, PositivityCombination) {
    // |w|^2 - 2 Re w^2 approaches 3 pi^2 delta0^2 / kzb^2.
    for (double R : {0.01, 0.03, 0.1}) {
        const NearBic nb = near_bic({R, 2.0, 1e-4, 0.0});
        const cplx w = nb.c.w();
        const double pos = std::norm(w) - 2.0 * (w * w).real();
        EXPECT_GT(pos, 0.0);
        const double b4 = 3.0 * pi * pi * nb.c.delta0 * nb.c.delta0 / (nb.bs.kzb * nb.bs.kzb);
        EXPECT_LE(std::abs(pos / b4 - 1.0), 10.0 * nb.c.delta0) << "R=" << R;
    }
}

TEST(CubicTest, CoefficientsRealAndConstantTermVanishesAtPhiZero) {
    const NearBic nb = near_bic(kBase);
    const CubicCoefficients cc = cubic_coefficients(0.0, 1e-3, nb.c.zeta_b, nb.c.xi_b);
    EXPECT_EQ(cc.c2, 0.0);
    EXPECT_EQ(cc.c1, 0.0);
    EXPECT_EQ(cc.c0, 0.0);
    EXPECT_THROW(cubic_coefficients(0.1, 0.0, nb.c.zeta_b, nb.c.xi_b), std::invalid_argument);
}

TEST(CubicTest, DepressedRootEdgeCases) {
    EXPECT_EQ(depressed_cubic_real_root(0.0, 0.0), 0.0);
    EXPECT_NEAR(depressed_cubic_real_root(0.0, -8.0), 2.0, 1e-15);
    const double y = depressed_cubic_real_root(3.0, 5.0);
    EXPECT_NEAR(y * y * y + 3.0 * y + 5.0, 0.0, 1e-13);
}

TEST(CubicTest, WeakNonlinearityRecoversLinearModulus) {
    const NearBic nb = near_bic(kBase);
    const double phi = 0.05;
    const CardanoResult r = cardano_unique_root(phi, 1e-9, nb.c.zeta_b, nb.c.xi_b);
    EXPECT_NEAR(std::sqrt(r.X), 1.0 / std::abs(phi * nb.c.xi_b), 1e-6 / std::abs(phi * nb.c.xi_b));
}

TEST(CardanoTest, RandomAgainstNumericRoots) {
    const NearBic nb = near_bic(kBase);
    std::mt19937_64 rng(20261019);
    std::uniform_real_distribution<double> uphi(-0.5, 0.5), ulognu(std::log(1e-8), std::log(1e-2)),
        upert(-0.1, 0.1);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        double phi = uphi(rng);
        if (std::abs(phi) < 1e-4) phi = 1e-4;
        const double nu = std::exp(ulognu(rng));
        const cplx zeta = nb.c.zeta_b * cplx(1.0 + upert(rng), upert(rng));
        const cplx xi = nb.c.xi_b * cplx(1.0 + upert(rng), upert(rng));
        const CardanoResult r = cardano_analysis(phi, nu, zeta, xi);
        ASSERT_TRUE(r.valid) << "phi=" << phi << " nu=" << nu;
        // Compare in the scaled variable u = (nu/phi)^2 X, where the cubic
        // is u |u + zeta xi|^2 = nu^2 |zeta|^2 / phi^4.
        const cplx w = zeta * xi;
        const double t = nu * nu * std::norm(zeta) / std::pow(phi, 4);
        const auto roots = oracle::numeric_cubic_roots(2.0 * w.real(), std::norm(w), -t);
        ASSERT_EQ(roots.size(), 1u);
        const double s2 = (phi / nu) * (phi / nu);
        const double u = r.X / s2, u_cf = r.X_closed_form / s2;
        EXPECT_LE(std::abs(u - roots[0]), 1e-10 * std::max(1.0, roots[0]));
        EXPECT_LE(std::abs(u_cf - roots[0]), 1e-8 * std::max(1.0, roots[0]));
        ++checked;
    }
    EXPECT_EQ(checked, 1000);
}

TEST(CardanoTest, DiscriminantFactorization) {
    const NearBic nb = near_bic(kBase);
    for (double phi : {-0.3, -0.02, 0.001, 0.05, 0.4})
        for (double nu : {1e-7, 1e-5, 1e-3}) {
            const CardanoResult r = cardano_analysis(phi, nu, nb.c.zeta_b, nb.c.xi_b);
            EXPECT_GE(r.D3, 0.0);
            EXPECT_NEAR(r.D3_factorized / r.D3, 1.0, 1e-8) << phi << " " << nu;
            EXPECT_GE(r.tau_sum(), 0.0);
            EXPECT_TRUE(r.valid);
            // tau_+ + tau_- is |phi|^{4/3} times the scaled root.
            const double u = (nu / phi) * (nu / phi) * r.X;
            EXPECT_NEAR(r.tau_sum(), std::cbrt(std::pow(phi, 4)) * u, 1e-8 * std::max(1.0, r.tau_sum()));
        }
}

TEST(CardanoTest, RejectsDegenerateArguments) {
    const NearBic nb = near_bic(kBase);
    EXPECT_THROW(cardano_analysis(0.0, 1e-4, nb.c.zeta_b, nb.c.xi_b), std::invalid_argument);
    EXPECT_THROW(cardano_analysis(0.1, -1.0, nb.c.zeta_b, nb.c.xi_b), std::invalid_argument);
}

TEST(FieldsTest, LinearCaseHasNoSecondHarmonic) {
    const StructureParams p = kBase.with_chi(0.0);
    const NearBic nb = near_bic(p);
    const NonlinearSolution s = solve_fields(nb.bs.hb + 0.01, p);
    EXPECT_EQ(s.E2p, cplx(0.0));
    EXPECT_EQ(s.E2m, cplx(0.0));
    EXPECT_NEAR(s.E1_abs, 1.0 / std::abs(s.phi * s.xi), 1e-12 * s.E1_abs);
}

TEST(FieldsTest, ImplicitEquationResidual) {
    const NearBic nb = near_bic(kBase);
    for (double dh : {-0.05, -0.003, -1e-4, 1e-4, 0.002, 0.04}) {
        const NonlinearSolution s = solve_fields(nb.bs.hb + dh, kBase);
        EXPECT_TRUE(s.valid);
        EXPECT_LT(s.implicit_residual(), 1e-8) << "dh=" << dh;
    }
}

TEST(FieldsTest, FundamentalVanishesLikeCubeRootOfPhi) {
    // Close to h_b, X ~ |phi|^{2/3}.
    const NearBic nb = near_bic(kBase);
    std::vector<double> phis, es;
    for (double dh : {1e-7, 1e-8, 1e-9}) {
        const NonlinearSolution s = solve_fields(nb.bs.hb + dh, kBase);
        phis.push_back(std::abs(s.phi));
        es.push_back(s.E1_abs);
    }
    const double slope = std::log(es[2] / es[0]) / std::log(phis[2] / phis[0]);
    EXPECT_NEAR(slope, 1.0 / 3.0, 0.02);
}

TEST(FieldsTest, SecondHarmonicRatioScalesWithNu) {
    const NearBic nb = near_bic(kBase);
    const double h = nb.bs.hb + 0.02;
    const double r1 = solve_fields(h, kBase.with_chi(1e-6)).e2_ratio();
    const double r2 = solve_fields(h, kBase.with_chi(1e-5)).e2_ratio();
    EXPECT_NEAR(r2 / r1, 10.0, 0.1);
}

TEST(FieldsTest, LimitPathAtBoundState) {
    const NearBic nb = near_bic(kBase);
    FieldOptions opt;
    opt.phi_zero = 1e-9;
    const NonlinearSolution s = solve_fields(nb.bs.hb, kBase, 1.0, opt);
    EXPECT_TRUE(s.from_limit);
    EXPECT_TRUE(std::isfinite(s.E1_abs));
    EXPECT_NEAR(s.tau_plus, std::cbrt(s.nu * s.nu * std::norm(s.zeta)), 1e-15);
    EXPECT_EQ(s.tau_minus, 0.0);
    // The one-sided fields shrink toward the limit.
    const double e4 = solve_fields(nb.bs.hb + 1e-4, kBase).E1_abs;
    const double e5 = solve_fields(nb.bs.hb + 1e-5, kBase).E1_abs;
    EXPECT_LT(std::abs(s.E1_abs - e5), std::abs(s.E1_abs - e4));
}

TEST(FieldsTest, ExactPhiZeroRejectedAtFixedK) {
    const NearBic nb = near_bic(kBase);
    EXPECT_THROW(solve_fields_at(nb.bs.hb, nb.bs.kb, kBase), std::invalid_argument);
}
