#include "fraclim/equilibria.hpp"

#include <gtest/gtest.h>

using namespace fraclim;

namespace {

CollisionContext ctx_for(const CrossSection& cs, double alpha = 1.5, std::size_t n = 256) {
    return make_context(VelocityGrid::build(n, 400.0, 0.05, alpha), cs);
}

double max_diff(const VelocityProfile& a, const VelocityProfile& b) { return (a - b).max_abs(); }

} // namespace

TEST(SolveF, ZeroFieldIsM) {
    const auto c = ctx_for(CrossSection::constant(1.0));
    EXPECT_LT(max_diff(solve_F(0.0, c).profile, c.M), 1e-14);
    const auto p = ctx_for(CrossSection::perturbed(1.0, 0.5));
    const EquilibriumF F = solve_F(0.0, p);
    EXPECT_EQ(F.method, EquilibriumF::Method::PowerIteration);
    EXPECT_LT(max_diff(F.profile, p.M), 1e-8);
}

TEST(SolveF, ExplicitAgreesWithPowerIteration) {
    for (double alpha : {1.0, 1.5}) {
        const auto c = ctx_for(CrossSection::constant(1.0), alpha);
        for (double E : {0.5, -1.0}) {
            const EquilibriumF a = solve_F(E, c, FSolver::Explicit);
            const EquilibriumF b = solve_F(E, c, FSolver::PowerIteration);
            EXPECT_LT(max_diff(a.profile, b.profile), 1e-6 * a.profile.max_abs()) << alpha << " " << E;
            EXPECT_NEAR(b.eigenvalue, 1.0, 1e-6);
        }
    }
}

TEST(SolveF, ExplicitNeedsConstantKernel) {
    const auto p = ctx_for(CrossSection::perturbed(1.0, 0.5));
    EXPECT_THROW(solve_F(0.5, p, FSolver::Explicit), Error);
}

TEST(SolveF, NormalizedPositiveSmallResidual) {
    for (const auto& cs : {CrossSection::constant(1.0), CrossSection::perturbed(1.0, 0.5)}) {
        const auto c = ctx_for(cs);
        for (double E : {0.25, 1.0, -0.5}) {
            const EquilibriumF F = solve_F(E, c);
            EXPECT_NEAR(mass(F.profile), 1.0, 1e-12);
            for (std::size_t i = 0; i < F.profile.size(); ++i) EXPECT_GT(F.profile[i], 0.0);
            EXPECT_LT(F.residual, equilibrium_residual_tolerance);
            EXPECT_LT(F.residual, 1e-4 * F.profile.max_abs());
        }
    }
}

TEST(SolveF, ReflectionSymmetry) {
    const auto c = ctx_for(CrossSection::perturbed(1.0, 0.5));
    const EquilibriumF Fp = solve_F(0.5, c), Fm = solve_F(-0.5, c);
    const std::size_t n = Fp.profile.size();
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(Fp.profile[i], Fm.profile[n - 1 - i], 1e-9);
}

TEST(Bounds, FComparableToM) {
    const auto c = ctx_for(CrossSection::perturbed(1.0, 0.5));
    for (double E : {0.5, 1.0}) {
        const EquilibriumBounds b = equilibrium_bounds(solve_F(E, c), c);
        EXPECT_GT(b.min_ratio, 0.0);
        EXPECT_TRUE(std::isfinite(b.max_ratio));
        EXPECT_TRUE(std::isfinite(b.gradient_ratio));
    }
}

TEST(Lambda, ConstantKernelIsMinusDM) {
    const auto c = ctx_for(CrossSection::constant(1.0));
    const LambdaField L = solve_lambda(c);
    const VelocityProfile dM = dM_profile(c.grid);
    EXPECT_LT(max_diff(L.profile, -1.0 * dM), 1e-10);
    EXPECT_NEAR(mass(L.profile), 0.0, 1e-12);
}

TEST(Lambda, PerturbedKernelSolvesSystem) {
    const auto c = ctx_for(CrossSection::perturbed(1.0, 0.5));
    const LambdaField L = solve_lambda(c);
    EXPECT_NEAR(mass(L.profile), 0.0, 1e-12);
    EXPECT_LT(L.residual, 1e-10);
    const std::size_t n = L.profile.size();
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(L.profile[i], -L.profile[n - 1 - i], 1e-10);
}

TEST(Remainder, QuadraticInField) {
    for (const auto& cs : {CrossSection::constant(1.0), CrossSection::perturbed(1.0, 0.5)}) {
        const auto c = ctx_for(cs);
        const LambdaField L = solve_lambda(c);
        for (double E : {0.2, 0.1}) {
            const double ratio = remainder_G(E, c, L).l2_norm / remainder_G(0.5 * E, c, L).l2_norm;
            EXPECT_GE(ratio, 3.4) << E;
            EXPECT_LE(ratio, 4.6) << E;
        }
    }
}

TEST(Deviation, LinearInField) {
    const auto c = ctx_for(CrossSection::perturbed(1.0, 0.5));
    const double ratio = deviation_R(0.2, c).bound_ratio / deviation_R(0.1, c).bound_ratio;
    EXPECT_GE(ratio, 1.6);
    EXPECT_LE(ratio, 2.4);
}

TEST(Drift, ConstantKernelMuEqualsField) {
    const auto c = ctx_for(CrossSection::constant(1.0), 1.0);
    for (double E : {0.25, 0.5, 1.0}) EXPECT_NEAR(drift_mu(E, c), E, 1e-4 * E) << E;
    EXPECT_EQ(drift_mu(0.0, c), 0.0);
}

TEST(Drift, PerturbedRoutesAgree) {
    const auto c = ctx_for(CrossSection::perturbed(1.0, 0.5), 1.0);
    for (double E : {0.5, -1.0}) {
        const EquilibriumF F = solve_F(E, c);
        EXPECT_NEAR(drift_mu(F, c), drift_mu_stationary(F, c), 1e-3 * std::abs(E));
    }
}

TEST(Drift, OddInField) {
    const auto c = ctx_for(CrossSection::perturbed(1.0, 0.5), 1.0);
    EXPECT_NEAR(drift_mu(0.5, c), -drift_mu(-0.5, c), 1e-9);
}

TEST(FieldDerivative, FiniteStableOdd) {
    const auto c = ctx_for(CrossSection::perturbed(1.0, 0.5));
    const DEReport r = check_dE_F(0.5, c);
    EXPECT_TRUE(r.dEF.finite());
    EXPECT_TRUE(r.stable);
    const DEReport z = check_dE_F(0.0, c);
    const std::size_t n = z.dEF.size();
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(z.dEF[i], -z.dEF[n - 1 - i], 1e-7);
    // dF/dE at E = 0 is lambda
    const LambdaField L = solve_lambda(c);
    EXPECT_LT(max_diff(z.dEF, L.profile), 1e-4 * L.profile.max_abs());
}
