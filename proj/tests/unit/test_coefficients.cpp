#include "fraclim/coefficients.hpp"
#include "fraclim/macro_spectral.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace fraclim;

namespace {

CollisionContext ctx_for(const CrossSection& cs, double alpha = 1.5, std::size_t n = 256) {
    return make_context(VelocityGrid::build(n, 400.0, 0.05, alpha), cs);
}

} // namespace

TEST(Constant, CauchyValue) { EXPECT_NEAR(c_d_alpha(1, 1.0), 1.0 / std::numbers::pi, 1e-15); }

/// The Gamma pole sits in the denominator, so the constant vanishes as alpha approaches 2.
TEST(Constant, VanishesNearTwo) {
    EXPECT_LT(c_d_alpha(1, 1.99), 0.1 * c_d_alpha(1, 1.5));
    EXPECT_NEAR(c_d_alpha(1, 1.99) / (1.0 - 0.5 * 1.99), 1.99 * std::pow(2.0, 0.99) * std::tgamma(1.495) / std::sqrt(std::numbers::pi), 2e-2);
}

TEST(Constant, RejectsBadInputs) {
    EXPECT_THROW(c_d_alpha(1, 2.0), Error);
    EXPECT_THROW(c_d_alpha(0, 1.5), Error);
}

TEST(Constant, SingularIntegralReproducesSymbol) {
    for (double alpha : {1.25, 1.5, 1.75}) {
        for (double k : {1.0, 2.0}) {
            SingularIntegralOptions opt;
            opt.r_far = 400.0;
            const double x = 0.3;
            const double got = frac_laplacian_singular([k](double y) { return std::cos(k * y); }, x, alpha, opt);
            EXPECT_NEAR(got, std::pow(k, alpha) * std::cos(k * x), 1e-4) << alpha << " " << k;
        }
    }
}

TEST(TailConstant, CauchyAndStudent) {
    EXPECT_NEAR(gamma_of_M(1.0), 1.0 / std::numbers::pi, 1e-14);
    for (double alpha : {1.0, 1.5, 1.9}) {
        const double V = 1e6;
        EXPECT_NEAR(std::pow(V, 1.0 + alpha) * eval_M(V, alpha), gamma_of_M(alpha), 1e-9 * gamma_of_M(alpha));
    }
}

TEST(Kappa, CriticalCaseIsOne) { EXPECT_NEAR(kappa(1.0, 1.0, gamma_of_M(1.0)), 1.0, 1e-12); }

TEST(Kappa, CollisionRateScaling) {
    for (double alpha : {1.0, 1.3, 1.5, 1.8}) {
        const double g = gamma_of_M(alpha);
        EXPECT_NEAR(kappa(alpha, 2.0, g) / kappa(alpha, 1.0, g), std::pow(2.0, 1.0 - alpha), 1e-12);
    }
}

TEST(Kappa, ClosedFormMatchesQuadrature) {
    for (double alpha : {1.0, 1.2, 1.5, 1.9}) {
        const double g = gamma_of_M(alpha);
        EXPECT_NEAR(kappa_closed_form(alpha, 1.3, g), kappa_quadrature(alpha, 1.3, g), 1e-10 * kappa_closed_form(alpha, 1.3, g));
    }
}

TEST(Kappa, RejectsNonPositive) {
    EXPECT_THROW(kappa(1.5, 0.0, 1.0), Error);
    EXPECT_THROW(kappa(1.5, 1.0, -1.0), Error);
}

TEST(Diffusion, ConstantKernelIsOne) {
    for (double alpha : {1.25, 1.5, 1.75}) {
        const auto c = ctx_for(CrossSection::constant(1.0), alpha);
        EXPECT_NEAR(matrix_D(solve_lambda(c), c), 1.0, 1e-6) << alpha;
    }
}

TEST(Diffusion, IntegrationByParts) {
    // D = int lambda v = -int Q^{-1}(dM) v; for the perturbed kernel compare with -int v (d/dv F)_E via mu'(0)
    const auto c = ctx_for(CrossSection::perturbed(1.0, 0.5));
    const double D = matrix_D(solve_lambda(c), c);
    const double h = 1e-3;
    const double slope = (drift_mu(h, c) - drift_mu(-h, c)) / (2.0 * h);
    EXPECT_NEAR(D, slope, 1e-4 * D);
}

TEST(Diffusion, PerturbedKernelRefines) {
    const auto coarse = ctx_for(CrossSection::perturbed(1.0, 0.5), 1.5, 256);
    const auto fine = ctx_for(CrossSection::perturbed(1.0, 0.5), 1.5, 512);
    const double a = matrix_D(solve_lambda(coarse), coarse), b = matrix_D(solve_lambda(fine), fine);
    EXPECT_NEAR(a, b, 1e-4 * b);
    EXPECT_GT(b, 1.0 / 1.5); // D lies between 1/nu2 and 1/nu1
    EXPECT_LT(b, 1.0 / 0.5);
}

TEST(Diffusion, RefusedAtCriticalAlpha) {
    const auto c = ctx_for(CrossSection::constant(1.0), 1.0);
    try {
        matrix_D(solve_lambda(c), c);
        ADD_FAILURE() << "expected TailDivergence";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TailDivergence);
    }
}

TEST(LimitCoefficients, Assembles) {
    const auto c = ctx_for(CrossSection::constant(2.0), 1.5);
    const LimitCoefficients lc = limit_coefficients(c);
    EXPECT_NEAR(lc.kappa, kappa_closed_form(1.5, 2.0, gamma_of_M(1.5)), 1e-14);
    EXPECT_NEAR(lc.D, 0.5, 1e-6);
    const auto crit = ctx_for(CrossSection::constant(1.0), 1.0);
    EXPECT_EQ(limit_coefficients(crit).D, 0.0);
}
