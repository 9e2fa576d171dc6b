#include "fraclim/params.hpp"
#include "fraclim/velocity_grid.hpp"

#include <gtest/gtest.h>

using namespace fraclim;

namespace {

ModelParams baseline() {
    ModelParams p;
    p.alpha = 1.5;
    p.cross_section = CrossSection::constant(1.0);
    p.domain_length = 2.0 * std::numbers::pi;
    p.final_time = 1.0;
    p.epsilon_schedule = {0.2, 0.1, 0.05};
    return p;
}

ErrorCode code_of(const ModelParams& p) {
    try {
        validate(p);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an error";
    return ErrorCode::Io;
}

} // namespace

TEST(Validate, AcceptsBaseline) {
    const ModelParams p = baseline();
    const ModelParams q = validate(p);
    EXPECT_EQ(q.alpha, p.alpha);
    EXPECT_EQ(q.epsilon_schedule, p.epsilon_schedule);
}

TEST(Validate, RejectsAlphaBelowOne) {
    ModelParams p = baseline();
    p.alpha = 0.5;
    EXPECT_EQ(code_of(p), ErrorCode::AlphaOutOfRange);
    p.alpha = 2.0;
    EXPECT_EQ(code_of(p), ErrorCode::AlphaOutOfRange);
}

TEST(Validate, RejectsPerturbedAmplitudeAboveNu0) {
    ModelParams p = baseline();
    p.cross_section = CrossSection::perturbed(1.0, 1.5);
    EXPECT_EQ(code_of(p), ErrorCode::CrossSectionBoundsViolated);
}

TEST(Validate, RejectsBadDomainAndSchedule) {
    ModelParams p = baseline();
    p.domain_length = 0.0;
    EXPECT_EQ(code_of(p), ErrorCode::NonPositiveDomain);
    p = baseline();
    p.final_time = -1.0;
    EXPECT_EQ(code_of(p), ErrorCode::NonPositiveDomain);
    p = baseline();
    p.epsilon_schedule.clear();
    EXPECT_EQ(code_of(p), ErrorCode::EmptyEpsilonSchedule);
    p = baseline();
    p.epsilon_schedule = {0.1, 0.2};
    EXPECT_EQ(code_of(p), ErrorCode::EmptyEpsilonSchedule);
    p = baseline();
    p.epsilon_schedule = {1.5};
    EXPECT_EQ(code_of(p), ErrorCode::EmptyEpsilonSchedule);
}

TEST(Validate, SolversRequireDimOne) {
    EXPECT_NO_THROW(require_dim1(1));
    EXPECT_THROW(require_dim1(2), Error);
}

TEST(CrossSection, SymmetricAndBoundedOnGridPairs) {
    const auto grid = VelocityGrid::build(64, 100.0, 0.05, 1.5);
    for (const auto& cs : {CrossSection::constant(1.0), CrossSection::perturbed(1.0, 0.5), CrossSection::perturbed(2.0, -0.7)}) {
        double C = 0.0;
        for (double v : grid->nodes())
            for (double w : grid->nodes()) {
                EXPECT_EQ(cs(v, w), cs(w, v));
                EXPECT_GE(cs(v, w), cs.nu1());
                EXPECT_LE(cs(v, w), cs.nu2());
                C = std::max(C, std::abs(cs(v, w) - cs.nu0()) * (1.0 + std::abs(v)));
            }
        EXPECT_TRUE(std::isfinite(C));
        EXPECT_LE(C, std::abs(cs.amplitude()) + 1e-15);
    }
}

TEST(CrossSection, PathIntegralMatchesDirectQuadrature) {
    for (double v : {-3.0, 0.0, 0.4, 7.0})
        for (double E : {-0.5, 1e-12, 0.3}) {
            const double s = 2.5;
            double direct = 0.0;
            const int n = 200000;
            for (int i = 0; i < n; ++i) direct += CrossSection::profile(v - E * (i + 0.5) * s / n) * s / n;
            EXPECT_NEAR(CrossSection::profile_path_integral(v, E, s), direct, 1e-8);
        }
}

TEST(FieldSpec, SinusoidalBounds) {
    const double L = 3.0;
    const FieldSpec f = FieldSpec::sinusoidal(0.7, 2);
    double emax = 0.0, dmax = 0.0;
    for (int j = 0; j < 4000; ++j) {
        const double x = L * j / 4000.0;
        emax = std::max(emax, std::abs(f(x, L)));
        dmax = std::max(dmax, std::abs(f.derivative(x, L)));
    }
    EXPECT_NEAR(emax, 0.7, 1e-6);
    EXPECT_NEAR(f.max_abs(), 0.7, 1e-15);
    EXPECT_NEAR(dmax, 0.7 * 2 * 2 * std::numbers::pi / L, 1e-5);
    EXPECT_NEAR(f.max_abs_derivative(L), 0.7 * 2 * 2 * std::numbers::pi / L, 1e-14);
    EXPECT_FALSE(f.is_uniform());
    EXPECT_TRUE(FieldSpec::constant(0.2).is_uniform());
    EXPECT_EQ(FieldSpec::zero()(1.0, L), 0.0);
}
