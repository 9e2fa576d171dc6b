/// Compares the rescaled kinetic generator L^eps with its fractional limit on cos(x).
#include "fraclim/aux_function.hpp"

#include <cstdio>
#include <numbers>

int main() {
    using namespace fraclim;
    const double L = 2.0 * std::numbers::pi;
    for (double alpha : {1.25, 1.5, 1.75}) {
        const auto ctx = make_context(VelocityGrid::build(256, 400.0, 0.05, alpha), CrossSection::constant(1.0));
        const LimitCoefficients co = limit_coefficients(ctx);
        const TestFunction phi = TestFunction::single_mode(1, L);
        const FieldSpec field = FieldSpec::constant(0.5);
        const MacroState lim = limit_operator(phi, co, DriftField::constant(co.D * field.e0()));
        std::printf("alpha=%.2f kappa=%.6f D=%.6f\n", alpha, co.kappa, co.D);
        for (double eps : {0.1, 0.05, 0.025, 0.0125}) {
            const MacroState le = L_eps(phi, eps, field, ctx);
            double err = 0.0;
            for (std::size_t j = 0; j < le.size(); ++j) err = std::max(err, std::abs(le.rho[j] - lim.rho[j]));
            std::printf("  eps=%-7.4f sup error %.4e\n", eps, err);
        }
    }
}
