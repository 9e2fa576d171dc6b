/// Prints the field-modified equilibrium F(v, E) next to M(v) for a few field values.
#include "fraclim/equilibria.hpp"

#include <cstdio>

int main() {
    using namespace fraclim;
    const double alpha = 1.5;
    const auto ctx = make_context(VelocityGrid::build(256, 400.0, 0.05, alpha), CrossSection::perturbed(1.0, 0.5));
    const double fields[] = {0.25, 0.5, 1.0};
    std::vector<EquilibriumF> F;
    for (double E : fields) F.push_back(solve_F(E, ctx));

    std::printf("# drift mu(E):");
    for (std::size_t k = 0; k < F.size(); ++k) std::printf(" E=%.2f -> %.6f", fields[k], drift_mu(F[k], ctx));
    std::printf("\nv,M,F_0.25,F_0.5,F_1\n");
    for (std::size_t i = 0; i < ctx.grid->size(); ++i) {
        const double v = ctx.grid->v(i);
        if (std::abs(v) > 20.0) continue;
        std::printf("%.6f,%.8e", v, ctx.M[i]);
        for (const auto& f : F) std::printf(",%.8e", f.profile[i]);
        std::printf("\n");
    }
}
