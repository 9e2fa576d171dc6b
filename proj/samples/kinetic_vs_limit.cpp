/// Runs the particle model at one eps and prints its density next to the limit solution.
#include "fraclim/harness.hpp"

#include <cstdio>
#include <numbers>

int main(int argc, char** argv) {
    using namespace fraclim;
    RunConfig cfg;
    cfg.params.alpha = 1.5;
    cfg.params.field = FieldSpec::constant(0.5);
    cfg.params.domain_length = 4.0 * std::numbers::pi;
    cfg.params.epsilon_schedule = {argc > 1 ? std::atof(argv[1]) : 0.1};
    cfg.particles = 200'000;
    cfg.x_bins = 32;
    ConvergenceOptions opt;
    opt.label = "sample";
    const ConvergenceReport r = run_convergence(cfg, opt);
    const auto& e = r.results.front();
    std::printf("# eps=%.3f kappa=%.4f drift=%.4f L1=%.4f noise=%.4f\n", e.eps, r.kappa, r.drift, e.final_l1(), e.noise_floor);
    std::printf("x,rho_kinetic,rho_limit\n");
    const double w = cfg.params.domain_length / static_cast<double>(cfg.x_bins);
    for (std::size_t j = 0; j < e.kinetic.size(); ++j) std::printf("%.4f,%.6f,%.6f\n", w * (j + 0.5), e.kinetic[j], e.macro[j]);
}
