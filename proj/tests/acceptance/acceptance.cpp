#include "fraclim/harness.hpp"
#include "fraclim/rng.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace fraclim;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

/// Appends a formatted fragment to the detail string.
template <class... Args>
void note(Outcome& o, const char* fmt, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += buf;
}

void check(Outcome& o, bool ok, const std::string& what) {
    if (!ok) {
        o.pass = false;
        note(o, "violated: %s", what.c_str());
    }
}

CollisionContext context(double alpha, const CrossSection& cs, double vmax = 400.0, std::size_t n = 256) {
    return make_context(VelocityGrid::build(n, vmax, 0.05, alpha), cs);
}

Outcome criterion1() {
    Outcome o;
    double worst = 0.0;
    for (double a : {1.0, 1.25, 1.5, 1.75}) {
        const double g = gamma_of_M(a);
        const double k0 = kappa_closed_form(a, 1.0, g), k1 = kappa_quadrature(a, 1.0, g);
        worst = std::max(worst, std::abs(k1 - k0) / std::abs(k0));
    }
    note(o, "max relative kappa difference %.2e", worst);
    check(o, worst <= 1e-10, "relative difference <= 1e-10");
    return o;
}

Outcome criterion2() {
    Outcome o;
    double lam = 0.0, dD = 0.0, dmu = 0.0;
    for (double a : {1.25, 1.5, 1.75}) {
        const auto ctx = context(a, CrossSection::constant(1.0));
        const LambdaField L = solve_lambda(ctx);
        for (std::size_t i = 0; i < ctx.grid->size(); ++i)
            lam = std::max(lam, std::abs(L.profile[i] + eval_dM(ctx.grid->v(i), a)));
        dD = std::max(dD, std::abs(matrix_D(L, ctx) - 1.0));
    }
    for (double a : {1.0, 1.5}) {
        const auto ctx = context(a, CrossSection::constant(1.0));
        for (double E : {0.25, 0.5, 1.0}) dmu = std::max(dmu, std::abs(drift_mu(E, ctx) - E));
    }
    note(o, "max|lambda + dM/dv| %.2e, max|D - 1| %.2e, max|mu(E) - E| %.2e", lam, dD, dmu);
    check(o, lam <= 1e-8, "lambda within 1e-8");
    check(o, dD <= 1e-6, "D within 1e-6");
    check(o, dmu <= 1e-4, "mu within 1e-4");
    return o;
}

Outcome criterion3() {
    Outcome o;
    double l1 = 0.0, eig = 0.0, cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
    for (double a : {1.0, 1.5}) {
        const auto ctx = context(a, CrossSection::constant(1.0));
        for (double E : {0.25, 0.5}) {
            const EquilibriumF Fe = solve_F(E, ctx, FSolver::Explicit);
            const EquilibriumF Fp = solve_F(E, ctx, FSolver::PowerIteration);
            double d = 0.0;
            for (std::size_t i = 0; i < ctx.grid->size(); ++i) d += ctx.grid->w(i) * std::abs(Fe.profile[i] - Fp.profile[i]);
            l1 = std::max(l1, d);
            eig = std::max(eig, std::abs(Fp.eigenvalue - 1.0));
            for (const auto* F : {&Fe, &Fp}) {
                const EquilibriumBounds b = equilibrium_bounds(*F, ctx);
                cmin = std::min(cmin, b.min_ratio);
                cmax = std::max(cmax, b.max_ratio);
            }
        }
    }
    note(o, "max L1(explicit - power) %.2e, max|eigenvalue - 1| %.2e, c = %.3f, C = %.3f", l1, eig, cmin, cmax);
    check(o, l1 <= 1e-6, "L1 agreement 1e-6");
    check(o, eig <= 1e-6, "eigenvalue within 1e-6");
    check(o, cmin > 0.0 && std::isfinite(cmax), "c M <= F <= C M with c, C > 0");
    return o;
}

Outcome criterion4() {
    Outcome o;
    const std::vector<double> Es{0.2, 0.1, 0.05, 0.025};
    for (const auto& cs : {CrossSection::constant(1.0), CrossSection::perturbed(1.0, 0.5)}) {
        const auto ctx = context(1.5, cs);
        const LambdaField lam = solve_lambda(ctx);
        std::vector<double> norms;
        for (double E : Es) norms.push_back(remainder_G(E, ctx, lam).l2_norm);
        const double slope = loglog_slope(Es, norms);
        note(o, "%s slope %.3f", cs.name().c_str(), slope);
        check(o, std::abs(slope - 2.0) <= 0.25, cs.name() + " slope in 2 +- 0.25");
    }
    return o;
}

Outcome criterion5() {
    Outcome o;
    Philox rng(20240521, 0);
    std::normal_distribution<double> normal;
    double qmargin = std::numeric_limits<double>::infinity(), tmin = std::numeric_limits<double>::infinity();
    for (const auto& cs : {CrossSection::constant(1.0), CrossSection::perturbed(1.0, 0.5)}) {
        const auto ctx = context(1.5, cs);
        for (double E : {0.0, 0.5}) {
            const VelocityProfile F = solve_F(E, ctx).profile;
            double case_theta = std::numeric_limits<double>::infinity();
            for (int trial = 0; trial < 100; ++trial) {
                double c[13];
                for (double& x : c) x = normal(rng);
                VelocityProfile f = VelocityProfile::sample(ctx.grid, [&](double v) {
                    const double th = std::atan(v);
                    double p = c[0];
                    for (int k = 1; k <= 6; ++k) p += (c[2 * k - 1] * std::cos(k * th) + c[2 * k] * std::sin(k * th)) / k;
                    return eval_M(v, 1.5) * p;
                });
                const QDissipation q = dissipation_Q(f, ctx);
                qmargin = std::min(qmargin, (q.lhs - q.rhs) / q.norm2);
                const TDissipation t = dissipation_T(f, E, F, ctx);
                case_theta = std::min(case_theta, t.theta);
            }
            note(o, "%s E=%.1f min theta %.3f", cs.name().c_str(), E, case_theta);
            tmin = std::min(tmin, case_theta);
        }
    }
    note(o, "min (Q lhs - nu1 rhs)/||f||^2 %.3e", qmargin);
    check(o, qmargin >= -1e-12, "Q dissipation >= nu1 ||f - rho M||^2");
    check(o, tmin > 0.0, "T dissipation with theta > 0");
    return o;
}

Outcome criterion6() {
    Outcome o;
    struct Case {
        const char* label;
        double alpha;
        double E;
    };
    for (const Case c : {Case{"alpha=1.5 E=0", 1.5, 0.0}, Case{"alpha=1.5 E=0.5", 1.5, 0.5}, Case{"alpha=1 E=0.5 mu", 1.0, 0.5}}) {
        RunConfig cfg;
        cfg.params.alpha = c.alpha;
        cfg.params.field = c.E == 0.0 ? FieldSpec::zero() : FieldSpec::constant(c.E);
        cfg.params.epsilon_schedule = {0.1, 0.05, 0.025};
        const OperatorStudyReport r = run_operator_study(cfg, {});
        note(o, "%s sup errors %.3e %.3e %.3e order %.3f", c.label, r.sup_error[0], r.sup_error[1], r.sup_error[2], r.order);
        check(o, r.strictly_decreasing, std::string(c.label) + " strictly decreasing");
        check(o, r.order > 0.0, std::string(c.label) + " positive order");
    }
    return o;
}

Outcome criterion7() {
    Outcome o;
    for (double a : {1.0, 1.5}) {
        const auto ctx = context(a, CrossSection::constant(1.0));
        const TestFunction phi = TestFunction::gaussian_bump(2.0 * std::numbers::pi, 0.5, 12, std::numbers::pi, 64);
        const ChiDecayReport r = chi_decay_check(phi, {0.1, 0.05, 0.025}, ctx);
        note(o, "alpha=%.1f errors %.3e %.3e %.3e slope %.3f (need >= %.2f)", a, r.error[0], r.error[1], r.error[2], r.slope, a - 0.2);
        check(o, r.slope >= a - 0.2, "slope >= alpha - 0.2 at alpha " + std::to_string(a));
    }
    return o;
}

RunConfig end_to_end_config(double alpha, double E) {
    RunConfig cfg;
    cfg.params.alpha = alpha;
    cfg.params.field = E == 0.0 ? FieldSpec::zero() : FieldSpec::constant(E);
    cfg.params.domain_length = 4.0 * std::numbers::pi;
    cfg.params.final_time = 1.0;
    cfg.params.epsilon_schedule = {0.2, 0.1, 0.05};
    cfg.params.seed = 1;
    cfg.particles = 1'000'000;
    cfg.x_bins = 32;
    return cfg;
}

void judge_convergence(Outcome& o, const ConvergenceReport& r) {
    note(o, "%s L1 %.4f %.4f %.4f noise %.4f", r.label.c_str(), r.results[0].final_l1(), r.results[1].final_l1(),
         r.results[2].final_l1(), r.results.back().noise_floor);
    check(o, r.monotone, r.label + " monotone decay");
    check(o, r.results.back().final_l1() < 0.05, r.label + " finest error < 0.05");
}

Outcome criterion8(unsigned threads) {
    Outcome o;
    struct Case {
        const char* label;
        double alpha;
        double E;
    };
    for (const Case c : {Case{"alpha1.5_E0", 1.5, 0.0}, Case{"alpha1.5_E0.5", 1.5, 0.5}, Case{"alpha1_E0.5", 1.0, 0.5}}) {
        ConvergenceOptions opt;
        opt.label = c.label;
        opt.threads = threads;
        const ConvergenceReport r = run_convergence(end_to_end_config(c.alpha, c.E), opt);
        judge_convergence(o, r);
        if (c.alpha == 1.0) {
            const double ks = r.results.back().ks;
            note(o, "%s velocity KS vs F %.4f", c.label, ks);
            check(o, ks < 0.01, "KS < 0.01");
        }
    }
    return o;
}

Outcome criterion9(unsigned threads) {
    Outcome o;
    ConvergenceOptions opt;
    opt.label = "high_field";
    opt.scaling = Scaling::HighField;
    opt.threads = threads;
    judge_convergence(o, run_convergence(end_to_end_config(1.5, 0.5), opt));
    return o;
}

Outcome criterion10() {
    Outcome o;
    const double L = 256.0;
    const std::size_t n = 4096;
    auto gauss = [](double y) { return std::exp(-y * y); };
    for (double a : {1.25, 1.5, 1.75}) {
        const MacroState s = MacroState::sample(n, L, [&](double x) { return gauss(x - L / 2.0); });
        const MacroState f = frac_laplacian_fourier(s, a, 1.0);
        double d = 0.0;
        for (int j = -24; j <= 24; ++j) {
            const auto idx = static_cast<std::size_t>(static_cast<long>(n / 2) + 8 * j);
            d = std::max(d, std::abs(frac_laplacian_singular(gauss, s.x(idx) - L / 2.0, a) - f.rho[idx]));
        }
        note(o, "alpha=%.2f max difference %.2e", a, d);
        check(o, d <= 1e-4, "agreement 1e-4 at alpha " + std::to_string(a));
    }
    return o;
}

} // namespace

int main(int argc, char** argv) {
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    CLI::App app{"Acceptance criteria"};
    std::vector<int> which;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--criterion", which, "Criteria to run (default: all)")->check(CLI::Range(1, 10));
    app.add_option("--threads", threads, "Worker threads for Monte Carlo criteria")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);
    if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    const std::vector<std::pair<double, std::function<Outcome()>>> table{
        {1.0, criterion1},
        {30.0, criterion2},
        {60.0, criterion3},
        {120.0, criterion4},
        {120.0, criterion5},
        {600.0, criterion6},
        {120.0, criterion7},
        {1200.0, [&] { return criterion8(threads); }},
        {300.0, [&] { return criterion9(threads); }},
        {30.0, criterion10},
    };
    bool all = true;
    for (int c : which) {
        const auto& [budget, fn] = table[static_cast<std::size_t>(c - 1)];
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            note(o, "exception: %s", e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > budget) {
            o.pass = false;
            note(o, "runtime %.1f s exceeds %.0f s", secs, budget);
        }
        std::printf("CRITERION %d %s (%.2f s): %s\n", c, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
