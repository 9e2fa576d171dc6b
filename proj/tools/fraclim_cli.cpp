#include "fraclim/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace fraclim;

namespace {

struct Globals {
    std::string config;
    std::string out = "out";
    std::uint64_t seed = 0;
    unsigned threads = 1;
    bool seed_set = false;
};

RunConfig load(const Globals& g) {
    RunConfig c = g.config.empty() ? config_from_json(json::object()) : load_config(g.config);
    if (g.seed_set) c.params.seed = g.seed;
    return c;
}

Scaling parse_scaling(const std::string& s) {
    if (s == "diffusive") return Scaling::Diffusive;
    if (s == "high_field" || s == "high-field") return Scaling::HighField;
    throw Error(ErrorCode::InvalidConfig, "unknown scaling '" + s + "'");
}

CaseReport equilibrium_case(const RunConfig& c, const std::vector<double>& fields) {
    const CollisionContext ctx = make_context(c);
    CaseReport r{"equilibrium", "equilibrium", true, json::object(), {}};
    CsvTable t{"profiles", {"E", "v", "M", "F", "lambda", "G", "R"}, {}};
    json solves = json::array();
    const LambdaField lambda = solve_lambda(ctx);
    for (double E : fields) {
        const EquilibriumF F = solve_F(E, ctx);
        const EquilibriumBounds b = equilibrium_bounds(F, ctx);
        solves.push_back({{"E", E}, {"method", EquilibriumF::method_name(F.method)}, {"eigenvalue", F.eigenvalue}, {"sweeps", F.sweeps},
                          {"residual", F.residual}, {"mu", drift_mu(F, ctx)}, {"min_ratio", b.min_ratio},
                          {"max_ratio", b.max_ratio}});
        for (std::size_t i = 0; i < ctx.grid->size(); ++i) {
            const double R = F.profile[i] - ctx.M[i];
            t.rows.push_back({E, ctx.grid->v(i), ctx.M[i], F.profile[i], lambda.profile[i], R - E * lambda.profile[i], R});
        }
    }
    r.data = {{"config", to_json(c)}, {"solves", solves}};
    r.tables = {t};
    return r;
}

CaseReport coefficients_case(const RunConfig& c) {
    const auto& p = c.params;
    const double g = gamma_of_M(p.alpha);
    CaseReport r{"coefficients", "coefficients", true, json::object(), {}};
    r.data = {{"alpha", p.alpha},
              {"dim", p.dim},
              {"c_d_alpha", c_d_alpha(p.dim, p.alpha)},
              {"gamma", g},
              {"nu0", p.cross_section.nu0()},
              {"kappa", kappa(p.alpha, p.cross_section.nu0(), g, p.dim)},
              {"kappa_closed_form", kappa_closed_form(p.alpha, p.cross_section.nu0(), g, p.dim)},
              {"kappa_quadrature", kappa_quadrature(p.alpha, p.cross_section.nu0(), g, p.dim)}};
    const CollisionContext ctx = make_context(c);
    r.data["D"] = p.alpha > 1.0 ? json(matrix_D(solve_lambda(ctx), ctx)) : json(nullptr);
    if (p.field.max_abs() > 0.0) r.data["mu_e0"] = drift_mu(p.field.e0(), ctx);
    return r;
}

CaseReport kinetic_case(const RunConfig& c, double eps, std::vector<double> snapshots, Scaling scaling, std::size_t partitions,
                        unsigned threads, double amplitude) {
    const auto& p = c.params;
    const double L = p.domain_length;
    const CollisionContext ctx = make_context(c);
    const KineticModel model = make_kinetic_model(ctx, p.field, scaling);
    if (snapshots.empty()) snapshots = {p.final_time};
    const double k0 = 2.0 * std::numbers::pi / L;
    ParticleEnsemble ens(c.particles, L, p.seed, partitions);
    initialize(ens, p.alpha, [&](double x) { return (1.0 + amplitude * std::cos(k0 * x)) / L; }, (1.0 + std::abs(amplitude)) / L, threads);
    CsvTable t{"density", {"t", "bin_center", "rho"}, {}};
    json counts = json::array();
    for (double s : snapshots) {
        advance(ens, eps, model, s, threads);
        const MacroState h = estimate_density(ens, c.x_bins);
        for (std::size_t j = 0; j < h.size(); ++j) t.rows.push_back({s, h.dx() * (static_cast<double>(j) + 0.5), h.rho[j]});
        counts.push_back({{"t", s}, {"collisions", ens.collisions()}, {"candidates", ens.candidates()}});
    }
    CaseReport r{"kinetic", "kinetic", true, json::object(), {t}};
    r.data = {{"config", to_json(c)}, {"epsilon", eps}, {"scaling", scaling_name(scaling)}, {"seed", p.seed},
              {"partitions", ens.partitions()}, {"snapshots", counts}};
    return r;
}

CaseReport macro_case(const RunConfig& c, std::vector<double> snapshots, DriftChoice drift, Scaling scaling, double amplitude,
                      std::size_t nodes) {
    const auto& p = c.params;
    const double L = p.domain_length;
    const CollisionContext ctx = make_context(c);
    drift = resolve_drift(drift, p.alpha, scaling);
    LimitCoefficients co;
    co.alpha = p.alpha;
    if (scaling == Scaling::Diffusive) co = limit_coefficients(ctx, p.dim);
    const DriftField b = limit_drift(drift, p.field, L, nodes, ctx, co.D);
    if (snapshots.empty()) snapshots = {p.final_time};
    const double k0 = 2.0 * std::numbers::pi / L;
    MacroState m = MacroState::sample(nodes, L, [&](double x) { return (1.0 + amplitude * std::cos(k0 * x)) / L; });
    CsvTable t{"density", {"t", "x", "rho"}, {}};
    json masses = json::array();
    for (double s : snapshots) {
        m = advance_macro(m, c.time_step_macro, co, b, s);
        for (std::size_t j = 0; j < m.size(); ++j) t.rows.push_back({s, m.x(j), m.rho[j]});
        masses.push_back({{"t", s}, {"mass", m.mass()}});
    }
    CaseReport r{"macro", "macro", true, json::object(), {t}};
    r.data = {{"config", to_json(c)}, {"kappa", co.kappa}, {"drift", drift_name(drift)}, {"max_drift", b.max_abs()},
              {"snapshots", masses}};
    return r;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fractional diffusion limit toolkit: equilibria, coefficients, kinetic Monte Carlo and limit solvers"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "Output directory");
    app.add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { g.seed = s; g.seed_set = true; }, "RNG seed (overrides config)");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);

    auto* eq = app.add_subcommand("equilibrium", "Solve F(., E) and write profiles");
    std::vector<double> fields;
    eq->add_option("--E", fields, "Field values (default: config e0)");

    auto* coef = app.add_subcommand("coefficients", "Limit coefficients c, gamma, kappa, D, mu");

    auto* op = app.add_subcommand("operator-check", "L^eps against the limit operator");
    std::string phi_kind = "single_mode", op_drift = "auto";
    op->add_option("--phi", phi_kind, "single_mode, gaussian_bump or constant");
    op->add_option("--drift", op_drift, "auto, DE, mu or none");

    auto* kin = app.add_subcommand("kinetic-run", "Monte Carlo run at one eps");
    double eps = 0.1, amplitude = 0.5;
    std::vector<double> snapshots;
    std::string scaling = "diffusive";
    std::size_t partitions = 8;
    kin->add_option("--eps", eps, "Scaling parameter");
    kin->add_option("--snapshots", snapshots, "Snapshot times (default: final_time)");
    kin->add_option("--scaling", scaling, "diffusive or high_field");
    kin->add_option("--partitions", partitions, "RNG partitions");
    kin->add_option("--amplitude", amplitude, "Initial cosine amplitude");

    auto* mac = app.add_subcommand("macro-run", "Solve the limit equation");
    std::string mac_drift = "auto";
    std::size_t nodes = 512;
    mac->add_option("--snapshots", snapshots, "Snapshot times (default: final_time)");
    mac->add_option("--drift", mac_drift, "auto, DE, mu or none");
    mac->add_option("--scaling", scaling, "diffusive or high_field");
    mac->add_option("--nodes", nodes, "Spatial grid size (power of two)");
    mac->add_option("--amplitude", amplitude, "Initial cosine amplitude");

    auto* conv = app.add_subcommand("converge", "Kinetic versus limit convergence study");
    ConvergenceOptions copt;
    std::string conv_drift = "auto";
    conv->add_option("--label", copt.label, "Case label");
    conv->add_option("--scaling", scaling, "diffusive or high_field");
    conv->add_option("--drift", conv_drift, "auto, DE, mu or none");
    conv->add_option("--snapshots", copt.snapshots, "Snapshot times (default: final_time)");
    conv->add_option("--margin", copt.margin, "Allowed finest error above the noise floor");
    conv->add_option("--amplitude", copt.initial_amplitude, "Initial cosine amplitude");
    conv->add_option("--partitions", copt.partitions, "RNG partitions");

    auto* all = app.add_subcommand("all", "coefficients, equilibrium, operator-check and converge for one config");

    CLI11_PARSE(app, argc, argv);
    try {
        const RunConfig c = load(g);
        Report report{to_json(c), {}};
        if (*eq || *all) {
            if (fields.empty()) fields = {c.params.field.e0()};
            report.cases.push_back(equilibrium_case(c, fields));
        }
        if (*coef || *all) {
            report.cases.push_back(coefficients_case(c));
            if (*coef) std::printf("%s\n", report.cases.back().data.dump(2).c_str());
        }
        if (*op || *all) {
            OperatorStudyOptions o;
            o.phi = test_function_from_string(phi_kind);
            o.drift = drift_choice_from_string(op_drift);
            report.cases.push_back(to_case(run_operator_study(c, o)));
        }
        if (*kin) report.cases.push_back(kinetic_case(c, eps, snapshots, parse_scaling(scaling), partitions, g.threads, amplitude));
        if (*mac)
            report.cases.push_back(macro_case(c, snapshots, drift_choice_from_string(mac_drift), parse_scaling(scaling), amplitude, nodes));
        if (*conv || *all) {
            copt.scaling = parse_scaling(scaling);
            copt.drift = drift_choice_from_string(conv_drift);
            copt.threads = g.threads;
            report.cases.push_back(to_case(run_convergence(c, copt)));
        }
        const int code = emit(report, g.out);
        for (const auto& cs : report.cases) std::printf("%-14s %s\n", cs.label.c_str(), cs.pass ? "PASS" : "FAIL");
        std::printf("wrote %s/report.json\n", g.out.c_str());
        return code;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
