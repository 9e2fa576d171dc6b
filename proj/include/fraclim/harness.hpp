#pragma once

#include "fraclim/aux_function.hpp"
#include "fraclim/coefficients.hpp"
#include "fraclim/collision.hpp"
#include "fraclim/equilibria.hpp"
#include "fraclim/kinetic_mc.hpp"
#include "fraclim/macro_spectral.hpp"
#include "fraclim/params.hpp"
#include "fraclim/velocity_grid.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

namespace fraclim {

using json = nlohmann::json;

/// Model parameters plus the numerical knobs read from a JSON config file.
struct RunConfig {
    ModelParams params;
    std::size_t particles = 1'000'000;
    std::size_t grid_nodes = 256;
    double vmax_over_inv_eps = 10.0; ///< vmax = vmax_over_inv_eps / eps_min
    std::size_t x_bins = 32;
    double time_step_macro = 0.01;

    double vmax() const { return vmax_over_inv_eps / params.epsilon_schedule.back(); }
};

namespace detail {

inline void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, where + " must be a JSON object");
    for (const auto& [k, _] : j.items())
        if (!allowed.count(k)) throw Error(ErrorCode::InvalidConfig, "unknown key '" + k + "' in " + where);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

} // namespace detail

/// Parses a config; absent keys keep their defaults, unknown keys are rejected.
inline RunConfig config_from_json(const json& j) {
    try {
        detail::require_keys(j,
                             {"alpha", "dim", "cross_section", "field", "domain_length", "final_time", "epsilon_schedule",
                              "seed", "particles", "velocity_grid", "x_bins", "time_step_macro"},
                             "config");
        RunConfig c;
        auto& p = c.params;
        p.alpha = detail::get_or(j, "alpha", p.alpha);
        p.dim = detail::get_or(j, "dim", p.dim);
        if (j.contains("cross_section")) {
            const auto& cs = j.at("cross_section");
            detail::require_keys(cs, {"kind", "nu0", "amplitude"}, "cross_section");
            const auto kind = detail::get_or<std::string>(cs, "kind", "constant");
            const double nu0 = detail::get_or(cs, "nu0", 1.0);
            if (kind == "constant") p.cross_section = CrossSection::constant(nu0);
            else if (kind == "perturbed_constant" || kind == "perturbed")
                p.cross_section = CrossSection::perturbed(nu0, detail::get_or(cs, "amplitude", 0.5));
            else throw Error(ErrorCode::InvalidConfig, "unknown cross_section kind '" + kind + "'");
        }
        if (j.contains("field")) {
            const auto& f = j.at("field");
            detail::require_keys(f, {"kind", "e0", "wavenumber"}, "field");
            const auto kind = detail::get_or<std::string>(f, "kind", "zero");
            const double e0 = detail::get_or(f, "e0", 0.0);
            if (kind == "zero") p.field = FieldSpec::zero();
            else if (kind == "constant") p.field = FieldSpec::constant(e0);
            else if (kind == "sinusoidal") p.field = FieldSpec::sinusoidal(e0, detail::get_or(f, "wavenumber", 1));
            else throw Error(ErrorCode::InvalidConfig, "unknown field kind '" + kind + "'");
        }
        p.domain_length = detail::get_or(j, "domain_length", p.domain_length);
        p.final_time = detail::get_or(j, "final_time", p.final_time);
        p.epsilon_schedule = detail::get_or(j, "epsilon_schedule", p.epsilon_schedule);
        p.seed = detail::get_or(j, "seed", p.seed);
        c.particles = detail::get_or(j, "particles", c.particles);
        if (j.contains("velocity_grid")) {
            const auto& g = j.at("velocity_grid");
            detail::require_keys(g, {"nodes", "vmax_over_inv_eps"}, "velocity_grid");
            c.grid_nodes = detail::get_or(g, "nodes", c.grid_nodes);
            c.vmax_over_inv_eps = detail::get_or(g, "vmax_over_inv_eps", c.vmax_over_inv_eps);
        }
        c.x_bins = detail::get_or(j, "x_bins", c.x_bins);
        c.time_step_macro = detail::get_or(j, "time_step_macro", c.time_step_macro);
        validate(p);
        if (c.particles < 2) throw Error(ErrorCode::InvalidConfig, "particles must be at least 2");
        if (!spectral::is_power_of_two(c.x_bins)) throw Error(ErrorCode::InvalidConfig, "x_bins must be a power of two");
        if (!(c.vmax_over_inv_eps > 0.0)) throw Error(ErrorCode::NonPositiveExtent, "vmax_over_inv_eps must be positive");
        if (!(c.time_step_macro > 0.0)) throw Error(ErrorCode::InvalidConfig, "time_step_macro must be positive");
        return c;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("malformed config: ") + e.what());
    }
}

inline json to_json(const RunConfig& c) {
    const auto& p = c.params;
    return json{{"alpha", p.alpha},
                {"dim", p.dim},
                {"cross_section", {{"kind", p.cross_section.name()}, {"nu0", p.cross_section.nu0()}, {"amplitude", p.cross_section.amplitude()}}},
                {"field", {{"kind", p.field.name()}, {"e0", p.field.e0()}, {"wavenumber", p.field.wavenumber()}}},
                {"domain_length", p.domain_length},
                {"final_time", p.final_time},
                {"epsilon_schedule", p.epsilon_schedule},
                {"seed", p.seed},
                {"particles", c.particles},
                {"velocity_grid", {{"nodes", c.grid_nodes}, {"vmax_over_inv_eps", c.vmax_over_inv_eps}}},
                {"x_bins", c.x_bins},
                {"time_step_macro", c.time_step_macro}};
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot read config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, "config " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

/// Velocity grid and collision context for a config.
inline CollisionContext make_context(const RunConfig& c) {
    require_dim1(c.params.dim);
    return make_context(VelocityGrid::build(c.grid_nodes, c.vmax(), 0.05, c.params.alpha), c.params.cross_section);
}

/// Drift of the limit equation.
enum class DriftChoice { Auto, DE, Mu, None };

inline DriftChoice drift_choice_from_string(const std::string& s) {
    if (s == "auto") return DriftChoice::Auto;
    if (s == "DE" || s == "de") return DriftChoice::DE;
    if (s == "mu") return DriftChoice::Mu;
    if (s == "none") return DriftChoice::None;
    throw Error(ErrorCode::InvalidConfig, "unknown drift choice '" + s + "'");
}

/// Resolves Auto and rejects combinations the limit theory does not cover.
inline DriftChoice resolve_drift(DriftChoice d, double alpha, Scaling scaling) {
    const bool critical = alpha == 1.0;
    if (scaling == Scaling::HighField) {
        if (d == DriftChoice::DE) throw Error(ErrorCode::ConfigRegimeMismatch, "high-field limit transports with mu(E), not D E");
        return d == DriftChoice::Auto ? DriftChoice::Mu : d;
    }
    if (d == DriftChoice::Auto) return critical ? DriftChoice::Mu : DriftChoice::DE;
    if (critical && d == DriftChoice::DE) throw Error(ErrorCode::ConfigRegimeMismatch, "alpha = 1 requires the mu(E) drift");
    if (!critical && d == DriftChoice::Mu) throw Error(ErrorCode::ConfigRegimeMismatch, "alpha in (1,2) uses the D E drift");
    return d;
}

inline const char* drift_name(DriftChoice d) {
    switch (d) {
    case DriftChoice::Auto: return "auto";
    case DriftChoice::DE: return "DE";
    case DriftChoice::Mu: return "mu";
    case DriftChoice::None: return "none";
    }
    return "none";
}

/// Limit drift b(x) sampled at n points of [0, L); mu(E) is solved once per distinct field value.
inline DriftField limit_drift(DriftChoice d, const FieldSpec& field, double L, std::size_t n, const CollisionContext& ctx,
                              double D) {
    auto b_of = [&, cache = std::map<double, double>{}](double E) mutable {
        if (d == DriftChoice::None || E == 0.0) return 0.0;
        if (d == DriftChoice::DE) return D * E;
        auto it = cache.find(E);
        if (it == cache.end()) it = cache.emplace(E, drift_mu(E, ctx)).first;
        return it->second;
    };
    if (field.is_uniform()) return DriftField::constant(b_of(field(0.0, L)), drift_name(d));
    std::vector<double> b(n);
    for (std::size_t j = 0; j < n; ++j) b[j] = b_of(field(L * static_cast<double>(j) / static_cast<double>(n), L));
    return DriftField::sampled(std::move(b), drift_name(d));
}

/// Options of a kinetic-versus-macro study that are not part of the model config.
struct ConvergenceOptions {
    std::string label = "convergence";
    Scaling scaling = Scaling::Diffusive;
    DriftChoice drift = DriftChoice::Auto;
    double initial_amplitude = 0.5; ///< rho_in = (1 + a cos(2 pi m x / L)) / L
    int initial_mode = 1;
    std::vector<double> snapshots; ///< empty means final_time only
    double margin = 0.05;
    std::size_t partitions = 8;
    unsigned threads = 1;
    std::size_t macro_nodes = 512;
    bool velocity_ks = true; ///< KS of the velocity marginal against F (uniform fields only)
};

struct SnapshotError {
    double time = 0.0;
    double l1 = 0.0;
    double linf = 0.0;
};

struct EpsilonResult {
    double eps = 0.0;
    std::vector<SnapshotError> snapshots;
    double noise_floor = 0.0; ///< split-half L1 estimate at the final snapshot
    double ks = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t collisions = 0;
    std::uint64_t candidates = 0;
    double seconds = 0.0;
    std::vector<double> kinetic; ///< final histogram
    std::vector<double> macro;   ///< limit solution averaged on the same bins

    double final_l1() const { return snapshots.back().l1; }
};

struct ConvergenceReport {
    std::string label;
    json config;
    json options;
    double kappa = 0.0;
    double drift = 0.0; ///< max |b|
    std::vector<EpsilonResult> results;
    double order = 0.0;
    bool monotone = false;
    bool pass = false;
};

/// Monotone decay of the final-snapshot L1 errors and finest error within `margin` of the noise floor.
inline void evaluate_verdicts(ConvergenceReport& r, double margin) {
    std::vector<double> eps, err;
    for (const auto& e : r.results) {
        eps.push_back(e.eps);
        err.push_back(e.final_l1());
    }
    r.monotone = !err.empty();
    for (std::size_t i = 1; i < err.size(); ++i) r.monotone = r.monotone && err[i] < err[i - 1];
    bool positive = true;
    for (double e : err) positive = positive && e > 0.0;
    r.order = positive && err.size() > 1 ? loglog_slope(eps, err) : 0.0;
    r.pass = r.monotone && !r.results.empty() && r.results.back().final_l1() - r.results.back().noise_floor < margin;
}

/// Kinetic Monte Carlo from rho_in M against the matching limit equation, for every eps of the schedule.
inline ConvergenceReport run_convergence(const RunConfig& cfg, const ConvergenceOptions& opt) {
    validate(cfg.params);
    require_dim1(cfg.params.dim);
    const auto& p = cfg.params;
    const double L = p.domain_length;
    const DriftChoice drift = resolve_drift(opt.drift, p.alpha, opt.scaling);
    const CollisionContext ctx = make_context(cfg);

    LimitCoefficients co;
    co.alpha = p.alpha;
    co.nu0 = p.cross_section.nu0();
    if (opt.scaling == Scaling::Diffusive) {
        co = limit_coefficients(ctx, p.dim);
    } else {
        co.kappa = 0.0;
    }
    const DriftField b = limit_drift(drift, p.field, L, opt.macro_nodes, ctx, co.D);

    std::vector<double> times = opt.snapshots.empty() ? std::vector<double>{p.final_time} : opt.snapshots;
    for (std::size_t i = 0; i < times.size(); ++i)
        if (!(times[i] > 0.0) || (i > 0 && times[i] <= times[i - 1]))
            throw Error(ErrorCode::NonMonotoneTime, "snapshot times must be positive and increasing");

    const double a = opt.initial_amplitude, k0 = 2.0 * std::numbers::pi * opt.initial_mode / L;
    if (!(std::abs(a) < 1.0)) throw Error(ErrorCode::InvalidConfig, "initial amplitude must lie in (-1, 1)");
    auto rho_in = [&](double x) { return (1.0 + a * std::cos(k0 * x)) / L; };

    std::vector<std::vector<double>> macro_bins;
    MacroState m = MacroState::sample(opt.macro_nodes, L, rho_in);
    for (double t : times) {
        m = advance_macro(m, cfg.time_step_macro, co, b, t);
        macro_bins.push_back(m.bin_averages(cfg.x_bins));
    }

    ConvergenceReport r;
    r.label = opt.label;
    r.config = to_json(cfg);
    r.options = {{"scaling", scaling_name(opt.scaling)}, {"drift", drift_name(drift)}, {"initial_amplitude", a},
                 {"initial_mode", opt.initial_mode}, {"snapshots", times}, {"margin", opt.margin},
                 {"partitions", opt.partitions}, {"macro_nodes", opt.macro_nodes}};
    r.kappa = co.kappa;
    r.drift = b.max_abs();

    const KineticModel model = make_kinetic_model(ctx, p.field, opt.scaling);
    const double dxb = L / static_cast<double>(cfg.x_bins);
    for (double eps : p.epsilon_schedule) {
        const auto t0 = std::chrono::steady_clock::now();
        EpsilonResult res;
        res.eps = eps;
        ParticleEnsemble ens(cfg.particles, L, p.seed, opt.partitions);
        initialize(ens, p.alpha, rho_in, (1.0 + std::abs(a)) / L, opt.threads);
        for (std::size_t s = 0; s < times.size(); ++s) {
            advance(ens, eps, model, times[s], opt.threads);
            const MacroState h = estimate_density(ens, cfg.x_bins);
            SnapshotError se{times[s], 0.0, 0.0};
            for (std::size_t j = 0; j < cfg.x_bins; ++j) {
                const double d = std::abs(h.rho[j] - macro_bins[s][j]);
                se.l1 += d * dxb;
                se.linf = std::max(se.linf, d);
            }
            res.snapshots.push_back(se);
            if (s + 1 == times.size()) {
                res.kinetic = h.rho;
                res.macro = macro_bins[s];
            }
        }
        const std::size_t half = cfg.particles / 2;
        const MacroState h1 = estimate_density(ens, cfg.x_bins, 0, half);
        const MacroState h2 = estimate_density(ens, cfg.x_bins, half, 2 * half);
        for (std::size_t j = 0; j < cfg.x_bins; ++j) res.noise_floor += 0.5 * std::abs(h1.rho[j] - h2.rho[j]) * dxb;
        if (opt.velocity_ks && p.field.is_uniform()) {
            const double E = p.field(0.0, L);
            const double E_eff = opt.scaling == Scaling::Diffusive ? std::pow(eps, p.alpha - 1.0) * E : E;
            const ProfileCdf cdf(E_eff == 0.0 ? ctx.M : solve_F(E_eff, ctx).profile);
            res.ks = ks_statistic(ens.velocities(), cdf);
        }
        res.collisions = ens.collisions();
        res.candidates = ens.candidates();
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.results.push_back(std::move(res));
    }
    evaluate_verdicts(r, opt.margin);
    return r;
}

/// Built-in test functions for the operator study.
enum class TestFunctionKind { SingleMode, GaussianBump, Constant };

struct OperatorStudyOptions {
    std::string label = "operator";
    TestFunctionKind phi = TestFunctionKind::SingleMode;
    DriftChoice drift = DriftChoice::Auto;
    std::size_t x_nodes = 64;
};

struct OperatorStudyReport {
    std::string label;
    json config;
    json options;
    std::vector<double> eps;
    std::vector<double> sup_error;
    std::vector<double> l2_error;
    double order = 0.0;
    bool strictly_decreasing = false;
    bool pass = false;
};

inline const char* test_function_name(TestFunctionKind k) {
    switch (k) {
    case TestFunctionKind::SingleMode: return "single_mode";
    case TestFunctionKind::GaussianBump: return "gaussian_bump";
    case TestFunctionKind::Constant: return "constant";
    }
    return "constant";
}

inline TestFunctionKind test_function_from_string(const std::string& s) {
    if (s == "single_mode") return TestFunctionKind::SingleMode;
    if (s == "gaussian_bump") return TestFunctionKind::GaussianBump;
    if (s == "constant") return TestFunctionKind::Constant;
    throw Error(ErrorCode::InvalidConfig, "unknown test function '" + s + "'");
}

inline TestFunction make_test_function(TestFunctionKind k, double L, std::size_t n) {
    switch (k) {
    case TestFunctionKind::SingleMode: return TestFunction::single_mode(1, L, n);
    case TestFunctionKind::GaussianBump: return TestFunction::gaussian_bump(L, L / 12.0, n / 4 - 1, L / 2.0, n);
    case TestFunctionKind::Constant: return TestFunction::constant(1.0 / L, L, n);
    }
    return TestFunction::constant(1.0 / L, L, n);
}

/// L^eps(phi) against the limit operator across the eps schedule.
inline OperatorStudyReport run_operator_study(const RunConfig& cfg, const OperatorStudyOptions& opt) {
    validate(cfg.params);
    const auto& p = cfg.params;
    const CollisionContext ctx = make_context(cfg);
    const LimitCoefficients co = limit_coefficients(ctx, p.dim);
    const DriftChoice drift = resolve_drift(opt.drift, p.alpha, Scaling::Diffusive);
    const TestFunction phi = make_test_function(opt.phi, p.domain_length, opt.x_nodes);
    const MacroState lim = limit_operator(phi, co, limit_drift(drift, p.field, p.domain_length, opt.x_nodes, ctx, co.D));

    OperatorStudyReport r;
    r.label = opt.label;
    r.config = to_json(cfg);
    r.options = {{"phi", test_function_name(opt.phi)},
                 {"drift", drift_name(drift)},
                 {"x_nodes", opt.x_nodes}};
    const double dx = p.domain_length / static_cast<double>(opt.x_nodes);
    for (double eps : p.epsilon_schedule) {
        const MacroState le = L_eps(phi, eps, p.field, ctx);
        double sup = 0.0, l2 = 0.0;
        for (std::size_t j = 0; j < opt.x_nodes; ++j) {
            const double d = std::abs(le.rho[j] - lim.rho[j]);
            sup = std::max(sup, d);
            l2 += d * d * dx;
        }
        r.eps.push_back(eps);
        r.sup_error.push_back(sup);
        r.l2_error.push_back(std::sqrt(l2));
    }
    r.strictly_decreasing = !r.sup_error.empty();
    for (std::size_t i = 1; i < r.sup_error.size(); ++i)
        r.strictly_decreasing = r.strictly_decreasing && r.sup_error[i] < r.sup_error[i - 1];
    bool positive = true;
    for (double e : r.sup_error) positive = positive && e > 0.0;
    r.order = positive && r.eps.size() > 1 ? loglog_slope(r.eps, r.sup_error) : 0.0;
    bool all_zero = true;
    for (double e : r.sup_error) all_zero = all_zero && e == 0.0;
    r.pass = all_zero || (r.strictly_decreasing && r.order > 0.0);
    return r;
}

/// A table written as CSV next to report.json.
struct CsvTable {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// One entry of report.json.
struct CaseReport {
    std::string label;
    std::string kind;
    bool pass = true;
    json data;
    std::vector<CsvTable> tables;
};

struct Report {
    json config;
    std::vector<CaseReport> cases;

    bool all_pass() const {
        for (const auto& c : cases)
            if (!c.pass) return false;
        return true;
    }
};

inline CaseReport to_case(const ConvergenceReport& r) {
    CaseReport c{r.label, "convergence", r.pass, json::object(), {}};
    json eps = json::array();
    CsvTable errors{"errors", {"epsilon", "time", "l1_error", "linf_error", "noise_floor", "ks"}, {}};
    CsvTable density{"density", {"epsilon", "bin_center", "rho_kinetic", "rho_limit"}, {}};
    for (const auto& e : r.results) {
        json snaps = json::array();
        for (const auto& s : e.snapshots) {
            snaps.push_back({{"time", s.time}, {"l1", s.l1}, {"linf", s.linf}});
            errors.rows.push_back({e.eps, s.time, s.l1, s.linf, e.noise_floor, e.ks});
        }
        eps.push_back({{"epsilon", e.eps}, {"snapshots", snaps}, {"noise_floor", e.noise_floor},
                       {"ks", std::isnan(e.ks) ? json(nullptr) : json(e.ks)}, {"collisions", e.collisions},
                       {"candidates", e.candidates}, {"seconds", e.seconds}});
        const double L = r.config.at("domain_length").get<double>();
        const double w = L / static_cast<double>(e.kinetic.size());
        for (std::size_t j = 0; j < e.kinetic.size(); ++j)
            density.rows.push_back({e.eps, w * (static_cast<double>(j) + 0.5), e.kinetic[j], e.macro[j]});
    }
    c.data = {{"config", r.config}, {"options", r.options}, {"kappa", r.kappa}, {"max_drift", r.drift},
              {"results", eps}, {"order", r.order}, {"monotone", r.monotone}, {"pass", r.pass}};
    c.tables = {errors, density};
    return c;
}

inline CaseReport to_case(const OperatorStudyReport& r) {
    CaseReport c{r.label, "operator", r.pass, json::object(), {}};
    CsvTable t{"operator", {"epsilon", "sup_error", "l2_error"}, {}};
    for (std::size_t i = 0; i < r.eps.size(); ++i) t.rows.push_back({r.eps[i], r.sup_error[i], r.l2_error[i]});
    c.data = {{"config", r.config}, {"options", r.options}, {"epsilon", r.eps}, {"sup_error", r.sup_error},
              {"l2_error", r.l2_error}, {"order", r.order}, {"strictly_decreasing", r.strictly_decreasing}, {"pass", r.pass}};
    c.tables = {t};
    return c;
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& t) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out.precision(17);
    for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
    out << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

inline json to_json(const Report& r) {
    json cases = json::array();
    for (const auto& c : r.cases) cases.push_back({{"label", c.label}, {"kind", c.kind}, {"pass", c.pass}, {"data", c.data}});
    return {{"config", r.config}, {"cases", cases}, {"pass", r.all_pass()}};
}

/// Writes report.json and one CSV per table into `dir`; returns the process exit code (0 iff all cases pass).
inline int emit(const Report& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
    {
        std::ofstream out(dir / "report.json");
        if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / "report.json").string());
        out << to_json(r).dump(2) << "\n";
        if (!out) throw Error(ErrorCode::Io, "failed writing report.json");
    }
    for (const auto& c : r.cases)
        for (const auto& t : c.tables) write_csv(dir / (c.label + "_" + t.name + ".csv"), t);
    return r.all_pass() ? 0 : 1;
}

} // namespace fraclim
