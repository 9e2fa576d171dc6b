#pragma once

#include "fraclim/coefficients.hpp"
#include "fraclim/collision.hpp"
#include "fraclim/equilibria.hpp"
#include "fraclim/macro_spectral.hpp"
#include "fraclim/params.hpp"
#include "fraclim/rules.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <vector>

namespace fraclim {

/// Real trigonometric polynomial phi(x) = c_0 + 2 Re sum_{m=1}^K c_m exp(i k_m x), k_m = 2 pi m / L,
/// sampled on a periodic grid of n points.
class TestFunction {
public:
    TestFunction(double L, std::size_t n, std::vector<cplx> coeffs) : L_(L), c_(std::move(coeffs)) {
        if (!spectral::is_power_of_two(n)) throw Error(ErrorCode::InvalidConfig, "test-function grid must be a power of two");
        if (c_.empty() || 2 * (c_.size() - 1) >= n) throw Error(ErrorCode::InvalidConfig, "bandwidth too large for the grid");
        c_[0] = cplx(c_[0].real(), 0.0);
        values_.resize(n);
        for (std::size_t j = 0; j < n; ++j) values_[j] = value(x(j, n));
    }

    static TestFunction constant(double c, double L, std::size_t n = 64) { return TestFunction(L, n, {cplx(c)}); }

    /// cos(2 pi m x / L).
    static TestFunction single_mode(int m, double L, std::size_t n = 64) {
        std::vector<cplx> c(static_cast<std::size_t>(m) + 1, cplx(0.0));
        c[static_cast<std::size_t>(m)] = m == 0 ? cplx(1.0) : cplx(0.5);
        return TestFunction(L, n, std::move(c));
    }

    /// Periodized Gaussian exp(-(x - center)^2 / (2 width^2)) truncated to `bandwidth` modes.
    static TestFunction gaussian_bump(double L, double width, std::size_t bandwidth, double center, std::size_t n = 64) {
        std::vector<cplx> c(bandwidth + 1);
        for (std::size_t m = 0; m <= bandwidth; ++m) {
            const double k = 2.0 * std::numbers::pi * static_cast<double>(m) / L;
            c[m] = width * std::sqrt(2.0 * std::numbers::pi) / L * std::exp(-0.5 * k * k * width * width) *
                   std::exp(cplx(0.0, -k * center));
        }
        return TestFunction(L, n, std::move(c));
    }

    double length() const { return L_; }
    std::size_t size() const { return values_.size(); }
    std::size_t bandwidth() const { return c_.size() - 1; }
    const std::vector<cplx>& coefficients() const { return c_; }
    const std::vector<double>& values() const { return values_; }
    double wavenumber(std::size_t m) const { return 2.0 * std::numbers::pi * static_cast<double>(m) / L_; }
    double x(std::size_t j) const { return x(j, values_.size()); }

    double value(double xq) const {
        double s = c_[0].real();
        for (std::size_t m = 1; m < c_.size(); ++m) s += 2.0 * (c_[m] * std::exp(cplx(0.0, wavenumber(m) * xq))).real();
        return s;
    }

    double derivative(double xq) const {
        double s = 0.0;
        for (std::size_t m = 1; m < c_.size(); ++m)
            s += 2.0 * (c_[m] * cplx(0.0, wavenumber(m)) * std::exp(cplx(0.0, wavenumber(m) * xq))).real();
        return s;
    }

    TestFunction combine(double a, const TestFunction& other, double b) const {
        std::vector<cplx> c(std::max(c_.size(), other.c_.size()), cplx(0.0));
        for (std::size_t m = 0; m < c_.size(); ++m) c[m] += a * c_[m];
        for (std::size_t m = 0; m < other.c_.size(); ++m) c[m] += b * other.c_[m];
        return TestFunction(L_, values_.size(), std::move(c));
    }

private:
    double x(std::size_t j, std::size_t n) const { return L_ * static_cast<double>(j) / static_cast<double>(n); }

    double L_;
    std::vector<cplx> c_;
    std::vector<double> values_;
};

/// chi = int_0^inf nu e^{-nu z} phi(x + eps v z) dz, mode by mode: each exp(i k x) is divided by 1 - i k eps v / nu.
inline double chi_eps(const TestFunction& phi, double eps, double x, double v, const CollisionContext& ctx) {
    if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorCode::InvalidConfig, "eps must lie in (0, 1]");
    const double nu = ctx.nu_at(v);
    const auto& c = phi.coefficients();
    double s = c[0].real();
    for (std::size_t m = 1; m < c.size(); ++m) {
        const double k = phi.wavenumber(m);
        s += 2.0 * (c[m] * std::exp(cplx(0.0, k * x)) / cplx(1.0, -k * eps * v / nu)).real();
    }
    return s;
}

/// Same integral by 64-point Gauss-Laguerre in u = nu z.
inline double chi_eps_quadrature(const TestFunction& phi, double eps, double x, double v, const CollisionContext& ctx) {
    const auto& rule = cached_gauss_laguerre(64);
    const double nu = ctx.nu_at(v);
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * phi.value(x + eps * v * rule.nodes[q] / nu);
    return s;
}

/// d chi / dx, used by residual checks of nu chi - eps v chi_x = nu phi.
inline double chi_eps_dx(const TestFunction& phi, double eps, double x, double v, const CollisionContext& ctx) {
    const double nu = ctx.nu_at(v);
    const auto& c = phi.coefficients();
    double s = 0.0;
    for (std::size_t m = 1; m < c.size(); ++m) {
        const double k = phi.wavenumber(m);
        s += 2.0 * (c[m] * cplx(0.0, k) * std::exp(cplx(0.0, k * x)) / cplx(1.0, -k * eps * v / nu)).real();
    }
    return s;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    return den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

struct ChiDecayReport {
    std::vector<double> eps;
    std::vector<double> error;
    double slope = 0.0;
    bool monotone = true;
};

/// e(eps) = ( int ( int M |chi - phi| dv )^2 dx )^{1/2} and its fitted order in eps.
inline ChiDecayReport chi_decay_check(const TestFunction& phi, const std::vector<double>& eps_list, const CollisionContext& ctx) {
    ChiDecayReport r;
    r.eps = eps_list;
    const auto& g = *ctx.grid;
    const double dx = phi.length() / static_cast<double>(phi.size());
    for (double eps : eps_list) {
        double s = 0.0;
        for (std::size_t j = 0; j < phi.size(); ++j) {
            const double x = phi.x(j);
            double inner = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i)
                inner += g.w(i) * ctx.M[i] * std::abs(chi_eps(phi, eps, x, g.v(i), ctx) - phi.values()[j]);
            s += dx * inner * inner;
        }
        r.error.push_back(std::sqrt(s));
    }
    for (std::size_t i = 1; i < r.error.size(); ++i) r.monotone = r.monotone && r.error[i] <= r.error[i - 1];
    bool positive = true;
    for (double e : r.error) positive = positive && e > 0.0;
    r.slope = positive && r.error.size() > 1 ? loglog_slope(r.eps, r.error) : 0.0;
    return r;
}

/// Which velocity profile weights the collision term of L^eps.
enum class LEpsWeight { Equilibrium, M };

namespace detail {

/// B(k) = eps^{-alpha} int nu F (1/(1 - i theta) - 1) dv with theta = k eps v / nu; grid part plus fitted tails.
inline cplx leps_symbol(double k, double eps, const VelocityProfile& F, const CollisionContext& ctx) {
    const auto& g = *ctx.grid;
    const double alpha = ctx.alpha();
    auto bracket = [&](double v) {
        const double nu = ctx.nu_at(v);
        const cplx it(0.0, k * eps * v / nu);
        return nu * it / (1.0 - it);
    };
    cplx s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g.interior_weights()[i] * F[i] * bracket(g.v(i));
    const auto& rule = cached_gauss_legendre(16);
    for (int side : {-1, 1}) {
        const TailFit t = fit_tail(F, side);
        if (t.value == 0.0) continue;
        const double q = std::max(t.exponent, 1.0 + 0.5 * alpha);
        const double tau_max = 45.0 / (q - 1.0);
        cplx part = 0.0;
        const std::size_t panels = 24;
        const double hw = tau_max / panels;
        for (std::size_t p = 0; p < panels; ++p)
            for (std::size_t r = 0; r < rule.size(); ++r) {
                const double tau = hw * (p + 0.5 + 0.5 * rule.nodes[r]);
                const double v = side * t.V * std::exp(tau);
                part += 0.5 * hw * rule.weights[r] * std::abs(v) * t(v) * bracket(v);
            }
        s += part;
    }
    return s * std::pow(eps, -alpha);
}

} // namespace detail

/// L^eps(phi)(x) = eps^{-alpha} int nu F_eps(x, v) (chi_eps(x, v) - phi(x)) dv on the grid of phi.
/// F_eps = F(., eps^{alpha-1} E(x)); one equilibrium per distinct field value.
inline MacroState L_eps(const TestFunction& phi, double eps, const FieldSpec& field, const CollisionContext& ctx,
                        LEpsWeight weight = LEpsWeight::Equilibrium) {
    if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorCode::InvalidConfig, "eps must lie in (0, 1]");
    const double scale = std::pow(eps, ctx.alpha() - 1.0);
    const auto& c = phi.coefficients();
    MacroState out(phi.size(), phi.length());
    std::map<double, std::vector<cplx>> cache;
    for (std::size_t j = 0; j < phi.size(); ++j) {
        const double x = phi.x(j);
        const double E = weight == LEpsWeight::M ? 0.0 : scale * field(x, phi.length());
        auto it = cache.find(E);
        if (it == cache.end()) {
            const VelocityProfile F = weight == LEpsWeight::M ? ctx.M : solve_F(E, ctx).profile;
            std::vector<cplx> B(c.size(), cplx(0.0));
            for (std::size_t m = 1; m < c.size(); ++m)
                if (c[m] != cplx(0.0)) B[m] = detail::leps_symbol(phi.wavenumber(m), eps, F, ctx);
            it = cache.emplace(E, std::move(B)).first;
        }
        const auto& B = it->second;
        double s = 0.0;
        for (std::size_t m = 1; m < c.size(); ++m) s += 2.0 * (c[m] * B[m] * std::exp(cplx(0.0, phi.wavenumber(m) * x))).real();
        out.rho[j] = s;
    }
    return out;
}

/// Limit generator -kappa (-Laplacian)^{alpha/2} phi + b(x) dphi/dx on the grid of phi.
/// `drift` is either uniform or sampled on phi's grid.
inline MacroState limit_operator(const TestFunction& phi, const LimitCoefficients& coeffs, const DriftField& drift) {
    const auto& c = phi.coefficients();
    MacroState out(phi.size(), phi.length());
    out.alpha = coeffs.alpha;
    out.kappa = coeffs.kappa;
    out.drift = drift.label;
    if (!drift.uniform && drift.values.size() != phi.size()) throw Error(ErrorCode::GridMismatch, "drift samples differ from grid");
    for (std::size_t j = 0; j < phi.size(); ++j) {
        const double x = phi.x(j);
        double s = 0.0;
        for (std::size_t m = 1; m < c.size(); ++m) {
            const double k = phi.wavenumber(m);
            s -= 2.0 * coeffs.kappa * std::pow(k, coeffs.alpha) * (c[m] * std::exp(cplx(0.0, k * x))).real();
        }
        const double b = drift.uniform ? drift.value : drift.values[j];
        out.rho[j] = s + b * phi.derivative(x);
    }
    return out;
}

} // namespace fraclim
