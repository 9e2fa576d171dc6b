#pragma once

#include "fraclim/error.hpp"
#include "fraclim/params.hpp"
#include "fraclim/rules.hpp"
#include "fraclim/velocity_grid.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace fraclim {

/// Grid, cross section, discretely normalized M and the collision frequency nu on the grid.
/// For the separable kernel the gain and nu have closed forms at any velocity:
///   nu(u)   = nu0 m0 + a phi(u) m1,          m0 = sum w M, m1 = sum w phi M
///   K(g)(u) = M(u) (nu0 sum w g + a phi(u) sum w phi g).
struct CollisionContext {
    GridPtr grid;
    CrossSection sigma = CrossSection::constant(1.0);
    VelocityProfile M;
    VelocityProfile nu;
    double m0 = 1.0;
    double m1 = 0.0;

    double alpha() const { return grid->alpha(); }

    double nu_at(double u) const { return sigma.nu0() * m0 + sigma.amplitude() * m1 * CrossSection::profile(u); }

    /// Integral of nu(v - E tau) over tau in [0, s].
    double flight_exponent(double v, double E, double s) const {
        return sigma.nu0() * m0 * s + sigma.amplitude() * m1 * CrossSection::profile_path_integral(v, E, s);
    }
};

inline CollisionContext make_context(GridPtr grid, const CrossSection& sigma) {
    check_cross_section(sigma);
    CollisionContext ctx;
    ctx.grid = grid;
    ctx.sigma = sigma;
    ctx.M = M_profile(grid);
    ctx.M *= 1.0 / mass(ctx.M);
    ctx.m0 = mass(ctx.M);
    ctx.m1 = moment(ctx.M, [](double v) { return CrossSection::profile(v); });
    ctx.nu = VelocityProfile(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) ctx.nu[i] = ctx.nu_at(grid->v(i));
    return ctx;
}

/// The two moments of g the gain term depends on.
struct GainMoments {
    double rho = 0.0;
    double phi = 0.0;
};

inline GainMoments gain_moments(const VelocityProfile& g) {
    return {mass(g), moment(g, [](double v) { return CrossSection::profile(v); })};
}

/// K(g) at an arbitrary velocity, M evaluated analytically.
inline double gain_at(const CollisionContext& ctx, const GainMoments& gm, double u) {
    return Equilibrium(ctx.alpha())(u) * (ctx.sigma.nu0() * gm.rho + ctx.sigma.amplitude() * CrossSection::profile(u) * gm.phi);
}

/// Gain operator on the grid.
inline VelocityProfile apply_K(const VelocityProfile& f, const CollisionContext& ctx) {
    f.require_grid(ctx.grid);
    const GainMoments gm = gain_moments(f);
    VelocityProfile out(ctx.grid);
    for (std::size_t i = 0; i < f.size(); ++i)
        out[i] = ctx.M[i] * (ctx.sigma.nu0() * gm.rho + ctx.sigma.amplitude() * CrossSection::profile(ctx.grid->v(i)) * gm.phi);
    return out;
}

/// Q(f) = K(f) - nu f.
inline VelocityProfile apply_Q(const VelocityProfile& f, const CollisionContext& ctx) {
    VelocityProfile out = apply_K(f, ctx);
    for (std::size_t i = 0; i < f.size(); ++i) out[i] -= ctx.nu[i] * f[i];
    return out;
}

/// Matrix of Q on the grid: Q_ij = w_j sigma(v_i, v_j) M_i - delta_ij nu_i.
inline Eigen::MatrixXd dense_Q(const CollisionContext& ctx) {
    const auto& g = *ctx.grid;
    const auto n = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXd Q(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto si = static_cast<std::size_t>(i);
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto sj = static_cast<std::size_t>(j);
            Q(i, j) = g.w(sj) * ctx.sigma(g.v(si), g.v(sj)) * ctx.M[si];
        }
        Q(i, i) -= ctx.nu[si];
    }
    return Q;
}

/// Integral over s in (0, inf) of exp(-int_0^s nu(v - E tau) dtau) h(v - E s).
/// Composite 8-point Gauss-Legendre panels on (0, 46/nu1), broken where the path crosses u = 0.
template <class H>
double flight_integral(const CollisionContext& ctx, double v, double E, H&& h) {
    if (E == 0.0) return h(v) / ctx.nu_at(v);
    const auto& rule = cached_gauss_legendre(8);
    const double S = 46.0 / ctx.sigma.nu1();
    const double width = std::min(0.5 / ctx.sigma.nu2(), 0.25 / std::abs(E));
    double breaks[3] = {0.0, S, S};
    int nb = 2;
    const double kink = v / E;
    if (kink > 0.0 && kink < S) {
        breaks[1] = kink;
        breaks[2] = S;
        nb = 3;
    }
    double total = 0.0;
    for (int b = 0; b + 1 < nb; ++b) {
        const double a = breaks[b], c = breaks[b + 1];
        const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil((c - a) / width)));
        total += composite_legendre(
            [&](double s) { return std::exp(-ctx.flight_exponent(v, E, s)) * h(v - E * s); }, a, c, panels, rule);
    }
    return total;
}

/// A^{-1} h: solution g of nu g + E dg/dv = h, off-grid values of h by ProfileInterpolant.
inline VelocityProfile apply_A_inverse(const VelocityProfile& h, double E, const CollisionContext& ctx) {
    h.require_grid(ctx.grid);
    VelocityProfile out(ctx.grid);
    if (E == 0.0) {
        for (std::size_t i = 0; i < h.size(); ++i) out[i] = h[i] / ctx.nu[i];
        return out;
    }
    const ProfileInterpolant hi(h);
    for (std::size_t i = 0; i < h.size(); ++i) out[i] = flight_integral(ctx, ctx.grid->v(i), E, hi);
    return out;
}

/// T(f) = -Q(f) + E df/dv.
inline VelocityProfile apply_T(const VelocityProfile& f, double E, const CollisionContext& ctx) {
    VelocityProfile out = apply_Q(f, ctx);
    out *= -1.0;
    if (E != 0.0) {
        const VelocityProfile d = d_dv(f);
        for (std::size_t i = 0; i < f.size(); ++i) out[i] += E * d[i];
    }
    return out;
}

/// Two sides of the collision dissipation inequality.
struct QDissipation {
    double lhs = 0.0;
    double rhs = 0.0;
    double norm2 = 0.0; ///< sum w f^2 / M
};

inline QDissipation dissipation_Q(const VelocityProfile& f, const CollisionContext& ctx) {
    f.require_grid(ctx.grid);
    const VelocityProfile q = apply_Q(f, ctx);
    const double rho = mass(f);
    QDissipation d;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double w = ctx.grid->w(i);
        const double dev = f[i] - rho * ctx.M[i];
        d.lhs -= w * q[i] * f[i] / ctx.M[i];
        d.rhs += w * dev * dev / ctx.M[i];
        d.norm2 += w * f[i] * f[i] / ctx.M[i];
    }
    d.rhs *= ctx.sigma.nu1();
    return d;
}

struct TDissipation {
    double lhs = 0.0;
    double theta = 0.0; ///< lhs / ||f - rho F||^2 in L^2(1/F); infinity when the denominator vanishes
    double norm2 = 0.0; ///< sum w f^2 / F
};

/// Largest |T(F)| relative to max|F| accepted as an equilibrium.
inline constexpr double equilibrium_residual_tolerance = 1e-3;

inline TDissipation dissipation_T(const VelocityProfile& f, double E, const VelocityProfile& F, const CollisionContext& ctx) {
    f.require_grid(ctx.grid);
    F.require_grid(ctx.grid);
    const VelocityProfile tf = apply_T(F, E, ctx);
    if (tf.max_abs() > equilibrium_residual_tolerance * F.max_abs())
        throw Error(ErrorCode::NonEquilibriumF, "T(F) residual " + std::to_string(tf.max_abs()) + " too large");
    const VelocityProfile t = apply_T(f, E, ctx);
    const double rho = mass(f);
    TDissipation d;
    double den = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double w = ctx.grid->w(i);
        const double dev = f[i] - rho * F[i];
        d.lhs += w * t[i] * f[i] / F[i];
        den += w * dev * dev / F[i];
        d.norm2 += w * f[i] * f[i] / F[i];
    }
    d.theta = den > 0.0 ? d.lhs / den : std::numeric_limits<double>::infinity();
    return d;
}

} // namespace fraclim
