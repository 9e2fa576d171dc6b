#pragma once

#include "fraclim/collision.hpp"
#include "fraclim/error.hpp"
#include "fraclim/velocity_grid.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fraclim {

/// Field-modified equilibrium: T(F) = 0, sum w F = 1.
struct EquilibriumF {
    enum class Method { Explicit, PowerIteration };

    VelocityProfile profile;
    double field_value = 0.0;
    double residual = 0.0; ///< max |T(F)| on the grid
    Method method = Method::Explicit;
    double eigenvalue = 1.0;
    int sweeps = 0;

    static const char* method_name(Method m) { return m == Method::Explicit ? "explicit" : "power_iteration"; }
};

enum class FSolver { Auto, Explicit, PowerIteration };

/// Constant kernel: F(v) = int_0^inf e^{-z} M(v - (E/nu0) z) dz by double-exponential quadrature,
/// split where the path passes the peak of M.
inline double explicit_F_value(double v, double E, double nu0, double alpha) {
    const Equilibrium M(alpha);
    if (E == 0.0) return M(v);
    static thread_local boost::math::quadrature::tanh_sinh<double> finite;
    static thread_local boost::math::quadrature::exp_sinh<double> half_line;
    const double c = E / nu0;
    const double peak = v / c;
    if (peak > 0.0) {
        auto head = [&](double z) { return std::exp(-z) * M(v - c * z); };
        auto tail = [&](double y) { return std::exp(-peak - y) * M(-c * y); };
        return finite.integrate(head, 0.0, peak, 1e-13) + half_line.integrate(tail, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
    }
    auto f = [&](double z) { return std::exp(-z) * M(v - c * z); };
    return half_line.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
}

namespace detail {

inline void finish_equilibrium(EquilibriumF& F, const CollisionContext& ctx) {
    const double m = mass(F.profile);
    F.profile *= 1.0 / m;
    for (std::size_t i = 0; i < F.profile.size(); ++i)
        if (F.profile[i] < -1e-12)
            throw Error(ErrorCode::NegativeEntries, "equilibrium lost positivity at v = " + std::to_string(ctx.grid->v(i)));
    F.residual = apply_T(F.profile, F.field_value, ctx).max_abs();
}

} // namespace detail

/// Solves E dF/dv = Q(F), sum w F = 1. Auto picks the explicit formula for the constant kernel.
inline EquilibriumF solve_F(double E, const CollisionContext& ctx, FSolver method = FSolver::Auto) {
    const auto& g = *ctx.grid;
    const std::size_t n = g.size();
    EquilibriumF F;
    F.field_value = E;
    F.profile = VelocityProfile(ctx.grid);
    const bool explicit_route =
        method == FSolver::Explicit || (method == FSolver::Auto && ctx.sigma.is_constant());
    if (explicit_route) {
        if (!ctx.sigma.is_constant())
            throw Error(ErrorCode::InvalidConfig, "the explicit equilibrium formula needs a constant cross section");
        F.method = EquilibriumF::Method::Explicit;
        if (E == 0.0) {
            F.profile = ctx.M;
        } else {
            for (std::size_t i = 0; i < n; ++i) F.profile[i] = explicit_F_value(g.v(i), E, ctx.sigma.nu0(), g.alpha());
        }
        detail::finish_equilibrium(F, ctx);
        return F;
    }

    // Power iteration on K A^{-1}. Since K(g) = M (nu0 rho_g + a phi m_g), A^{-1} K g only needs
    // the two flight integrals of M and phi M per node.
    F.method = EquilibriumF::Method::PowerIteration;
    const Equilibrium Mf(g.alpha());
    std::vector<double> I0(n), I1(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = g.v(i);
        I0[i] = flight_integral(ctx, v, E, Mf);
        I1[i] = flight_integral(ctx, v, E, [&Mf](double u) { return Mf(u) * CrossSection::profile(u); });
    }
    const double nu0 = ctx.sigma.nu0(), a = ctx.sigma.amplitude();
    VelocityProfile cur = ctx.M;
    VelocityProfile next(ctx.grid);
    double eig = 0.0;
    int sweep = 0;
    for (; sweep < 10000; ++sweep) {
        const GainMoments gm = gain_moments(cur);
        const double w_mass = nu0 * gm.rho * ctx.m0 + a * gm.phi * ctx.m1;
        for (std::size_t i = 0; i < n; ++i) next[i] = nu0 * gm.rho * I0[i] + a * gm.phi * I1[i];
        double kmass = 0.0;
        for (std::size_t i = 0; i < n; ++i) kmass += g.w(i) * ctx.nu[i] * next[i];
        eig = kmass / w_mass;
        next *= 1.0 / mass(next);
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) diff += g.w(i) * std::abs(next[i] - cur[i]);
        std::swap(cur, next);
        if (diff < 1e-10) {
            ++sweep;
            break;
        }
    }
    if (std::abs(eig - 1.0) > 1e-6)
        throw Error(ErrorCode::PowerIterationStalled, "dominant eigenvalue " + std::to_string(eig) + " differs from 1");
    F.profile = cur;
    F.eigenvalue = eig;
    F.sweeps = sweep;
    detail::finish_equilibrium(F, ctx);
    return F;
}

/// Solution of Q(lambda) = dM/dv with zero mass.
struct LambdaField {
    VelocityProfile profile;
    double residual = 0.0; ///< max |Q(lambda) - dM/dv|
};

inline LambdaField solve_lambda(const CollisionContext& ctx) {
    const auto& g = *ctx.grid;
    const auto n = static_cast<Eigen::Index>(g.size());
    const double scale = mass(M_profile(ctx.grid));
    const VelocityProfile dM = dM_profile(ctx.grid);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, n + 1);
    A.topLeftCorner(n, n) = dense_Q(ctx);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto si = static_cast<std::size_t>(i);
        A(i, n) = ctx.M[si];
        A(n, i) = g.w(si);
        rhs(i) = dM[si] / scale;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    if (!(lu.rcond() > 1e-14)) throw Error(ErrorCode::SingularSystem, "bordered collision matrix is singular");
    const Eigen::VectorXd x = lu.solve(rhs);
    LambdaField L;
    L.profile = VelocityProfile(ctx.grid);
    for (Eigen::Index i = 0; i < n; ++i) L.profile[static_cast<std::size_t>(i)] = x(i);
    if (!L.profile.finite()) throw Error(ErrorCode::SingularSystem, "non-finite solution");
    const VelocityProfile q = apply_Q(L.profile, ctx);
    for (std::size_t i = 0; i < q.size(); ++i) L.residual = std::max(L.residual, std::abs(q[i] - rhs(static_cast<Eigen::Index>(i))));
    return L;
}

/// G = F - M - E lambda with its L^2(1/M) norm.
struct RemainderG {
    VelocityProfile profile;
    double l2_norm = 0.0;
    double max_ratio = 0.0; ///< max |G| / M
};

inline RemainderG remainder_G(double E, const CollisionContext& ctx, const LambdaField& lambda) {
    const EquilibriumF F = solve_F(E, ctx);
    RemainderG G;
    G.profile = F.profile - ctx.M - E * lambda.profile;
    double s = 0.0;
    for (std::size_t i = 0; i < G.profile.size(); ++i) {
        s += ctx.grid->w(i) * G.profile[i] * G.profile[i] / ctx.M[i];
        G.max_ratio = std::max(G.max_ratio, std::abs(G.profile[i]) / ctx.M[i]);
    }
    G.l2_norm = std::sqrt(s);
    return G;
}

inline RemainderG remainder_G(double E, const CollisionContext& ctx) { return remainder_G(E, ctx, solve_lambda(ctx)); }

/// R = F - M and the weighted bound max |R| (1+|v|) / M.
struct DeviationR {
    VelocityProfile profile;
    double bound_ratio = 0.0;
};

inline DeviationR deviation_R(const EquilibriumF& F, const CollisionContext& ctx) {
    DeviationR R;
    R.profile = F.profile - ctx.M;
    for (std::size_t i = 0; i < R.profile.size(); ++i)
        R.bound_ratio = std::max(R.bound_ratio, std::abs(R.profile[i]) * (1.0 + std::abs(ctx.grid->v(i))) / ctx.M[i]);
    return R;
}

inline DeviationR deviation_R(double E, const CollisionContext& ctx) { return deviation_R(solve_F(E, ctx), ctx); }

/// mu(E) = int v (F - M) dv with a fitted power-law tail.
inline double drift_mu(const EquilibriumF& F, const CollisionContext& ctx) {
    if (F.field_value == 0.0) return 0.0;
    return power_moment(F.profile - ctx.M, 1.0, true);
}

inline double drift_mu(double E, const CollisionContext& ctx) { return drift_mu(solve_F(E, ctx), ctx); }

/// Second route to mu: integrating the stationary equation against v gives
/// nu0 int v F + a m1 int v phi F = E, and the first integral is mu since M is even.
inline double drift_mu_stationary(const EquilibriumF& F, const CollisionContext& ctx) {
    const double vphiF = moment(F.profile, [](double v) { return v * CrossSection::profile(v); });
    return (F.field_value - ctx.sigma.amplitude() * ctx.m1 * vphiF) / ctx.sigma.nu0();
}

/// Two-sided comparison of F with M and the weighted gradient bound.
struct EquilibriumBounds {
    double min_ratio = 0.0;      ///< min F / M
    double max_ratio = 0.0;      ///< max F / M
    double gradient_ratio = 0.0; ///< max |dF/dv| (1+|v|) / M
};

inline EquilibriumBounds equilibrium_bounds(const EquilibriumF& F, const CollisionContext& ctx) {
    EquilibriumBounds b;
    b.min_ratio = std::numeric_limits<double>::infinity();
    const VelocityProfile d = d_dv(F.profile);
    for (std::size_t i = 0; i < F.profile.size(); ++i) {
        const double r = F.profile[i] / ctx.M[i];
        b.min_ratio = std::min(b.min_ratio, r);
        b.max_ratio = std::max(b.max_ratio, r);
        b.gradient_ratio = std::max(b.gradient_ratio, std::abs(d[i]) * (1.0 + std::abs(ctx.grid->v(i))) / ctx.M[i]);
    }
    return b;
}

/// Central difference of F in E and its weighted size max |dF/dE| (1+|v|) / F at steps h and h/2.
struct DEReport {
    VelocityProfile dEF;
    double ratio_h = 0.0;
    double ratio_h2 = 0.0;
    bool stable = false;
};

inline DEReport check_dE_F(double E, const CollisionContext& ctx, double h = 1e-3) {
    auto quotient = [&](double step, VelocityProfile* out) {
        const EquilibriumF Fp = solve_F(E + step, ctx);
        const EquilibriumF Fm = solve_F(E - step, ctx);
        const EquilibriumF F0 = solve_F(E, ctx);
        VelocityProfile d = Fp.profile - Fm.profile;
        d *= 0.5 / step;
        double r = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i)
            r = std::max(r, std::abs(d[i]) * (1.0 + std::abs(ctx.grid->v(i))) / F0.profile[i]);
        if (out) *out = d;
        return r;
    };
    DEReport rep;
    rep.ratio_h = quotient(h, &rep.dEF);
    rep.ratio_h2 = quotient(0.5 * h, nullptr);
    const double q = rep.ratio_h2 / rep.ratio_h;
    rep.stable = std::isfinite(q) && q < 2.0 && q > 0.5;
    return rep;
}

} // namespace fraclim
