#pragma once

#include "fraclim/collision.hpp"
#include "fraclim/equilibria.hpp"
#include "fraclim/error.hpp"
#include "fraclim/rules.hpp"
#include "fraclim/velocity_grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace fraclim {

/// Constant of the singular-integral form of (-Laplacian)^{alpha/2} in d dimensions.
inline double c_d_alpha(int d, double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw Error(ErrorCode::AlphaOutOfRange, "c_d_alpha needs 0 < alpha < 2");
    if (d < 1) throw Error(ErrorCode::UnsupportedDimension, "dimension must be positive");
    return alpha * std::pow(2.0, alpha - 1.0) * std::exp(std::lgamma(0.5 * (alpha + d)) - std::lgamma(0.5 * (2.0 - alpha))) /
           std::pow(std::numbers::pi, 0.5 * d);
}

/// Tail constant: |v|^{1+alpha} M(v) -> gamma.
inline double gamma_of_M(double alpha) {
    check_alpha(alpha);
    return 1.0 / normalization_Z(alpha);
}

/// Closed form gamma Gamma(alpha+1) nu0^{1-alpha} / c.
inline double kappa_closed_form(double alpha, double nu0, double gamma, int d = 1) {
    return gamma * std::tgamma(alpha + 1.0) * std::pow(nu0, 1.0 - alpha) / c_d_alpha(d, alpha);
}

/// (gamma nu0^2 / c) int_0^inf z^alpha e^{-nu0 z} dz by 128-point generalized Gauss-Laguerre
/// (weight y^{alpha-1} e^{-y} after y = nu0 z, leaving the integrand y).
inline double kappa_quadrature(double alpha, double nu0, double gamma, int d = 1) {
    const auto& rule = cached_gauss_laguerre(128, alpha - 1.0);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * rule.nodes[i];
    const double integral = s / std::pow(nu0, alpha + 1.0);
    return gamma * nu0 * nu0 * integral / c_d_alpha(d, alpha);
}

/// Diffusivity of the limit equation; the closed form is checked against the quadrature.
inline double kappa(double alpha, double nu0, double gamma, int d = 1) {
    if (!(alpha > 0.0) || !(nu0 > 0.0) || !(gamma > 0.0)) throw Error(ErrorCode::InvalidConfig, "kappa needs positive inputs");
    const double closed = kappa_closed_form(alpha, nu0, gamma, d);
    const double quad = kappa_quadrature(alpha, nu0, gamma, d);
    if (std::abs(closed - quad) > 1e-10 * std::abs(closed))
        throw Error(ErrorCode::QuadratureMismatch,
                    "kappa closed form " + std::to_string(closed) + " vs quadrature " + std::to_string(quad));
    return closed;
}

/// D = int lambda v dv with a fitted power-law tail. Refused at alpha = 1.
inline double matrix_D(const LambdaField& lambda, const CollisionContext& ctx) {
    if (ctx.alpha() <= 1.0)
        throw Error(ErrorCode::TailDivergence, "D is not defined in the critical case alpha = 1; use drift_mu");
    return power_moment(lambda.profile, 1.0, true);
}

/// Coefficients of the limit equation.
struct LimitCoefficients {
    double alpha = 1.5;
    double c_d_alpha = 0.0;
    double gamma = 0.0;
    double nu0 = 1.0;
    double kappa = 0.0;
    double D = 0.0; ///< zero in the critical case where mu(E) takes over
};

inline LimitCoefficients limit_coefficients(const CollisionContext& ctx, int d = 1) {
    LimitCoefficients c;
    c.alpha = ctx.alpha();
    c.c_d_alpha = c_d_alpha(d, c.alpha);
    c.gamma = gamma_of_M(c.alpha);
    c.nu0 = ctx.sigma.nu0();
    c.kappa = kappa(c.alpha, c.nu0, c.gamma, d);
    if (c.alpha > 1.0) c.D = matrix_D(solve_lambda(ctx), ctx);
    return c;
}

} // namespace fraclim
