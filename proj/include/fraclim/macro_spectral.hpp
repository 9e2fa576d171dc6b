#pragma once

#include "fraclim/coefficients.hpp"
#include "fraclim/error.hpp"

#include <unsupported/Eigen/FFT>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace fraclim {

using cplx = std::complex<double>;

namespace spectral {

/// Physical wavenumber of FFT index j on a torus of length L; the Nyquist index maps to +n/2.
inline double wavenumber(std::size_t j, std::size_t n, double L) {
    const double m = j <= n / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n);
    return 2.0 * std::numbers::pi * m / L;
}

inline std::vector<cplx> forward(const std::vector<double>& x) {
    static thread_local Eigen::FFT<double> fft;
    std::vector<cplx> out;
    std::vector<cplx> in(x.begin(), x.end());
    fft.fwd(out, in);
    return out;
}

inline std::vector<double> inverse(const std::vector<cplx>& X) {
    static thread_local Eigen::FFT<double> fft;
    std::vector<cplx> out;
    fft.inv(out, X);
    std::vector<double> r(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) r[i] = out[i].real();
    return r;
}

inline bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

} // namespace spectral

/// Periodic grid function on [0, L) with n (power of two) points x_j = j L / n.
struct MacroState {
    std::vector<double> rho;
    double length = 2.0 * std::numbers::pi;
    double time = 0.0;
    double alpha = 0.0;
    double kappa = 0.0;
    std::string drift = "none";

    MacroState() = default;
    MacroState(std::size_t n, double L) : rho(n, 0.0), length(L) {
        if (!spectral::is_power_of_two(n)) throw Error(ErrorCode::InvalidConfig, "spatial grid size must be a power of two");
        if (!(L > 0.0)) throw Error(ErrorCode::NonPositiveDomain, "domain length must be positive");
    }

    template <class Fn>
    static MacroState sample(std::size_t n, double L, Fn&& f) {
        MacroState s(n, L);
        for (std::size_t j = 0; j < n; ++j) s.rho[j] = f(s.x(j));
        return s;
    }

    std::size_t size() const { return rho.size(); }
    double dx() const { return length / static_cast<double>(rho.size()); }
    double x(std::size_t j) const { return dx() * static_cast<double>(j); }

    double mass() const {
        double s = 0.0;
        for (double r : rho) s += r;
        return s * dx();
    }

    /// Fourier coefficients c_j with rho(x) = sum_j c_j exp(i k_j x).
    std::vector<cplx> spectrum() const {
        auto X = spectral::forward(rho);
        const double inv = 1.0 / static_cast<double>(rho.size());
        for (auto& c : X) c *= inv;
        return X;
    }

    /// Trigonometric interpolant at arbitrary x; the Nyquist mode enters as a cosine.
    double evaluate(double xq) const {
        const auto c = spectrum();
        const std::size_t n = c.size();
        double s = c[0].real();
        for (std::size_t j = 1; j < n / 2; ++j) s += 2.0 * (c[j] * std::exp(cplx(0.0, spectral::wavenumber(j, n, length) * xq))).real();
        s += c[n / 2].real() * std::cos(spectral::wavenumber(n / 2, n, length) * xq);
        return s;
    }

    /// Exact averages of the trigonometric interpolant over nbins equal bins.
    std::vector<double> bin_averages(std::size_t nbins) const {
        const auto c = spectrum();
        const std::size_t n = c.size();
        const double w = length / static_cast<double>(nbins);
        std::vector<double> out(nbins, c[0].real());
        for (std::size_t b = 0; b < nbins; ++b) {
            const double a0 = w * static_cast<double>(b), a1 = a0 + w;
            double s = 0.0;
            for (std::size_t j = 1; j < n / 2; ++j) {
                const double k = spectral::wavenumber(j, n, length);
                const cplx avg = (std::exp(cplx(0.0, k * a1)) - std::exp(cplx(0.0, k * a0))) / cplx(0.0, k * w);
                s += 2.0 * (c[j] * avg).real();
            }
            const double kn = spectral::wavenumber(n / 2, n, length);
            s += c[n / 2].real() * (std::sin(kn * a1) - std::sin(kn * a0)) / (kn * w);
            out[b] += s;
        }
        return out;
    }
};

/// kappa (-Laplacian)^{alpha/2} rho by the Fourier multiplier kappa |k|^alpha.
inline MacroState frac_laplacian_fourier(const MacroState& rho, double alpha, double kappa) {
    auto X = spectral::forward(rho.rho);
    const std::size_t n = X.size();
    for (std::size_t j = 0; j < n; ++j) X[j] *= kappa * std::pow(std::abs(spectral::wavenumber(j, n, rho.length)), alpha);
    MacroState out = rho;
    out.rho = spectral::inverse(X);
    return out;
}

/// Spectral derivative d/dx (Nyquist mode dropped).
inline std::vector<double> spectral_derivative(const std::vector<double>& f, double L) {
    auto X = spectral::forward(f);
    const std::size_t n = X.size();
    for (std::size_t j = 0; j < n; ++j) X[j] *= j == n / 2 ? cplx(0.0) : cplx(0.0, spectral::wavenumber(j, n, L));
    return spectral::inverse(X);
}

struct SingularIntegralOptions {
    double r_core = 1e-3;   ///< below this radius the second difference is replaced by its even Taylor fit
    double r_far = 60.0;    ///< beyond this radius f(x +- r) is treated as zero
    bool far_field = true;  ///< add the analytic far-field term 2 f(x) r_far^{-alpha} / alpha
    double tolerance = 1e-12;
};

/// c_{1,alpha} int_0^inf (2 f(x) - f(x+r) - f(x-r)) / r^{1+alpha} dr, the symmetrized
/// gradient-subtracted kernel form of (-Laplacian)^{alpha/2} on the line. Requires 1 < alpha < 2.
template <class Fn>
double frac_laplacian_singular(Fn&& f, double x, double alpha, const SingularIntegralOptions& opt = {}) {
    if (!(alpha > 1.0 && alpha < 2.0))
        throw Error(ErrorCode::AlphaOutOfRange, "the singular-integral form is implemented for 1 < alpha < 2");
    const double fx = f(x);
    auto second_difference = [&](double r) { return 2.0 * fx - f(x + r) - f(x - r); };
    // near the origin N(r)/r^2 = g0 + g2 r^2 + O(r^4), fitted from two radii
    const double rc = opt.r_core;
    const double q1 = second_difference(rc) / (rc * rc);
    const double q2 = second_difference(0.5 * rc) / (0.25 * rc * rc);
    const double g2 = (q1 - q2) / (0.75 * rc * rc);
    const double g0 = q2 - 0.25 * g2 * rc * rc;
    const double core = g0 * std::pow(rc, 2.0 - alpha) / (2.0 - alpha) + g2 * std::pow(rc, 4.0 - alpha) / (4.0 - alpha);
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    auto integrand = [&](double r) { return second_difference(r) / std::pow(r, 1.0 + alpha); };
    double body = 0.0;
    // geometric panels resolve the r^{-1-alpha} weight near the core
    double a = rc;
    while (a < opt.r_far) {
        const double b = std::min(opt.r_far, std::max(2.0 * a, a + 1e-12));
        body += GK::integrate(integrand, a, std::min(b, a + 2.0), 12, opt.tolerance);
        a = std::min(b, a + 2.0);
    }
    const double far = opt.far_field ? 2.0 * fx * std::pow(opt.r_far, -alpha) / alpha : 0.0;
    return c_d_alpha(1, alpha) * (core + body + far);
}

/// Drift of the advection term: constant or sampled on the macro grid.
struct DriftField {
    bool uniform = true;
    double value = 0.0;
    std::vector<double> values;
    std::string label = "none";

    static DriftField constant(double b, std::string label = "constant") { return {true, b, {}, std::move(label)}; }
    static DriftField sampled(std::vector<double> b, std::string label = "sampled") {
        return {false, 0.0, std::move(b), std::move(label)};
    }

    double max_abs() const {
        if (uniform) return std::abs(value);
        double m = 0.0;
        for (double b : values) m = std::max(m, std::abs(b));
        return m;
    }
};

/// Largest step accepted on the Runge-Kutta advection path.
inline double advection_dt_limit(const MacroState& s, const DriftField& b) {
    const double m = b.max_abs();
    return m > 0.0 ? s.dx() / (2.0 * m) : std::numeric_limits<double>::infinity();
}

namespace detail {

/// -d/dx (b rho) with the 2/3 rule applied to the product.
inline std::vector<double> advection_rhs(const std::vector<double>& rho, const std::vector<double>& b, double L) {
    const std::size_t n = rho.size();
    std::vector<double> prod(n);
    for (std::size_t j = 0; j < n; ++j) prod[j] = b[j] * rho[j];
    auto X = spectral::forward(prod);
    const std::size_t cut = n / 3;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t m = j <= n / 2 ? j : n - j;
        X[j] = m > cut ? cplx(0.0) : X[j] * cplx(0.0, -spectral::wavenumber(j, n, L));
    }
    return spectral::inverse(X);
}

inline std::vector<double> dealias(const std::vector<double>& f) {
    auto X = spectral::forward(f);
    const std::size_t n = X.size();
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t m = j <= n / 2 ? j : n - j;
        if (m > n / 3) X[j] = 0.0;
    }
    return spectral::inverse(X);
}

} // namespace detail

/// Strang splitting for d_t rho + kappa (-Laplacian)^{alpha/2} rho + d_x (b rho) = 0:
/// exact half-step diffusion, advection by an exact shift (uniform b) or RK4 on the dealiased flux.
inline MacroState advance_macro(const MacroState& in, double dt, const LimitCoefficients& coeffs, const DriftField& drift,
                                double until) {
    if (until < in.time) throw Error(ErrorCode::NonMonotoneTime, "target time precedes the current time");
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidConfig, "time step must be positive");
    MacroState s = in;
    s.alpha = coeffs.alpha;
    s.kappa = coeffs.kappa;
    s.drift = drift.label;
    const std::size_t n = s.size();
    if (!drift.uniform && drift.values.size() != n) throw Error(ErrorCode::GridMismatch, "drift samples differ from grid size");
    const double span = until - in.time;
    if (span <= 0.0) return s;
    const auto steps = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
    const double h = span / static_cast<double>(steps);
    if (!drift.uniform && h > advection_dt_limit(s, drift) * (1.0 + 1e-12))
        throw Error(ErrorCode::StabilityViolation, "advection step " + std::to_string(h) + " exceeds dx / (2 max|b|)");

    std::vector<double> half(n);
    for (std::size_t j = 0; j < n; ++j)
        half[j] = std::exp(-coeffs.kappa * std::pow(std::abs(spectral::wavenumber(j, n, s.length)), coeffs.alpha) * 0.5 * h);
    std::vector<cplx> shift(n, cplx(1.0));
    if (drift.uniform)
        for (std::size_t j = 0; j < n; ++j)
            shift[j] = j == n / 2 ? cplx(std::cos(spectral::wavenumber(j, n, s.length) * drift.value * h))
                                  : std::exp(cplx(0.0, -spectral::wavenumber(j, n, s.length) * drift.value * h));
    const std::vector<double> b = drift.uniform ? std::vector<double>{} : detail::dealias(drift.values);

    auto X = spectral::forward(s.rho);
    for (std::size_t step = 0; step < steps; ++step) {
        for (std::size_t j = 0; j < n; ++j) X[j] *= half[j];
        if (drift.uniform) {
            for (std::size_t j = 0; j < n; ++j) X[j] *= shift[j];
        } else if (drift.max_abs() > 0.0) {
            std::vector<double> r = spectral::inverse(X);
            const auto k1 = detail::advection_rhs(r, b, s.length);
            std::vector<double> tmp(n);
            for (std::size_t j = 0; j < n; ++j) tmp[j] = r[j] + 0.5 * h * k1[j];
            const auto k2 = detail::advection_rhs(tmp, b, s.length);
            for (std::size_t j = 0; j < n; ++j) tmp[j] = r[j] + 0.5 * h * k2[j];
            const auto k3 = detail::advection_rhs(tmp, b, s.length);
            for (std::size_t j = 0; j < n; ++j) tmp[j] = r[j] + h * k3[j];
            const auto k4 = detail::advection_rhs(tmp, b, s.length);
            for (std::size_t j = 0; j < n; ++j) r[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            X = spectral::forward(r);
        }
        for (std::size_t j = 0; j < n; ++j) X[j] *= half[j];
    }
    s.rho = spectral::inverse(X);
    s.time = until;
    return s;
}

} // namespace fraclim
