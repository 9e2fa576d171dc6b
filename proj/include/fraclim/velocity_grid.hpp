#pragma once

#include "fraclim/error.hpp"
#include "fraclim/params.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <ostream>
#include <vector>

namespace fraclim {

/// Normalization Z of M(v) = Z^{-1} (1+v^2)^{-(1+alpha)/2} on the line.
inline double normalization_Z(double alpha) {
    return std::sqrt(std::numbers::pi) * std::exp(std::lgamma(0.5 * alpha) - std::lgamma(0.5 * (1.0 + alpha)));
}

/// M(v) with the normalization evaluated once.
class Equilibrium {
public:
    explicit Equilibrium(double alpha) : alpha_(alpha) {
        check_alpha(alpha);
        inv_z_ = 1.0 / normalization_Z(alpha);
    }

    double alpha() const { return alpha_; }
    double gamma() const { return inv_z_; }
    double operator()(double v) const { return std::pow(1.0 + v * v, -0.5 * (1.0 + alpha_)) * inv_z_; }
    double derivative(double v) const { return -(1.0 + alpha_) * v * std::pow(1.0 + v * v, -0.5 * (3.0 + alpha_)) * inv_z_; }

private:
    double alpha_;
    double inv_z_;
};

/// Heavy-tailed equilibrium M(v).
inline double eval_M(double v, double alpha) { return Equilibrium(alpha)(v); }

/// dM/dv.
inline double eval_dM(double v, double alpha) { return Equilibrium(alpha).derivative(v); }

/// Mass of M on (V, inf). M is a Student-t law with alpha degrees of freedom scaled by alpha^{-1/2}.
inline double M_upper_tail(double V, double alpha) {
    boost::math::students_t dist(alpha);
    return boost::math::cdf(boost::math::complement(dist, std::sqrt(alpha) * V));
}

/// Cumulative distribution of M.
inline double M_cdf(double v, double alpha) {
    boost::math::students_t dist(alpha);
    return boost::math::cdf(dist, std::sqrt(alpha) * v);
}

namespace detail {

/// Fornberg's finite-difference weights for the first derivative at z from nodes x.
inline std::vector<double> fd_first_derivative_weights(double z, const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::array<double, 2>> c(n, {0.0, 0.0});
    double c1 = 1.0, c4 = x[0] - z;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t mn = std::min<std::size_t>(i, 1);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = c[i][1];
    return w;
}

/// Gregory end corrections of order six for the trapezoid rule.
inline constexpr std::array<double, 5> gregory6{95.0 / 288.0, 317.0 / 240.0, 23.0 / 30.0, 793.0 / 720.0,
                                                157.0 / 160.0};

} // namespace detail

/// Symmetric velocity grid v = s sinh(t) on uniform t in [-T, T], T = asinh(vmax / s).
/// Weights are the Gregory-corrected trapezoid rule in t times dv/dt; each end node also carries
/// the mass of M beyond vmax measured in units of M(vmax).
class VelocityGrid {
public:
    static constexpr std::size_t stencil = 9;

    static std::shared_ptr<const VelocityGrid> build(std::size_t n, double vmax, double stretch, double alpha) {
        if (n % 2 != 0) throw Error(ErrorCode::OddNodeCount, "node count must be even");
        if (n < 16) throw Error(ErrorCode::InvalidConfig, "at least 16 velocity nodes are required");
        if (!(vmax > 0.0) || !(stretch > 0.0)) throw Error(ErrorCode::NonPositiveExtent, "vmax and stretch must be positive");
        check_alpha(alpha);
        return std::shared_ptr<const VelocityGrid>(new VelocityGrid(n, vmax, stretch, alpha));
    }

    std::size_t size() const { return v_.size(); }
    double vmax() const { return vmax_; }
    double stretch() const { return s_; }
    double alpha() const { return alpha_; }
    double t_max() const { return tmax_; }
    double t_step() const { return h_; }

    const std::vector<double>& nodes() const { return v_; }
    const std::vector<double>& weights() const { return w_; }
    /// Weights without the tail mass attached to the end nodes.
    const std::vector<double>& interior_weights() const { return w_int_; }
    /// Tail mass of M beyond vmax divided by M(vmax).
    double tail_weight() const { return tail_; }
    double t_node(std::size_t i) const { return t_[i]; }
    /// dv/dt at node i.
    double jacobian(std::size_t i) const { return s_ * std::cosh(t_[i]); }

    double v(std::size_t i) const { return v_[i]; }
    double w(std::size_t i) const { return w_[i]; }

    double to_t(double v) const { return std::asinh(v / s_); }

    /// First index of the 9-point derivative stencil for node i and its weights in t.
    std::size_t stencil_start(std::size_t i) const { return start_[i]; }
    const std::array<double, stencil>& stencil_weights(std::size_t i) const { return dw_[i]; }

private:
    VelocityGrid(std::size_t n, double vmax, double stretch, double alpha)
        : vmax_(vmax), s_(stretch), alpha_(alpha) {
        tmax_ = std::asinh(vmax / stretch);
        h_ = 2.0 * tmax_ / static_cast<double>(n - 1);
        t_.resize(n);
        v_.resize(n);
        w_int_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            t_[i] = -tmax_ + h_ * static_cast<double>(i);
            if (2 * i + 1 == n) t_[i] = 0.0;
        }
        for (std::size_t i = 0; i < n / 2; ++i) t_[n - 1 - i] = -t_[i];
        for (std::size_t i = 0; i < n; ++i) {
            v_[i] = s_ * std::sinh(t_[i]);
            double g = 1.0;
            const std::size_t edge = std::min(i, n - 1 - i);
            if (edge < detail::gregory6.size()) g = detail::gregory6[edge];
            w_int_[i] = h_ * g * s_ * std::cosh(t_[i]);
        }
        for (std::size_t i = 0; i < n / 2; ++i) {
            v_[n - 1 - i] = -v_[i];
            w_int_[n - 1 - i] = w_int_[i];
        }
        const double V = v_[n - 1];
        tail_ = M_upper_tail(V, alpha) / eval_M(V, alpha);
        w_ = w_int_;
        w_.front() += tail_;
        w_.back() += tail_;

        start_.resize(n);
        dw_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t lo = i >= stencil / 2 ? i - stencil / 2 : 0;
            if (lo + stencil > n) lo = n - stencil;
            start_[i] = lo;
            std::vector<double> x(stencil);
            for (std::size_t k = 0; k < stencil; ++k) x[k] = t_[lo + k];
            const auto fw = detail::fd_first_derivative_weights(t_[i], x);
            std::copy(fw.begin(), fw.end(), dw_[i].begin());
        }
    }

    double vmax_, s_, alpha_;
    double tmax_ = 0.0, h_ = 0.0, tail_ = 0.0;
    std::vector<double> t_, v_, w_, w_int_;
    std::vector<std::size_t> start_;
    std::vector<std::array<double, stencil>> dw_;
};

using GridPtr = std::shared_ptr<const VelocityGrid>;

/// Values of a function of v on a grid.
class VelocityProfile {
public:
    VelocityProfile() = default;
    explicit VelocityProfile(GridPtr grid) : grid_(std::move(grid)), values_(grid_->size(), 0.0) {}
    VelocityProfile(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_->size()) throw Error(ErrorCode::GridMismatch, "profile length differs from grid size");
    }

    /// Samples f at the grid nodes.
    template <class Fn>
    static VelocityProfile sample(GridPtr grid, Fn&& f) {
        std::vector<double> vals(grid->size());
        for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = f(grid->v(i));
        return VelocityProfile(std::move(grid), std::move(vals));
    }

    const GridPtr& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    bool same_grid(const VelocityProfile& o) const { return grid_ == o.grid_; }
    void require_grid(const GridPtr& g) const {
        if (grid_ != g) throw Error(ErrorCode::GridMismatch, "profile lives on a different grid");
    }

    VelocityProfile& operator+=(const VelocityProfile& o) {
        o.require_grid(grid_);
        for (std::size_t i = 0; i < size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    VelocityProfile& operator-=(const VelocityProfile& o) {
        o.require_grid(grid_);
        for (std::size_t i = 0; i < size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    VelocityProfile& operator*=(double c) {
        for (auto& x : values_) x *= c;
        return *this;
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : values_) m = std::max(m, std::abs(x));
        return m;
    }
    bool finite() const {
        return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
    }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

inline VelocityProfile operator+(VelocityProfile a, const VelocityProfile& b) { return a += b; }
inline VelocityProfile operator-(VelocityProfile a, const VelocityProfile& b) { return a -= b; }
inline VelocityProfile operator*(double c, VelocityProfile a) { return a *= c; }

/// M sampled on the grid.
inline VelocityProfile M_profile(const GridPtr& grid) {
    const Equilibrium M(grid->alpha());
    return VelocityProfile::sample(grid, M);
}

/// dM/dv sampled on the grid.
inline VelocityProfile dM_profile(const GridPtr& grid) {
    const Equilibrium M(grid->alpha());
    return VelocityProfile::sample(grid, [&M](double v) { return M.derivative(v); });
}

/// Sum of w_i weight(v_i) f(v_i).
template <class Weight>
double moment(const VelocityProfile& f, Weight&& weight) {
    if (!f.grid()) throw Error(ErrorCode::GridMismatch, "profile without grid");
    const auto& g = *f.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += g.w(i) * weight(g.v(i)) * f[i];
    return s;
}

inline double mass(const VelocityProfile& f) {
    return moment(f, [](double) { return 1.0; });
}

/// Weighted inner product sum w_i f_i g_i / h_i.
inline double weighted_dot(const VelocityProfile& f, const VelocityProfile& g, const VelocityProfile& h) {
    g.require_grid(f.grid());
    h.require_grid(f.grid());
    const auto& grid = *f.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += grid.w(i) * f[i] * g[i] / h[i];
    return s;
}

/// Power-law model f(v) ~ f(V) (V/|v|)^q of a profile beyond one end of the grid.
struct TailFit {
    double V = 0.0;
    double value = 0.0;
    double exponent = 0.0;

    /// value ((1+V^2)/(1+v^2))^{exponent/2}, exact for M and its power-law relatives.
    double operator()(double v) const { return value * std::pow((1.0 + V * V) / (1.0 + v * v), 0.5 * exponent); }

    /// Integral of |v|^p times the tail over |v| > V, to relative order V^{-4}.
    double power_integral(double p) const {
        const double q = exponent, A = value * std::pow(1.0 + V * V, 0.5 * q);
        return A * (std::pow(V, p + 1.0 - q) / (q - p - 1.0) - 0.5 * q * std::pow(V, p - 1.0 - q) / (q - p + 1.0));
    }
};

/// Fits the tail on the positive (side > 0) or negative end from the last two nodes as a power of 1+v^2.
/// Falls back to the M exponent when the two values do not share a sign.
inline TailFit fit_tail(const VelocityProfile& f, int side) {
    const auto& g = *f.grid();
    const std::size_t n = g.size();
    const std::size_t a = side > 0 ? n - 1 : 0;
    const std::size_t b = side > 0 ? n - 2 : 1;
    TailFit t;
    t.V = std::abs(g.v(a));
    t.value = f[a];
    t.exponent = 1.0 + g.alpha();
    const double vb = g.v(b);
    if (f[a] != 0.0 && f[b] != 0.0 && (f[a] > 0.0) == (f[b] > 0.0))
        t.exponent = 2.0 * std::log(f[b] / f[a]) / std::log((1.0 + t.V * t.V) / (1.0 + vb * vb));
    return t;
}

/// Integral of w(v) f(v) where w(v) = |v|^p (odd = false) or sign(v)|v|^p (odd = true).
/// Inside the grid the interior weights are used; beyond vmax a fitted power-law tail is integrated.
inline double power_moment(const VelocityProfile& f, double p, bool odd) {
    const auto& g = *f.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double v = g.v(i);
        const double wt = std::pow(std::abs(v), p) * (odd && v < 0.0 ? -1.0 : 1.0);
        s += g.interior_weights()[i] * wt * f[i];
    }
    for (int side : {-1, 1}) {
        const TailFit t = fit_tail(f, side);
        if (t.value == 0.0) continue;
        if (!(t.exponent > p + 1.0))
            throw Error(ErrorCode::TailDivergence, "tail moment diverges (fitted exponent " + std::to_string(t.exponent) +
                                                       ", weight power " + std::to_string(p) + ")");
        const double sign = odd && side < 0 ? -1.0 : 1.0;
        s += sign * t.power_integral(p);
    }
    return s;
}

/// Derivative in v: 9-point finite differences in the mapped coordinate, divided by dv/dt.
inline VelocityProfile d_dv(const VelocityProfile& f) {
    const auto& g = *f.grid();
    VelocityProfile out(f.grid());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const std::size_t lo = g.stencil_start(i);
        const auto& wts = g.stencil_weights(i);
        double d = 0.0;
        for (std::size_t k = 0; k < VelocityGrid::stencil; ++k) d += wts[k] * f[lo + k];
        out[i] = d / g.jacobian(i);
    }
    return out;
}

/// Off-grid evaluation of a profile: cubic Hermite in t with fourth-order slopes, clamped at zero
/// between nonnegative nodes, and extended beyond vmax by f(V)(V/|v|)^{1+alpha}.
class ProfileInterpolant {
public:
    explicit ProfileInterpolant(const VelocityProfile& f) : grid_(f.grid()), f_(f.values()) {
        const auto& g = *grid_;
        const std::size_t n = g.size();
        slope_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t lo = g.stencil_start(i);
            const auto& wts = g.stencil_weights(i);
            double d = 0.0;
            for (std::size_t k = 0; k < VelocityGrid::stencil; ++k) d += wts[k] * f_[lo + k];
            slope_[i] = d;
        }
        tail_exp_ = 1.0 + g.alpha();
    }

    double operator()(double v) const {
        const auto& g = *grid_;
        const std::size_t n = g.size();
        const double V = g.vmax();
        if (v >= V) return f_[n - 1] * std::pow(V / v, tail_exp_);
        if (v <= -V) return f_[0] * std::pow(V / -v, tail_exp_);
        const double t = g.to_t(v);
        const double h = g.t_step();
        double pos = (t + g.t_max()) / h;
        std::size_t i = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, static_cast<double>(n - 2)));
        const double u = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
        const double u2 = u * u, u3 = u2 * u;
        const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u, h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
        double r = h00 * f_[i] + h10 * h * slope_[i] + h01 * f_[i + 1] + h11 * h * slope_[i + 1];
        if (f_[i] >= 0.0 && f_[i + 1] >= 0.0) r = std::max(r, 0.0);
        return r;
    }

private:
    GridPtr grid_;
    std::vector<double> f_;
    std::vector<double> slope_;
    double tail_exp_;
};

/// Normalized cumulative distribution of a nonnegative profile: power tails beyond the grid,
/// 4-point Gauss-Legendre on the interpolant between nodes.
class ProfileCdf {
public:
    explicit ProfileCdf(const VelocityProfile& f) : grid_(f.grid()), interp_(f) {
        const auto& g = *grid_;
        const std::size_t n = g.size();
        const double q = g.alpha();
        cum_.assign(n, 0.0);
        cum_[0] = f[0] * g.vmax() / q;
        for (std::size_t i = 1; i < n; ++i) cum_[i] = cum_[i - 1] + segment(g.v(i - 1), g.v(i));
        total_ = cum_[n - 1] + f[n - 1] * g.vmax() / q;
    }

    double operator()(double v) const {
        const auto& g = *grid_;
        const std::size_t n = g.size();
        const double V = g.vmax(), q = g.alpha();
        if (v <= -V) return interp_(v) * (-v) / q / total_;
        if (v >= V) return 1.0 - interp_(v) * v / q / total_;
        const auto it = std::upper_bound(g.nodes().begin(), g.nodes().end(), v);
        const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - g.nodes().begin()), n - 1) - 1;
        return (cum_[i] + segment(g.v(i), v)) / total_;
    }

private:
    double segment(double a, double b) const {
        static constexpr double x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
        static constexpr double w[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
        double s = 0.0;
        for (int k = 0; k < 4; ++k) s += w[k] * interp_(0.5 * (a + b) + 0.5 * (b - a) * x[k]);
        return 0.5 * (b - a) * s;
    }

    GridPtr grid_;
    ProfileInterpolant interp_;
    std::vector<double> cum_;
    double total_ = 1.0;
};

/// Two-column CSV export.
inline void write_csv(std::ostream& os, const VelocityProfile& f, const char* name = "value") {
    os << "v," << name << "\n";
    os.precision(17);
    for (std::size_t i = 0; i < f.size(); ++i) os << f.grid()->v(i) << "," << f[i] << "\n";
}

} // namespace fraclim
