#pragma once

#include "fraclim/collision.hpp"
#include "fraclim/error.hpp"
#include "fraclim/macro_spectral.hpp"
#include "fraclim/params.hpp"
#include "fraclim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <thread>
#include <vector>

namespace fraclim {

/// Exact draw from M: v = Z / sqrt(W), Z standard normal, W chi-square with alpha degrees of freedom.
template <class Rng>
double sample_M(Rng& rng, double alpha) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::gamma_distribution<double> gamma(0.5 * alpha, 2.0);
    const double z = normal(rng);
    return z / std::sqrt(gamma(rng));
}

/// Time scalings of the particle dynamics.
///   Diffusive: dx/dt = eps^{1-alpha} v, dv/dt = E/eps, collision rate nu / eps^alpha.
///   HighField: dx/dt = v,               dv/dt = E/eps, collision rate nu / eps.
enum class Scaling { Diffusive, HighField };

inline const char* scaling_name(Scaling s) { return s == Scaling::Diffusive ? "diffusive" : "high_field"; }

/// Everything the integrator needs besides the ensemble.
struct KineticModel {
    double alpha = 1.5;
    CrossSection sigma = CrossSection::constant(1.0);
    double m1 = 0.0; ///< int phi M dv, sets nu(v) = nu0 + a m1 phi(v)
    FieldSpec field = FieldSpec::zero();
    Scaling scaling = Scaling::Diffusive;
    bool collisions = true; ///< false gives pure characteristics (test mode)

    double nu(double v) const { return sigma.nu0() + sigma.amplitude() * m1 * CrossSection::profile(v); }
};

inline KineticModel make_kinetic_model(const CollisionContext& ctx, const FieldSpec& field, Scaling scaling) {
    KineticModel m;
    m.alpha = ctx.alpha();
    m.sigma = ctx.sigma;
    m.m1 = ctx.m1;
    m.field = field;
    m.scaling = scaling;
    return m;
}

/// Particles on the torus [0, L) with uniform weight 1/N, split into contiguous partitions,
/// each owning a Philox stream keyed by (seed, partition index).
class ParticleEnsemble {
public:
    ParticleEnsemble(std::size_t n, double L, std::uint64_t seed, std::size_t partitions)
        : x_(n, 0.0), v_(n, 0.0), L_(L), seed_(seed) {
        if (n == 0) throw Error(ErrorCode::InvalidConfig, "particle count must be positive");
        if (!(L > 0.0)) throw Error(ErrorCode::NonPositiveDomain, "domain length must be positive");
        partitions = std::clamp<std::size_t>(partitions, 1, n);
        for (std::size_t p = 0; p < partitions; ++p) {
            streams_.emplace_back(seed, p);
            begin_.push_back(n * p / partitions);
        }
        begin_.push_back(n);
        collisions_.assign(partitions, 0);
        candidates_.assign(partitions, 0);
    }

    std::size_t size() const { return x_.size(); }
    std::size_t partitions() const { return streams_.size(); }
    double length() const { return L_; }
    double time() const { return time_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<double>& positions() const { return x_; }
    const std::vector<double>& velocities() const { return v_; }
    std::vector<double>& positions() { return x_; }
    std::vector<double>& velocities() { return v_; }
    std::uint64_t collisions() const { return sum(collisions_); }
    std::uint64_t candidates() const { return sum(candidates_); }
    std::size_t begin(std::size_t p) const { return begin_[p]; }
    std::size_t end(std::size_t p) const { return begin_[p + 1]; }
    Philox& stream(std::size_t p) { return streams_[p]; }
    std::uint64_t& collisions(std::size_t p) { return collisions_[p]; }
    std::uint64_t& candidates(std::size_t p) { return candidates_[p]; }
    void set_time(double t) { time_ = t; }

    double wrap(double x) const {
        x -= L_ * std::floor(x / L_);
        return x >= L_ ? 0.0 : x;
    }

private:
    static std::uint64_t sum(const std::vector<std::uint64_t>& c) {
        std::uint64_t s = 0;
        for (auto k : c) s += k;
        return s;
    }

    std::vector<double> x_, v_;
    double L_;
    double time_ = 0.0;
    std::uint64_t seed_;
    std::vector<Philox> streams_;
    std::vector<std::size_t> begin_;
    std::vector<std::uint64_t> collisions_, candidates_;
};

namespace detail {

/// Runs fn(p) for every partition on up to `threads` workers.
template <class Fn>
void for_partitions(std::size_t partitions, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(partitions)));
    if (threads == 1) {
        for (std::size_t p = 0; p < partitions; ++p) fn(p);
        return;
    }
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t p = t; p < partitions; p += threads) fn(p);
        });
}

} // namespace detail

/// Draws x from rho_in by rejection against rho_max and v from M.
template <class Density>
void initialize(ParticleEnsemble& ens, double alpha, Density&& rho_in, double rho_max, unsigned threads = 1) {
    const double L = ens.length();
    detail::for_partitions(ens.partitions(), threads, [&](std::size_t p) {
        Philox& rng = ens.stream(p);
        for (std::size_t i = ens.begin(p); i < ens.end(p); ++i) {
            double x;
            do x = L * rng.uniform();
            while (rng.uniform() * rho_max > rho_in(x));
            ens.positions()[i] = x;
            ens.velocities()[i] = sample_M(rng, alpha);
        }
    });
    ens.set_time(0.0);
}

/// Exact flight of duration s under constant field E: returns the new (x, v) before wrapping.
inline std::pair<double, double> fly(double x, double v, double E, double s, double eps, const KineticModel& m) {
    const double transport = m.scaling == Scaling::Diffusive ? std::pow(eps, 1.0 - m.alpha) : 1.0;
    const double accel = E / eps;
    return {x + transport * (v * s + 0.5 * accel * s * s), v + accel * s};
}

/// Advances every particle to time `until`: Poisson candidates at rate nu2 / eps^alpha (or nu2 / eps),
/// thinned by nu(v)/nu2, post-collision velocity drawn from sigma(w, v) M(w) / nu(v).
inline void advance(ParticleEnsemble& ens, double eps, const KineticModel& m, double until, unsigned threads = 1) {
    if (until < ens.time()) throw Error(ErrorCode::NonMonotoneTime, "advance target lies before the ensemble time");
    if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorCode::InvalidConfig, "eps must lie in (0, 1]");
    const double L = ens.length();
    const double nu2 = m.sigma.nu2();
    const double rate = m.collisions ? nu2 * (m.scaling == Scaling::Diffusive ? std::pow(eps, -m.alpha) : 1.0 / eps) : 0.0;
    const bool uniform = m.field.is_uniform();
    const double E_uniform = uniform ? m.field(0.0, L) : 0.0;
    const double dx_max = L / 64.0;
    const double a = m.sigma.amplitude();

    detail::for_partitions(ens.partitions(), threads, [&](std::size_t p) {
        Philox& rng = ens.stream(p);
        std::exponential_distribution<double> clock(rate > 0.0 ? rate : 1.0);
        std::uint64_t ncoll = 0, ncand = 0;
        for (std::size_t i = ens.begin(p); i < ens.end(p); ++i) {
            double x = ens.positions()[i], v = ens.velocities()[i], t = ens.time();
            while (t < until) {
                const double tau = rate > 0.0 ? clock(rng) : std::numeric_limits<double>::infinity();
                const double t_next = std::min(t + tau, until);
                if (uniform) {
                    std::tie(x, v) = fly(x, v, E_uniform, t_next - t, eps, m);
                    x = ens.wrap(x);
                } else {
                    double left = t_next - t;
                    while (left > 0.0) {
                        const double E = m.field(x, L);
                        double s = left;
                        auto [xn, vn] = fly(x, v, E, s, eps, m);
                        while (std::abs(xn - x) > dx_max) {
                            s *= 0.9 * dx_max / std::abs(xn - x);
                            std::tie(xn, vn) = fly(x, v, E, s, eps, m);
                        }
                        x = ens.wrap(xn);
                        v = vn;
                        left = s == left ? 0.0 : left - s;
                    }
                }
                t = t_next;
                if (tau == std::numeric_limits<double>::infinity() || t >= until) break;
                ++ncand;
                if (rng.uniform() * nu2 >= m.nu(v)) continue;
                ++ncoll;
                if (m.sigma.is_constant()) {
                    v = sample_M(rng, m.alpha);
                } else {
                    const double bound = m.sigma.nu0() + std::max(a, 0.0) * CrossSection::profile(v);
                    double w;
                    do w = sample_M(rng, m.alpha);
                    while (rng.uniform() * bound >= m.sigma(w, v));
                    v = w;
                }
            }
            ens.positions()[i] = x;
            ens.velocities()[i] = v;
        }
        ens.collisions(p) += ncoll;
        ens.candidates(p) += ncand;
    });
    ens.set_time(until);
}

/// Histogram of positions normalized so that sum rho dx = 1.
inline MacroState estimate_density(const ParticleEnsemble& ens, std::size_t x_bins) {
    MacroState out(x_bins, ens.length());
    out.time = ens.time();
    const double dx = ens.length() / static_cast<double>(x_bins);
    std::vector<std::uint64_t> counts(x_bins, 0);
    for (double x : ens.positions()) counts[std::min(x_bins - 1, static_cast<std::size_t>(x / dx))]++;
    const double norm = 1.0 / (static_cast<double>(ens.size()) * dx);
    for (std::size_t j = 0; j < x_bins; ++j) out.rho[j] = static_cast<double>(counts[j]) * norm;
    return out;
}

/// Histogram from the particle index range [first, last), used for split-half noise estimates.
inline MacroState estimate_density(const ParticleEnsemble& ens, std::size_t x_bins, std::size_t first, std::size_t last) {
    MacroState out(x_bins, ens.length());
    out.time = ens.time();
    const double dx = ens.length() / static_cast<double>(x_bins);
    for (std::size_t i = first; i < last; ++i)
        out.rho[std::min(x_bins - 1, static_cast<std::size_t>(ens.positions()[i] / dx))] += 1.0;
    const double norm = 1.0 / (static_cast<double>(last - first) * dx);
    for (double& r : out.rho) r *= norm;
    return out;
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double c = cdf(samples[i]);
        d = std::max({d, (i + 1) / n - c, c - i / n});
    }
    return d;
}

} // namespace fraclim
