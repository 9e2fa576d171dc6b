#pragma once

#include "fraclim/error.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace fraclim {

/// Separable cross section sigma(v, v') = nu0 + a * phi(v) * phi(v') with phi(v) = 1/(1+|v|).
/// The constant kernel is the case a = 0.
class CrossSection {
public:
    enum class Kind { Constant, PerturbedConstant };

    static CrossSection constant(double nu0) { return CrossSection(Kind::Constant, nu0, 0.0); }
    static CrossSection perturbed(double nu0, double amplitude) {
        return CrossSection(Kind::PerturbedConstant, nu0, amplitude);
    }

    Kind kind() const { return kind_; }
    bool is_constant() const { return kind_ == Kind::Constant || amplitude_ == 0.0; }
    double nu0() const { return nu0_; }
    double amplitude() const { return amplitude_; }
    /// Lower and upper bounds of sigma over all velocity pairs.
    double nu1() const { return nu0_ - std::abs(amplitude_); }
    double nu2() const { return nu0_ + std::abs(amplitude_); }
    bool symmetric() const { return true; }

    /// Decay profile of the perturbation.
    static double profile(double v) { return 1.0 / (1.0 + std::abs(v)); }

    /// Antiderivative of the decay profile, sign(u) log(1+|u|).
    static double profile_primitive(double u) { return std::copysign(std::log1p(std::abs(u)), u); }

    /// Integral of profile(v - E tau) for tau in [0, s].
    static double profile_path_integral(double v, double E, double s) {
        const double shift = E * s;
        if (std::abs(shift) < 1e-6 * (1.0 + std::abs(v)) && std::abs(shift) < std::abs(v) + 1e-300)
            return s * profile(v - 0.5 * shift);
        return (profile_primitive(v) - profile_primitive(v - E * s)) / E;
    }

    double operator()(double v, double vp) const { return nu0_ + amplitude_ * (profile(v) * profile(vp)); }

    std::string name() const { return kind_ == Kind::Constant ? "constant" : "perturbed_constant"; }

private:
    CrossSection(Kind k, double nu0, double a) : kind_(k), nu0_(nu0), amplitude_(a) {}

    Kind kind_;
    double nu0_;
    double amplitude_;
};

/// Static acceleration field on the torus [0, L).
class FieldSpec {
public:
    enum class Kind { Zero, Constant, Sinusoidal };

    static FieldSpec zero() { return FieldSpec(Kind::Zero, 0.0, 0); }
    static FieldSpec constant(double e0) { return FieldSpec(Kind::Constant, e0, 0); }
    /// E(x) = e0 sin(2 pi m x / L).
    static FieldSpec sinusoidal(double e0, int wavenumber) { return FieldSpec(Kind::Sinusoidal, e0, wavenumber); }

    Kind kind() const { return kind_; }
    double e0() const { return e0_; }
    int wavenumber() const { return m_; }
    bool is_uniform() const { return kind_ != Kind::Sinusoidal; }

    double operator()(double x, double length) const {
        switch (kind_) {
        case Kind::Zero: return 0.0;
        case Kind::Constant: return e0_;
        case Kind::Sinusoidal: return e0_ * std::sin(2.0 * std::numbers::pi * m_ * x / length);
        }
        return 0.0;
    }

    double derivative(double x, double length) const {
        if (kind_ != Kind::Sinusoidal) return 0.0;
        const double k = 2.0 * std::numbers::pi * m_ / length;
        return e0_ * k * std::cos(k * x);
    }

    double max_abs() const { return kind_ == Kind::Zero ? 0.0 : std::abs(e0_); }
    double max_abs_derivative(double length) const {
        return kind_ == Kind::Sinusoidal ? std::abs(e0_) * m_ * 2.0 * std::numbers::pi / length : 0.0;
    }

    std::string name() const {
        switch (kind_) {
        case Kind::Zero: return "zero";
        case Kind::Constant: return "constant";
        case Kind::Sinusoidal: return "sinusoidal";
        }
        return "zero";
    }

private:
    FieldSpec(Kind k, double e0, int m) : kind_(k), e0_(e0), m_(m) {}

    Kind kind_;
    double e0_;
    int m_;
};

/// One model instance: tail exponent, cross section, field, domain and eps schedule.
struct ModelParams {
    double alpha = 1.5;
    int dim = 1;
    CrossSection cross_section = CrossSection::constant(1.0);
    FieldSpec field = FieldSpec::zero();
    double domain_length = 2.0 * std::numbers::pi;
    double final_time = 1.0;
    std::vector<double> epsilon_schedule{0.2, 0.1, 0.05};
    std::uint64_t seed = 1;
};

inline void check_alpha(double alpha) {
    if (!(alpha >= 1.0 && alpha < 2.0))
        throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in [1, 2), got " + std::to_string(alpha));
}

inline void check_cross_section(const CrossSection& cs) {
    if (!(cs.nu0() > 0.0) || !(cs.nu1() > 0.0) || !std::isfinite(cs.nu2()))
        throw Error(ErrorCode::CrossSectionBoundsViolated,
                    "need 0 < nu0 - |a| and finite nu0 + |a| (nu0=" + std::to_string(cs.nu0()) +
                        ", a=" + std::to_string(cs.amplitude()) + ")");
}

/// Returns the params unchanged when every invariant holds, throws otherwise.
inline ModelParams validate(const ModelParams& p) {
    check_alpha(p.alpha);
    if (p.dim < 1) throw Error(ErrorCode::UnsupportedDimension, "dim must be positive");
    if (!(p.domain_length > 0.0) || !(p.final_time > 0.0))
        throw Error(ErrorCode::NonPositiveDomain, "domain_length and final_time must be positive");
    if (p.epsilon_schedule.empty()) throw Error(ErrorCode::EmptyEpsilonSchedule, "epsilon_schedule is empty");
    for (std::size_t i = 0; i < p.epsilon_schedule.size(); ++i) {
        const double e = p.epsilon_schedule[i];
        if (!(e > 0.0 && e <= 1.0))
            throw Error(ErrorCode::EmptyEpsilonSchedule, "epsilon values must lie in (0, 1]");
        if (i > 0 && !(e < p.epsilon_schedule[i - 1]))
            throw Error(ErrorCode::EmptyEpsilonSchedule, "epsilon_schedule must be strictly decreasing");
    }
    check_cross_section(p.cross_section);
    if (!std::isfinite(p.field.e0())) throw Error(ErrorCode::InvalidConfig, "field amplitude must be finite");
    if (p.field.kind() == FieldSpec::Kind::Sinusoidal && p.field.wavenumber() <= 0)
        throw Error(ErrorCode::InvalidConfig, "sinusoidal field needs a positive wavenumber");
    return p;
}

/// Solvers only handle the line.
inline void require_dim1(int dim) {
    if (dim != 1) throw Error(ErrorCode::UnsupportedDimension, "solvers support dim = 1 only");
}

} // namespace fraclim
