#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace fraclim {

/// Nodes and weights of a one-dimensional quadrature rule.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

namespace detail {

/// Golub-Welsch: eigen-decomposition of the Jacobi matrix of a three-term recurrence.
/// `diag` and `offdiag` are the recurrence coefficients, `mu0` the total mass of the weight.
inline QuadratureRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, double mu0) {
    const Eigen::Index n = diag.size();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        J(i, i) = diag(i);
        if (i + 1 < n) {
            J(i, i + 1) = offdiag(i);
            J(i + 1, i) = offdiag(i);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    QuadratureRule r;
    r.nodes.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        r.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        const double q = es.eigenvectors()(0, i);
        r.weights[static_cast<std::size_t>(i)] = mu0 * q * q;
    }
    return r;
}

/// Newton polish of Legendre nodes; Golub-Welsch alone loses a few digits for large n.
inline void polish_legendre(QuadratureRule& r) {
    const std::size_t n = r.size();
    for (std::size_t i = 0; i < n; ++i) {
        double x = r.nodes[i];
        double dp = 1.0;
        for (int it = 0; it < 3; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            if (n == 1) dp = 1.0;
            x -= p1 / dp;
        }
        r.nodes[i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

} // namespace detail

/// Gauss-Legendre rule on [-1, 1].
inline QuadratureRule gauss_legendre(std::size_t n) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    Eigen::VectorXd b(static_cast<Eigen::Index>(n > 0 ? n - 1 : 0));
    for (std::size_t k = 1; k < n; ++k) b(static_cast<Eigen::Index>(k - 1)) = k / std::sqrt(4.0 * k * k - 1.0);
    auto r = detail::golub_welsch(a, b, 2.0);
    if (n > 1) detail::polish_legendre(r);
    return r;
}

/// Generalized Gauss-Laguerre rule for the weight z^beta e^{-z} on (0, inf).
inline QuadratureRule gauss_laguerre(std::size_t n, double beta = 0.0) {
    Eigen::VectorXd a(static_cast<Eigen::Index>(n));
    Eigen::VectorXd b(static_cast<Eigen::Index>(n > 0 ? n - 1 : 0));
    for (std::size_t k = 0; k < n; ++k) a(static_cast<Eigen::Index>(k)) = 2.0 * k + 1.0 + beta;
    for (std::size_t k = 1; k < n; ++k) b(static_cast<Eigen::Index>(k - 1)) = std::sqrt(k * (k + beta));
    return detail::golub_welsch(a, b, std::tgamma(beta + 1.0));
}

/// Cached Gauss-Legendre rule, shared across calls.
inline const QuadratureRule& cached_gauss_legendre(std::size_t n) {
    static std::mutex m;
    static std::map<std::size_t, QuadratureRule> cache;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
    return it->second;
}

/// Cached Gauss-Laguerre rule.
inline const QuadratureRule& cached_gauss_laguerre(std::size_t n, double beta = 0.0) {
    static std::mutex m;
    static std::map<std::pair<std::size_t, double>, QuadratureRule> cache;
    std::lock_guard<std::mutex> lock(m);
    auto key = std::make_pair(n, beta);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, gauss_laguerre(n, beta)).first;
    return it->second;
}

/// Integrate f over [a, b] split into `panels` equal panels of the given rule.
template <class F>
double composite_legendre(F&& f, double a, double b, std::size_t panels, const QuadratureRule& rule) {
    const double h = (b - a) / static_cast<double>(panels);
    double s = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + h * static_cast<double>(p);
        const double c = lo + 0.5 * h;
        double ps = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) ps += rule.weights[i] * f(c + 0.5 * h * rule.nodes[i]);
        s += 0.5 * h * ps;
    }
    return s;
}

} // namespace fraclim
