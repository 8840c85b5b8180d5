#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace hdgkp {

/// Gauss-Legendre rule on the reference interval [-1, 1], nodes ascending.
struct Quadrature1D
{
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

namespace detail {

// Legendre P_n and P_n' at x by the three-term recurrence.
inline void legendre_with_derivative(std::size_t n, double x, double& p, double& dp)
{
    double p0 = 1.0;
    double p1 = x;
    if (n == 0) {
        p  = 1.0;
        dp = 0.0;
        return;
    }
    for (std::size_t m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / static_cast<double>(m);
        p0 = p1;
        p1 = p2;
    }
    p  = p1;
    dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
}

} // namespace detail

inline Quadrature1D gauss_legendre(std::size_t n_points)
{
    if (n_points == 0)
        throw std::invalid_argument("gauss_legendre: at least one point is required");

    Quadrature1D rule;
    rule.nodes.resize(n_points);
    rule.weights.resize(n_points);

    const double n = static_cast<double>(n_points);
    for (std::size_t i = 0; i < (n_points + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
        double p = 0.0, dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            detail::legendre_with_derivative(n_points, x, p, dp);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        detail::legendre_with_derivative(n_points, x, p, dp);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);

        rule.nodes[i]                = -x;
        rule.nodes[n_points - 1 - i] = x;
        rule.weights[i]                = w;
        rule.weights[n_points - 1 - i] = w;
    }
    if (n_points % 2 == 1)
        rule.nodes[n_points / 2] = 0.0;
    return rule;
}

/// The rule used for every volume and face integral of a degree-k
/// discretization: 2(k+1) points, exact up to degree 4k+3.
inline Quadrature1D make_quadrature(int k)
{
    if (k < 0)
        throw std::invalid_argument("make_quadrature: negative polynomial degree");
    return gauss_legendre(static_cast<std::size_t>(2 * (k + 1)));
}

} // namespace hdgkp
