#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace hdgkp {

/// The CH-KP flux f(u) = 2 kappa u + 3/2 u^2.
inline double flux(double u, double kappa) { return 2.0 * kappa * u + 1.5 * u * u; }
inline double flux_derivative(double u, double kappa) { return 2.0 * kappa + 3.0 * u; }

/// Stabilization function of the numerical traces. Defaults are the values
/// used for all experiments: tau_zpu^+ = tau_zpu^- = -1, tau_zpv^- = 1,
/// tau_uqq = -1/4, tau_f = 4.
struct StabilizationParams
{
    double tau_zpu_plus  = -1.0;
    double tau_zpu_minus = -1.0;
    double tau_zpv_minus = 1.0;
    double tau_uqq       = -0.25;
    double tau_f         = 4.0;

    // tau_f = sup_J |f'| / 2 + eps, evaluated pointwise, instead of the constant.
    bool adaptive_tau_f = false;
    double tau_f_eps    = 0.5;

    /// Checks the parameter-only inequalities; the tau_f condition depends on
    /// the traces and is checked with `tau_f_margin`.
    void validate() const
    {
        std::string bad;
        if (!(-tau_zpu_plus >= 0.0))
            bad += " -tau_zpu_plus >= 0;";
        if (!(-tau_zpu_minus >= 0.0))
            bad += " -tau_zpu_minus >= 0;";
        if (!(tau_zpv_minus * tau_zpv_minus <= -2.0 * tau_zpu_minus))
            bad += " tau_zpv_minus^2 <= -2 tau_zpu_minus;";
        if (!(-tau_uqq >= 0.0))
            bad += " -tau_uqq >= 0;";
        if (adaptive_tau_f && !(tau_f_eps > 0.0))
            bad += " tau_f_eps > 0;";
        if (!adaptive_tau_f && !(tau_f > 0.0))
            bad += " tau_f > 0;";
        if (!bad.empty())
            throw std::invalid_argument("stabilization parameters violate:" + bad);
    }

    double tau_for_flux(double u_hat, double u, double kappa) const;
};

/// tilde_tau(u_hat, u) = n_x / (u_hat - u)^2 * int_{u_hat}^{u} (f(s) - f(u)) ds.
/// For the quadratic flux the integral is exact: -n_x (kappa + u + u_hat / 2),
/// which is also the value at u_hat = u.
inline double compute_tilde_tau(double u_hat, double u, double nx, double kappa)
{
    return -nx * (kappa + u + 0.5 * u_hat);
}

/// sup over [min(u_hat,u), max(u_hat,u)] of |f'(s)| / 2, plus eps. f' is
/// affine so the sup sits at an endpoint.
inline double adaptive_tau_f(double u_hat, double u, double kappa, double eps)
{
    return 0.5 * std::max(std::abs(flux_derivative(u_hat, kappa)), std::abs(flux_derivative(u, kappa))) + eps;
}

/// Partial derivatives of adaptive_tau_f with respect to (u_hat, u).
inline std::pair<double, double> adaptive_tau_f_derivatives(double u_hat, double u, double kappa)
{
    const double a = flux_derivative(u_hat, kappa);
    const double b = flux_derivative(u, kappa);
    if (std::abs(a) >= std::abs(b))
        return {1.5 * (a >= 0.0 ? 1.0 : -1.0), 0.0};
    return {0.0, 1.5 * (b >= 0.0 ? 1.0 : -1.0)};
}

inline double StabilizationParams::tau_for_flux(double u_hat, double u, double kappa) const
{
    return adaptive_tau_f ? hdgkp::adaptive_tau_f(u_hat, u, kappa, tau_f_eps) : tau_f;
}

/// tau_f - tilde_tau at one trace point.
inline double tau_f_margin(const StabilizationParams& params, double u_hat, double u, double nx, double kappa)
{
    return params.tau_for_flux(u_hat, u, kappa) - compute_tilde_tau(u_hat, u, nx, kappa);
}

} // namespace hdgkp
