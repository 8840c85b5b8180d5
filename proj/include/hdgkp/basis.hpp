#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "hdgkp/quadrature.hpp"

namespace hdgkp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Coefficients of a scalar Q_k field on one element in the orthonormal
/// tensor basis (index a + (k+1) b, a the x-degree, b the y-degree).
using FieldCoeffs = Eigen::VectorXd;

struct Interval
{
    double a = -1.0;
    double b = 1.0;

    double length() const { return b - a; }
    double to_reference(double x) const { return (2.0 * x - a - b) / (b - a); }
    double from_reference(double xi) const { return 0.5 * (a + b) + 0.5 * (b - a) * xi; }
    bool contains(double x, double tol = 0.0) const { return x >= a - tol && x <= b + tol; }
};

struct Rect
{
    Interval x;
    Interval y;

    double area() const { return x.length() * y.length(); }
};

/// L2-orthonormal Legendre polynomials on [-1, 1]: sqrt((2a+1)/2) P_a.
inline void orthonormal_legendre(int degree, double xi, double* values, double* derivatives)
{
    double p_prev = 1.0, p = xi;
    double d_prev = 0.0, d = 1.0;
    for (int a = 0; a <= degree; ++a) {
        double pa, da;
        if (a == 0) {
            pa = 1.0;
            da = 0.0;
        } else if (a == 1) {
            pa = xi;
            da = 1.0;
        } else {
            const double pn = ((2.0 * a - 1.0) * xi * p - (a - 1.0) * p_prev) / a;
            const double dn = d_prev + (2.0 * a - 1.0) * p;
            p_prev = p;
            p      = pn;
            d_prev = d;
            d      = dn;
            pa     = pn;
            da     = dn;
        }
        const double scale = std::sqrt((2.0 * a + 1.0) / 2.0);
        if (values)
            values[a] = scale * pa;
        if (derivatives)
            derivatives[a] = scale * da;
    }
}

/// One-dimensional orthonormal basis of P_k on the reference interval,
/// tabulated at the nodes of a quadrature rule.
class Basis1D
{
public:
    Basis1D(int degree, const Quadrature1D& rule)
        : degree_(degree)
    {
        if (degree < 0)
            throw std::invalid_argument("Basis1D: negative degree");
        const auto nq = static_cast<Eigen::Index>(rule.size());
        values_.resize(nq, size());
        derivatives_.resize(nq, size());
        Vector v(size()), d(size());
        for (Eigen::Index q = 0; q < nq; ++q) {
            orthonormal_legendre(degree_, rule.nodes[q], v.data(), d.data());
            values_.row(q)      = v.transpose();
            derivatives_.row(q) = d.transpose();
        }
        left_  = values(-1.0);
        right_ = values(1.0);
    }

    int degree() const { return degree_; }
    Eigen::Index size() const { return degree_ + 1; }

    /// Rows are quadrature nodes, columns basis functions.
    const Matrix& value_table() const { return values_; }
    const Matrix& derivative_table() const { return derivatives_; }

    const Vector& left_values() const { return left_; }
    const Vector& right_values() const { return right_; }

    Vector values(double xi) const
    {
        Vector v(size());
        orthonormal_legendre(degree_, xi, v.data(), nullptr);
        return v;
    }

    Vector derivatives(double xi) const
    {
        Vector d(size());
        orthonormal_legendre(degree_, xi, nullptr, d.data());
        return d;
    }

private:
    int degree_;
    Matrix values_;
    Matrix derivatives_;
    Vector left_;
    Vector right_;
};

/// Basis of P_k(I) orthonormal on a physical interval: l_a(xi(x)) sqrt(2/|I|).
inline Vector interval_basis_values(int degree, const Interval& iv, double x)
{
    Vector v(degree + 1);
    orthonormal_legendre(degree, iv.to_reference(x), v.data(), nullptr);
    return v * std::sqrt(2.0 / iv.length());
}

inline double eval_interval_poly(const Vector& coeffs, const Interval& iv, double x)
{
    const int degree = static_cast<int>(coeffs.size()) - 1;
    return interval_basis_values(degree, iv, x).dot(coeffs);
}

/// Tensor basis of Q_k = P_k (x) P_k on a rectangle, orthonormal in L2(K).
class TensorBasis
{
public:
    explicit TensorBasis(int degree)
        : degree_(degree)
    {
        if (degree < 0)
            throw std::invalid_argument("TensorBasis: negative degree");
    }

    int degree() const { return degree_; }
    Eigen::Index size_1d() const { return degree_ + 1; }
    Eigen::Index size() const { return size_1d() * size_1d(); }
    Eigen::Index index(int a, int b) const { return a + size_1d() * b; }

    Vector values(const Rect& K, double x, double y) const
    {
        const Vector vx = interval_basis_values(degree_, K.x, x);
        const Vector vy = interval_basis_values(degree_, K.y, y);
        Vector out(size());
        for (int b = 0; b <= degree_; ++b)
            for (int a = 0; a <= degree_; ++a)
                out(index(a, b)) = vx(a) * vy(b);
        return out;
    }

    /// Columns: d/dx and d/dy of every basis function.
    Matrix gradients(const Rect& K, double x, double y) const
    {
        const auto n = size_1d();
        Vector vx(n), dx(n), vy(n), dy(n);
        orthonormal_legendre(degree_, K.x.to_reference(x), vx.data(), dx.data());
        orthonormal_legendre(degree_, K.y.to_reference(y), vy.data(), dy.data());
        const double sx = std::sqrt(2.0 / K.x.length());
        const double sy = std::sqrt(2.0 / K.y.length());
        const double jx = 2.0 / K.x.length();
        const double jy = 2.0 / K.y.length();
        Matrix g(size(), 2);
        for (int b = 0; b <= degree_; ++b)
            for (int a = 0; a <= degree_; ++a) {
                g(index(a, b), 0) = dx(a) * jx * sx * vy(b) * sy;
                g(index(a, b), 1) = vx(a) * sx * dy(b) * jy * sy;
            }
        return g;
    }

private:
    int degree_;
};

} // namespace hdgkp
