#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hdgkp/basis.hpp"
#include "hdgkp/mesh.hpp"
#include "hdgkp/quadrature.hpp"

namespace hdgkp {

using ScalarFunction1D = std::function<double(double)>;
using ScalarFunction2D = std::function<double(double, double)>;

enum class OneSided { plus, minus };

enum class ProjectionKind { l2, pi_minus, pi_plus };

/// A 1D projection onto P_k(I) written as a linear combination of point
/// values: coeffs = weights * [f(points)].
struct PointFunctional1D
{
    std::vector<double> points;
    Matrix weights; // (k+1) x points
};

namespace detail {

inline PointFunctional1D l2_functional(const Interval& iv, int k, const Quadrature1D& rule)
{
    PointFunctional1D pf;
    const auto nq = rule.size();
    pf.points.resize(nq);
    pf.weights.resize(k + 1, static_cast<Eigen::Index>(nq));
    const double jac = 0.5 * iv.length();
    for (std::size_t q = 0; q < nq; ++q) {
        pf.points[q] = iv.from_reference(rule.nodes[q]);
        pf.weights.col(static_cast<Eigen::Index>(q)) =
            interval_basis_values(k, iv, pf.points[q]) * (rule.weights[q] * jac);
    }
    return pf;
}

// Moments against P_{k-1} plus interpolation at one endpoint. With an
// orthonormal basis the constraint system is triangular: the first k
// coefficients are L2 moments, the last one fixes the endpoint value.
inline PointFunctional1D one_sided_functional(const Interval& iv, int k, OneSided side, const Quadrature1D& rule)
{
    if (k < 1)
        throw std::invalid_argument("one-sided projection needs k >= 1");
    const PointFunctional1D l2 = l2_functional(iv, k, rule);
    const auto nq = static_cast<Eigen::Index>(rule.size());

    PointFunctional1D pf;
    pf.points = l2.points;
    const double endpoint = side == OneSided::plus ? iv.a : iv.b;
    pf.points.push_back(endpoint);
    pf.weights = Matrix::Zero(k + 1, nq + 1);
    pf.weights.topLeftCorner(k, nq) = l2.weights.topRows(k);

    const Vector psi = interval_basis_values(k, iv, endpoint);
    // psi_k(endpoint) c_k = f(endpoint) - sum_{a<k} psi_a(endpoint) c_a
    pf.weights(k, nq) = 1.0 / psi(k);
    for (int a = 0; a < k; ++a)
        pf.weights.row(k).head(nq) -= (psi(a) / psi(k)) * l2.weights.row(a);
    return pf;
}

} // namespace detail

/// L2 projection onto P_k(I); returns coefficients in the orthonormal basis of I.
inline Vector l2_project_1d(const ScalarFunction1D& f, const Interval& iv, int k, std::size_t n_points = 0)
{
    const Quadrature1D rule = n_points ? gauss_legendre(n_points) : make_quadrature(k);
    const auto pf = detail::l2_functional(iv, k, rule);
    Vector values(static_cast<Eigen::Index>(pf.points.size()));
    for (std::size_t q = 0; q < pf.points.size(); ++q)
        values(static_cast<Eigen::Index>(q)) = f(pf.points[q]);
    return pf.weights * values;
}

/// One-sided projection: orthogonal to P_{k-1}(I) and exact at the left
/// endpoint (plus) or the right endpoint (minus).
inline Vector project_onesided(const ScalarFunction1D& f, const Interval& iv, int k, OneSided side,
                               std::size_t n_points = 0)
{
    const Quadrature1D rule = n_points ? gauss_legendre(n_points) : make_quadrature(k);
    const auto pf = detail::one_sided_functional(iv, k, side, rule);
    Vector values(static_cast<Eigen::Index>(pf.points.size()));
    for (std::size_t q = 0; q < pf.points.size(); ++q)
        values(static_cast<Eigen::Index>(q)) = f(pf.points[q]);
    return pf.weights * values;
}

/// Tensor-product projection of f onto Q_k(K): the L2 projection P_x (x) P_y
/// or the composite one-sided projections P_x^- (x) P_y^- and P_x^+ (x) P_y^+.
inline FieldCoeffs tensor_project(const ScalarFunction2D& f, const Rect& K, int k, ProjectionKind kind,
                                  std::size_t n_points = 0)
{
    const Quadrature1D rule = n_points ? gauss_legendre(n_points) : make_quadrature(k);
    PointFunctional1D fx, fy;
    switch (kind) {
    case ProjectionKind::l2:
        fx = detail::l2_functional(K.x, k, rule);
        fy = detail::l2_functional(K.y, k, rule);
        break;
    case ProjectionKind::pi_minus:
        fx = detail::one_sided_functional(K.x, k, OneSided::minus, rule);
        fy = detail::one_sided_functional(K.y, k, OneSided::minus, rule);
        break;
    case ProjectionKind::pi_plus:
        fx = detail::one_sided_functional(K.x, k, OneSided::plus, rule);
        fy = detail::one_sided_functional(K.y, k, OneSided::plus, rule);
        break;
    }
    const auto nx = static_cast<Eigen::Index>(fx.points.size());
    const auto ny = static_cast<Eigen::Index>(fy.points.size());
    Matrix values(nx, ny);
    for (Eigen::Index i = 0; i < nx; ++i)
        for (Eigen::Index j = 0; j < ny; ++j)
            values(i, j) = f(fx.points[i], fy.points[j]);
    // C(a, b) = sum_ij Wx(a, i) F(i, j) Wy(b, j)
    const Matrix C = fx.weights * values * fy.weights.transpose();
    FieldCoeffs out((k + 1) * (k + 1));
    for (int b = 0; b <= k; ++b)
        for (int a = 0; a <= k; ++a)
            out(a + (k + 1) * b) = C(a, b);
    return out;
}

/// L2 projection onto P_k(F) of data g given on a face as a function of (x, y).
inline Vector face_project(const ScalarFunction2D& g, const CartesianMesh& mesh, const Face& face, int k,
                           std::size_t n_points = 0)
{
    const Interval iv   = mesh.face_interval(face);
    const double fixed  = mesh.face_position(face);
    const bool vertical = face.orientation == Orientation::vertical;
    return l2_project_1d([&](double s) { return vertical ? g(fixed, s) : g(s, fixed); }, iv, k, n_points);
}

inline double eval_field(const FieldCoeffs& c, const Rect& K, int k, double x, double y)
{
    return TensorBasis(k).values(K, x, y).dot(c);
}

inline std::vector<double> eval_field(const FieldCoeffs& c, const Rect& K, int k,
                                      const std::vector<std::pair<double, double>>& points)
{
    const TensorBasis basis(k);
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& [x, y] : points)
        out.push_back(basis.values(K, x, y).dot(c));
    return out;
}

/// (d/dx, d/dy) of the field at (x, y).
inline std::pair<double, double> eval_field_grad(const FieldCoeffs& c, const Rect& K, int k, double x, double y)
{
    const Matrix g = TensorBasis(k).gradients(K, x, y);
    return {g.col(0).dot(c), g.col(1).dot(c)};
}

/// Values of the element field on one of its faces, at the face quadrature
/// nodes (ascending along the face).
inline Vector restrict_to_face(const FieldCoeffs& c, const Rect& K, int k, Side side)
{
    const Quadrature1D rule = make_quadrature(k);
    const TensorBasis basis(k);
    Vector out(static_cast<Eigen::Index>(rule.size()));
    for (std::size_t q = 0; q < rule.size(); ++q) {
        double x = 0, y = 0;
        switch (side) {
        case Side::left: x = K.x.a; y = K.y.from_reference(rule.nodes[q]); break;
        case Side::right: x = K.x.b; y = K.y.from_reference(rule.nodes[q]); break;
        case Side::bottom: x = K.x.from_reference(rule.nodes[q]); y = K.y.a; break;
        case Side::top: x = K.x.from_reference(rule.nodes[q]); y = K.y.b; break;
        }
        out(static_cast<Eigen::Index>(q)) = basis.values(K, x, y).dot(c);
    }
    return out;
}

/// Coefficients, in the orthonormal face basis, of the restriction of an
/// element field to one of its faces (exact: the restriction lies in P_k).
inline Vector face_trace_coeffs(const FieldCoeffs& c, int k, Side side, const Rect& K)
{
    const Vector ends_x = interval_basis_values(k, K.x, side == Side::left ? K.x.a : K.x.b);
    const Vector ends_y = interval_basis_values(k, K.y, side == Side::bottom ? K.y.a : K.y.b);
    const bool vertical = side == Side::left || side == Side::right;
    Vector out = Vector::Zero(k + 1);
    for (int b = 0; b <= k; ++b)
        for (int a = 0; a <= k; ++a) {
            const double cab = c(a + (k + 1) * b);
            if (vertical)
                out(b) += cab * ends_x(a);
            else
                out(a) += cab * ends_y(b);
        }
    return out;
}

} // namespace hdgkp
