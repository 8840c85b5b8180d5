#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hdgkp/basis.hpp"

namespace hdgkp {

/// Axis-aligned rectangle (x_left, x_right) x (y_bottom, y_top).
struct Domain2D
{
    double x_left   = 0.0;
    double x_right  = 1.0;
    double y_bottom = 0.0;
    double y_top    = 1.0;

    void validate() const
    {
        if (!(x_left < x_right) || !(y_bottom < y_top))
            throw std::invalid_argument("Domain2D: require x_left < x_right and y_bottom < y_top");
    }
};

enum class Orientation { vertical, horizontal };

enum class BoundaryTag { interior, left, right, bottom, top };

/// Position of a face segment on the boundary of one element.
enum class Side { left = 0, right = 1, bottom = 2, top = 3 };

inline const char* to_string(BoundaryTag tag)
{
    switch (tag) {
    case BoundaryTag::interior: return "interior";
    case BoundaryTag::left: return "left";
    case BoundaryTag::right: return "right";
    case BoundaryTag::bottom: return "bottom";
    case BoundaryTag::top: return "top";
    }
    return "?";
}

/// 0-based element index: i along x in [0, N_x), j along y in [0, N_y).
struct ElementIndex
{
    int i = 0;
    int j = 0;

    friend bool operator==(const ElementIndex&, const ElementIndex&) = default;
};

/// Vertical face (i, j) is {x = x_i} x J_j with i in [0, N_x], j in [0, N_y).
/// Horizontal face (i, j) is I_i x {y = y_j} with i in [0, N_x), j in [0, N_y].
/// `minus` is the element to the left (below), `plus` to the right (above).
struct Face
{
    Orientation orientation = Orientation::vertical;
    int i = 0;
    int j = 0;
    BoundaryTag tag = BoundaryTag::interior;
    std::optional<ElementIndex> minus;
    std::optional<ElementIndex> plus;

    bool is_boundary() const { return tag != BoundaryTag::interior; }
};

/// A face seen from one element, with that element's outward normal.
struct ElementFace
{
    Face face;
    Side side = Side::left;
    double nx = 0.0;
    double ny = 0.0;
};

class CartesianMesh
{
public:
    CartesianMesh(const Domain2D& domain, std::vector<double> x_nodes, std::vector<double> y_nodes)
        : domain_(domain)
        , x_nodes_(std::move(x_nodes))
        , y_nodes_(std::move(y_nodes))
    {
        domain_.validate();
        if (x_nodes_.size() < 2 || y_nodes_.size() < 2)
            throw std::invalid_argument("CartesianMesh: at least one cell per direction");
        for (std::size_t i = 1; i < x_nodes_.size(); ++i)
            if (!(x_nodes_[i] > x_nodes_[i - 1]))
                throw std::invalid_argument("CartesianMesh: x nodes must increase strictly");
        for (std::size_t j = 1; j < y_nodes_.size(); ++j)
            if (!(y_nodes_[j] > y_nodes_[j - 1]))
                throw std::invalid_argument("CartesianMesh: y nodes must increase strictly");
        h_ = 0.0;
        for (std::size_t i = 1; i < x_nodes_.size(); ++i)
            h_ = std::max(h_, x_nodes_[i] - x_nodes_[i - 1]);
        for (std::size_t j = 1; j < y_nodes_.size(); ++j)
            h_ = std::max(h_, y_nodes_[j] - y_nodes_[j - 1]);
    }

    const Domain2D& domain() const { return domain_; }
    const std::vector<double>& x_nodes() const { return x_nodes_; }
    const std::vector<double>& y_nodes() const { return y_nodes_; }

    int nx() const { return static_cast<int>(x_nodes_.size()) - 1; }
    int ny() const { return static_cast<int>(y_nodes_.size()) - 1; }
    double h() const { return h_; }

    int element_count() const { return nx() * ny(); }
    int vertical_face_count() const { return (nx() + 1) * ny(); }
    int horizontal_face_count() const { return nx() * (ny() + 1); }

    int element_id(int i, int j) const { return i + nx() * j; }
    int element_id(ElementIndex e) const { return element_id(e.i, e.j); }
    ElementIndex element_index(int id) const { return {id % nx(), id / nx()}; }
    int vertical_face_id(int i, int j) const { return i + (nx() + 1) * j; }
    int horizontal_face_id(int i, int j) const { return i + nx() * j; }

    Interval x_cell(int i) const { return {x_nodes_[i], x_nodes_[i + 1]}; }
    Interval y_cell(int j) const { return {y_nodes_[j], y_nodes_[j + 1]}; }
    Rect element_rect(int i, int j) const { return {x_cell(i), y_cell(j)}; }

    void check_element(int i, int j) const
    {
        if (i < 0 || i >= nx() || j < 0 || j >= ny())
            throw std::out_of_range("element index (" + std::to_string(i) + "," + std::to_string(j) +
                                    ") outside mesh");
    }

    Face vertical_face(int i, int j) const
    {
        if (i < 0 || i > nx() || j < 0 || j >= ny())
            throw std::out_of_range("vertical face index outside mesh");
        Face f;
        f.orientation = Orientation::vertical;
        f.i           = i;
        f.j           = j;
        if (i == 0)
            f.tag = BoundaryTag::left;
        else if (i == nx())
            f.tag = BoundaryTag::right;
        if (i > 0)
            f.minus = ElementIndex{i - 1, j};
        if (i < nx())
            f.plus = ElementIndex{i, j};
        return f;
    }

    Face horizontal_face(int i, int j) const
    {
        if (i < 0 || i >= nx() || j < 0 || j > ny())
            throw std::out_of_range("horizontal face index outside mesh");
        Face f;
        f.orientation = Orientation::horizontal;
        f.i           = i;
        f.j           = j;
        if (j == 0)
            f.tag = BoundaryTag::bottom;
        else if (j == ny())
            f.tag = BoundaryTag::top;
        if (j > 0)
            f.minus = ElementIndex{i, j - 1};
        if (j < ny())
            f.plus = ElementIndex{i, j};
        return f;
    }

    /// The face as a segment: the interval it spans and its fixed coordinate.
    Interval face_interval(const Face& f) const
    {
        return f.orientation == Orientation::vertical ? y_cell(f.j) : x_cell(f.i);
    }
    double face_position(const Face& f) const
    {
        return f.orientation == Orientation::vertical ? x_nodes_[f.i] : y_nodes_[f.j];
    }

    /// Left, right, bottom, top faces of element (i, j) with outward normals.
    std::array<ElementFace, 4> element_faces(int i, int j) const
    {
        check_element(i, j);
        return {{
            {vertical_face(i, j), Side::left, -1.0, 0.0},
            {vertical_face(i + 1, j), Side::right, 1.0, 0.0},
            {horizontal_face(i, j), Side::bottom, 0.0, -1.0},
            {horizontal_face(i, j + 1), Side::top, 0.0, 1.0},
        }};
    }

    std::pair<std::optional<ElementIndex>, std::optional<ElementIndex>> face_neighbors(const Face& f) const
    {
        return {f.minus, f.plus};
    }

    /// Element owning a point; points on an interior grid line belong to the
    /// element on their left (below).
    std::optional<ElementIndex> locate(double x, double y, double tol = 1e-12) const
    {
        const auto find = [tol](const std::vector<double>& nodes, double v) -> int {
            const double lo = nodes.front(), hi = nodes.back();
            if (v < lo - tol * (hi - lo) || v > hi + tol * (hi - lo))
                return -1;
            auto it = std::lower_bound(nodes.begin() + 1, nodes.end(), v);
            if (it == nodes.end())
                --it;
            return static_cast<int>(it - nodes.begin()) - 1;
        };
        const int i = find(x_nodes_, x);
        const int j = find(y_nodes_, y);
        if (i < 0 || j < 0)
            return std::nullopt;
        return ElementIndex{i, j};
    }

private:
    Domain2D domain_;
    std::vector<double> x_nodes_;
    std::vector<double> y_nodes_;
    double h_ = 0.0;
};

/// Uniform N_x x N_y mesh of the domain.
inline CartesianMesh build_mesh(const Domain2D& domain, int nx, int ny)
{
    if (nx < 1 || ny < 1)
        throw std::invalid_argument("build_mesh: cell counts must be positive");
    domain.validate();
    std::vector<double> xs(nx + 1), ys(ny + 1);
    for (int i = 0; i <= nx; ++i)
        xs[i] = domain.x_left + (domain.x_right - domain.x_left) * i / nx;
    for (int j = 0; j <= ny; ++j)
        ys[j] = domain.y_bottom + (domain.y_top - domain.y_bottom) * j / ny;
    xs.back() = domain.x_right;
    ys.back() = domain.y_top;
    return CartesianMesh(domain, std::move(xs), std::move(ys));
}

} // namespace hdgkp
