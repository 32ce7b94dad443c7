#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <vector>

#include "ibstokes/errors.hpp"
#include "ibstokes/geometry.hpp"
#include "ibstokes/quadrature.hpp"

namespace ibstokes {

/// Result of point location: owning cell and barycentric coordinates
/// with respect to that cell's vertex order.
struct LocatedPoint {
    int cell = -1;
    std::array<double, 3> lambda{};
};

/// Quadrature points mapped to one cell; weights sum to the cell area.
struct CellQuadrature {
    std::vector<Vec2> points;
    std::vector<double> weights;
};

/// Uniform triangulation of an axis-aligned box: n x n squares, each split
/// along its lower-left to upper-right diagonal.  Cell 2k is the lower
/// triangle (v00, v10, v11), cell 2k+1 the upper one (v00, v11, v01);
/// both orientations are counterclockwise.
class TriangleMesh {
public:
    TriangleMesh(int n, const AxisBox& box) : n_(n), box_(box) {
        if (n < 1) throw Error("mesh resolution must be at least 1");
        if (!box.valid()) throw Error("mesh domain box is empty");
        // square cells only; the spacing is shared by both axes
        dx_ = box.width() / n;
        dy_ = box.height() / n;
        const int nv = (n + 1) * (n + 1);
        vertices_.reserve(nv);
        on_boundary_.reserve(nv);
        for (int j = 0; j <= n; ++j) {
            for (int i = 0; i <= n; ++i) {
                vertices_.push_back({box.lo.x + i * dx_, box.lo.y + j * dy_});
                on_boundary_.push_back(i == 0 || i == n || j == 0 || j == n);
            }
        }
        cells_.reserve(2 * static_cast<std::size_t>(n) * n);
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const int v00 = j * (n + 1) + i;
                const int v10 = v00 + 1;
                const int v01 = v00 + (n + 1);
                const int v11 = v01 + 1;
                cells_.push_back({v00, v10, v11});
                cells_.push_back({v00, v11, v01});
            }
        }
    }

    int resolution() const { return n_; }
    const AxisBox& domain() const { return box_; }
    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_cells() const { return cells_.size(); }
    const Vec2& vertex(int v) const { return vertices_[v]; }
    const std::array<int, 3>& cell(int c) const { return cells_[c]; }
    bool vertex_on_boundary(int v) const { return on_boundary_[v]; }

    /// Longest edge; for square cells this is the diagonal.
    double mesh_size() const { return std::hypot(dx_, dy_); }

    double cell_area(int) const { return 0.5 * dx_ * dy_; }

    std::array<Vec2, 3> cell_vertices(int c) const {
        const auto& t = cells_[c];
        return {vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]};
    }

    Vec2 cell_centroid(int c) const {
        const auto p = cell_vertices(c);
        return (p[0] + p[1] + p[2]) / 3.0;
    }

    /// Gradients of the barycentric coordinate functions on cell c.
    std::array<Vec2, 3> barycentric_gradients(int c) const {
        const auto p = cell_vertices(c);
        const double inv2a = 1.0 / (2.0 * cell_area(c));
        return {perp(p[2] - p[1]) * inv2a,
                perp(p[0] - p[2]) * inv2a,
                perp(p[1] - p[0]) * inv2a};
    }

    Vec2 barycentric_to_point(int c, const std::array<double, 3>& lambda) const {
        const auto p = cell_vertices(c);
        return lambda[0] * p[0] + lambda[1] * p[1] + lambda[2] * p[2];
    }

    /// Constant-time point location on the structured grid.  Points on a
    /// square's diagonal are assigned to the lower triangle.  Throws
    /// PointOutsideDomain for points outside the box (1e-12 relative slack).
    LocatedPoint locate_point(const Vec2& p) const {
        const double tol = 1e-12 * std::max(box_.width(), box_.height());
        if (!box_.contains(p, tol)) throw PointOutsideDomain("point outside mesh domain");
        const double gx = (p.x - box_.lo.x) / dx_;
        const double gy = (p.y - box_.lo.y) / dy_;
        int i = static_cast<int>(std::floor(gx));
        int j = static_cast<int>(std::floor(gy));
        i = std::max(0, std::min(i, n_ - 1));
        j = std::max(0, std::min(j, n_ - 1));
        const double xi = gx - i;
        const double eta = gy - j;
        LocatedPoint loc;
        if (eta <= xi) {
            loc.cell = 2 * (j * n_ + i);
            loc.lambda = {1.0 - xi, xi - eta, eta};
        } else {
            loc.cell = 2 * (j * n_ + i) + 1;
            loc.lambda = {1.0 - eta, xi, eta - xi};
        }
        return loc;
    }

    CellQuadrature cell_quadrature(int c, int order) const {
        const QuadratureRule& rule = triangle_rule(order);
        const auto p = cell_vertices(c);
        const double area = cell_area(c);
        CellQuadrature quad;
        quad.points.reserve(rule.points.size());
        quad.weights.reserve(rule.points.size());
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto& l = rule.points[q];
            quad.points.push_back(l[0] * p[0] + l[1] * p[1] + l[2] * p[2]);
            quad.weights.push_back(rule.weights[q] * area);
        }
        return quad;
    }

    /// Integrate f(x) over the whole mesh with the given quadrature order.
    template <class F>
    double integrate(int order, F&& f) const {
        const QuadratureRule& rule = triangle_rule(order);
        double sum = 0.0;
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            const auto p = cell_vertices(static_cast<int>(c));
            const double area = cell_area(static_cast<int>(c));
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                const auto& l = rule.points[q];
                const Vec2 x = l[0] * p[0] + l[1] * p[1] + l[2] * p[2];
                sum += rule.weights[q] * area * f(x);
            }
        }
        return sum;
    }

    /// Plain-text dump: header "nv nc", vertex coordinates, cell indices.
    void dump(std::ostream& os) const {
        os << vertices_.size() << ' ' << cells_.size() << '\n';
        for (const auto& v : vertices_) os << v.x << ' ' << v.y << '\n';
        for (const auto& t : cells_) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }

private:
    int n_;
    AxisBox box_;
    double dx_ = 0.0, dy_ = 0.0;
    std::vector<Vec2> vertices_;
    std::vector<std::array<int, 3>> cells_;
    std::vector<bool> on_boundary_;
};

inline TriangleMesh build_uniform_mesh(int n, const AxisBox& box = {}) {
    return TriangleMesh(n, box);
}

}  // namespace ibstokes
