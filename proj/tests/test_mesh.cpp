#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "testutil.hpp"

using namespace ibstokes;

namespace {

double factorial(int k) { return k <= 1 ? 1.0 : k * factorial(k - 1); }

// exact integral of x^p y^q over the reference triangle {x,y >= 0, x+y <= 1}
double reference_monomial(int p, int q) {
    return factorial(p) * factorial(q) / factorial(p + q + 2);
}

double quadrature_monomial(const QuadratureRule& rule, int p, int q) {
    // map barycentric points onto the reference triangle (0,0),(1,0),(0,1)
    double s = 0.0;
    for (std::size_t k = 0; k < rule.points.size(); ++k) {
        const double x = rule.points[k][1];
        const double y = rule.points[k][2];
        s += 0.5 * rule.weights[k] * std::pow(x, p) * std::pow(y, q);
    }
    return s;
}

}  // namespace

TEST(Quadrature, TriangleRulesExactToStatedDegree) {
    for (int order : {1, 2, 4, 6}) {
        const QuadratureRule& rule = triangle_rule(order);
        EXPECT_EQ(rule.order, order);
        double wsum = 0.0;
        for (std::size_t k = 0; k < rule.points.size(); ++k) {
            EXPECT_GT(rule.weights[k], 0.0);
            wsum += rule.weights[k];
            EXPECT_NEAR(rule.points[k][0] + rule.points[k][1] + rule.points[k][2], 1.0,
                        1e-14);
        }
        EXPECT_NEAR(wsum, 1.0, 1e-14);
        for (int p = 0; p <= order; ++p) {
            for (int q = 0; p + q <= order; ++q) {
                EXPECT_NEAR(quadrature_monomial(rule, p, q), reference_monomial(p, q),
                            1e-14)
                    << "order " << order << " monomial x^" << p << " y^" << q;
            }
        }
    }
}

TEST(Quadrature, UnsupportedOrderThrows) {
    EXPECT_THROW(triangle_rule(3), IndexOutOfRange);
    EXPECT_THROW(triangle_rule(7), IndexOutOfRange);
}

TEST(Quadrature, GaussLegendreExactness) {
    for (int n : {1, 2, 4, 8, 16}) {
        const GaussRule g = gauss_legendre(n);
        ASSERT_EQ(g.nodes.size(), static_cast<std::size_t>(n));
        for (std::size_t k = 1; k < g.nodes.size(); ++k)
            EXPECT_LT(g.nodes[k - 1], g.nodes[k]);
        // exact for polynomials of degree <= 2n-1 on [-1,1]
        for (int d = 0; d <= 2 * n - 1; ++d) {
            double s = 0.0;
            for (std::size_t k = 0; k < g.nodes.size(); ++k)
                s += g.weights[k] * std::pow(g.nodes[k], d);
            const double exact = d % 2 == 1 ? 0.0 : 2.0 / (d + 1);
            EXPECT_NEAR(s, exact, 1e-13) << "n=" << n << " degree " << d;
        }
    }
}

TEST(Quadrature, CompositeGaussIntegratesSmoothFunctions) {
    const GaussRule g = composite_gauss(0.0, 2.0 * M_PI, 8, 8);
    double s = 0.0, total = 0.0;
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
        s += g.weights[k] * std::cos(g.nodes[k]);
        total += g.weights[k];
    }
    EXPECT_NEAR(s, 0.0, 1e-12);
    EXPECT_NEAR(total, 2.0 * M_PI, 1e-12);
}

TEST(Mesh, CountsAndSizes) {
    const TriangleMesh small = build_uniform_mesh(1);
    EXPECT_EQ(small.num_vertices(), 4u);
    EXPECT_EQ(small.num_cells(), 2u);
    EXPECT_NEAR(small.mesh_size(), 2.0 * std::sqrt(2.0), 1e-15);

    const TriangleMesh m = build_uniform_mesh(10);
    EXPECT_EQ(m.num_vertices(), 121u);
    EXPECT_EQ(m.num_cells(), 200u);
    EXPECT_NEAR(m.mesh_size(), 0.2828, 5e-5);
    EXPECT_NEAR(m.mesh_size(), std::sqrt(2.0) * 0.2, 1e-15);

    EXPECT_NEAR(build_uniform_mesh(20).mesh_size(), 0.1414, 5e-5);

    const TriangleMesh unit = build_uniform_mesh(1, AxisBox{{0.0, 0.0}, {1.0, 1.0}});
    EXPECT_NEAR(unit.mesh_size(), std::sqrt(2.0), 1e-15);
}

TEST(Mesh, ExactHalvingOfMeshSize) {
    // the acceptance rate formula divides by log(2); the ratio must be exact
    for (int n : {5, 10, 40}) {
        const double coarse = build_uniform_mesh(n).mesh_size();
        const double fine = build_uniform_mesh(2 * n).mesh_size();
        EXPECT_EQ(coarse / fine, 2.0);
    }
}

TEST(Mesh, AreaPartition) {
    const TriangleMesh m = build_uniform_mesh(7);
    double area = 0.0;
    for (std::size_t c = 0; c < m.num_cells(); ++c)
        area += m.cell_area(static_cast<int>(c));
    EXPECT_NEAR(area, m.domain().area(), 1e-12 * m.domain().area());
    EXPECT_NEAR(m.integrate(1, [](const Vec2&) { return 1.0; }), 4.0, 1e-12);
}

TEST(Mesh, QuadraticMomentOverBox) {
    const TriangleMesh m = build_uniform_mesh(4);
    const double v = m.integrate(2, [](const Vec2& x) { return x.x * x.x; });
    EXPECT_NEAR(v, 4.0 / 3.0, 1e-12);
}

TEST(Mesh, BoundaryFlags) {
    for (int n : {1, 3, 8}) {
        const TriangleMesh m = build_uniform_mesh(n);
        int flagged = 0;
        for (std::size_t v = 0; v < m.num_vertices(); ++v) {
            const Vec2 p = m.vertex(static_cast<int>(v));
            const bool edge = std::abs(std::abs(p.x) - 1.0) < 1e-14 ||
                              std::abs(std::abs(p.y) - 1.0) < 1e-14;
            EXPECT_EQ(m.vertex_on_boundary(static_cast<int>(v)), edge);
            flagged += m.vertex_on_boundary(static_cast<int>(v)) ? 1 : 0;
        }
        EXPECT_EQ(flagged, 4 * n);
    }
}

TEST(Mesh, CellsArePositivelyOriented) {
    const TriangleMesh m = build_uniform_mesh(6);
    for (std::size_t c = 0; c < m.num_cells(); ++c) {
        const auto p = m.cell_vertices(static_cast<int>(c));
        EXPECT_GT(cross(p[1] - p[0], p[2] - p[0]), 0.0);
    }
}

TEST(Mesh, LocatePointRoundTrip) {
    const TriangleMesh m = build_uniform_mesh(9);
    ibtest::Rng rng(42);
    for (int k = 0; k < 500; ++k) {
        const Vec2 p{ibtest::uniform(rng, -1.0, 1.0), ibtest::uniform(rng, -1.0, 1.0)};
        const LocatedPoint loc = m.locate_point(p);
        ASSERT_GE(loc.cell, 0);
        ASSERT_LT(loc.cell, static_cast<int>(m.num_cells()));
        double lsum = 0.0;
        for (double l : loc.lambda) {
            EXPECT_GE(l, -1e-12);
            EXPECT_LE(l, 1.0 + 1e-12);
            lsum += l;
        }
        EXPECT_NEAR(lsum, 1.0, 1e-12);
        const Vec2 back = m.barycentric_to_point(loc.cell, loc.lambda);
        EXPECT_NEAR((back - p).norm(), 0.0, 1e-12 * m.domain().diagonal());
    }
}

TEST(Mesh, LocateVertexCentroidAndDiagonal) {
    const TriangleMesh m = build_uniform_mesh(4);

    const LocatedPoint at_vertex = m.locate_point(m.vertex(0));
    EXPECT_NEAR(*std::max_element(at_vertex.lambda.begin(), at_vertex.lambda.end()), 1.0,
                1e-12);

    const LocatedPoint at_centroid = m.locate_point(m.cell_centroid(5));
    EXPECT_EQ(at_centroid.cell, 5);
    for (double l : at_centroid.lambda) EXPECT_NEAR(l, 1.0 / 3.0, 1e-12);

    // point on a square's diagonal resolves to the lower triangle
    const Vec2 mid = 0.5 * (m.vertex(0) + m.vertex(6));  // diagonal of square (0,0)
    const LocatedPoint on_diag = m.locate_point(mid);
    EXPECT_EQ(on_diag.cell, 0);
    EXPECT_NEAR((m.barycentric_to_point(on_diag.cell, on_diag.lambda) - mid).norm(), 0.0,
                1e-13);
}

TEST(Mesh, LocateOutsideThrows) {
    const TriangleMesh m = build_uniform_mesh(3);
    EXPECT_THROW(m.locate_point({1.5, 0.0}), PointOutsideDomain);
    EXPECT_THROW(m.locate_point({0.0, -1.0001}), PointOutsideDomain);
    // drift within the tolerance band is clamped, not rejected
    EXPECT_NO_THROW(m.locate_point({1.0 + 1e-13, 0.25}));
}

TEST(Mesh, BarycentricGradientsReproduceAffineCoordinates) {
    const TriangleMesh m = build_uniform_mesh(5);
    for (int c : {0, 1, 17, 42}) {
        const auto p = m.cell_vertices(c);
        const auto g = m.barycentric_gradients(c);
        const Vec2 centroid = m.cell_centroid(c);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const double lij = 1.0 / 3.0 + g[i].dot(p[j] - centroid);
                EXPECT_NEAR(lij, i == j ? 1.0 : 0.0, 1e-13);
            }
        }
        EXPECT_NEAR((g[0] + g[1] + g[2]).norm(), 0.0, 1e-13);
    }
}

TEST(Mesh, CellQuadratureWeightsSumToArea) {
    const TriangleMesh m = build_uniform_mesh(4);
    const CellQuadrature q = m.cell_quadrature(3, 6);
    double s = 0.0;
    for (double w : q.weights) s += w;
    EXPECT_NEAR(s, m.cell_area(3), 1e-14 * m.cell_area(3));
}

TEST(Mesh, DumpFormat) {
    const TriangleMesh m = build_uniform_mesh(1);
    std::ostringstream os;
    m.dump(os);
    std::istringstream in(os.str());
    std::size_t nv = 0, nc = 0;
    ASSERT_TRUE(in >> nv >> nc);
    EXPECT_EQ(nv, m.num_vertices());
    EXPECT_EQ(nc, m.num_cells());
    for (std::size_t v = 0; v < nv; ++v) {
        double x = 0.0, y = 0.0;
        ASSERT_TRUE(in >> x >> y);
    }
    std::set<int> seen;
    for (std::size_t c = 0; c < nc; ++c) {
        int a = 0, b = 0, d = 0;
        ASSERT_TRUE(in >> a >> b >> d);
        seen.insert({a, b, d});
    }
    EXPECT_EQ(seen.size(), nv);  // every vertex referenced
    std::string rest;
    EXPECT_FALSE(in >> rest);
}

TEST(Mesh, InvalidConstruction) {
    EXPECT_THROW(build_uniform_mesh(0), Error);
    EXPECT_THROW(build_uniform_mesh(4, AxisBox{{1.0, 0.0}, {0.0, 1.0}}), Error);
}
