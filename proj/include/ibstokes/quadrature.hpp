#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ibstokes/errors.hpp"

namespace ibstokes {

/// Quadrature rule on the reference triangle in barycentric coordinates.
/// Weights sum to 1 and are scaled by the cell area at the point of use.
struct QuadratureRule {
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;
    int order = 0;  // polynomial exactness degree
};

namespace detail {

inline QuadratureRule make_triangle_rule(int order) {
    QuadratureRule rule;
    rule.order = order;
    auto add3 = [&rule](double a, double w) {
        // all permutations of (a, a, 1-2a); collapses to one point for a=1/3
        if (a == 1.0 / 3.0) {
            rule.points.push_back({a, a, a});
            rule.weights.push_back(w);
            return;
        }
        const double b = 1.0 - 2.0 * a;
        rule.points.push_back({b, a, a});
        rule.points.push_back({a, b, a});
        rule.points.push_back({a, a, b});
        rule.weights.insert(rule.weights.end(), 3, w);
    };
    auto add6 = [&rule](double a, double b, double w) {
        const double c = 1.0 - a - b;
        rule.points.push_back({a, b, c});
        rule.points.push_back({a, c, b});
        rule.points.push_back({b, a, c});
        rule.points.push_back({b, c, a});
        rule.points.push_back({c, a, b});
        rule.points.push_back({c, b, a});
        rule.weights.insert(rule.weights.end(), 6, w);
    };
    switch (order) {
        case 1:
            add3(1.0 / 3.0, 1.0);
            break;
        case 2:
            add3(1.0 / 6.0, 1.0 / 3.0);
            break;
        case 4:
            // Dunavant degree-4 rule, 6 points
            add3(0.445948490915965, 0.223381589678011);
            add3(0.091576213509771, 0.109951743655322);
            break;
        case 6:
            // Dunavant degree-6 rule, 12 points
            add3(0.063089014491502, 0.050844906370207);
            add3(0.249286745170910, 0.116786275726379);
            add6(0.310352451033785, 0.053145049844816, 0.082851075618374);
            break;
        default:
            throw IndexOutOfRange("triangle quadrature order must be 1, 2, 4 or 6");
    }
    return rule;
}

}  // namespace detail

inline const QuadratureRule& triangle_rule(int order) {
    static const QuadratureRule r1 = detail::make_triangle_rule(1);
    static const QuadratureRule r2 = detail::make_triangle_rule(2);
    static const QuadratureRule r4 = detail::make_triangle_rule(4);
    static const QuadratureRule r6 = detail::make_triangle_rule(6);
    switch (order) {
        case 1: return r1;
        case 2: return r2;
        case 4: return r4;
        case 6: return r6;
        default:
            throw IndexOutOfRange("triangle quadrature order must be 1, 2, 4 or 6");
    }
}

/// Gauss-Legendre rule on [-1, 1], nodes ascending.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussRule gauss_legendre(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton iteration from the Chebyshev estimate
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

/// Composite Gauss rule on [a, b]: `panels` equal panels with an
/// `points_per_panel`-point Gauss rule on each.
inline GaussRule composite_gauss(double a, double b, int panels, int points_per_panel) {
    const GaussRule base = gauss_legendre(points_per_panel);
    GaussRule rule;
    rule.nodes.reserve(static_cast<std::size_t>(panels) * points_per_panel);
    rule.weights.reserve(static_cast<std::size_t>(panels) * points_per_panel);
    const double hp = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * hp;
        for (int i = 0; i < points_per_panel; ++i) {
            rule.nodes.push_back(lo + 0.5 * hp * (base.nodes[i] + 1.0));
            rule.weights.push_back(0.5 * hp * base.weights[i]);
        }
    }
    return rule;
}

}  // namespace ibstokes
