#pragma once

#include <algorithm>
#include <cmath>

namespace ibstokes {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 b) const { return {x + b.x, y + b.y}; }
    Vec2 operator-(Vec2 b) const { return {x - b.x, y - b.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 b) { x += b.x; y += b.y; return *this; }
    Vec2& operator-=(Vec2 b) { x -= b.x; y -= b.y; return *this; }

    double dot(Vec2 b) const { return x * b.x + y * b.y; }
    double norm() const { return std::hypot(x, y); }
    double norm_inf() const { return std::max(std::abs(x), std::abs(y)); }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

/// Counterclockwise rotation by 90 degrees.
inline Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

struct Mat2 {
    // m[row][col]
    double m[2][2] = {{0.0, 0.0}, {0.0, 0.0}};

    double frobenius() const {
        return std::sqrt(m[0][0] * m[0][0] + m[0][1] * m[0][1] +
                         m[1][0] * m[1][0] + m[1][1] * m[1][1]);
    }

    Mat2 operator-(const Mat2& b) const {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.m[i][j] = m[i][j] - b.m[i][j];
        return r;
    }
};

/// Axis-aligned rectangle, lo < hi componentwise.
struct AxisBox {
    Vec2 lo{-1.0, -1.0};
    Vec2 hi{1.0, 1.0};

    bool valid() const { return lo.x < hi.x && lo.y < hi.y; }
    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    double area() const { return width() * height(); }
    double diagonal() const { return std::hypot(width(), height()); }

    bool contains(Vec2 p, double tol = 0.0) const {
        return p.x >= lo.x - tol && p.x <= hi.x + tol &&
               p.y >= lo.y - tol && p.y <= hi.y + tol;
    }

    /// Distance from an interior point to the boundary of the box.
    double distance_to_boundary(Vec2 p) const {
        return std::min(std::min(p.x - lo.x, hi.x - p.x),
                        std::min(p.y - lo.y, hi.y - p.y));
    }
};

}  // namespace ibstokes
