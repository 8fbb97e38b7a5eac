#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace retarget {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
    friend bool operator==(Point2 a, Point2 b) = default;
};

inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }

/// Twice the signed area of (a, b, c); positive when counterclockwise.
inline double orient(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

/// Axis-aligned box. Empty boxes have lo > hi.
struct Box2 {
    Point2 lo{1.0, 1.0};
    Point2 hi{0.0, 0.0};

    bool empty() const { return lo.x > hi.x || lo.y > hi.y; }

    void expand(Point2 p)
    {
        if (empty()) {
            lo = hi = p;
            return;
        }
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }

    double width() const { return empty() ? 0.0 : hi.x - lo.x; }
    double height() const { return empty() ? 0.0 : hi.y - lo.y; }
};

namespace detail {

// Assumes p is collinear with segment ab.
inline bool on_segment_collinear(Point2 a, Point2 b, Point2 p)
{
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y
        && p.y <= std::max(a.y, b.y);
}

} // namespace detail

/// Closed segment intersection, touching and collinear overlap included.
inline bool segments_intersect(Point2 p1, Point2 p2, Point2 q1, Point2 q2)
{
    const int d1 = sign_of(orient(q1, q2, p1));
    const int d2 = sign_of(orient(q1, q2, p2));
    const int d3 = sign_of(orient(p1, p2, q1));
    const int d4 = sign_of(orient(p1, p2, q2));
    if (d1 * d2 < 0 && d3 * d4 < 0) return true;
    if (d1 == 0 && detail::on_segment_collinear(q1, q2, p1)) return true;
    if (d2 == 0 && detail::on_segment_collinear(q1, q2, p2)) return true;
    if (d3 == 0 && detail::on_segment_collinear(p1, p2, q1)) return true;
    if (d4 == 0 && detail::on_segment_collinear(p1, p2, q2)) return true;
    return false;
}

/// Point in closed triangle; works for either orientation.
inline bool point_in_triangle(Point2 p, Point2 a, Point2 b, Point2 c)
{
    const double d1 = orient(a, b, p);
    const double d2 = orient(b, c, p);
    const double d3 = orient(c, a, p);
    const bool has_neg = d1 < 0 || d2 < 0 || d3 < 0;
    const bool has_pos = d1 > 0 || d2 > 0 || d3 > 0;
    return !(has_neg && has_pos);
}

/// Closed segment against closed triangle.
inline bool segment_intersects_triangle(Point2 s0, Point2 s1, Point2 a, Point2 b, Point2 c)
{
    if (point_in_triangle(s0, a, b, c) || point_in_triangle(s1, a, b, c)) return true;
    return segments_intersect(s0, s1, a, b) || segments_intersect(s0, s1, b, c)
        || segments_intersect(s0, s1, c, a);
}

/// Even-odd rule; points exactly on the boundary may land either way.
inline bool point_in_polygon(Point2 p, std::span<const Point2> polygon)
{
    bool inside = false;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2 a = polygon[i];
        const Point2 b = polygon[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

inline double polygon_signed_area(std::span<const Point2> polygon)
{
    double twice = 0.0;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) twice += cross(polygon[i], polygon[(i + 1) % n]);
    return 0.5 * twice;
}

/// True when no two non-adjacent edges of the closed polygon touch and
/// adjacent edges meet only at their shared vertex.
inline bool polygon_is_simple(std::span<const Point2> polygon)
{
    const std::size_t n = polygon.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a0 = polygon[i];
        const Point2 a1 = polygon[(i + 1) % n];
        if (a0 == a1) return false;
        for (std::size_t j = i + 1; j < n; ++j) {
            const Point2 b0 = polygon[j];
            const Point2 b1 = polygon[(j + 1) % n];
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if (!adjacent) {
                if (segments_intersect(a0, a1, b0, b1)) return false;
                continue;
            }
            // Adjacent edges must not fold back onto each other.
            const Point2 shared = (j == i + 1) ? a1 : a0;
            const Point2 other_a = (j == i + 1) ? a0 : a1;
            const Point2 other_b = (j == i + 1) ? b1 : b0;
            if (orient(shared, other_a, other_b) == 0.0) {
                const Point2 da = other_a - shared;
                const Point2 db = other_b - shared;
                if (da.x * db.x + da.y * db.y > 0.0) return false;
            }
        }
    }
    return true;
}

} // namespace retarget
