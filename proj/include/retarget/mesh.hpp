#pragma once

#include <retarget/errors.hpp>
#include <retarget/geometry.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace retarget {

enum class BoundaryTag {
    Interior,
    Left,
    Right,
    Top,
    Bottom,
    CornerLL,
    CornerLR,
    CornerTL,
    CornerTR,
};

inline bool is_corner(BoundaryTag t)
{
    return t == BoundaryTag::CornerLL || t == BoundaryTag::CornerLR || t == BoundaryTag::CornerTL
        || t == BoundaryTag::CornerTR;
}

inline bool on_left(BoundaryTag t)
{
    return t == BoundaryTag::Left || t == BoundaryTag::CornerLL || t == BoundaryTag::CornerTL;
}
inline bool on_right(BoundaryTag t)
{
    return t == BoundaryTag::Right || t == BoundaryTag::CornerLR || t == BoundaryTag::CornerTR;
}
inline bool on_bottom(BoundaryTag t)
{
    return t == BoundaryTag::Bottom || t == BoundaryTag::CornerLL || t == BoundaryTag::CornerLR;
}
inline bool on_top(BoundaryTag t)
{
    return t == BoundaryTag::Top || t == BoundaryTag::CornerTL || t == BoundaryTag::CornerTR;
}

/// Classifies a point of the rectangle [0,width]x[0,height] by exact comparison.
inline BoundaryTag classify_boundary(Point2 p, double width, double height)
{
    const bool l = p.x == 0.0, r = p.x == width, b = p.y == 0.0, t = p.y == height;
    if (l && b) return BoundaryTag::CornerLL;
    if (r && b) return BoundaryTag::CornerLR;
    if (l && t) return BoundaryTag::CornerTL;
    if (r && t) return BoundaryTag::CornerTR;
    if (l) return BoundaryTag::Left;
    if (r) return BoundaryTag::Right;
    if (b) return BoundaryTag::Bottom;
    if (t) return BoundaryTag::Top;
    return BoundaryTag::Interior;
}

using Face = std::array<std::size_t, 3>;

/// Triangulation of the rectangle [0,width]x[0,height] in mathematical
/// orientation (y up). Faces are counterclockwise.
struct Mesh {
    double width = 0.0;
    double height = 0.0;
    std::vector<Point2> vertices;
    std::vector<Face> faces;
    std::vector<BoundaryTag> tags;
    // Grid dimensions in cells; zero when the mesh did not come from a grid.
    std::size_t cols = 0;
    std::size_t rows = 0;

    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t face_count() const { return faces.size(); }

    Point2 corner(std::size_t f, int k) const { return vertices[faces[f][k]]; }

    double signed_area(std::size_t f) const
    {
        return 0.5 * orient(corner(f, 0), corner(f, 1), corner(f, 2));
    }

    Point2 centroid(std::size_t f) const
    {
        const Point2 a = corner(f, 0), b = corner(f, 1), c = corner(f, 2);
        return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
    }

    Box2 face_box(std::size_t f) const
    {
        Box2 box;
        for (int k = 0; k < 3; ++k) box.expand(corner(f, k));
        return box;
    }

    void retag()
    {
        tags.resize(vertices.size());
        for (std::size_t i = 0; i < vertices.size(); ++i)
            tags[i] = classify_boundary(vertices[i], width, height);
    }
};

namespace detail {

inline std::pair<std::size_t, std::size_t> choose_grid(double width, double height,
                                                       std::size_t target)
{
    // Smallest column count whose aspect-matched row count reaches the target.
    for (std::size_t p = 1;; ++p) {
        const auto ideal = static_cast<long long>(std::llround(static_cast<double>(p) * height / width));
        const std::size_t q = static_cast<std::size_t>(std::max<long long>(1, ideal));
        if ((p + 1) * (q + 1) >= target) return {p, q};
    }
}

} // namespace detail

/// Regular grid of (p+1)x(q+1) vertices with every cell split along its
/// lower-left to upper-right diagonal.
inline Mesh build_regular_mesh(double width, double height, std::size_t target_vertex_count = 1500)
{
    if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height))
        throw Error(ErrorCode::InvalidInput, "mesh dimensions must be positive");
    if (width < 2.0 || height < 2.0)
        throw Error(ErrorCode::InvalidInput, "mesh dimensions must be at least 2 pixels");
    if (target_vertex_count < 4)
        throw Error(ErrorCode::InvalidInput, "target vertex count must be at least 4");

    const auto [p, q] = detail::choose_grid(width, height, target_vertex_count);

    Mesh mesh;
    mesh.width = width;
    mesh.height = height;
    mesh.cols = p;
    mesh.rows = q;
    mesh.vertices.reserve((p + 1) * (q + 1));
    for (std::size_t j = 0; j <= q; ++j) {
        // Last row/column pinned to the exact rectangle edge.
        const double y = j == q ? height : height * static_cast<double>(j) / static_cast<double>(q);
        for (std::size_t i = 0; i <= p; ++i) {
            const double x = i == p ? width : width * static_cast<double>(i) / static_cast<double>(p);
            mesh.vertices.push_back({x, y});
        }
    }
    auto at = [p](std::size_t i, std::size_t j) { return j * (p + 1) + i; };
    mesh.faces.reserve(2 * p * q);
    for (std::size_t j = 0; j < q; ++j) {
        for (std::size_t i = 0; i < p; ++i) {
            const std::size_t v00 = at(i, j), v10 = at(i + 1, j);
            const std::size_t v01 = at(i, j + 1), v11 = at(i + 1, j + 1);
            mesh.faces.push_back({v00, v10, v11});
            mesh.faces.push_back({v00, v11, v01});
        }
    }
    mesh.retag();
    return mesh;
}

/// Faces incident to each vertex, in increasing face order.
inline std::vector<std::vector<std::size_t>> vertex_faces(const Mesh& mesh)
{
    std::vector<std::vector<std::size_t>> out(mesh.vertex_count());
    for (std::size_t f = 0; f < mesh.face_count(); ++f)
        for (std::size_t v : mesh.faces[f]) out[v].push_back(f);
    return out;
}

/// Number of faces sharing each undirected edge.
inline std::map<std::pair<std::size_t, std::size_t>, int> edge_face_counts(const Mesh& mesh)
{
    std::map<std::pair<std::size_t, std::size_t>, int> counts;
    for (const Face& f : mesh.faces) {
        for (int k = 0; k < 3; ++k) {
            std::size_t a = f[k], b = f[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            ++counts[{a, b}];
        }
    }
    return counts;
}

/// Checks orientation, tag consistency, and the edge-manifold property.
/// Returns an empty string when the mesh is valid.
inline std::string validate_mesh(const Mesh& mesh)
{
    if (mesh.tags.size() != mesh.vertices.size()) return "tag count does not match vertex count";
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        for (std::size_t v : mesh.faces[f])
            if (v >= mesh.vertex_count()) return "face " + std::to_string(f) + " has an invalid index";
        if (!(mesh.signed_area(f) > 0.0)) return "face " + std::to_string(f) + " is not counterclockwise";
    }
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i)
        if (classify_boundary(mesh.vertices[i], mesh.width, mesh.height) != mesh.tags[i])
            return "vertex " + std::to_string(i) + " has an inconsistent boundary tag";
    for (const auto& [edge, count] : edge_face_counts(mesh)) {
        const BoundaryTag a = mesh.tags[edge.first], b = mesh.tags[edge.second];
        const Point2 pa = mesh.vertices[edge.first], pb = mesh.vertices[edge.second];
        const bool on_boundary = (on_left(a) && on_left(b)) || (on_right(a) && on_right(b))
            || (on_bottom(a) && on_bottom(b)) || (on_top(a) && on_top(b));
        const int expected = on_boundary ? 1 : 2;
        if (count != expected)
            return "edge (" + std::to_string(edge.first) + "," + std::to_string(edge.second) + ") at ("
                + std::to_string(pa.x) + "," + std::to_string(pa.y) + ")-(" + std::to_string(pb.x) + ","
                + std::to_string(pb.y) + ") has " + std::to_string(count) + " faces";
    }
    return {};
}

} // namespace retarget
