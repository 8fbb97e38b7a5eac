#pragma once

#include <retarget/errors.hpp>
#include <retarget/geometry.hpp>
#include <retarget/mesh.hpp>

#include <algorithm>
#include <cstddef>
#include <iterator>
#include <string>
#include <vector>

namespace retarget {

/// Sorted, duplicate-free list of face indices.
using FaceSet = std::vector<std::size_t>;

namespace faceset {

inline FaceSet unite(const FaceSet& a, const FaceSet& b)
{
    FaceSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline FaceSet intersect(const FaceSet& a, const FaceSet& b)
{
    FaceSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline FaceSet subtract(const FaceSet& a, const FaceSet& b)
{
    FaceSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline bool contains(const FaceSet& s, std::size_t f) { return std::binary_search(s.begin(), s.end(), f); }

inline std::vector<char> mask(const FaceSet& s, std::size_t face_count)
{
    std::vector<char> m(face_count, 0);
    for (std::size_t f : s) m[f] = 1;
    return m;
}

inline FaceSet all(std::size_t face_count)
{
    FaceSet out(face_count);
    for (std::size_t f = 0; f < face_count; ++f) out[f] = f;
    return out;
}

} // namespace faceset

/// User labels in source pixel space: origin top-left, y down.
struct LabelSet {
    std::vector<std::vector<Point2>> object_polygons;
    std::vector<std::vector<Point2>> line_polylines;

    bool empty() const { return object_polygons.empty() && line_polylines.empty(); }
};

/// Pixel space (y down) to the mesh's mathematical frame (y up).
inline Point2 pixel_to_math(Point2 p, double height) { return {p.x, height - p.y}; }
inline Point2 math_to_pixel(Point2 p, double height) { return {p.x, height - p.y}; }

namespace detail {

inline void require_inside(const Mesh& mesh, std::span<const Point2> pts, const char* what)
{
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Point2 p = pts[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0.0 || p.y < 0.0 || p.x > mesh.width
            || p.y > mesh.height)
            throw Error(ErrorCode::InvalidInput, std::string(what) + " point " + std::to_string(i)
                                                     + " lies outside the image rectangle");
    }
}

} // namespace detail

/// Faces whose centroid is inside the polygon plus every face touched by
/// the polygon outline. Polygon in the mesh frame.
inline FaceSet faces_for_polygon(const Mesh& mesh, std::span<const Point2> polygon)
{
    if (polygon.size() < 3) throw Error(ErrorCode::InvalidInput, "polygon needs at least 3 points");
    detail::require_inside(mesh, polygon, "polygon");
    Box2 poly_box;
    for (Point2 p : polygon) poly_box.expand(p);
    const double scale = std::max(poly_box.width(), poly_box.height());
    if (!(std::abs(polygon_signed_area(polygon)) > 1e-12 * scale * scale))
        throw Error(ErrorCode::InvalidInput, "polygon has zero area");
    if (!polygon_is_simple(polygon)) throw Error(ErrorCode::InvalidInput, "polygon is self-intersecting");

    FaceSet out;
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        const Box2 fb = mesh.face_box(f);
        if (fb.hi.x < poly_box.lo.x || fb.lo.x > poly_box.hi.x || fb.hi.y < poly_box.lo.y
            || fb.lo.y > poly_box.hi.y)
            continue;
        bool hit = point_in_polygon(mesh.centroid(f), polygon);
        const Point2 a = mesh.corner(f, 0), b = mesh.corner(f, 1), c = mesh.corner(f, 2);
        for (std::size_t i = 0; !hit && i < polygon.size(); ++i)
            hit = segment_intersects_triangle(polygon[i], polygon[(i + 1) % polygon.size()], a, b, c);
        if (hit) out.push_back(f);
    }
    return out;
}

/// Faces whose closed triangle meets any segment of the polyline.
inline FaceSet faces_for_polyline(const Mesh& mesh, std::span<const Point2> polyline)
{
    if (polyline.size() < 2) throw Error(ErrorCode::InvalidInput, "polyline needs at least 2 points");
    detail::require_inside(mesh, polyline, "polyline");
    FaceSet out;
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        const Point2 a = mesh.corner(f, 0), b = mesh.corner(f, 1), c = mesh.corner(f, 2);
        for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
            if (segment_intersects_triangle(polyline[i], polyline[i + 1], a, b, c)) {
                out.push_back(f);
                break;
            }
        }
    }
    return out;
}

struct Stripes {
    FaceSet horizontal; // M_h
    FaceSet vertical;   // M_v
};

/// Bounding box of a face set.
inline Box2 faces_box(const Mesh& mesh, const FaceSet& faces)
{
    Box2 box;
    for (std::size_t f : faces)
        for (int k = 0; k < 3; ++k) box.expand(mesh.corner(f, k));
    return box;
}

/// Row and column bands of faces overlapping the object bounding boxes
/// with positive length.
inline Stripes compute_stripes(const Mesh& mesh, const std::vector<FaceSet>& object_faces)
{
    std::vector<Box2> boxes;
    for (const FaceSet& o : object_faces)
        if (!o.empty()) boxes.push_back(faces_box(mesh, o));
    Stripes out;
    if (boxes.empty()) return out;
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        const Box2 fb = mesh.face_box(f);
        bool in_h = false, in_v = false;
        for (const Box2& b : boxes) {
            in_h = in_h || std::max(fb.lo.y, b.lo.y) < std::min(fb.hi.y, b.hi.y);
            in_v = in_v || std::max(fb.lo.x, b.lo.x) < std::min(fb.hi.x, b.hi.x);
        }
        if (in_h) out.horizontal.push_back(f);
        if (in_v) out.vertical.push_back(f);
    }
    return out;
}

/// Face-level view of the labels: objects O_i, lines l_j, stripes and
/// the remaining background.
struct RegionModel {
    std::size_t face_count = 0;
    std::vector<FaceSet> object_faces;
    std::vector<FaceSet> line_faces;
    FaceSet stripe_h;
    FaceSet stripe_v;
    FaceSet background;
    std::vector<Box2> object_boxes;

    FaceSet objects_union() const
    {
        FaceSet u;
        for (const FaceSet& o : object_faces) u = faceset::unite(u, o);
        return u;
    }

    FaceSet lines_union() const
    {
        FaceSet u;
        for (const FaceSet& l : line_faces) u = faceset::unite(u, l);
        return u;
    }
};

namespace detail {

// Total length of a union of closed intervals.
inline double interval_union_length(std::vector<std::pair<double, double>> iv)
{
    std::sort(iv.begin(), iv.end());
    double total = 0.0, lo = 0.0, hi = 0.0;
    bool open = false;
    for (auto [a, b] : iv) {
        if (!open) {
            lo = a, hi = b, open = true;
        } else if (a <= hi) {
            hi = std::max(hi, b);
        } else {
            total += hi - lo;
            lo = a, hi = b;
        }
    }
    if (open) total += hi - lo;
    return total;
}

} // namespace detail

/// Total object width W: union of the objects' x-extents.
inline double total_object_width(const RegionModel& regions)
{
    std::vector<std::pair<double, double>> iv;
    for (const Box2& b : regions.object_boxes)
        if (!b.empty()) iv.emplace_back(b.lo.x, b.hi.x);
    return detail::interval_union_length(std::move(iv));
}

/// Total object height H: union of the objects' y-extents.
inline double total_object_height(const RegionModel& regions)
{
    std::vector<std::pair<double, double>> iv;
    for (const Box2& b : regions.object_boxes)
        if (!b.empty()) iv.emplace_back(b.lo.y, b.hi.y);
    return detail::interval_union_length(std::move(iv));
}

/// Rasterizes labels given in the mesh frame. Objects claim faces in order,
/// so a face shared by two polygons belongs to the first one.
inline RegionModel build_region_model(const Mesh& mesh, const std::vector<std::vector<Point2>>& polygons,
                                      const std::vector<std::vector<Point2>>& polylines)
{
    RegionModel model;
    model.face_count = mesh.face_count();
    FaceSet claimed;
    for (const auto& poly : polygons) {
        FaceSet faces = faceset::subtract(faces_for_polygon(mesh, poly), claimed);
        if (faces.empty()) continue;
        claimed = faceset::unite(claimed, faces);
        model.object_boxes.push_back(faces_box(mesh, faces));
        model.object_faces.push_back(std::move(faces));
    }
    for (const auto& line : polylines) model.line_faces.push_back(faces_for_polyline(mesh, line));

    Stripes stripes = compute_stripes(mesh, model.object_faces);
    model.stripe_h = std::move(stripes.horizontal);
    model.stripe_v = std::move(stripes.vertical);

    FaceSet covered = faceset::unite(model.stripe_h, model.stripe_v);
    covered = faceset::unite(covered, model.lines_union());
    covered = faceset::unite(covered, claimed);
    model.background = faceset::subtract(faceset::all(model.face_count), covered);
    return model;
}

} // namespace retarget
