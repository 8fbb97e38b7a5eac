#include <retarget/regions.hpp>

#include <catch_amalgamated.hpp>

#include <random>
#include <set>

#include "support.hpp"

using namespace retarget;
using support::convex_sets_meet;
using support::rect;
using support::square_grid;
using support::triangle_of;

namespace {

// Faces of a convex polygon by centroid containment or closed contact with
// the outline, computed with separating axes only.
FaceSet oracle_polygon(const Mesh& m, const std::vector<Point2>& poly)
{
    FaceSet out;
    for (std::size_t f = 0; f < m.face_count(); ++f) {
        bool hit = convex_sets_meet({m.centroid(f)}, poly) && point_in_polygon(m.centroid(f), poly);
        for (std::size_t i = 0; !hit && i < poly.size(); ++i)
            hit = convex_sets_meet({poly[i], poly[(i + 1) % poly.size()]}, triangle_of(m, f));
        if (hit) out.push_back(f);
    }
    return out;
}

FaceSet oracle_segment(const Mesh& m, Point2 a, Point2 b)
{
    FaceSet out;
    for (std::size_t f = 0; f < m.face_count(); ++f)
        if (convex_sets_meet({a, b}, triangle_of(m, f))) out.push_back(f);
    return out;
}

} // namespace

TEST_CASE("full rectangle polygon claims every face")
{
    const Mesh m = square_grid(8, 4);
    CHECK(faces_for_polygon(m, rect(0, 0, 8, 8)) == faceset::all(m.face_count()));
}

TEST_CASE("degenerate polygons are rejected")
{
    const Mesh m = square_grid(8, 4);
    CHECK_THROWS_AS(faces_for_polygon(m, std::vector<Point2>{{1, 1}, {2, 2}, {3, 3}}), Error);
    CHECK_THROWS_AS(faces_for_polygon(m, std::vector<Point2>{{1, 1}, {2, 2}}), Error);
    CHECK_THROWS_AS(faces_for_polygon(m, rect(1, 1, 9, 2)), Error);
}

TEST_CASE("left half of a 4x4-cell mesh")
{
    const Mesh m = square_grid(8, 4);
    const auto poly = rect(0, 0, 4, 8);
    const FaceSet got = faces_for_polygon(m, poly);
    CHECK(got == oracle_polygon(m, poly));
    // 16 inside plus the 8 faces of the next column touching x = 4.
    CHECK(got.size() == 24);
}

TEST_CASE("random convex polygons match the oracle")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    const Mesh m = build_regular_mesh(10, 10, 49);
    for (int trial = 0; trial < 200; ++trial) {
        const double x0 = u(rng), x1 = u(rng), y0 = u(rng), y1 = u(rng);
        if (std::abs(x1 - x0) < 0.05 || std::abs(y1 - y0) < 0.05) continue;
        // Triangle inscribed in the box, so it is convex and non-degenerate.
        const std::vector<Point2> tri{{std::min(x0, x1), std::min(y0, y1)},
                                      {std::max(x0, x1), std::min(y0, y1)},
                                      {(x0 + x1) / 2, std::max(y0, y1)}};
        INFO("trial " << trial);
        CHECK(faces_for_polygon(m, tri) == oracle_polygon(m, tri));
    }
}

TEST_CASE("horizontal segment along a cell-row midline claims that row")
{
    const Mesh m = square_grid(8, 4);
    const FaceSet got = faces_for_polyline(m, std::vector<Point2>{{0, 3}, {8, 3}});
    CHECK(got == oracle_segment(m, {0, 3}, {8, 3}));
    CHECK(got.size() == 8);
    for (std::size_t f : got) CHECK(m.centroid(f).y > 2.0);
    for (std::size_t f : got) CHECK(m.centroid(f).y < 4.0);
}

TEST_CASE("segment inside one face")
{
    const Mesh m = square_grid(8, 4);
    const FaceSet got = faces_for_polyline(m, std::vector<Point2>{{1.5, 0.2}, {1.8, 0.5}});
    REQUIRE(got.size() == 1);
    CHECK(point_in_triangle({1.5, 0.2}, m.corner(got[0], 0), m.corner(got[0], 1), m.corner(got[0], 2)));
}

TEST_CASE("segment along an interior mesh edge touches both sides")
{
    const Mesh m = square_grid(8, 4);
    const FaceSet got = faces_for_polyline(m, std::vector<Point2>{{1, 4}, {7, 4}});
    CHECK(got == oracle_segment(m, {1, 4}, {7, 4}));
    bool below = false, above = false;
    for (std::size_t f : got) {
        below = below || m.centroid(f).y < 4.0;
        above = above || m.centroid(f).y > 4.0;
    }
    CHECK(below);
    CHECK(above);
}

TEST_CASE("random polylines match the oracle")
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    const Mesh m = build_regular_mesh(10, 10, 64);
    for (int trial = 0; trial < 200; ++trial) {
        const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
        FaceSet expect = faceset::unite(oracle_segment(m, a, b), oracle_segment(m, b, c));
        CHECK(faces_for_polyline(m, std::vector<Point2>{a, b, c}) == expect);
    }
}

TEST_CASE("labels outside the image are rejected")
{
    const Mesh m = square_grid(8, 4);
    CHECK_THROWS_AS(faces_for_polyline(m, std::vector<Point2>{{-1, 3}, {8, 3}}), Error);
}

TEST_CASE("stripes of an object inside one interior cell")
{
    const Mesh m = square_grid(8, 4);
    const RegionModel r = build_region_model(m, {rect(2.5, 2.5, 3.5, 3.5)}, {});
    REQUIRE(r.object_faces.size() == 1);
    // Oracle: bounding-box overlap with positive length.
    const Box2 box = faces_box(m, r.object_faces[0]);
    FaceSet h, v;
    for (std::size_t f = 0; f < m.face_count(); ++f) {
        const Box2 fb = m.face_box(f);
        if (std::min(fb.hi.y, box.hi.y) - std::max(fb.lo.y, box.lo.y) > 0) h.push_back(f);
        if (std::min(fb.hi.x, box.hi.x) - std::max(fb.lo.x, box.lo.x) > 0) v.push_back(f);
    }
    CHECK(r.stripe_h == h);
    CHECK(r.stripe_v == v);
    CHECK(h.size() == 8);
    CHECK(v.size() == 8);
    const FaceSet both = faceset::intersect(r.stripe_h, r.stripe_v);
    CHECK(faceset::subtract(r.object_faces[0], both).empty());
    CHECK(r.background.size() == m.face_count() - 14);
}

TEST_CASE("full-height object fills stripe_h, full-width object fills stripe_v")
{
    const Mesh m = square_grid(8, 4);
    const RegionModel tall = build_region_model(m, {rect(3, 0, 5, 8)}, {});
    CHECK(tall.stripe_h == faceset::all(m.face_count()));
    CHECK(total_object_height(tall) == 8.0);
    const RegionModel wide = build_region_model(m, {rect(0, 3, 8, 5)}, {});
    CHECK(wide.stripe_v == faceset::all(m.face_count()));
    CHECK(total_object_width(wide) == 8.0);
}

TEST_CASE("two objects with disjoint y-extents")
{
    const Mesh m = build_regular_mesh(16, 16, 81);
    const RegionModel r = build_region_model(m, {rect(2.5, 2.5, 3.5, 3.5), rect(10.5, 12.5, 11.5, 13.5)}, {});
    REQUIRE(r.object_faces.size() == 2);
    std::set<double> rows;
    for (std::size_t f : r.stripe_h) rows.insert(std::floor(m.centroid(f).y / 2.0));
    CHECK(rows == std::set<double>{1.0, 6.0});
    CHECK(total_object_width(r) == 4.0);
    CHECK(total_object_height(r) == 4.0);
}

TEST_CASE("no objects means empty stripes")
{
    const Mesh m = square_grid(8, 4);
    const RegionModel r = build_region_model(m, {}, {});
    CHECK(r.stripe_h.empty());
    CHECK(r.stripe_v.empty());
    CHECK(r.background.size() == m.face_count());
}

TEST_CASE("overlapping objects: the first one keeps shared faces")
{
    const Mesh m = square_grid(8, 4);
    const RegionModel r = build_region_model(m, {rect(0, 0, 4, 4), rect(2, 2, 6, 6)}, {});
    REQUIRE(r.object_faces.size() == 2);
    CHECK(faceset::intersect(r.object_faces[0], r.object_faces[1]).empty());
    CHECK(faceset::unite(r.object_faces[0], r.object_faces[1])
          == faceset::unite(faces_for_polygon(m, rect(0, 0, 4, 4)), faces_for_polygon(m, rect(2, 2, 6, 6))));
}

TEST_CASE("interval union length")
{
    CHECK(detail::interval_union_length({{0, 2}, {1, 3}, {5, 6}}) == 4.0);
    CHECK(detail::interval_union_length({}) == 0.0);
    CHECK(detail::interval_union_length({{0, 1}, {1, 2}}) == 2.0);
}
