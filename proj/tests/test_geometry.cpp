#include <retarget/geometry.hpp>

#include <catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "support.hpp"

using namespace retarget;

TEST_CASE("orient sign follows winding")
{
    CHECK(orient({0, 0}, {1, 0}, {0, 1}) == 1.0);
    CHECK(orient({0, 0}, {0, 1}, {1, 0}) == -1.0);
    CHECK(orient({0, 0}, {1, 1}, {2, 2}) == 0.0);
}

TEST_CASE("segment intersection includes touching and collinear overlap")
{
    CHECK(segments_intersect({0, 0}, {2, 2}, {0, 2}, {2, 0}));
    CHECK(segments_intersect({0, 0}, {1, 0}, {1, 0}, {2, 5}));
    CHECK(segments_intersect({0, 0}, {2, 0}, {1, 0}, {3, 0}));
    CHECK_FALSE(segments_intersect({0, 0}, {1, 0}, {2, 0}, {3, 0}));
    CHECK_FALSE(segments_intersect({0, 0}, {1, 1}, {0, 1}, {0.4, 0.6}));
}

TEST_CASE("segment against triangle agrees with the separating-axis oracle")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
        if (std::abs(orient(a, b, c)) < 1e-3) continue;
        const Point2 s0{u(rng), u(rng)}, s1{u(rng), u(rng)};
        INFO("trial " << trial);
        CHECK(segment_intersects_triangle(s0, s1, a, b, c) == support::convex_sets_meet({s0, s1}, {a, b, c}));
    }
}

TEST_CASE("point in polygon on an L shape")
{
    const std::vector<Point2> L{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
    CHECK(point_in_polygon({0.5, 0.5}, L));
    CHECK(point_in_polygon({0.5, 1.5}, L));
    CHECK_FALSE(point_in_polygon({1.5, 1.5}, L));
    CHECK_FALSE(point_in_polygon({3, 0.5}, L));
    CHECK(polygon_signed_area(L) == 3.0);
}

TEST_CASE("simple polygon detection")
{
    CHECK(polygon_is_simple(std::vector<Point2>{{0, 0}, {1, 0}, {0, 1}}));
    CHECK_FALSE(polygon_is_simple(std::vector<Point2>{{0, 0}, {1, 1}, {1, 0}, {0, 1}}));
    CHECK_FALSE(polygon_is_simple(std::vector<Point2>{{0, 0}, {2, 0}, {1, 0}}));
    CHECK_FALSE(polygon_is_simple(std::vector<Point2>{{0, 0}, {1, 0}}));
}

TEST_CASE("box expansion")
{
    Box2 b;
    CHECK(b.empty());
    CHECK(b.width() == 0.0);
    b.expand({1, 2});
    b.expand({-1, 5});
    CHECK(b.width() == 2.0);
    CHECK(b.height() == 3.0);
}
