#include <retarget/raster.hpp>
#include <retarget/selfcheck.hpp>

#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace retarget;
using Catch::Approx;

namespace {

std::vector<Point2> scaled(const Mesh& m, double sx, double sy)
{
    std::vector<Point2> out;
    for (Point2 p : m.vertices) out.push_back({sx * p.x, sy * p.y});
    return out;
}

RasterImage vertical_stripes(int width, int height, int stripe)
{
    RasterImage img(width, height, 1);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) img.at(x, y, 0) = (x / stripe) % 2 ? 255 : 0;
    return img;
}

std::vector<int> run_lengths(const RasterImage& img, int row)
{
    std::vector<int> runs{1};
    for (int x = 1; x < img.width; ++x) {
        const bool same = (img.at(x, row, 0) >= 128) == (img.at(x - 1, row, 0) >= 128);
        if (same) ++runs.back();
        else runs.push_back(1);
    }
    return runs;
}

} // namespace

TEST_CASE("identity inverse map")
{
    const Mesh m = build_regular_mesh(30, 20, 100);
    const PiecewiseAffineMap map = build_inverse_map(m, m.vertices, 30, 20);
    for (const Affine2& a : map.inverse) {
        CHECK(a.a == Approx(1.0));
        CHECK(std::abs(a.b) < 1e-12);
        CHECK(std::abs(a.c) < 1e-12);
        CHECK(a.d == Approx(1.0));
        CHECK(std::abs(a.tx) < 1e-9);
        CHECK(std::abs(a.ty) < 1e-9);
    }
}

TEST_CASE("uniform scale inverts to 1/w")
{
    const Mesh m = build_regular_mesh(30, 20, 100);
    const PiecewiseAffineMap map = build_inverse_map(m, scaled(m, 0.5, 1), 15, 20);
    for (const Affine2& a : map.inverse) {
        CHECK(a.a == Approx(2.0));
        CHECK(a.d == Approx(1.0));
    }
    for (std::size_t f = 0; f < m.face_count(); ++f) {
        const Point2 c = m.centroid(f);
        const auto hit = map.locate({c.x / 2, c.y});
        REQUIRE(hit.has_value());
        const Point2 back = map.to_source(*hit, {c.x / 2, c.y});
        CHECK(back.x == Approx(c.x));
        CHECK(back.y == Approx(c.y));
    }
}

TEST_CASE("folded warps are rejected with the face list")
{
    const Mesh m = build_regular_mesh(4, 4, 9);
    std::vector<Point2> warp = m.vertices;
    warp[4] = {5, 5};
    try {
        build_inverse_map(m, warp, 4, 4);
        FAIL("expected a foldover");
    } catch (const FoldoverError& e) {
        CHECK_FALSE(e.faces().empty());
        CHECK(std::string(e.what()).find(std::to_string(e.faces().size())) == 0);
    }
}

TEST_CASE("identity warp reproduces the source bit-exactly")
{
    std::mt19937_64 rng(31);
    for (int channels : {1, 3, 4}) {
        const RasterImage src = selfcheck::noise_image(rng, 57, 41, channels);
        const Mesh m = build_regular_mesh(57, 41, 500);
        const RasterImage out = resample(src, build_inverse_map(m, m.vertices, 57, 41), 57, 41);
        CHECK(out == src);
    }
}

TEST_CASE("constant color survives any bijective warp")
{
    RasterImage src(64, 48, 3);
    for (std::size_t i = 0; i < src.data.size(); i += 3) src.data[i] = 10, src.data[i + 1] = 200, src.data[i + 2] = 77;
    const Mesh m = build_regular_mesh(64, 48, 300);
    const WarpField f = support::solve_plain(m, scaling_mu(0.6, 1), 0.6 * 64, 48);
    const RasterImage out = resample(src, build_inverse_map(m, f.positions, 0.6 * 64, 48), 38, 48);
    for (std::size_t i = 0; i < out.data.size(); i += 3) {
        CHECK(out.data[i] == 10);
        CHECK(out.data[i + 1] == 200);
        CHECK(out.data[i + 2] == 77);
    }
}

TEST_CASE("2x horizontal shrink halves stripe widths")
{
    const RasterImage src = vertical_stripes(64, 16, 8);
    const Mesh m = build_regular_mesh(64, 16, 200);
    const RasterImage out = resample(src, build_inverse_map(m, scaled(m, 0.5, 1), 32, 16), 32, 16);
    for (int row = 0; row < out.height; ++row) {
        const auto runs = run_lengths(out, row);
        CHECK(runs.size() == run_lengths(src, row).size());
        for (int r : runs) CHECK(std::abs(r - 4) <= 1);
    }
}

TEST_CASE("thread count does not change the output")
{
    std::mt19937_64 rng(32);
    const RasterImage src = selfcheck::noise_image(rng, 80, 60);
    const Mesh m = build_regular_mesh(80, 60, 400);
    const WarpField f = support::solve_plain(m, scaling_mu(0.7, 1), 56, 60);
    const PiecewiseAffineMap map = build_inverse_map(m, f.positions, 56, 60);
    CHECK(resample(src, map, 56, 60, 1) == resample(src, map, 56, 60, 7));
}

TEST_CASE("resampling composes with an affine squeeze within one level")
{
    // A gradient image squeezed by 0.5 matches sampling the gradient at the
    // mapped-back pixel centers.
    RasterImage src(100, 10, 1);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 100; ++x) src.at(x, y, 0) = static_cast<std::uint8_t>(2 * x + y);
    const Mesh m = build_regular_mesh(100, 10, 200);
    const RasterImage out = resample(src, build_inverse_map(m, scaled(m, 0.5, 1), 50, 10), 50, 10);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 50; ++x) {
            const double sx = 2.0 * (x + 0.5) - 0.5;
            CHECK(std::abs(out.at(x, y, 0) - (2.0 * sx + y)) <= 1.0);
        }
}

TEST_CASE("raster and mesh must agree")
{
    const Mesh m = build_regular_mesh(10, 10, 25);
    const RasterImage src(12, 10, 1);
    CHECK_THROWS_AS(resample(src, build_inverse_map(m, m.vertices, 10, 10), 10, 10), Error);
    CHECK_THROWS_AS(RasterImage(0, 3, 1), Error);
    CHECK_THROWS_AS(RasterImage(3, 3, 2), Error);
}
