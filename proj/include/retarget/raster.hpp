#pragma once

#include <retarget/beltrami.hpp>
#include <retarget/errors.hpp>
#include <retarget/geometry.hpp>
#include <retarget/mesh.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace retarget {

/// Row-major 8-bit raster with 1, 3 or 4 interleaved channels.
struct RasterImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> data;

    RasterImage() = default;
    RasterImage(int w, int h, int c)
        : width(w)
        , height(h)
        , channels(c)
        , data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), 0)
    {
        if (w <= 0 || h <= 0) throw Error(ErrorCode::InvalidInput, "raster dimensions must be positive");
        if (c != 1 && c != 3 && c != 4) throw Error(ErrorCode::InvalidInput, "raster must have 1, 3 or 4 channels");
    }

    std::size_t index(int x, int y, int c) const
    {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x))
                * static_cast<std::size_t>(channels)
            + static_cast<std::size_t>(c);
    }

    std::uint8_t at(int x, int y, int c) const { return data[index(x, y, c)]; }
    std::uint8_t& at(int x, int y, int c) { return data[index(x, y, c)]; }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;
};

struct Affine2 {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
    double tx = 0.0, ty = 0.0;

    Point2 operator()(Point2 p) const { return {a * p.x + b * p.y + tx, c * p.x + d * p.y + ty}; }
};

/// The warp as a set of per-face affine inverses (target -> source) with a
/// uniform grid over the target rectangle for point location.
struct PiecewiseAffineMap {
    Mesh source;
    std::vector<Point2> target;
    std::vector<Affine2> forward;
    std::vector<Affine2> inverse;
    double target_width = 0.0;
    double target_height = 0.0;

    std::size_t grid_cols = 1;
    std::size_t grid_rows = 1;
    std::vector<std::vector<std::size_t>> grid;

    std::size_t cell_of(double v, double extent, std::size_t cells) const
    {
        const double t = std::floor(v / extent * static_cast<double>(cells));
        return static_cast<std::size_t>(std::clamp(t, 0.0, static_cast<double>(cells - 1)));
    }

    /// First face (in index order) whose warped triangle contains p.
    std::optional<std::size_t> locate(Point2 p) const
    {
        const std::size_t cx = cell_of(p.x, target_width, grid_cols);
        const std::size_t cy = cell_of(p.y, target_height, grid_rows);
        const double tol = 1e-9 * std::max(target_width, target_height);
        for (std::size_t f : grid[cy * grid_cols + cx]) {
            const Point2 a = target[source.faces[f][0]];
            const Point2 b = target[source.faces[f][1]];
            const Point2 c = target[source.faces[f][2]];
            const double scale = std::max({std::hypot(b.x - a.x, b.y - a.y), std::hypot(c.x - b.x, c.y - b.y),
                                           std::hypot(a.x - c.x, a.y - c.y)});
            const double eps = -tol * scale;
            if (orient(a, b, p) >= eps && orient(b, c, p) >= eps && orient(c, a, p) >= eps) return f;
        }
        return std::nullopt;
    }

    Point2 to_source(std::size_t face, Point2 p) const { return inverse[face](p); }
};

inline PiecewiseAffineMap build_inverse_map(const Mesh& mesh, std::span<const Point2> warp, double target_width,
                                            double target_height)
{
    if (!(target_width > 0.0) || !(target_height > 0.0))
        throw Error(ErrorCode::InvalidInput, "target dimensions must be positive");
    PiecewiseAffineMap map;
    map.source = mesh;
    map.target.assign(warp.begin(), warp.end());
    map.target_width = target_width;
    map.target_height = target_height;
    const auto parts = face_linear_parts(mesh, warp);
    map.forward.resize(parts.size());
    map.inverse.resize(parts.size());
    std::vector<std::size_t> folded;
    for (std::size_t f = 0; f < parts.size(); ++f) {
        const FaceLinearPart& p = parts[f];
        map.forward[f] = {p.a, p.b, p.c, p.d, p.r, p.s};
        const double det = p.determinant();
        if (!(det > 0.0)) {
            folded.push_back(f);
            continue;
        }
        Affine2 inv{p.d / det, -p.b / det, -p.c / det, p.a / det, 0.0, 0.0};
        inv.tx = -(inv.a * p.r + inv.b * p.s);
        inv.ty = -(inv.c * p.r + inv.d * p.s);
        map.inverse[f] = inv;
    }
    if (!folded.empty()) {
        const std::string message = std::to_string(folded.size()) + " warped faces are not invertible";
        throw FoldoverError(message, std::move(folded));
    }

    const double cells = std::max(1.0, std::sqrt(static_cast<double>(mesh.face_count()) / 2.0));
    const double aspect = target_width / target_height;
    map.grid_cols = static_cast<std::size_t>(std::max(1.0, std::round(cells * std::sqrt(aspect))));
    map.grid_rows = static_cast<std::size_t>(std::max(1.0, std::round(cells / std::sqrt(aspect))));
    map.grid.assign(map.grid_cols * map.grid_rows, {});
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        Box2 box;
        for (std::size_t v : mesh.faces[f]) box.expand(map.target[v]);
        const std::size_t x0 = map.cell_of(box.lo.x, target_width, map.grid_cols);
        const std::size_t x1 = map.cell_of(box.hi.x, target_width, map.grid_cols);
        const std::size_t y0 = map.cell_of(box.lo.y, target_height, map.grid_rows);
        const std::size_t y1 = map.cell_of(box.hi.y, target_height, map.grid_rows);
        for (std::size_t y = y0; y <= y1; ++y)
            for (std::size_t x = x0; x <= x1; ++x) map.grid[y * map.grid_cols + x].push_back(f);
    }
    return map;
}

namespace detail {

inline void sample_bilinear(const RasterImage& src, double sx, double sy, std::uint8_t* out)
{
    sx = std::clamp(sx, 0.0, static_cast<double>(src.width - 1));
    sy = std::clamp(sy, 0.0, static_cast<double>(src.height - 1));
    const int x0 = static_cast<int>(std::floor(sx));
    const int y0 = static_cast<int>(std::floor(sy));
    const int x1 = std::min(x0 + 1, src.width - 1);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double tx = sx - x0, ty = sy - y0;
    for (int c = 0; c < src.channels; ++c) {
        const double top = (1.0 - tx) * src.at(x0, y0, c) + tx * src.at(x1, y0, c);
        const double bottom = (1.0 - tx) * src.at(x0, y1, c) + tx * src.at(x1, y1, c);
        const double v = (1.0 - ty) * top + ty * bottom;
        out[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
}

} // namespace detail

/// Inverse-maps every target pixel center through the warp and samples the
/// source bilinearly with edge clamping. The raster may be smaller or
/// larger than the warp's target rectangle; pixel centers are scaled onto it.
inline RasterImage resample(const RasterImage& src, const PiecewiseAffineMap& map, int out_width, int out_height,
                            unsigned threads = 0)
{
    if (src.width <= 0 || src.height <= 0) throw Error(ErrorCode::InvalidInput, "source raster is empty");
    if (std::abs(map.source.width - src.width) > 1e-9 || std::abs(map.source.height - src.height) > 1e-9)
        throw Error(ErrorCode::InvalidInput, "source raster does not match the mesh rectangle");
    RasterImage out(out_width, out_height, src.channels);
    const double sx = map.target_width / out_width;
    const double sy = map.target_height / out_height;
    const double src_h = map.source.height;

    std::vector<std::string> failures;
    auto run_rows = [&](int y_begin, int y_end, std::string& failure) {
        for (int py = y_begin; py < y_end; ++py) {
            for (int px = 0; px < out_width; ++px) {
                const Point2 t{(px + 0.5) * sx, map.target_height - (py + 0.5) * sy};
                const auto face = map.locate(t);
                if (!face) {
                    if (failure.empty())
                        failure = "target pixel (" + std::to_string(px) + "," + std::to_string(py)
                            + ") lies outside every warped face";
                    continue;
                }
                const Point2 s = map.to_source(*face, t);
                detail::sample_bilinear(src, s.x - 0.5, (src_h - s.y) - 0.5, &out.data[out.index(px, py, 0)]);
            }
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(out_height));
    failures.resize(threads);
    {
        std::vector<std::jthread> pool;
        const int chunk = (out_height + static_cast<int>(threads) - 1) / static_cast<int>(threads);
        for (unsigned t = 0; t < threads; ++t) {
            const int y0 = static_cast<int>(t) * chunk;
            const int y1 = std::min(out_height, y0 + chunk);
            if (y0 >= y1) break;
            pool.emplace_back([&, y0, y1, t] { run_rows(y0, y1, failures[t]); });
        }
    }
    for (const std::string& f : failures)
        if (!f.empty()) throw Error(ErrorCode::Foldover, f);
    return out;
}

} // namespace retarget
