#pragma once

#include <retarget/beltrami.hpp>
#include <retarget/clbs.hpp>
#include <retarget/mesh.hpp>
#include <retarget/prescribe.hpp>
#include <retarget/regions.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

namespace support {

using namespace retarget;

// Square grid of cells x cells over [0,size]^2.
inline Mesh square_grid(double size, std::size_t cells)
{
    return build_regular_mesh(size, size, (cells + 1) * (cells + 1));
}

// Separating-axis test for two closed convex point sets (a segment counts
// as a degenerate polygon).
inline bool convex_sets_meet(const std::vector<Point2>& p, const std::vector<Point2>& q)
{
    auto axes_of = [](const std::vector<Point2>& poly, std::vector<Point2>& axes) {
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const Point2 e = poly[(i + 1) % poly.size()] - poly[i];
            if (e.x != 0.0 || e.y != 0.0) axes.push_back({-e.y, e.x});
        }
    };
    std::vector<Point2> axes;
    axes_of(p, axes);
    axes_of(q, axes);
    for (Point2 ax : axes) {
        double plo = INFINITY, phi = -INFINITY, qlo = INFINITY, qhi = -INFINITY;
        for (Point2 v : p) plo = std::min(plo, ax.x * v.x + ax.y * v.y), phi = std::max(phi, ax.x * v.x + ax.y * v.y);
        for (Point2 v : q) qlo = std::min(qlo, ax.x * v.x + ax.y * v.y), qhi = std::max(qhi, ax.x * v.x + ax.y * v.y);
        if (phi < qlo || qhi < plo) return false;
    }
    return true;
}

inline std::vector<Point2> triangle_of(const Mesh& m, std::size_t f)
{
    return {m.corner(f, 0), m.corner(f, 1), m.corner(f, 2)};
}

inline std::vector<Point2> rect(double x0, double y0, double x1, double y1)
{
    return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

// Solves the constant-mu scaling problem with no constraints.
inline WarpField solve_plain(const Mesh& mesh, Complex mu, double tw, double th, const SolveOptions& opt = {})
{
    BeltramiSystem sys = assemble_laplacian(mesh, coefficients_from_mu(BeltramiField(mesh.face_count(), mu)));
    sys = apply_boundary_conditions(std::move(sys), mesh, tw, th);
    return solve(sys, mesh, opt);
}

// Assembles, constrains and solves a labeled scene in one go.
inline WarpField solve_scene(const Mesh& mesh, const RegionModel& regions, const BeltramiField& mu, double tw,
                             double th, bool chessboard, const SolveOptions& opt = {})
{
    const ConstraintSet cs = build_constraints(mesh, regions, chessboard);
    BeltramiSystem sys = assemble_laplacian(mesh, coefficients_from_mu(clamp_mu(mu)));
    sys = apply_boundary_conditions(std::move(sys), mesh, tw, th);
    sys = augment_chessboard_constraints(std::move(sys), cs, mesh);
    sys = augment_deformation_constraints(std::move(sys), cs, mesh);
    return solve(sys, mesh, opt);
}

inline double max_position_error(const std::vector<Point2>& got, const Mesh& mesh, double sx, double sy)
{
    double err = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i)
        err = std::max({err, std::abs(got[i].x - sx * mesh.vertices[i].x), std::abs(got[i].y - sy * mesh.vertices[i].y)});
    return err;
}

} // namespace support
