#pragma once

// Plain-text dumps. All coordinates are written in pixel space (origin
// top-left, y down) so they overlay directly on the images.

#include <retarget/beltrami.hpp>
#include <retarget/clbs.hpp>
#include <retarget/mesh.hpp>
#include <retarget/regions.hpp>

#include <cstdio>
#include <ostream>
#include <span>

namespace retarget {

/// Two OBJ objects, "source" and "warped", sharing the face list.
/// Face indices are 1-based and global, as OBJ expects.
inline void write_mesh_obj(std::ostream& os, const Mesh& mesh, std::span<const Point2> warped, double target_height)
{
    char buf[96];
    auto emit = [&](const char* name, std::span<const Point2> pts, double height, std::size_t offset) {
        os << "o " << name << '\n';
        for (Point2 p : pts) {
            const Point2 q = math_to_pixel(p, height);
            std::snprintf(buf, sizeof buf, "v %.17g %.17g 0\n", q.x, q.y);
            os << buf;
        }
        for (const Face& f : mesh.faces)
            os << "f " << f[0] + 1 + offset << ' ' << f[1] + 1 + offset << ' ' << f[2] + 1 + offset << '\n';
    };
    emit("source", mesh.vertices, mesh.height, 0);
    emit("warped", warped, target_height, mesh.vertex_count());
}

/// "face rho tau abs" per face, mu = rho + i tau.
inline void write_mu_table(std::ostream& os, const BeltramiField& mu)
{
    char buf[128];
    os << "# face rho tau abs\n";
    for (std::size_t f = 0; f < mu.size(); ++f) {
        std::snprintf(buf, sizeof buf, "%zu %.17g %.17g %.17g\n", f, mu[f].real(), mu[f].imag(), std::abs(mu[f]));
        os << buf;
    }
}

/// The reduced PDE rows followed by the parameter equality rows.
inline void write_reduced_system(std::ostream& os, const ReducedSystem& red)
{
    os << "# equations\n";
    write_triplets(os, red.equations);
    os << "# equalities\n";
    write_triplets(os, red.equalities);
}

} // namespace retarget
