#pragma once

// Invariant suite shared by the acceptance runner and `retarget --seed-check`.

#include <retarget/beltrami.hpp>
#include <retarget/clbs.hpp>
#include <retarget/mesh.hpp>
#include <retarget/pipeline.hpp>
#include <retarget/prescribe.hpp>
#include <retarget/raster.hpp>
#include <retarget/regions.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace retarget::selfcheck {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Grid mesh with interior vertices moved by up to `jitter` of a cell.
inline Mesh jittered_mesh(std::mt19937_64& rng, double width, double height, std::size_t target, double jitter)
{
    Mesh mesh = build_regular_mesh(width, height, target);
    const double cw = width / static_cast<double>(mesh.cols);
    const double ch = height / static_cast<double>(mesh.rows);
    std::uniform_real_distribution<double> u(-jitter, jitter);
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
        if (mesh.tags[i] != BoundaryTag::Interior) continue;
        mesh.vertices[i].x += u(rng) * cw;
        mesh.vertices[i].y += u(rng) * ch;
    }
    return mesh;
}

/// A dome-like object in the middle of the frame, optionally with a
/// horizontal line bottom left and a vertical line on the right, both
/// clear of the object's stripes. Pixel coordinates.
inline LabelSet demo_scene(double width, double height, bool with_lines = true)
{
    const double cx = 0.5 * width, cy = 0.45 * height;
    const double rx = width / 6.0, ry = height / 5.0;
    std::vector<Point2> octagon;
    for (int k = 0; k < 8; ++k) {
        const double t = 2.0 * std::acos(-1.0) * (k + 0.5) / 8.0;
        octagon.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
    }
    LabelSet labels;
    labels.object_polygons.push_back(std::move(octagon));
    if (with_lines) {
        labels.line_polylines.push_back({{0.04 * width, 0.85 * height}, {0.28 * width, 0.85 * height}});
        labels.line_polylines.push_back({{0.9 * width, 0.1 * height}, {0.9 * width, 0.9 * height}});
    }
    return labels;
}

inline RasterImage noise_image(std::mt19937_64& rng, int width, int height, int channels = 3)
{
    RasterImage img(width, height, channels);
    std::uniform_int_distribution<int> u(0, 255);
    for (auto& px : img.data) px = static_cast<std::uint8_t>(u(rng));
    return img;
}

namespace detail {

inline std::string sci(double v)
{
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

inline CheckResult guarded(const std::string& name, const std::function<CheckResult()>& body)
{
    try {
        return body();
    } catch (const std::exception& e) {
        return {name, false, std::string("threw: ") + e.what()};
    }
}

inline std::vector<Point2> random_warp(std::mt19937_64& rng, const Mesh& mesh)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Point2> w(mesh.vertex_count());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = {mesh.vertices[i].x + 0.3 * u(rng), mesh.vertices[i].y + 0.3 * u(rng)};
    return w;
}

/// Forward image of p under the piecewise-linear map, searching only `faces`.
inline std::optional<Point2> map_point(const Mesh& mesh, const std::vector<FaceLinearPart>& parts,
                                       const FaceSet& faces, Point2 p)
{
    for (std::size_t f : faces) {
        if (!point_in_triangle(p, mesh.corner(f, 0), mesh.corner(f, 1), mesh.corner(f, 2))) continue;
        const FaceLinearPart& q = parts[f];
        return Point2{q.a * p.x + q.b * p.y + q.r, q.c * p.x + q.d * p.y + q.s};
    }
    return std::nullopt;
}

} // namespace detail

/// max |Div(-d, c)| and |Div(-b, a)| over interior vertices of random
/// meshes under random warps.
inline CheckResult divergence_identities(std::uint64_t seed, int meshes = 50)
{
    const std::string name = "divergence identities";
    return detail::guarded(name, [&] {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> size(2.0, 8.0);
        std::uniform_int_distribution<int> count(9, 400);
        double worst = 0.0;
        for (int t = 0; t < meshes; ++t) {
            const Mesh mesh = jittered_mesh(rng, size(rng), size(rng), static_cast<std::size_t>(count(rng)), 0.2);
            const auto grads = face_gradients(mesh);
            const auto warp = detail::random_warp(rng, mesh);
            const auto parts = face_linear_parts(mesh, grads, warp);
            std::vector<double> a, b, c, d, nb, nd;
            for (const auto& p : parts) {
                a.push_back(p.a), b.push_back(p.b), c.push_back(p.c), d.push_back(p.d);
                nb.push_back(-p.b), nd.push_back(-p.d);
            }
            const auto div1 = divergence(mesh, grads, nd, c);
            const auto div2 = divergence(mesh, grads, nb, a);
            for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
                if (mesh.tags[i] != BoundaryTag::Interior) continue;
                worst = std::max({worst, std::abs(div1[i]), std::abs(div2[i])});
            }
        }
        return CheckResult{name, worst <= 1e-12, "max residual " + detail::sci(worst) + " (tol 1e-12)"};
    });
}

/// Measured mu of (a x, b y) against (a - b) / (a + b).
inline CheckResult beltrami_oracle(std::uint64_t seed, int pairs = 20)
{
    const std::string name = "beltrami oracle";
    return detail::guarded(name, [&] {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> scale(0.05, 4.0);
        double worst = 0.0;
        for (int t = 0; t < pairs; ++t) {
            const double a = scale(rng), b = scale(rng);
            const Mesh mesh = jittered_mesh(rng, 3.0, 2.0, 60, 0.2);
            std::vector<Point2> warp;
            for (Point2 p : mesh.vertices) warp.push_back({a * p.x, b * p.y});
            const Complex expected((a - b) / (a + b), 0.0);
            for (const Complex& mu : beltrami_of_map(mesh, warp)) worst = std::max(worst, std::abs(mu - expected));
        }
        return CheckResult{name, worst <= 1e-12, "max |mu - (a-b)/(a+b)| " + detail::sci(worst) + " (tol 1e-12)"};
    });
}

/// Constant mu = (w-1)/(w+1) without constraints reproduces (w x, y).
inline CheckResult scaling_reproduction(double m = 615.0, double n = 461.0, std::size_t vertices = 1500)
{
    const std::string name = "scaling reproduction";
    return detail::guarded(name, [&] {
        const Mesh mesh = build_regular_mesh(m, n, vertices);
        double worst = 0.0;
        for (double w : {0.75, 0.5, 0.25}) {
            const BeltramiField mu(mesh.face_count(), scaling_mu(w, 1.0));
            BeltramiSystem sys = assemble_laplacian(mesh, coefficients_from_mu(mu));
            sys = apply_boundary_conditions(std::move(sys), mesh, w * m, n);
            const WarpField warp = solve(sys, mesh);
            for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
                const Point2 p = mesh.vertices[i], q = warp.positions[i];
                worst = std::max({worst, std::abs(q.x - w * p.x), std::abs(q.y - p.y)});
            }
        }
        return CheckResult{name, worst <= 1e-8 * m,
                           "max error " + detail::sci(worst) + " px (tol " + detail::sci(1e-8 * m) + ")"};
    });
}

/// Minimum face Jacobian across choices, chessboard on/off and ratios
/// 0.75/0.5/0.25 on the object scene (0.25 runs in extremal mode for
/// Choices 2 and 3), plus the scene with background lines at 0.75 and 0.5.
inline CheckResult bijectivity(double m = 600.0, double n = 450.0, std::size_t vertices = 1500)
{
    const std::string name = "bijectivity";
    return detail::guarded(name, [&] {
        double worst = std::numeric_limits<double>::infinity();
        std::string worst_case, failures;
        int runs = 0, extremal_runs = 0;
        auto run = [&](const LabelSet& labels, const char* scene, Choice choice, bool chessboard, double ratio) {
            std::ostringstream tag;
            tag << scene << ":" << to_string(choice) << (chessboard ? "+chessboard" : "") << "@" << ratio;
            RetargetOptions opt;
            opt.ratio = ratio;
            opt.choice = choice;
            opt.chessboard = chessboard;
            opt.mesh_vertices = vertices;
            try {
                const RetargetPlan plan = plan_retarget(m, n, labels, opt);
                ++runs;
                if (plan.metrics.extremal) ++extremal_runs;
                const double j = min_jacobian(plan.mesh, plan.warp.positions);
                if (j < worst) worst = j, worst_case = tag.str();
            } catch (const std::exception& e) {
                failures += (failures.empty() ? "" : "; ") + tag.str() + ": " + e.what();
            }
        };
        const LabelSet objects = demo_scene(m, n, false);
        const LabelSet with_lines = demo_scene(m, n, true);
        for (Choice choice : {Choice::Even, Choice::Weak, Choice::Strong}) {
            for (bool chessboard : {false, true}) {
                for (double ratio : {0.75, 0.5, 0.25}) run(objects, "objects", choice, chessboard, ratio);
                for (double ratio : {0.75, 0.5}) run(with_lines, "lines", choice, chessboard, ratio);
            }
        }
        std::ostringstream detail;
        detail << runs << " scenarios (" << extremal_runs << " extremal), min Jacobian " << worst << " at "
               << worst_case;
        if (!failures.empty()) detail << "; failed: " << failures;
        return CheckResult{name, failures.empty() && extremal_runs > 0 && worst > 0.0, detail.str()};
    });
}

/// Choice 1, one object, ratio 0.75: the object moves by a uniform scaling.
inline CheckResult object_rigidity(double m = 615.0, double n = 461.0, std::size_t vertices = 1500)
{
    const std::string name = "object rigidity";
    return detail::guarded(name, [&] {
        const LabelSet labels = demo_scene(m, n, false);
        RetargetOptions opt;
        opt.ratio = 0.75;
        opt.mesh_vertices = vertices;
        const RetargetPlan plan = plan_retarget(m, n, labels, opt);
        const auto parts = face_linear_parts(plan.mesh, plan.warp.positions);
        const FaceSet& faces = plan.regions.object_faces.at(0);
        double worst = 0.0, a_min = std::numeric_limits<double>::infinity(), a_max = -a_min;
        for (std::size_t f : faces) {
            const auto& p = parts[f];
            worst = std::max({worst, std::abs(p.a - p.d), std::abs(p.b), std::abs(p.c)});
            a_min = std::min(a_min, p.a), a_max = std::max(a_max, p.a);
        }
        const double spread = a_max - a_min;
        return CheckResult{name, !faces.empty() && worst <= 1e-8 && spread <= 1e-8,
                           std::to_string(faces.size()) + " faces, max(|a-d|,|b|,|c|) " + detail::sci(worst)
                               + ", spread of a " + detail::sci(spread) + ", scale " + std::to_string(a_min)
                               + " (tol 1e-8)"};
    });
}

/// With chessboard constraints at ratio 0.75, horizontal segments across M_h
/// keep a single v and vertical segments across M_v keep a single u.
inline CheckResult chessboard_lines(std::uint64_t seed, double m = 615.0, double n = 461.0,
                                    std::size_t vertices = 1500, int segments = 40)
{
    const std::string name = "chessboard";
    return detail::guarded(name, [&] {
        std::mt19937_64 rng(seed);
        const LabelSet labels = demo_scene(m, n, false);
        RetargetOptions opt;
        opt.ratio = 0.75;
        opt.chessboard = true;
        opt.choice = Choice::Weak;
        opt.mesh_vertices = vertices;
        const RetargetPlan plan = plan_retarget(m, n, labels, opt);
        const auto parts = face_linear_parts(plan.mesh, plan.warp.positions);
        const Mesh& mesh = plan.mesh;
        const FaceSet& mh = plan.regions.stripe_h;
        const FaceSet& mv = plan.regions.stripe_v;
        if (mh.empty() || mv.empty()) return CheckResult{name, false, "stripes are empty"};

        const Box2 hb = faces_box(mesh, mh), vb = faces_box(mesh, mv);
        std::uniform_real_distribution<double> uy(hb.lo.y, hb.hi.y), ux(vb.lo.x, vb.hi.x);
        double h_spread = 0.0, v_spread = 0.0;
        int missed = 0;
        for (int s = 0; s < segments; ++s) {
            const double y = uy(rng), x = ux(rng);
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            double lo2 = lo, hi2 = hi;
            for (int k = 0; k <= 32; ++k) {
                const double t = k / 32.0;
                if (auto q = detail::map_point(mesh, parts, mh, {hb.lo.x + t * hb.width(), y})) {
                    lo = std::min(lo, q->y), hi = std::max(hi, q->y);
                } else {
                    ++missed;
                }
                if (auto q = detail::map_point(mesh, parts, mv, {x, vb.lo.y + t * vb.height()})) {
                    lo2 = std::min(lo2, q->x), hi2 = std::max(hi2, q->x);
                } else {
                    ++missed;
                }
            }
            h_spread = std::max(h_spread, hi - lo);
            v_spread = std::max(v_spread, hi2 - lo2);
        }
        const bool ok = missed == 0 && h_spread <= 1e-8 * n && v_spread <= 1e-8 * plan.target.width;
        return CheckResult{name, ok,
                           "v spread " + detail::sci(h_spread) + " (tol " + detail::sci(1e-8 * n) + "), u spread "
                               + detail::sci(v_spread) + " (tol " + detail::sci(1e-8 * plan.target.width) + ")"
                               + (missed ? ", " + std::to_string(missed) + " samples outside stripes" : "")};
    });
}

/// Ratio 1 with labels leaves vertices in place and pixels untouched.
inline CheckResult identity(std::uint64_t seed, int m = 320, int n = 240, std::size_t vertices = 1500)
{
    const std::string name = "identity idempotence";
    return detail::guarded(name, [&] {
        std::mt19937_64 rng(seed);
        const RasterImage src = noise_image(rng, m, n);
        const LabelSet labels = demo_scene(m, n);
        double worst = 0.0;
        bool same = true;
        for (bool chessboard : {false, true}) {
            RetargetOptions opt;
            opt.ratio = 1.0;
            opt.chessboard = chessboard;
            opt.mesh_vertices = vertices;
            const RetargetResult res = retarget_image(src, labels, opt);
            for (std::size_t i = 0; i < res.plan.mesh.vertex_count(); ++i) {
                const Point2 d = res.plan.warp.positions[i] - res.plan.mesh.vertices[i];
                worst = std::max({worst, std::abs(d.x), std::abs(d.y)});
            }
            same = same && res.image == src;
        }
        return CheckResult{name, worst <= 1e-8 && same,
                           "max displacement " + detail::sci(worst) + " (tol 1e-8), image "
                               + (same ? "bit-identical" : "differs")};
    });
}

/// Assemble and solve on a 1500-vertex mesh, heaviest configuration.
inline CheckResult performance(double m = 615.0, double n = 461.0, std::size_t vertices = 1500)
{
    const std::string name = "performance";
    return detail::guarded(name, [&] {
        const LabelSet labels = demo_scene(m, n);
        double worst_ms = 0.0;
        std::size_t count = 0;
        for (bool chessboard : {false, true}) {
            RetargetOptions opt;
            opt.ratio = 0.5;
            opt.choice = Choice::Weak;
            opt.chessboard = chessboard;
            opt.mesh_vertices = vertices;
            const RetargetPlan plan = plan_retarget(m, n, labels, opt);
            worst_ms = std::max(worst_ms, plan.metrics.solve_ms);
            count = plan.mesh.vertex_count();
        }
        std::ostringstream os;
        os << count << " vertices, slowest assemble+solve " << worst_ms << " ms (limit 3000 ms)";
        return CheckResult{name, count >= vertices && worst_ms <= 3000.0, os.str()};
    });
}

/// 615x461 at 0.75 gives 461x461; 600x450 at 0.5 gives 300x450.
inline CheckResult dimension_fidelity(std::uint64_t seed)
{
    const std::string name = "dimension fidelity";
    return detail::guarded(name, [&] {
        std::mt19937_64 rng(seed);
        std::ostringstream os;
        bool ok = true;
        const struct {
            int w, h;
            double ratio;
            int ew, eh;
        } cases[] = {{615, 461, 0.75, 461, 461}, {600, 450, 0.5, 300, 450}};
        for (const auto& c : cases) {
            const RasterImage src = noise_image(rng, c.w, c.h);
            RetargetOptions opt;
            opt.ratio = c.ratio;
            const RetargetResult res = retarget_image(src, demo_scene(c.w, c.h), opt);
            ok = ok && res.image.width == c.ew && res.image.height == c.eh;
            os << (os.tellp() > 0 ? ", " : "") << c.w << "x" << c.h << "@" << c.ratio << " -> " << res.image.width
               << "x" << res.image.height;
        }
        return CheckResult{name, ok, os.str()};
    });
}

inline std::vector<CheckResult> run_all(std::uint64_t seed)
{
    return {
        divergence_identities(seed),
        beltrami_oracle(seed + 1),
        scaling_reproduction(),
        bijectivity(),
        object_rigidity(),
        chessboard_lines(seed + 2),
        identity(seed + 3),
        performance(),
        dimension_fidelity(seed + 4),
    };
}

} // namespace retarget::selfcheck
