#pragma once

#include <retarget/beltrami.hpp>
#include <retarget/clbs.hpp>
#include <retarget/errors.hpp>
#include <retarget/mesh.hpp>
#include <retarget/prescribe.hpp>
#include <retarget/raster.hpp>
#include <retarget/regions.hpp>

#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace retarget {

struct RetargetOptions {
    std::optional<double> ratio;  // target width / source width, height kept
    std::optional<int> width;     // explicit target size, used when ratio is unset
    std::optional<int> height;
    Choice choice = Choice::Even;
    bool chessboard = false;
    bool extremal = false;
    std::optional<double> beta;
    std::size_t mesh_vertices = 1500;
    bool keep_system = false;
};

struct TargetSize {
    double width = 0.0; // exact target rectangle handed to the solver
    double height = 0.0;
    int raster_width = 0;
    int raster_height = 0;
};

inline TargetSize target_size(double src_width, double src_height, const RetargetOptions& options)
{
    TargetSize t;
    if (options.ratio) {
        const double r = *options.ratio;
        if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidInput, "ratio must be positive");
        t.width = r * src_width;
        t.height = src_height;
        t.raster_width = static_cast<int>(std::lround(t.width));
        t.raster_height = static_cast<int>(std::lround(src_height));
        if (t.raster_width < 2) throw Error(ErrorCode::InvalidInput, "ratio leaves fewer than 2 pixels of width");
        return t;
    }
    if (!options.width || !options.height)
        throw Error(ErrorCode::InvalidInput, "give either a ratio or both target width and height");
    if (*options.width < 2 || *options.height < 2)
        throw Error(ErrorCode::InvalidInput, "explicit target dimensions must be at least 2 pixels");
    t.width = *options.width;
    t.height = *options.height;
    t.raster_width = *options.width;
    t.raster_height = *options.height;
    return t;
}

struct RetargetMetrics {
    double solve_ms = 0.0;
    double min_jacobian = 0.0;
    double max_abs_mu = 0.0;
    std::optional<double> object_scale;
    std::optional<ExtremalParams> extremal;
    bool rotated = false;
    double working_ratio = 1.0;
    double relative_residual = 0.0;
    std::vector<std::string> warnings;
};

/// Geometry of a retargeting job. The mesh lives in the source rectangle
/// and the warp in the target rectangle, both y up; face indices match the
/// working-frame region model and constraints.
struct RetargetPlan {
    Mesh mesh;
    WarpField warp;
    BeltramiField mu; // prescribed, after clamping
    RegionModel regions;
    ConstraintSet constraints;
    TargetSize target;
    RetargetMetrics metrics;
    std::optional<ReducedSystem> system; // set when keep_system is requested
};

namespace detail {

// Widening is handled by rotating 90 degrees counterclockwise:
// (x, y) -> (n - y, x) on the source and (n' - y', x') on the target.
struct Frame {
    bool rotated = false;
    double src_w = 0.0, src_h = 0.0; // original source rectangle
    double dst_w = 0.0, dst_h = 0.0; // original target rectangle

    Point2 source_in(Point2 p) const { return rotated ? Point2{src_h - p.y, p.x} : p; }
    Point2 source_out(Point2 p) const { return rotated ? Point2{p.y, src_h - p.x} : p; }
    Point2 target_out(Point2 p) const { return rotated ? Point2{p.y, dst_h - p.x} : p; }
};

} // namespace detail

inline RetargetPlan plan_retarget(double src_width, double src_height, const LabelSet& labels,
                                  const RetargetOptions& options)
{
    RetargetPlan plan;
    plan.target = target_size(src_width, src_height, options);

    detail::Frame frame{false, src_width, src_height, plan.target.width, plan.target.height};
    const double ratio = (plan.target.width / src_width) / (plan.target.height / src_height);
    frame.rotated = ratio > 1.0;
    const RetargetConfig config =
        RetargetConfig{ratio, options.choice, options.chessboard, Axis::Horizontal}.normalized();

    const double work_w = frame.rotated ? src_height : src_width;
    const double work_h = frame.rotated ? src_width : src_height;
    const double work_tw = frame.rotated ? plan.target.height : plan.target.width;
    const double work_th = frame.rotated ? plan.target.width : plan.target.height;

    Mesh work = build_regular_mesh(work_w, work_h, options.mesh_vertices);

    auto to_work = [&](const std::vector<Point2>& pts) {
        std::vector<Point2> out;
        out.reserve(pts.size());
        for (Point2 p : pts) out.push_back(frame.source_in(pixel_to_math(p, src_height)));
        return out;
    };
    std::vector<std::vector<Point2>> polygons, polylines;
    for (const auto& poly : labels.object_polygons) polygons.push_back(to_work(poly));
    for (const auto& line : labels.line_polylines) polylines.push_back(to_work(line));
    plan.regions = build_region_model(work, polygons, polylines);

    const Prescription prescription =
        prescribe(config, plan.regions, work_w, work_h, ExtremalRequest{options.extremal, options.beta});
    plan.mu = clamp_mu(prescription.mu);
    plan.constraints = build_constraints(work, plan.regions, options.chessboard);

    const auto t0 = std::chrono::steady_clock::now();
    BeltramiSystem sys = assemble_laplacian(work, coefficients_from_mu(plan.mu));
    sys = apply_boundary_conditions(std::move(sys), work, work_tw, work_th);
    sys = augment_chessboard_constraints(std::move(sys), plan.constraints, work);
    sys = augment_deformation_constraints(std::move(sys), plan.constraints, work);
    plan.warp = solve(sys, work);
    const auto t1 = std::chrono::steady_clock::now();
    if (options.keep_system) plan.system = reduce(sys);

    plan.mesh = work;
    plan.mesh.width = src_width;
    plan.mesh.height = src_height;
    if (frame.rotated) {
        std::swap(plan.mesh.cols, plan.mesh.rows);
        for (Point2& v : plan.mesh.vertices) v = frame.source_out(v);
        for (Point2& p : plan.warp.positions) p = frame.target_out(p);
        plan.mesh.retag();
    }
    plan.warp.target_width = plan.target.width;
    plan.warp.target_height = plan.target.height;

    RetargetMetrics& m = plan.metrics;
    m.solve_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    m.min_jacobian = plan.warp.report.min_jacobian;
    m.max_abs_mu = max_abs(plan.mu);
    m.object_scale = plan.warp.parameter("r_o");
    if (!m.object_scale) m.object_scale = plan.warp.parameter("chessboard.r");
    m.extremal = prescription.extremal;
    m.rotated = frame.rotated;
    m.working_ratio = config.w;
    m.relative_residual = plan.warp.report.relative_residual;
    m.warnings = plan.warp.report.warnings;
    return plan;
}

/// Resamples the source through a plan into a raster of the given size.
inline RasterImage render(const RasterImage& src, const RetargetPlan& plan, int raster_width, int raster_height)
{
    const PiecewiseAffineMap map =
        build_inverse_map(plan.mesh, plan.warp.positions, plan.target.width, plan.target.height);
    return resample(src, map, raster_width, raster_height);
}

struct RetargetResult {
    RetargetPlan plan;
    RasterImage image;
};

inline RetargetResult retarget_image(const RasterImage& src, const LabelSet& labels, const RetargetOptions& options)
{
    RetargetResult out;
    out.plan = plan_retarget(src.width, src.height, labels, options);
    out.image = render(src, out.plan, out.plan.target.raster_width, out.plan.target.raster_height);
    return out;
}

} // namespace retarget
