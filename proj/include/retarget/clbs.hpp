#pragma once

// Constrained Linear Beltrami Solver: discretizes div(A grad f) = 0 for a
// prescribed Beltrami field, pins f(boundary) to the target rectangle, and
// substitutes rigid/axis-scaling forms on labeled regions whose scale and
// translation parameters become extra unknowns.

#include <retarget/beltrami.hpp>
#include <retarget/errors.hpp>
#include <retarget/mesh.hpp>
#include <retarget/regions.hpp>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace retarget {

/// Coefficient triplets plus right-hand side.
struct SparseSystem {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<double> rhs;

    Eigen::SparseMatrix<double> matrix() const
    {
        Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        m.setFromTriplets(triplets.begin(), triplets.end());
        return m;
    }

    /// Sums duplicate entries and orders triplets by (row, col).
    void finalize()
    {
        Eigen::SparseMatrix<double, Eigen::RowMajor> m(static_cast<Eigen::Index>(rows),
                                                       static_cast<Eigen::Index>(cols));
        m.setFromTriplets(triplets.begin(), triplets.end());
        triplets.clear();
        for (Eigen::Index r = 0; r < m.outerSize(); ++r)
            for (decltype(m)::InnerIterator it(m, r); it; ++it)
                triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
};

/// "row col value" lines, then "rhs row value" lines.
inline void write_triplets(std::ostream& os, const SparseSystem& sys)
{
    SparseSystem s = sys;
    s.finalize();
    char buf[96];
    os << "# rows " << s.rows << " cols " << s.cols << " nonzeros " << s.triplets.size() << '\n';
    for (const auto& t : s.triplets) {
        std::snprintf(buf, sizeof buf, "%d %d %.17g\n", t.row(), t.col(), t.value());
        os << buf;
    }
    for (std::size_t r = 0; r < s.rhs.size(); ++r) {
        std::snprintf(buf, sizeof buf, "rhs %zu %.17g\n", r, s.rhs[r]);
        os << buf;
    }
}

enum class Coord : std::size_t { U = 0, V = 1 };

/// coordinate = constant + sum coef * parameter
struct Substitution {
    struct Term {
        std::size_t param;
        double coef;
    };
    std::vector<Term> terms;
    double constant = 0.0;
    std::size_t group = 0;
};

/// Working state of the solver: the generalized Laplacian plus a role for
/// each of the 2N vertex coordinates (u block first, then v).
struct BeltramiSystem {
    std::size_t vertex_count = 0;
    Eigen::SparseMatrix<double, Eigen::RowMajor> laplacian;
    std::vector<std::optional<double>> fixed;
    std::vector<std::optional<Substitution>> substituted;
    std::vector<std::string> param_names;
    std::vector<std::string> group_names;
    struct PinnedParameter {
        std::size_t param;
        double value;
        std::size_t group;
    };
    std::vector<PinnedParameter> pinned;
    std::vector<std::string> warnings;
    double target_width = 0.0;
    double target_height = 0.0;

    std::size_t coord(std::size_t vertex, Coord c) const
    {
        return static_cast<std::size_t>(c) * vertex_count + vertex;
    }

    std::size_t add_param(std::string name)
    {
        param_names.push_back(std::move(name));
        return param_names.size() - 1;
    }

    std::size_t add_group(std::string name)
    {
        group_names.push_back(std::move(name));
        return group_names.size() - 1;
    }

    std::optional<std::size_t> find_param(std::string_view name) const
    {
        for (std::size_t i = 0; i < param_names.size(); ++i)
            if (param_names[i] == name) return i;
        return std::nullopt;
    }
};

/// Fixes a parameter introduced by the constraint builders to a value.
/// Returns false when no parameter has that name.
inline bool pin_parameter(BeltramiSystem& sys, std::string_view name, double value, std::string reason)
{
    const auto p = sys.find_param(name);
    if (!p) return false;
    sys.pinned.push_back({*p, value, sys.add_group(std::move(reason))});
    return true;
}

/// Div(A D u)(v_i) = sum_T Area(T) (A_T^i, B_T^i) A_T (sum_k A_T^k u_k, sum_k B_T^k u_k)
/// for every vertex; u and v share the stencil.
inline BeltramiSystem assemble_laplacian(const Mesh& mesh, const CoefficientField& coeffs)
{
    if (coeffs.size() != mesh.face_count())
        throw Error(ErrorCode::InvalidInput, "coefficient field has " + std::to_string(coeffs.size())
                                                 + " entries for " + std::to_string(mesh.face_count())
                                                 + " faces");
    const auto grads = face_gradients(mesh);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(mesh.face_count() * 9);
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        const FaceGradient& g = grads[f];
        const Coefficients& a = coeffs[f];
        if (!(a.a1 > 0.0 && a.a3 > 0.0 && a.determinant() > 0.0))
            throw Error(ErrorCode::InvalidInput,
                        "coefficient matrix on face " + std::to_string(f) + " is not positive definite");
        for (int i = 0; i < 3; ++i) {
            // (A^i, B^i) * A
            const double px = g.A[i] * a.a1 + g.B[i] * a.a2;
            const double py = g.A[i] * a.a2 + g.B[i] * a.a3;
            for (int k = 0; k < 3; ++k) {
                trips.emplace_back(static_cast<int>(mesh.faces[f][i]), static_cast<int>(mesh.faces[f][k]),
                                   g.area * (px * g.A[k] + py * g.B[k]));
            }
        }
    }
    BeltramiSystem sys;
    sys.vertex_count = mesh.vertex_count();
    const auto n = static_cast<Eigen::Index>(sys.vertex_count);
    sys.laplacian.resize(n, n);
    sys.laplacian.setFromTriplets(trips.begin(), trips.end());
    sys.fixed.assign(2 * sys.vertex_count, std::nullopt);
    sys.substituted.assign(2 * sys.vertex_count, std::nullopt);
    return sys;
}

/// u = 0 on the left edge and m' on the right; v = 0 on the bottom and n'
/// on the top. Edge vertices keep the PDE row for the coordinate that
/// slides along their edge; corners are fully pinned.
inline BeltramiSystem apply_boundary_conditions(BeltramiSystem sys, const Mesh& mesh, double target_width,
                                                double target_height)
{
    if (!(target_width > 0.0) || !(target_height > 0.0))
        throw Error(ErrorCode::InvalidInput, "target dimensions must be positive");
    if (mesh.vertex_count() != sys.vertex_count)
        throw Error(ErrorCode::InvalidInput, "mesh does not match the assembled system");
    sys.target_width = target_width;
    sys.target_height = target_height;
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
        const BoundaryTag t = mesh.tags[i];
        if (on_left(t)) sys.fixed[sys.coord(i, Coord::U)] = 0.0;
        if (on_right(t)) sys.fixed[sys.coord(i, Coord::U)] = target_width;
        if (on_bottom(t)) sys.fixed[sys.coord(i, Coord::V)] = 0.0;
        if (on_top(t)) sys.fixed[sys.coord(i, Coord::V)] = target_height;
    }
    return sys;
}

/// Vertex groups for the deformation-type and chessboard constraints.
struct ConstraintSet {
    /// f(v) = r_o v + t_i with r_o shared by all objects.
    std::vector<std::vector<std::size_t>> objects;
    /// f(v) = (rx_j x, ry_j y) + t_j per line.
    std::vector<std::vector<std::size_t>> lines;

    /// Vertices of M_h keep v = r y, vertices of M_v keep u = r x, with one
    /// r for both families; the other coordinate carries a per-vertex
    /// translation. Vertices in both are pinned to r x.
    struct Chessboard {
        std::vector<std::size_t> horizontal;
        std::vector<std::size_t> vertical;
        std::vector<std::size_t> both;
    };
    std::optional<Chessboard> chessboard;

    bool empty() const { return objects.empty() && lines.empty() && !chessboard; }
};

namespace detail {

inline std::vector<std::size_t> face_vertices(const Mesh& mesh, const FaceSet& faces)
{
    std::set<std::size_t> s;
    for (std::size_t f : faces)
        for (std::size_t v : mesh.faces[f]) s.insert(v);
    return {s.begin(), s.end()};
}

} // namespace detail

/// Turns face regions into vertex groups. Each vertex joins at most one
/// group: chessboard stripes first (when enabled, they subsume the objects),
/// then objects in label order, then lines in label order.
inline ConstraintSet build_constraints(const Mesh& mesh, const RegionModel& regions, bool chessboard)
{
    ConstraintSet out;
    std::vector<char> taken(mesh.vertex_count(), 0);
    if (chessboard && !regions.stripe_h.empty()) {
        const auto h = detail::face_vertices(mesh, regions.stripe_h);
        const auto v = detail::face_vertices(mesh, regions.stripe_v);
        std::vector<char> in_h(mesh.vertex_count(), 0), in_v(mesh.vertex_count(), 0);
        for (std::size_t i : h) in_h[i] = 1;
        for (std::size_t i : v) in_v[i] = 1;
        ConstraintSet::Chessboard cb;
        for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
            if (in_h[i] && in_v[i]) cb.both.push_back(i);
            else if (in_h[i]) cb.horizontal.push_back(i);
            else if (in_v[i]) cb.vertical.push_back(i);
            taken[i] = in_h[i] || in_v[i];
        }
        out.chessboard = std::move(cb);
    } else {
        for (const FaceSet& o : regions.object_faces) {
            std::vector<std::size_t> group;
            for (std::size_t i : detail::face_vertices(mesh, o))
                if (!taken[i]) group.push_back(i), taken[i] = 1;
            if (!group.empty()) out.objects.push_back(std::move(group));
        }
    }
    for (const FaceSet& l : regions.line_faces) {
        std::vector<std::size_t> group;
        for (std::size_t i : detail::face_vertices(mesh, l))
            if (!taken[i]) group.push_back(i), taken[i] = 1;
        if (!group.empty()) out.lines.push_back(std::move(group));
    }
    return out;
}

namespace detail {

inline void substitute(BeltramiSystem& sys, std::size_t vertex, Coord c, Substitution s)
{
    auto& slot = sys.substituted[sys.coord(vertex, c)];
    if (slot)
        throw Error(ErrorCode::InvalidInput,
                    "vertex " + std::to_string(vertex) + " belongs to two constraint groups");
    slot = std::move(s);
}

inline void require_free_unknowns(const BeltramiSystem& sys)
{
    for (std::size_t k = 0; k < sys.fixed.size(); ++k)
        if (!sys.fixed[k] && !sys.substituted[k]) return;
    throw Error(ErrorCode::InvalidInput, "every vertex coordinate is constrained; no free unknowns remain");
}

} // namespace detail

/// Objects: f(v) = r_o v + t_i. Lines: f(v) = (rx x, ry y) + t_j.
inline BeltramiSystem augment_deformation_constraints(BeltramiSystem sys, const ConstraintSet& constraints,
                                                      const Mesh& mesh)
{
    for (const auto& group : constraints.objects)
        for (std::size_t v : group)
            if (v >= mesh.vertex_count()) throw Error(ErrorCode::InvalidInput, "object vertex out of range");
    for (const auto& group : constraints.lines)
        for (std::size_t v : group)
            if (v >= mesh.vertex_count()) throw Error(ErrorCode::InvalidInput, "line vertex out of range");

    if (!constraints.objects.empty()) {
        const std::size_t r_o = sys.add_param("r_o");
        for (std::size_t i = 0; i < constraints.objects.size(); ++i) {
            const auto& group = constraints.objects[i];
            const std::string name = "object[" + std::to_string(i) + "]";
            const std::size_t gid = sys.add_group(name);
            const std::size_t tx = sys.add_param(name + ".tx");
            const std::size_t ty = sys.add_param(name + ".ty");
            if (group.size() < 2)
                sys.warnings.push_back(name + " has a single vertex; its scale is not determined by it");
            for (std::size_t v : group) {
                const Point2 p = mesh.vertices[v];
                detail::substitute(sys, v, Coord::U, {{{r_o, p.x}, {tx, 1.0}}, 0.0, gid});
                detail::substitute(sys, v, Coord::V, {{{r_o, p.y}, {ty, 1.0}}, 0.0, gid});
            }
        }
    }
    for (std::size_t j = 0; j < constraints.lines.size(); ++j) {
        const auto& group = constraints.lines[j];
        const std::string name = "line[" + std::to_string(j) + "]";
        const std::size_t gid = sys.add_group(name);
        const std::size_t rx = sys.add_param(name + ".rx");
        const std::size_t ry = sys.add_param(name + ".ry");
        const std::size_t tx = sys.add_param(name + ".tx");
        const std::size_t ty = sys.add_param(name + ".ty");
        Box2 box;
        for (std::size_t v : group) box.expand(mesh.vertices[v]);
        if (!(box.width() > 0.0) || !(box.height() > 0.0))
            sys.warnings.push_back(name + " vertices are collinear along an axis; its scales are rank deficient");
        for (std::size_t v : group) {
            const Point2 p = mesh.vertices[v];
            detail::substitute(sys, v, Coord::U, {{{rx, p.x}, {tx, 1.0}}, 0.0, gid});
            detail::substitute(sys, v, Coord::V, {{{ry, p.y}, {ty, 1.0}}, 0.0, gid});
        }
    }
    detail::require_free_unknowns(sys);
    return sys;
}

/// One shared scale r: v = r y on M_h, u = r x on M_v, both on the overlap.
inline BeltramiSystem augment_chessboard_constraints(BeltramiSystem sys, const ConstraintSet& constraints,
                                                     const Mesh& mesh)
{
    if (!constraints.chessboard) return sys;
    const auto& cb = *constraints.chessboard;
    if (cb.horizontal.empty() && cb.vertical.empty() && cb.both.empty())
        throw Error(ErrorCode::InvalidInput, "chessboard constraint has empty stripe families");
    const std::size_t r = sys.add_param("chessboard.r");
    const std::size_t ty = sys.add_param("chessboard.ty");
    const std::size_t tx = sys.add_param("chessboard.tx");
    const std::size_t gh = sys.add_group("chessboard.horizontal");
    const std::size_t gv = sys.add_group("chessboard.vertical");
    const std::size_t gb = sys.add_group("chessboard.overlap");
    auto check = [&](std::size_t v) {
        if (v >= mesh.vertex_count()) throw Error(ErrorCode::InvalidInput, "chessboard vertex out of range");
        return mesh.vertices[v];
    };
    for (std::size_t v : cb.horizontal) detail::substitute(sys, v, Coord::V, {{{r, check(v).y}, {ty, 1.0}}, 0.0, gh});
    for (std::size_t v : cb.vertical) detail::substitute(sys, v, Coord::U, {{{r, check(v).x}, {tx, 1.0}}, 0.0, gv});
    for (std::size_t v : cb.both) {
        const Point2 p = check(v);
        detail::substitute(sys, v, Coord::U, {{{r, p.x}, {tx, 1.0}}, 0.0, gb});
        detail::substitute(sys, v, Coord::V, {{{r, p.y}, {ty, 1.0}}, 0.0, gb});
    }
    detail::require_free_unknowns(sys);
    return sys;
}

/// The system after eliminating known and substituted coordinates.
/// `equations` holds one row per non-fixed coordinate (the PDE rows);
/// `equalities` holds the boundary conditions that fell on substituted
/// coordinates, plus pinned parameters; both constrain parameters only.
struct ReducedSystem {
    SparseSystem equations;
    SparseSystem equalities;
    std::vector<std::size_t> equality_groups;
    std::vector<std::size_t> row_coord;           // coordinate behind each equation row
    std::vector<std::ptrdiff_t> column_of_coord; // -1 unless free
    std::size_t free_count = 0;
    std::size_t param_count = 0;

    std::size_t param_column(std::size_t p) const { return free_count + p; }
};

inline ReducedSystem reduce(const BeltramiSystem& sys)
{
    ReducedSystem out;
    const std::size_t total = 2 * sys.vertex_count;
    out.column_of_coord.assign(total, -1);
    for (std::size_t k = 0; k < total; ++k)
        if (!sys.fixed[k] && !sys.substituted[k])
            out.column_of_coord[k] = static_cast<std::ptrdiff_t>(out.free_count++);
    out.param_count = sys.param_names.size();
    const std::size_t cols = out.free_count + out.param_count;
    out.equations.cols = cols;
    out.equalities.cols = cols;

    for (std::size_t k = 0; k < total; ++k) {
        if (sys.fixed[k]) continue;
        const std::size_t c = k / sys.vertex_count;
        const std::size_t i = k % sys.vertex_count;
        const int row = static_cast<int>(out.equations.rows++);
        out.row_coord.push_back(k);
        double rhs = 0.0;
        for (decltype(sys.laplacian)::InnerIterator it(sys.laplacian, static_cast<Eigen::Index>(i)); it; ++it) {
            const std::size_t other = c * sys.vertex_count + static_cast<std::size_t>(it.col());
            const double l = it.value();
            if (sys.substituted[other]) {
                const Substitution& s = *sys.substituted[other];
                for (const auto& term : s.terms)
                    out.equations.triplets.emplace_back(row, static_cast<int>(out.param_column(term.param)),
                                                        l * term.coef);
                rhs -= l * s.constant;
            } else if (sys.fixed[other]) {
                rhs -= l * *sys.fixed[other];
            } else {
                out.equations.triplets.emplace_back(row, static_cast<int>(out.column_of_coord[other]), l);
            }
        }
        out.equations.rhs.push_back(rhs);
    }

    for (std::size_t k = 0; k < total; ++k) {
        if (!sys.fixed[k] || !sys.substituted[k]) continue;
        const Substitution& s = *sys.substituted[k];
        const int row = static_cast<int>(out.equalities.rows++);
        for (const auto& term : s.terms)
            out.equalities.triplets.emplace_back(row, static_cast<int>(out.param_column(term.param)), term.coef);
        out.equalities.rhs.push_back(*sys.fixed[k] - s.constant);
        out.equality_groups.push_back(s.group);
    }
    for (const auto& pin : sys.pinned) {
        const int row = static_cast<int>(out.equalities.rows++);
        out.equalities.triplets.emplace_back(row, static_cast<int>(out.param_column(pin.param)), 1.0);
        out.equalities.rhs.push_back(pin.value);
        out.equality_groups.push_back(pin.group);
    }
    out.equations.finalize();
    out.equalities.finalize();
    return out;
}

struct Parameter {
    std::string name;
    double value = 0.0;
};

struct SolveReport {
    bool least_squares = false;
    std::size_t equations = 0;
    std::size_t unknowns = 0;
    std::size_t equality_constraints = 0;
    double relative_residual = 0.0;
    double min_jacobian = 0.0;
    std::vector<std::string> warnings;
};

/// Target position of every vertex plus the recovered parameters.
struct WarpField {
    std::vector<Point2> positions;
    std::vector<Parameter> parameters;
    double target_width = 0.0;
    double target_height = 0.0;
    SolveReport report;

    std::optional<double> parameter(std::string_view name) const
    {
        for (const Parameter& p : parameters)
            if (p.name == name) return p.value;
        return std::nullopt;
    }
};

enum class Formulation { Galerkin, LeastSquares };

struct SolveOptions {
    Formulation formulation = Formulation::Galerkin;
    double direct_tolerance = 1e-10;
    bool validate = true;
};

namespace detail {

inline std::string group_list(const BeltramiSystem& sys, const std::set<std::size_t>& groups)
{
    std::string out;
    for (std::size_t g : groups) out += (out.empty() ? "" : ", ") + sys.group_names.at(g);
    return out.empty() ? "unconstrained system" : out;
}

// Keeps a linearly independent, consistent subset of the parameter-only
// equality rows.
inline void select_equalities(const BeltramiSystem& sys, const ReducedSystem& red,
                              std::vector<Eigen::Triplet<double>>& kept, std::vector<double>& kept_rhs)
{
    const std::size_t k = red.equalities.rows;
    if (k == 0) return;
    const auto P = static_cast<Eigen::Index>(red.param_count);
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), P);
    for (const auto& t : red.equalities.triplets)
        rows(t.row(), t.col() - static_cast<Eigen::Index>(red.free_count)) += t.value();
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(red.equalities.rhs.data(), static_cast<Eigen::Index>(k));

    std::vector<Eigen::Index> chosen;
    Eigen::MatrixXd basis(0, P + 1);
    std::set<std::size_t> groups;
    for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(k); ++r) {
        groups.insert(red.equality_groups[static_cast<std::size_t>(r)]);
        Eigen::MatrixXd with_row(basis.rows() + 1, P);
        with_row << basis.leftCols(P), rows.row(r);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(with_row);
        lu.setThreshold(1e-10);
        if (lu.rank() > basis.rows()) {
            Eigen::MatrixXd next(basis.rows() + 1, P + 1);
            next << basis, rows.row(r), rhs(r);
            basis = std::move(next);
            chosen.push_back(r);
            continue;
        }
        // Dependent row: it must agree with the rows already kept.
        Eigen::MatrixXd aug(basis.rows() + 1, P + 1);
        aug << basis, rows.row(r), rhs(r);
        Eigen::FullPivLU<Eigen::MatrixXd> lu_aug(aug);
        lu_aug.setThreshold(1e-10);
        if (lu_aug.rank() > basis.rows())
            throw Error(ErrorCode::SolverFailure,
                        "boundary conditions contradict the constraint groups (" + group_list(sys, groups)
                            + "); the target rectangle cannot hold them rigidly");
    }
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        for (Eigen::Index p = 0; p < P; ++p)
            if (basis(static_cast<Eigen::Index>(i), p) != 0.0)
                kept.emplace_back(static_cast<int>(i), static_cast<int>(red.free_count + static_cast<std::size_t>(p)),
                                  basis(static_cast<Eigen::Index>(i), p));
        kept_rhs.push_back(basis(static_cast<Eigen::Index>(i), P));
    }
}

inline std::set<std::size_t> all_groups(const BeltramiSystem& sys)
{
    std::set<std::size_t> g;
    for (std::size_t i = 0; i < sys.group_names.size(); ++i) g.insert(i);
    return g;
}

} // namespace detail

/// Minimum signed-area ratio (Jacobian) over the warped faces.
inline double min_jacobian(const Mesh& mesh, std::span<const Point2> positions)
{
    const auto jac = jacobian_of_map(mesh, positions);
    return jac.empty() ? 0.0 : *std::min_element(jac.begin(), jac.end());
}

namespace detail {

// Sparse LU with one step of iterative refinement.
inline Eigen::VectorXd lu_solve(const Eigen::SparseMatrix<double>& K, const Eigen::VectorXd& rhs,
                                const std::string& failure)
{
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(K);
    lu.factorize(K);
    if (lu.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, failure);
    Eigen::VectorXd x = lu.solve(rhs);
    x += lu.solve(rhs - K * x);
    return x;
}

// Appends the equality rows (and their transposes) below and right of an
// n x n block, giving the KKT matrix.
inline Eigen::SparseMatrix<double> with_equalities(std::vector<Eigen::Triplet<double>> trips, Eigen::Index n,
                                                   Eigen::Index offset, const std::vector<Eigen::Triplet<double>>& eq,
                                                   Eigen::Index k)
{
    for (const auto& t : eq) {
        trips.emplace_back(static_cast<int>(n + t.row()), static_cast<int>(offset + t.col()), t.value());
        trips.emplace_back(static_cast<int>(offset + t.col()), static_cast<int>(n + t.row()), t.value());
    }
    Eigen::SparseMatrix<double> K(n + k, n + k);
    K.setFromTriplets(trips.begin(), trips.end());
    return K;
}

} // namespace detail

/// Solves the reduced system. Without constraints it is square and solved
/// directly. With constraints the default Galerkin formulation keeps the
/// PDE exact at every free coordinate and adds one aggregated row per
/// parameter (the generalized Laplacian energy minimized over the
/// constrained maps); the least-squares formulation instead minimizes the
/// residual of every PDE row. Parameter equalities enter as Lagrange rows.
/// Validates the orientation of every warped face.
inline WarpField solve(const BeltramiSystem& sys, const Mesh& mesh, const SolveOptions& options = {})
{
    if (mesh.vertex_count() != sys.vertex_count)
        throw Error(ErrorCode::InvalidInput, "mesh does not match the assembled system");
    const ReducedSystem red = reduce(sys);
    const auto n_cols = static_cast<Eigen::Index>(red.equations.cols);
    const auto rows = static_cast<Eigen::Index>(red.equations.rows);
    if (red.equations.rows < red.equations.cols)
        throw Error(ErrorCode::SolverFailure, "system is underdetermined: " + std::to_string(red.equations.rows)
                                                  + " equations for " + std::to_string(red.equations.cols)
                                                  + " unknowns");

    const Eigen::SparseMatrix<double> M = red.equations.matrix();
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(red.equations.rhs.data(), rows);
    const std::string singular =
        "constrained system is singular; check " + detail::group_list(sys, detail::all_groups(sys));

    WarpField out;
    out.report.equations = red.equations.rows;
    out.report.unknowns = red.equations.cols;
    out.report.warnings = sys.warnings;
    Eigen::VectorXd z;

    if (red.equations.rows == red.equations.cols && red.equalities.rows == 0 && red.param_count == 0) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.analyzePattern(M);
        lu.factorize(M);
        if (lu.info() != Eigen::Success)
            throw Error(ErrorCode::SolverFailure, "sparse LU failed (singular operator)");
        z = lu.solve(b);
        const double bn = b.norm();
        out.report.relative_residual = (M * z - b).norm() / (bn > 0.0 ? bn : 1.0);
        if (!(out.report.relative_residual <= options.direct_tolerance))
            throw Error(ErrorCode::SolverFailure,
                        "direct solve residual " + std::to_string(out.report.relative_residual) + " exceeds tolerance");
    } else {
        std::vector<Eigen::Triplet<double>> eq;
        std::vector<double> eq_rhs;
        detail::select_equalities(sys, red, eq, eq_rhs);
        out.report.equality_constraints = eq_rhs.size();
        const auto k = static_cast<Eigen::Index>(eq_rhs.size());
        const Eigen::VectorXd d = k > 0 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(eq_rhs.data(), k))
                                        : Eigen::VectorXd();

        if (options.formulation == Formulation::Galerkin) {
            // Row of a free coordinate stays; rows of substituted
            // coordinates are folded into their parameters' rows.
            std::vector<Eigen::Triplet<double>> trips;
            Eigen::VectorXd g = Eigen::VectorXd::Zero(n_cols);
            auto scatter = [&](std::size_t coord, auto&& emit) {
                if (red.column_of_coord[coord] >= 0) {
                    emit(red.column_of_coord[coord], 1.0);
                } else {
                    for (const auto& term : sys.substituted[coord]->terms)
                        emit(static_cast<std::ptrdiff_t>(red.param_column(term.param)), term.coef);
                }
            };
            for (const auto& t : red.equations.triplets)
                scatter(red.row_coord[static_cast<std::size_t>(t.row())], [&](std::ptrdiff_t r, double w) {
                    trips.emplace_back(static_cast<int>(r), t.col(), w * t.value());
                });
            for (Eigen::Index r = 0; r < rows; ++r)
                scatter(red.row_coord[static_cast<std::size_t>(r)], [&](std::ptrdiff_t c, double w) { g(c) += w * b(r); });
            const Eigen::SparseMatrix<double> K = detail::with_equalities(std::move(trips), n_cols, 0, eq, k);
            Eigen::VectorXd rhs(n_cols + k);
            rhs << g, d;
            const Eigen::VectorXd x = detail::lu_solve(K, rhs, singular);
            z = x.head(n_cols);
            const double rn = rhs.norm();
            out.report.relative_residual = (K * x - rhs).norm() / (rn > 0.0 ? rn : 1.0);
        } else {
            out.report.least_squares = true;
            // [alpha I  M  0 ] [r     ]   [b]
            // [M^T     0  C^T] [z     ] = [0]
            // [0       C  0  ] [lambda]   [d]
            // r = (b - M z) / alpha is the scaled residual.
            double alpha = 0.0;
            for (const auto& t : red.equations.triplets) alpha = std::max(alpha, std::abs(t.value()));
            alpha = alpha > 0.0 ? alpha : 1.0;
            std::vector<Eigen::Triplet<double>> trips;
            trips.reserve(static_cast<std::size_t>(rows) + 2 * red.equations.triplets.size());
            for (Eigen::Index r = 0; r < rows; ++r) trips.emplace_back(static_cast<int>(r), static_cast<int>(r), alpha);
            for (const auto& t : red.equations.triplets) {
                trips.emplace_back(t.row(), static_cast<int>(rows + t.col()), t.value());
                trips.emplace_back(static_cast<int>(rows + t.col()), t.row(), t.value());
            }
            const Eigen::SparseMatrix<double> K = detail::with_equalities(std::move(trips), rows + n_cols, rows, eq, k);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows + n_cols + k);
            rhs.head(rows) = b;
            if (k > 0) rhs.tail(k) = d;
            z = detail::lu_solve(K, rhs, singular).segment(rows, n_cols);
            const Eigen::VectorXd g = M.transpose() * b;
            const double gn = g.norm();
            out.report.relative_residual = (M.transpose() * (M * z - b)).norm() / (gn > 0.0 ? gn : 1.0);
        }
    }
    if (!z.allFinite())
        throw Error(ErrorCode::SolverFailure,
                    "solve produced non-finite values for " + detail::group_list(sys, detail::all_groups(sys)));

    out.parameters.resize(red.param_count);
    for (std::size_t p = 0; p < red.param_count; ++p)
        out.parameters[p] = {sys.param_names[p], z(static_cast<Eigen::Index>(red.param_column(p)))};

    auto value_of = [&](std::size_t k) {
        if (sys.substituted[k]) {
            const Substitution& s = *sys.substituted[k];
            double v = s.constant;
            for (const auto& term : s.terms) v += term.coef * out.parameters[term.param].value;
            return v;
        }
        if (sys.fixed[k]) return *sys.fixed[k];
        return z(red.column_of_coord[k]);
    };
    out.positions.resize(sys.vertex_count);
    for (std::size_t i = 0; i < sys.vertex_count; ++i)
        out.positions[i] = {value_of(sys.coord(i, Coord::U)), value_of(sys.coord(i, Coord::V))};
    out.target_width = sys.target_width;
    out.target_height = sys.target_height;

    const auto jac = jacobian_of_map(mesh, out.positions);
    out.report.min_jacobian = jac.empty() ? 0.0 : *std::min_element(jac.begin(), jac.end());
    if (options.validate) {
        std::vector<std::size_t> folded;
        for (std::size_t f = 0; f < jac.size(); ++f)
            if (!(jac[f] > 0.0)) folded.push_back(f);
        if (!folded.empty()) {
            std::string list;
            for (std::size_t i = 0; i < std::min<std::size_t>(folded.size(), 16); ++i)
                list += (i ? "," : "") + std::to_string(folded[i]);
            if (folded.size() > 16) list += ",...";
            const std::string message =
                std::to_string(folded.size()) + " warped faces are folded over (faces " + list + ")";
            throw FoldoverError(message, std::move(folded));
        }
    }
    return out;
}

} // namespace retarget
