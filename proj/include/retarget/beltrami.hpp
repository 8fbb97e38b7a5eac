#pragma once

#include <retarget/errors.hpp>
#include <retarget/geometry.hpp>
#include <retarget/mesh.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace retarget {

using Complex = std::complex<double>;

/// One Beltrami coefficient per face.
using BeltramiField = std::vector<Complex>;

/// Gradients of the barycentric hat functions on a source face.
///
/// For face (i, j, k) with source vertices (g, h):
///   A[i] = (h_j - h_k) / (2 Area),  B[i] = (g_k - g_j) / (2 Area)
/// and cyclically for j and k, so that any per-vertex scalar s has the
/// face gradient (sum A[.] s[.], sum B[.] s[.]).
struct FaceGradient {
    double area = 0.0;
    std::array<double, 3> A{};
    std::array<double, 3> B{};
};

inline std::vector<FaceGradient> face_gradients(const Mesh& mesh)
{
    std::vector<FaceGradient> out(mesh.face_count());
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        const double area = mesh.signed_area(f);
        if (!(area > 0.0))
            throw Error(ErrorCode::DegenerateGeometry,
                        "source face " + std::to_string(f) + " has non-positive area");
        FaceGradient& g = out[f];
        g.area = area;
        for (int k = 0; k < 3; ++k) {
            const Point2 pj = mesh.corner(f, (k + 1) % 3);
            const Point2 pk = mesh.corner(f, (k + 2) % 3);
            g.A[k] = (pj.y - pk.y) / (2.0 * area);
            g.B[k] = (pk.x - pj.x) / (2.0 * area);
        }
    }
    return out;
}

/// Per-face affine map u = a x + b y + r, v = c x + d y + s.
struct FaceLinearPart {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
    double r = 0.0, s = 0.0;

    double determinant() const { return a * d - b * c; }
};

namespace detail {

inline void require_warp_size(const Mesh& mesh, std::span<const Point2> warp)
{
    if (warp.size() != mesh.vertex_count())
        throw Error(ErrorCode::InvalidInput, "warp has " + std::to_string(warp.size())
                                                 + " points for " + std::to_string(mesh.vertex_count())
                                                 + " vertices");
}

} // namespace detail

inline std::vector<FaceLinearPart> face_linear_parts(const Mesh& mesh,
                                                     const std::vector<FaceGradient>& grads,
                                                     std::span<const Point2> warp)
{
    detail::require_warp_size(mesh, warp);
    std::vector<FaceLinearPart> out(mesh.face_count());
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        const FaceGradient& g = grads[f];
        FaceLinearPart& p = out[f];
        for (int k = 0; k < 3; ++k) {
            const Point2 w = warp[mesh.faces[f][k]];
            p.a += g.A[k] * w.x;
            p.b += g.B[k] * w.x;
            p.c += g.A[k] * w.y;
            p.d += g.B[k] * w.y;
        }
        const Point2 src = mesh.corner(f, 0);
        const Point2 dst = warp[mesh.faces[f][0]];
        p.r = dst.x - p.a * src.x - p.b * src.y;
        p.s = dst.y - p.c * src.x - p.d * src.y;
    }
    return out;
}

inline std::vector<FaceLinearPart> face_linear_parts(const Mesh& mesh, std::span<const Point2> warp)
{
    return face_linear_parts(mesh, face_gradients(mesh), warp);
}

/// The two first-order operators of the Beltrami equation D1 f = mu D2 f.
inline Complex d1_of(const FaceLinearPart& p) { return {p.a - p.d, p.c + p.b}; }
inline Complex d2_of(const FaceLinearPart& p) { return {p.a + p.d, p.c - p.b}; }

inline Complex beltrami_of_face(const FaceLinearPart& p, std::size_t face = 0)
{
    const Complex den = d2_of(p);
    if (den == Complex(0.0, 0.0))
        throw Error(ErrorCode::DegenerateGeometry,
                    "face " + std::to_string(face) + " has a degenerate Beltrami denominator");
    return d1_of(p) / den;
}

inline BeltramiField beltrami_of_map(const Mesh& mesh, std::span<const Point2> warp)
{
    const auto parts = face_linear_parts(mesh, warp);
    BeltramiField mu(parts.size());
    for (std::size_t f = 0; f < parts.size(); ++f) mu[f] = beltrami_of_face(parts[f], f);
    return mu;
}

/// ad - bc per face.
inline std::vector<double> jacobian_of_map(const Mesh& mesh, std::span<const Point2> warp)
{
    const auto parts = face_linear_parts(mesh, warp);
    std::vector<double> jac(parts.size());
    for (std::size_t f = 0; f < parts.size(); ++f) jac[f] = parts[f].determinant();
    return jac;
}

/// |D2 f|^2 (1 - |mu|^2) / 4, which equals ad - bc. Without the 1/4 this is
/// the unnormalized expression, exactly four times the Jacobian.
inline double jacobian_from_beltrami(const FaceLinearPart& p)
{
    const Complex mu = beltrami_of_face(p);
    return std::norm(d2_of(p)) * (1.0 - std::norm(mu)) / 4.0;
}

/// Symmetric matrix [[a1, a2], [a2, a3]] of the generalized Laplacian.
struct Coefficients {
    double a1 = 1.0;
    double a2 = 0.0;
    double a3 = 1.0;

    double determinant() const { return a1 * a3 - a2 * a2; }
};

using CoefficientField = std::vector<Coefficients>;

inline Coefficients coefficients_of(Complex mu, std::size_t face = 0)
{
    const double rho = mu.real(), tau = mu.imag();
    const double den = 1.0 - rho * rho - tau * tau;
    if (!(den > 0.0))
        throw Error(ErrorCode::InvalidInput,
                    "face " + std::to_string(face) + " has |mu| >= 1; the elliptic system degenerates");
    return {((rho - 1.0) * (rho - 1.0) + tau * tau) / den, -2.0 * tau / den,
            ((rho + 1.0) * (rho + 1.0) + tau * tau) / den};
}

inline CoefficientField coefficients_from_mu(const BeltramiField& mu)
{
    CoefficientField out(mu.size());
    for (std::size_t f = 0; f < mu.size(); ++f) out[f] = coefficients_of(mu[f], f);
    return out;
}

inline constexpr double kDefaultMuMargin = 1e-3;

/// Radially scales any coefficient with |mu| >= 1 - margin down to 1 - margin.
inline BeltramiField clamp_mu(BeltramiField mu, double margin = kDefaultMuMargin)
{
    const double limit = 1.0 - margin;
    for (Complex& m : mu) {
        const double mag = std::abs(m);
        if (mag >= limit) m *= limit / mag;
    }
    return mu;
}

inline double max_abs(const BeltramiField& mu)
{
    double out = 0.0;
    for (const Complex& m : mu) out = std::max(out, std::abs(m));
    return out;
}

struct Distortion {
    // Empty when mu = 0: the map is a uniform scaling with no preferred axis.
    std::optional<double> magnification_angle;
    std::optional<double> shrink_angle;
    double magnification = 1.0;
    double shrink = 1.0;
};

using DistortionInfo = std::vector<Distortion>;

inline Distortion distortion_of(Complex mu)
{
    Distortion d;
    const double mag = std::abs(mu);
    d.magnification = 1.0 + mag;
    d.shrink = 1.0 - mag;
    if (mag > 0.0) {
        const double arg = std::arg(mu);
        d.magnification_angle = arg / 2.0;
        d.shrink_angle = (arg - std::numbers::pi) / 2.0;
    }
    return d;
}

inline DistortionInfo distortion_info(const BeltramiField& mu)
{
    DistortionInfo out;
    out.reserve(mu.size());
    for (const Complex& m : mu) out.push_back(distortion_of(m));
    return out;
}

/// Discrete divergence of a face vector field (X1, X2):
///   Div(X)(v_i) = sum over faces T around v_i of Area(T) (A_T^i X1(T) + B_T^i X2(T)).
inline std::vector<double> divergence(const Mesh& mesh, const std::vector<FaceGradient>& grads,
                                      std::span<const double> x1, std::span<const double> x2)
{
    std::vector<double> out(mesh.vertex_count(), 0.0);
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        const FaceGradient& g = grads[f];
        for (int k = 0; k < 3; ++k)
            out[mesh.faces[f][k]] += g.area * (g.A[k] * x1[f] + g.B[k] * x2[f]);
    }
    return out;
}

} // namespace retarget
