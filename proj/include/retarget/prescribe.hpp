#pragma once

#include <retarget/beltrami.hpp>
#include <retarget/errors.hpp>
#include <retarget/regions.hpp>

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

namespace retarget {

/// How the unavoidable distortion is spread over the non-object region.
enum class Choice {
    Even,   // zero on objects, uniform elsewhere
    Weak,   // stronger squeeze inside the horizontal object stripes
    Strong, // strong squeeze everywhere outside the vertical stripes
};

inline const char* to_string(Choice c)
{
    switch (c) {
    case Choice::Even: return "even";
    case Choice::Weak: return "weak";
    case Choice::Strong: return "strong";
    }
    return "even";
}

inline std::optional<Choice> parse_choice(std::string_view s)
{
    if (s == "even") return Choice::Even;
    if (s == "weak") return Choice::Weak;
    if (s == "strong") return Choice::Strong;
    return std::nullopt;
}

enum class Axis { Horizontal, Vertical };

struct RetargetConfig {
    double w = 1.0; // target-width / source-width with the height kept
    Choice choice = Choice::Even;
    bool chessboard = false;
    Axis squeeze_axis = Axis::Horizontal;

    /// Widening requests are solved as a vertical squeeze of the rotated image.
    RetargetConfig normalized() const
    {
        if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidInput, "ratio must be positive");
        RetargetConfig out = *this;
        if (w > 1.0) {
            out.w = 1.0 / w;
            out.squeeze_axis = squeeze_axis == Axis::Horizontal ? Axis::Vertical : Axis::Horizontal;
        }
        return out;
    }
};

/// mu of the axis scaling (x, y) -> (sx x, sy y).
inline double scaling_mu(double sx, double sy) { return (sx - sy) / (sx + sy); }

namespace detail {

inline void require_squeeze(const RetargetConfig& config)
{
    if (!(config.w > 0.0) || config.w > 1.0)
        throw Error(ErrorCode::InvalidInput, "working ratio must lie in (0, 1]; normalize the config first");
}

inline void zero_lines(BeltramiField& mu, const RegionModel& regions)
{
    for (const FaceSet& l : regions.line_faces)
        for (std::size_t f : l) mu[f] = 0.0;
}

inline std::string extremal_hint(double w, double m, double W)
{
    std::ostringstream os;
    os << "target width " << w * m << " cannot hold the objects' total width " << W
       << "; rerun with --extremal --beta 50 (beta is the percentage of the target width given to objects)";
    return os.str();
}

} // namespace detail

/// Choice 1: zero on objects, (w-1)/(w+1) elsewhere.
inline BeltramiField prescribe_even(const RetargetConfig& config, const RegionModel& regions)
{
    detail::require_squeeze(config);
    BeltramiField mu(regions.face_count, scaling_mu(config.w, 1.0));
    for (const FaceSet& o : regions.object_faces)
        for (std::size_t f : o) mu[f] = 0.0;
    detail::zero_lines(mu, regions);
    return mu;
}

/// w' = w - W/m: the squeeze left for the background once objects keep their width.
inline double reduced_ratio(double w, const RegionModel& regions, double m)
{
    return w - total_object_width(regions) / m;
}

/// Choice 2: zero on M_h and M_v overlap, (w'-1)/(w'+1) on M_h \ M_v,
/// (w-1)/(w+1) on the rest.
inline BeltramiField prescribe_weak(const RetargetConfig& config, const RegionModel& regions, double m)
{
    detail::require_squeeze(config);
    const double wp = reduced_ratio(config.w, regions, m);
    if (!(wp > 0.0))
        throw Error(ErrorCode::ExtremalPrecondition,
                    detail::extremal_hint(config.w, m, total_object_width(regions)));
    BeltramiField mu(regions.face_count, scaling_mu(config.w, 1.0));
    const auto in_h = faceset::mask(regions.stripe_h, regions.face_count);
    const auto in_v = faceset::mask(regions.stripe_v, regions.face_count);
    for (std::size_t f = 0; f < regions.face_count; ++f) {
        if (in_h[f] && in_v[f]) mu[f] = 0.0;
        else if (in_h[f]) mu[f] = scaling_mu(wp, 1.0);
    }
    detail::zero_lines(mu, regions);
    return mu;
}

/// Choice 3: zero on M_v, (w'-1)/(w'+1) everywhere else.
inline BeltramiField prescribe_strong(const RetargetConfig& config, const RegionModel& regions, double m)
{
    detail::require_squeeze(config);
    const double wp = reduced_ratio(config.w, regions, m);
    if (!(wp > 0.0))
        throw Error(ErrorCode::ExtremalPrecondition,
                    detail::extremal_hint(config.w, m, total_object_width(regions)));
    BeltramiField mu(regions.face_count, scaling_mu(wp, 1.0));
    for (std::size_t f : regions.stripe_v) mu[f] = 0.0;
    detail::zero_lines(mu, regions);
    return mu;
}

struct ExtremalParams {
    double beta = 50.0;   // percent of the target width occupied by objects
    double W = 0.0;       // total object width
    double H = 0.0;       // total object height
    double w_prime = 0.0; // horizontal ratio inside the object stripes
    double h = 1.0;       // vertical scaling of the background
};

inline constexpr double kDefaultBeta = 50.0;

/// w' = w (1 - beta/100) / 200 and h = (n - H w') / (n - H).
inline ExtremalParams extremal_params(double w, double beta, double W, double H, double n)
{
    if (!(beta > 0.0 && beta < 100.0))
        throw Error(ErrorCode::ExtremalPrecondition, "beta must lie strictly between 0 and 100 (try 50)");
    if (!(H < n))
        throw Error(ErrorCode::ExtremalPrecondition,
                    "objects are as tall as the image; extremal mode cannot rescale them vertically");
    ExtremalParams p;
    p.beta = beta;
    p.W = W;
    p.H = H;
    p.w_prime = w * (1.0 - beta / 100.0) / 200.0;
    p.h = (n - H * p.w_prime) / (n - H);
    return p;
}

/// Extremal variant of Choices 2 and 3; Choice 1 does not depend on W and
/// falls back to prescribe_even.
inline BeltramiField prescribe_extremal(const RetargetConfig& config, const RegionModel& regions,
                                        const ExtremalParams& p)
{
    detail::require_squeeze(config);
    if (config.choice == Choice::Even) return prescribe_even(config, regions);
    const auto in_h = faceset::mask(regions.stripe_h, regions.face_count);
    const auto in_v = faceset::mask(regions.stripe_v, regions.face_count);
    const double stripe_mu = scaling_mu(p.w_prime, p.h);
    const double rest_mu = config.choice == Choice::Weak ? scaling_mu(config.w, p.h) : stripe_mu;
    BeltramiField mu(regions.face_count, rest_mu);
    for (std::size_t f = 0; f < regions.face_count; ++f) {
        if (config.choice == Choice::Weak) {
            if (in_h[f] && in_v[f]) mu[f] = 0.0;
            else if (in_h[f]) mu[f] = stripe_mu;
        } else if (in_v[f]) {
            mu[f] = 0.0;
        }
    }
    detail::zero_lines(mu, regions);
    return mu;
}

struct ExtremalRequest {
    bool force = false;
    std::optional<double> beta;
};

struct Prescription {
    BeltramiField mu; // raw, before clamping
    std::optional<ExtremalParams> extremal;
};

/// Picks the prescription for the choice. Choices 2 and 3 switch to the
/// extremal formulas on their own when w m <= W.
inline Prescription prescribe(const RetargetConfig& config, const RegionModel& regions, double m, double n,
                              const ExtremalRequest& extremal = {})
{
    detail::require_squeeze(config);
    const double W = total_object_width(regions);
    const bool too_narrow = !(config.w * m > W);
    if (extremal.force && !too_narrow)
        throw Error(ErrorCode::ExtremalPrecondition,
                    "extremal mode needs a target narrower than the objects' total width; drop --extremal");
    Prescription out;
    if (config.choice == Choice::Even) {
        out.mu = prescribe_even(config, regions);
        return out;
    }
    if (too_narrow || extremal.force) {
        const ExtremalParams p =
            extremal_params(config.w, extremal.beta.value_or(kDefaultBeta), W, total_object_height(regions), n);
        out.mu = prescribe_extremal(config, regions, p);
        out.extremal = p;
        return out;
    }
    out.mu = config.choice == Choice::Weak ? prescribe_weak(config, regions, m)
                                           : prescribe_strong(config, regions, m);
    return out;
}

} // namespace retarget
