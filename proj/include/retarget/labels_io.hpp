#pragma once

#include <retarget/errors.hpp>
#include <retarget/geometry.hpp>
#include <retarget/regions.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace retarget {

struct ImageSize {
    double width = 0.0;
    double height = 0.0;
};

namespace detail {

inline std::vector<Point2> parse_points(const nlohmann::json& arr, const std::string& where,
                                        const std::optional<ImageSize>& bounds)
{
    if (!arr.is_array()) throw Error(ErrorCode::InvalidInput, where + " must be an array of [x,y] pairs");
    std::vector<Point2> pts;
    pts.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& p = arr[i];
        const std::string at = where + "[" + std::to_string(i) + "]";
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw Error(ErrorCode::InvalidInput, at + " must be a pair of numbers");
        const Point2 pt{p[0].get<double>(), p[1].get<double>()};
        const bool bad = !std::isfinite(pt.x) || !std::isfinite(pt.y) || pt.x < 0.0 || pt.y < 0.0
            || (bounds && (pt.x > bounds->width || pt.y > bounds->height));
        if (bad) {
            std::ostringstream os;
            os << at << " = (" << pt.x << ", " << pt.y << ") is outside the image";
            if (bounds) os << " [0," << bounds->width << "]x[0," << bounds->height << "]";
            throw Error(ErrorCode::InvalidInput, os.str());
        }
        pts.push_back(pt);
    }
    return pts;
}

} // namespace detail

inline LabelSet parse_labels_json(const nlohmann::json& doc, std::optional<ImageSize> bounds = std::nullopt)
{
    if (!doc.is_object()) throw Error(ErrorCode::InvalidInput, "label document must be an object");
    LabelSet out;
    if (doc.contains("objects")) {
        const auto& objs = doc["objects"];
        if (!objs.is_array()) throw Error(ErrorCode::InvalidInput, "\"objects\" must be an array");
        for (std::size_t i = 0; i < objs.size(); ++i) {
            const std::string where = "objects[" + std::to_string(i) + "].polygon";
            if (!objs[i].is_object() || !objs[i].contains("polygon"))
                throw Error(ErrorCode::InvalidInput, "objects[" + std::to_string(i) + "] needs a \"polygon\"");
            auto poly = detail::parse_points(objs[i]["polygon"], where, bounds);
            if (poly.size() < 3) throw Error(ErrorCode::InvalidInput, where + " needs at least 3 points");
            if (!polygon_is_simple(poly)) throw Error(ErrorCode::InvalidInput, where + " is self-intersecting");
            if (polygon_signed_area(poly) == 0.0) throw Error(ErrorCode::InvalidInput, where + " has zero area");
            out.object_polygons.push_back(std::move(poly));
        }
    }
    if (doc.contains("lines")) {
        const auto& lines = doc["lines"];
        if (!lines.is_array()) throw Error(ErrorCode::InvalidInput, "\"lines\" must be an array");
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const std::string where = "lines[" + std::to_string(i) + "].polyline";
            if (!lines[i].is_object() || !lines[i].contains("polyline"))
                throw Error(ErrorCode::InvalidInput, "lines[" + std::to_string(i) + "] needs a \"polyline\"");
            auto line = detail::parse_points(lines[i]["polyline"], where, bounds);
            if (line.size() < 2) throw Error(ErrorCode::InvalidInput, where + " needs at least 2 points");
            out.line_polylines.push_back(std::move(line));
        }
    }
    return out;
}

/// Parses {"objects":[{"polygon":[[x,y],...]}], "lines":[{"polyline":[[x,y],...]}]}.
/// Coordinates are source pixels, origin top-left, y down.
inline LabelSet parse_labels_text(std::string_view text, std::optional<ImageSize> bounds = std::nullopt)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::InvalidInput, std::string("malformed label document: ") + e.what());
    }
    return parse_labels_json(doc, bounds);
}

inline LabelSet parse_labels_file(const std::string& path, std::optional<ImageSize> bounds = std::nullopt)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidInput, "cannot open label file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_labels_text(ss.str(), bounds);
}

inline nlohmann::json labels_to_json(const LabelSet& labels)
{
    auto points = [](const std::vector<Point2>& pts) {
        nlohmann::json arr = nlohmann::json::array();
        for (Point2 p : pts) arr.push_back({p.x, p.y});
        return arr;
    };
    nlohmann::json doc{{"objects", nlohmann::json::array()}, {"lines", nlohmann::json::array()}};
    for (const auto& poly : labels.object_polygons) doc["objects"].push_back({{"polygon", points(poly)}});
    for (const auto& line : labels.line_polylines) doc["lines"].push_back({{"polyline", points(line)}});
    return doc;
}

} // namespace retarget
