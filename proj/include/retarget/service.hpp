#pragma once

// Local HTTP facade over the pipeline.
//
//   POST /api/images    raw PNG/JPEG body          -> {"id","width","height"}
//   POST /api/retarget  JSON request               -> JSON preview, or raw PNG with ?format=png
//   GET  /api/health                               -> {"status":"ok"}
//   GET  /                                         -> UI bundle (or a placeholder page)

#include <retarget/errors.hpp>
#include <retarget/image_io.hpp>
#include <retarget/labels_io.hpp>
#include <retarget/pipeline.hpp>
#include <retarget/raster.hpp>

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace retarget::service {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t max_upload_bytes = 32u << 20;
    std::size_t max_sessions = 16;
    std::size_t max_mesh_vertices = 20000;
    std::string ui_dir; // served at / when set
};

/// Decoded uploads keyed by opaque id, evicting the least recently used.
class SessionStore {
public:
    explicit SessionStore(std::size_t capacity, std::uint64_t seed = std::random_device{}())
        : capacity_(std::max<std::size_t>(1, capacity))
        , rng_(seed)
    {
    }

    std::string put(RasterImage image)
    {
        auto shared = std::make_shared<const RasterImage>(std::move(image));
        std::lock_guard lock(mutex_);
        std::string id;
        do {
            std::ostringstream os;
            os << std::hex << rng_() << rng_();
            id = os.str();
        } while (index_.count(id));
        order_.push_front({id, std::move(shared)});
        index_[id] = order_.begin();
        while (order_.size() > capacity_) {
            index_.erase(order_.back().first);
            order_.pop_back();
        }
        return id;
    }

    std::shared_ptr<const RasterImage> get(const std::string& id)
    {
        std::lock_guard lock(mutex_);
        const auto it = index_.find(id);
        if (it == index_.end()) return nullptr;
        order_.splice(order_.begin(), order_, it->second);
        return it->second->second;
    }

    std::size_t size() const
    {
        std::lock_guard lock(mutex_);
        return order_.size();
    }

    std::size_t capacity() const { return capacity_; }

private:
    using Entry = std::pair<std::string, std::shared_ptr<const RasterImage>>;
    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::mt19937_64 rng_;
    std::list<Entry> order_;
    std::unordered_map<std::string, std::list<Entry>::iterator> index_;
};

namespace detail {

inline std::vector<std::uint8_t> base64_decode(std::string_view in)
{
    auto value = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+' || c == '-') return 62;
        if (c == '/' || c == '_') return 63;
        return -1;
    };
    if (const auto comma = in.find(','); in.starts_with("data:") && comma != std::string_view::npos)
        in.remove_prefix(comma + 1);
    std::vector<std::uint8_t> out;
    out.reserve(in.size() * 3 / 4);
    std::uint32_t acc = 0;
    int bits = 0;
    for (char c : in) {
        if (c == '=' || c == '\n' || c == '\r' || c == ' ') continue;
        const int v = value(c);
        if (v < 0) throw Error(ErrorCode::InvalidInput, "inline image is not valid base64");
        acc = (acc << 6) | static_cast<std::uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
        }
    }
    return out;
}

inline std::string base64_encode(const std::vector<std::uint8_t>& bytes)
{
    return httplib::detail::base64_encode(std::string(bytes.begin(), bytes.end()));
}

inline nlohmann::json error_body(const std::string& code, const std::string& message)
{
    return {{"error", code}, {"message", message}};
}

inline int status_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidInput: return 400;
    case ErrorCode::DegenerateGeometry: return 400;
    case ErrorCode::ExtremalPrecondition: return 422;
    case ErrorCode::Foldover: return 409;
    case ErrorCode::SolverFailure: return 500;
    }
    return 500;
}

template <typename T>
std::optional<T> optional_field(const nlohmann::json& doc, const char* key)
{
    if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
    try {
        return doc[key].get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::InvalidInput, std::string("field \"") + key + "\" has the wrong type");
    }
}

} // namespace detail

/// Parsed body of POST /api/retarget.
struct RetargetRequest {
    std::optional<std::string> image_id;
    std::vector<std::uint8_t> inline_image;
    LabelSet labels;
    RetargetOptions options;
    double preview_scale = 1.0;
    bool include_mesh = false;
};

inline RetargetRequest parse_request(const std::string& body, std::size_t max_mesh_vertices)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::InvalidInput, std::string("malformed request document: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::InvalidInput, "request must be a JSON object");
    RetargetRequest req;
    req.image_id = detail::optional_field<std::string>(doc, "image_id");
    if (const auto inline_b64 = detail::optional_field<std::string>(doc, "image"))
        req.inline_image = detail::base64_decode(*inline_b64);
    if (!req.image_id && req.inline_image.empty())
        throw Error(ErrorCode::InvalidInput, "request needs \"image_id\" or an inline base64 \"image\"");

    RetargetOptions& o = req.options;
    o.ratio = detail::optional_field<double>(doc, "ratio");
    o.width = detail::optional_field<int>(doc, "width");
    o.height = detail::optional_field<int>(doc, "height");
    if (o.ratio && (o.width || o.height))
        throw Error(ErrorCode::InvalidInput, "give either \"ratio\" or \"width\"/\"height\", not both");
    if (!o.ratio && !(o.width && o.height))
        throw Error(ErrorCode::InvalidInput, "request needs \"ratio\" or both \"width\" and \"height\"");
    if (const auto choice = detail::optional_field<std::string>(doc, "choice")) {
        const auto parsed = parse_choice(*choice);
        if (!parsed) throw Error(ErrorCode::InvalidInput, "choice must be even, weak or strong");
        o.choice = *parsed;
    }
    o.chessboard = detail::optional_field<bool>(doc, "chessboard").value_or(false);
    o.extremal = detail::optional_field<bool>(doc, "extremal").value_or(false);
    o.beta = detail::optional_field<double>(doc, "beta");
    if (const auto mv = detail::optional_field<std::int64_t>(doc, "mesh_vertices")) {
        if (*mv < 4 || static_cast<std::size_t>(*mv) > max_mesh_vertices)
            throw Error(ErrorCode::InvalidInput,
                        "mesh_vertices must lie in [4, " + std::to_string(max_mesh_vertices) + "]");
        o.mesh_vertices = static_cast<std::size_t>(*mv);
    }
    req.preview_scale = detail::optional_field<double>(doc, "preview_scale").value_or(1.0);
    if (!(req.preview_scale > 0.0 && req.preview_scale <= 1.0))
        throw Error(ErrorCode::InvalidInput, "preview_scale must lie in (0, 1]");
    req.include_mesh = detail::optional_field<bool>(doc, "include_mesh").value_or(false);
    if (doc.contains("labels") && !doc["labels"].is_null()) req.labels = parse_labels_json(doc["labels"]);
    return req;
}

inline nlohmann::json metrics_json(const RetargetPlan& plan)
{
    const RetargetMetrics& m = plan.metrics;
    nlohmann::json j{{"solve_ms", m.solve_ms},
                     {"min_jacobian", m.min_jacobian},
                     {"max_abs_mu", m.max_abs_mu},
                     {"object_scale", m.object_scale ? nlohmann::json(*m.object_scale) : nlohmann::json()},
                     {"rotated", m.rotated},
                     {"vertices", plan.mesh.vertex_count()},
                     {"faces", plan.mesh.face_count()},
                     {"warnings", m.warnings}};
    if (m.extremal)
        j["extremal"] = {{"beta", m.extremal->beta}, {"w_prime", m.extremal->w_prime}, {"h", m.extremal->h},
                         {"W", m.extremal->W}, {"H", m.extremal->H}};
    else
        j["extremal"] = nullptr;
    return j;
}

/// Source and warped vertices in pixel space plus the shared face list.
inline nlohmann::json mesh_json(const RetargetPlan& plan)
{
    nlohmann::json src = nlohmann::json::array(), dst = nlohmann::json::array(), faces = nlohmann::json::array();
    for (Point2 p : plan.mesh.vertices) {
        const Point2 q = math_to_pixel(p, plan.mesh.height);
        src.push_back({q.x, q.y});
    }
    for (Point2 p : plan.warp.positions) {
        const Point2 q = math_to_pixel(p, plan.target.height);
        dst.push_back({q.x, q.y});
    }
    for (const Face& f : plan.mesh.faces) faces.push_back({f[0], f[1], f[2]});
    return {{"source", src},
            {"target", dst},
            {"faces", faces},
            {"target_width", plan.target.width},
            {"target_height", plan.target.height}};
}

inline const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>retarget service</title></head>
<body><h1>retarget service</h1>
<p>No UI bundle configured. Start the server with <code>--ui-dir</code> to serve one.</p>
<ul><li>POST /api/images</li><li>POST /api/retarget</li><li>GET /api/health</li></ul>
</body></html>
)";

class RetargetService {
public:
    explicit RetargetService(ServiceConfig config)
        : config_(std::move(config))
        , store_(config_.max_sessions)
    {
        install();
    }

    httplib::Server& server() { return server_; }
    SessionStore& store() { return store_; }
    const ServiceConfig& config() const { return config_; }

    /// Binds to config().port (0 picks a free port) and returns the bound port.
    int bind()
    {
        if (config_.port == 0) return server_.bind_to_any_port(config_.host);
        return server_.bind_to_port(config_.host, config_.port) ? config_.port : -1;
    }

    bool listen_after_bind() { return server_.listen_after_bind(); }
    void stop() { server_.stop(); }

private:
    static void send_json(httplib::Response& res, int status, const nlohmann::json& body)
    {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static void send_error(httplib::Response& res, const Error& e)
    {
        nlohmann::json body = detail::error_body(to_string(e.code()), e.what());
        if (e.code() == ErrorCode::ExtremalPrecondition) {
            body["suggested_beta"] = kDefaultBeta;
            body["suggestion"] = "resend with \"extremal\": true and \"beta\": 50";
        }
        if (const auto* fold = dynamic_cast<const FoldoverError*>(&e)) {
            nlohmann::json faces = nlohmann::json::array();
            for (std::size_t i = 0; i < std::min<std::size_t>(fold->faces().size(), 256); ++i)
                faces.push_back(fold->faces()[i]);
            body["faces"] = faces;
            body["folded_count"] = fold->faces().size();
        }
        send_json(res, detail::status_for(e.code()), body);
    }

    void install()
    {
        server_.set_payload_max_length(config_.max_upload_bytes);

        server_.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, {{"status", "ok"}});
        });

        server_.Post("/api/images", [this](const httplib::Request& req, httplib::Response& res) {
            if (req.body.empty()) {
                send_json(res, 400, detail::error_body("invalid_input", "empty request body"));
                return;
            }
            if (req.body.size() > config_.max_upload_bytes) {
                send_json(res, 413, detail::error_body("invalid_input", "image exceeds the upload limit"));
                return;
            }
            try {
                RasterImage img = decode_image(std::vector<std::uint8_t>(req.body.begin(), req.body.end()));
                const int w = img.width, h = img.height;
                const std::string id = store_.put(std::move(img));
                send_json(res, 200, {{"id", id}, {"width", w}, {"height", h}});
            } catch (const Error& e) {
                send_error(res, e);
            }
        });

        server_.Post("/api/retarget", [this](const httplib::Request& req, httplib::Response& res) {
            try {
                handle_retarget(req, res);
            } catch (const Error& e) {
                send_error(res, e);
            } catch (const std::exception& e) {
                send_json(res, 500, detail::error_body("solver_failure", e.what()));
            }
        });

        if (!config_.ui_dir.empty() && std::filesystem::is_directory(config_.ui_dir)) {
            server_.set_mount_point("/", config_.ui_dir);
        } else {
            server_.Get("/", [](const httplib::Request&, httplib::Response& res) {
                res.set_content(kPlaceholderPage, "text/html");
            });
        }
    }

    void handle_retarget(const httplib::Request& req, httplib::Response& res)
    {
        const RetargetRequest r = parse_request(req.body, config_.max_mesh_vertices);
        std::shared_ptr<const RasterImage> src;
        if (r.image_id) {
            src = store_.get(*r.image_id);
            if (!src) {
                send_json(res, 404, detail::error_body("not_found", "unknown image id " + *r.image_id));
                return;
            }
        } else {
            src = std::make_shared<const RasterImage>(decode_image(r.inline_image));
        }
        // Labels are validated against the actual image size.
        LabelSet labels = r.labels;
        if (!labels.object_polygons.empty() || !labels.line_polylines.empty())
            labels = parse_labels_json(labels_to_json(labels), ImageSize{double(src->width), double(src->height)});

        const RetargetPlan plan = plan_retarget(src->width, src->height, labels, r.options);
        const int pw = std::max(1, static_cast<int>(std::lround(plan.target.raster_width * r.preview_scale)));
        const int ph = std::max(1, static_cast<int>(std::lround(plan.target.raster_height * r.preview_scale)));
        const RasterImage preview = render(*src, plan, pw, ph);
        const std::vector<std::uint8_t> png = encode_png(preview);

        if (req.get_param_value("format") == "png") {
            const auto& m = plan.metrics;
            res.set_header("X-Solve-Ms", std::to_string(m.solve_ms));
            res.set_header("X-Min-Jacobian", std::to_string(m.min_jacobian));
            res.set_header("X-Max-Abs-Mu", std::to_string(m.max_abs_mu));
            if (m.object_scale) res.set_header("X-Object-Scale", std::to_string(*m.object_scale));
            res.set_header("X-Extremal", m.extremal ? "1" : "0");
            res.status = 200;
            res.set_content(std::string(png.begin(), png.end()), "image/png");
            return;
        }
        nlohmann::json body{{"width", preview.width},
                            {"height", preview.height},
                            {"target_width", plan.target.raster_width},
                            {"target_height", plan.target.raster_height},
                            {"png", detail::base64_encode(png)},
                            {"metrics", metrics_json(plan)}};
        if (r.include_mesh) body["mesh"] = mesh_json(plan);
        send_json(res, 200, body);
    }

    ServiceConfig config_;
    SessionStore store_;
    httplib::Server server_;
};

} // namespace retarget::service
