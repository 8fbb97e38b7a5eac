#include <retarget/selfcheck.hpp>
#include <retarget/service.hpp>

#include <catch_amalgamated.hpp>

#include <thread>

using namespace retarget;
using nlohmann::json;

namespace {

// One server per test case, on a free localhost port.
struct LiveService {
    service::RetargetService svc;
    std::thread worker;
    int port = -1;

    explicit LiveService(service::ServiceConfig cfg = {})
        : svc(with_free_port(std::move(cfg)))
    {
        port = svc.bind();
        REQUIRE(port > 0);
        worker = std::thread([this] { svc.listen_after_bind(); });
    }

    ~LiveService()
    {
        svc.stop();
        worker.join();
    }

    httplib::Client client() const
    {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(60, 0);
        return c;
    }

    static service::ServiceConfig with_free_port(service::ServiceConfig cfg)
    {
        cfg.port = 0;
        return cfg;
    }
};

std::string png_of(const RasterImage& img)
{
    const auto bytes = encode_png(img);
    return {bytes.begin(), bytes.end()};
}

RasterImage test_image(int w, int h)
{
    std::mt19937_64 rng(61);
    return selfcheck::noise_image(rng, w, h);
}

std::string upload(httplib::Client& c, const RasterImage& img)
{
    auto res = c.Post("/api/images", png_of(img), "image/png");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    return json::parse(res->body).at("id").get<std::string>();
}

json labels_json(const LabelSet& l) { return labels_to_json(l); }

} // namespace

TEST_CASE("base64 round trip")
{
    std::vector<std::uint8_t> bytes;
    for (int i = 0; i < 300; ++i) bytes.push_back(static_cast<std::uint8_t>(i * 7));
    for (std::size_t n : {0, 1, 2, 3, 4, 299, 300}) {
        const std::vector<std::uint8_t> part(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
        CHECK(service::detail::base64_decode(service::detail::base64_encode(part)) == part);
    }
    CHECK(service::detail::base64_decode("data:image/png;base64,QUJD") == std::vector<std::uint8_t>{'A', 'B', 'C'});
    CHECK_THROWS_AS(service::detail::base64_decode("QU*D"), Error);
}

TEST_CASE("session store evicts the least recently used image")
{
    service::SessionStore store(2, 1);
    const std::string a = store.put(RasterImage(2, 2, 1));
    const std::string b = store.put(RasterImage(3, 3, 1));
    CHECK(a != b);
    CHECK(store.get(a));
    const std::string c = store.put(RasterImage(4, 4, 1));
    CHECK(store.size() == 2);
    CHECK(store.get(a));
    CHECK_FALSE(store.get(b));
    CHECK(store.get(c)->width == 4);
}

TEST_CASE("upload endpoint")
{
    LiveService live;
    auto c = live.client();
    const RasterImage img = test_image(64, 48);
    auto res = c.Post("/api/images", png_of(img), "image/png");
    REQUIRE(res);
    CHECK(res->status == 200);
    const json body = json::parse(res->body);
    CHECK(body.at("width") == 64);
    CHECK(body.at("height") == 48);
    CHECK(upload(c, img) != body.at("id").get<std::string>());

    auto empty = c.Post("/api/images", "", "image/png");
    REQUIRE(empty);
    CHECK(empty->status == 400);

    auto junk = c.Post("/api/images", "GIF89a....", "image/gif");
    REQUIRE(junk);
    CHECK(junk->status == 400);
    CHECK(json::parse(junk->body).at("error") == "invalid_input");
}

TEST_CASE("uploads over the limit get 413")
{
    service::ServiceConfig cfg;
    cfg.max_upload_bytes = 1024;
    LiveService live(cfg);
    auto c = live.client();
    auto res = c.Post("/api/images", png_of(test_image(64, 64)), "image/png");
    REQUIRE(res);
    CHECK(res->status == 413);
}

TEST_CASE("retarget endpoint")
{
    LiveService live;
    auto c = live.client();
    const RasterImage img = test_image(120, 90);
    const std::string id = upload(c, img);

    SECTION("ratio 1 returns the source")
    {
        auto res = c.Post("/api/retarget", json{{"image_id", id}, {"ratio", 1.0}}.dump(), "application/json");
        REQUIRE(res);
        REQUIRE(res->status == 200);
        const json body = json::parse(res->body);
        const auto png = service::detail::base64_decode(body.at("png").get<std::string>());
        CHECK(decode_image(png) == img);
        CHECK(body.at("metrics").at("extremal").is_null());
    }

    SECTION("ratio 0.5 weak with one object")
    {
        json req{{"image_id", id}, {"ratio", 0.5}, {"choice", "weak"}, {"include_mesh", true},
                 {"labels", labels_json(selfcheck::demo_scene(120, 90, false))}};
        auto res = c.Post("/api/retarget", req.dump(), "application/json");
        REQUIRE(res);
        REQUIRE(res->status == 200);
        const json body = json::parse(res->body);
        CHECK(body.at("width") == 60);
        CHECK(body.at("height") == 90);
        CHECK(body.at("metrics").at("min_jacobian").get<double>() > 0.0);
        CHECK(body.at("metrics").at("object_scale").is_number());
        const json& mesh = body.at("mesh");
        CHECK(mesh.at("source").size() == mesh.at("target").size());
        CHECK(mesh.at("faces").size() > 0);
    }

    SECTION("ratio 0.25 falls back to extremal mode")
    {
        json req{{"image_id", id}, {"ratio", 0.25}, {"choice", "strong"},
                 {"labels", labels_json(selfcheck::demo_scene(120, 90, false))}};
        auto res = c.Post("/api/retarget", req.dump(), "application/json");
        REQUIRE(res);
        REQUIRE(res->status == 200);
        const json body = json::parse(res->body);
        CHECK(body.at("metrics").at("extremal").at("beta") == 50.0);
        CHECK(body.at("metrics").at("min_jacobian").get<double>() > 0.0);
    }

    SECTION("forced extremal on a wide target is 422 with a suggestion")
    {
        json req{{"image_id", id}, {"ratio", 0.75}, {"choice", "weak"}, {"extremal", true},
                 {"labels", labels_json(selfcheck::demo_scene(120, 90, false))}};
        auto res = c.Post("/api/retarget", req.dump(), "application/json");
        REQUIRE(res);
        CHECK(res->status == 422);
        const json body = json::parse(res->body);
        CHECK(body.at("error") == "extremal_precondition");
        CHECK(body.at("suggested_beta") == 50.0);
    }

    SECTION("foldover is 409 with the face list")
    {
        LabelSet labels = selfcheck::demo_scene(120, 90, false);
        labels.line_polylines.push_back({{4.8, 63}, {115.2, 63}});
        json req{{"image_id", id}, {"ratio", 0.5}, {"choice", "strong"}, {"mesh_vertices", 600},
                 {"labels", labels_json(labels)}};
        auto res = c.Post("/api/retarget", req.dump(), "application/json");
        REQUIRE(res);
        CHECK(res->status == 409);
        const json body = json::parse(res->body);
        CHECK(body.at("error") == "foldover");
        CHECK(body.at("folded_count").get<std::size_t>() == body.at("faces").size());
        CHECK(body.at("faces").size() > 0);
    }

    SECTION("raw PNG response with metric headers")
    {
        auto res = c.Post("/api/retarget?format=png", json{{"image_id", id}, {"ratio", 0.5}}.dump(),
                          "application/json");
        REQUIRE(res);
        REQUIRE(res->status == 200);
        CHECK(res->get_header_value("Content-Type") == "image/png");
        CHECK(res->has_header("X-Min-Jacobian"));
        const RasterImage out = decode_image({res->body.begin(), res->body.end()});
        CHECK(out.width == 60);
    }

    SECTION("preview scale")
    {
        auto res = c.Post("/api/retarget", json{{"image_id", id}, {"ratio", 0.5}, {"preview_scale", 0.5}}.dump(),
                          "application/json");
        REQUIRE(res);
        REQUIRE(res->status == 200);
        const json body = json::parse(res->body);
        CHECK(body.at("width") == 30);
        CHECK(body.at("target_width") == 60);
    }

    SECTION("inline image")
    {
        const auto bytes = encode_png(img);
        json req{{"image", service::detail::base64_encode(bytes)}, {"width", 100}, {"height", 60}};
        auto res = c.Post("/api/retarget", req.dump(), "application/json");
        REQUIRE(res);
        REQUIRE(res->status == 200);
        CHECK(json::parse(res->body).at("height") == 60);
    }

    SECTION("bad requests")
    {
        auto unknown = c.Post("/api/retarget", json{{"image_id", "nope"}, {"ratio", 0.5}}.dump(), "application/json");
        REQUIRE(unknown);
        CHECK(unknown->status == 404);

        for (const std::string& body : {std::string("{not json"), json{{"image_id", id}}.dump(),
                                        json{{"image_id", id}, {"ratio", 0.5}, {"width", 10}, {"height", 10}}.dump(),
                                        json{{"image_id", id}, {"ratio", 0.5}, {"choice", "medium"}}.dump(),
                                        json{{"image_id", id}, {"ratio", "half"}}.dump(),
                                        json{{"image_id", id}, {"ratio", -1}}.dump(),
                                        json{{"image_id", id}, {"ratio", 0.5}, {"mesh_vertices", 1000000}}.dump(),
                                        json{{"image_id", id}, {"ratio", 0.5},
                                             {"labels", {{"lines", {{{"polyline", {{0, 0}, {500, 0}}}}}}}}}.dump()}) {
            auto res = c.Post("/api/retarget", body, "application/json");
            REQUIRE(res);
            INFO(body);
            CHECK(res->status == 400);
            CHECK(json::parse(res->body).contains("message"));
        }
    }
}

TEST_CASE("health and index")
{
    LiveService live;
    auto c = live.client();
    auto health = c.Get("/api/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    auto index = c.Get("/");
    REQUIRE(index);
    CHECK(index->status == 200);
    CHECK(index->body.find("retarget service") != std::string::npos);
}
