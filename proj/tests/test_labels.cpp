#include <retarget/labels_io.hpp>

#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace retarget;

namespace {

std::string message_of(const std::string& text, std::optional<ImageSize> bounds = std::nullopt)
{
    try {
        parse_labels_text(text, bounds);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidInput);
        return e.what();
    }
    FAIL("expected the document to be rejected: " << text);
    return {};
}

} // namespace

TEST_CASE("empty document")
{
    const LabelSet l = parse_labels_text(R"({"objects":[],"lines":[]})");
    CHECK(l.empty());
    CHECK(parse_labels_text("{}").empty());
}

TEST_CASE("one triangle")
{
    const LabelSet l = parse_labels_text(R"({"objects":[{"polygon":[[1,1],[10,1],[5,8]]}]})");
    REQUIRE(l.object_polygons.size() == 1);
    CHECK(l.object_polygons[0].size() == 3);
    CHECK(l.object_polygons[0][2] == Point2{5, 8});
}

TEST_CASE("lines keep their points")
{
    const LabelSet l = parse_labels_text(R"({"lines":[{"polyline":[[0,5],[20,5],[20.5,9]]}]})");
    REQUIRE(l.line_polylines.size() == 1);
    CHECK(l.line_polylines[0].size() == 3);
}

TEST_CASE("negative coordinate names the offending index")
{
    const std::string msg = message_of(R"({"objects":[{"polygon":[[1,1],[4,1],[4,4]]},{"polygon":[[-5,0],[4,1],[4,4]]}]})");
    CHECK(msg.find("objects[1].polygon[0]") != std::string::npos);
    CHECK(msg.find("-5") != std::string::npos);
}

TEST_CASE("coordinates beyond the image are rejected when the size is known")
{
    const std::string doc = R"({"lines":[{"polyline":[[0,5],[120,5]]}]})";
    CHECK_NOTHROW(parse_labels_text(doc));
    CHECK(message_of(doc, ImageSize{100, 50}).find("lines[0].polyline[1]") != std::string::npos);
}

TEST_CASE("malformed documents")
{
    CHECK(message_of("{\"objects\": [").find("malformed") != std::string::npos);
    message_of("[]");
    message_of(R"({"objects":{}})");
    message_of(R"({"objects":[{"points":[[0,0],[1,0],[0,1]]}]})");
    message_of(R"({"objects":[{"polygon":[[0,0],[1,0]]}]})");
    message_of(R"({"objects":[{"polygon":[[0,0],[1,"a"],[0,1]]}]})");
    message_of(R"({"objects":[{"polygon":[[0,0],[2,2],[2,0],[0,2]]}]})");
    message_of(R"({"lines":[{"polyline":[[0,0]]}]})");
}

TEST_CASE("round trip through JSON")
{
    LabelSet l;
    l.object_polygons.push_back({{1, 2}, {30.5, 2}, {12, 40}});
    l.line_polylines.push_back({{0, 0}, {10, 0}});
    const LabelSet back = parse_labels_json(labels_to_json(l));
    CHECK(back.object_polygons == l.object_polygons);
    CHECK(back.line_polylines == l.line_polylines);
}

TEST_CASE("file loading")
{
    const auto path = std::filesystem::temp_directory_path() / "retarget_labels_test.json";
    {
        std::ofstream out(path);
        out << R"({"objects":[{"polygon":[[1,1],[10,1],[5,8]]}]})";
    }
    CHECK(parse_labels_file(path.string(), ImageSize{20, 20}).object_polygons.size() == 1);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(parse_labels_file(path.string()), Error);
}

TEST_CASE("pixel and mathematical frames flip y")
{
    CHECK(pixel_to_math({3, 10}, 100) == Point2{3, 90});
    CHECK(math_to_pixel(pixel_to_math({3, 10}, 100), 100) == Point2{3, 10});
}
