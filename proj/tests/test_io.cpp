#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "panoreduce/io.hpp"

using namespace panoreduce;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("panoreduce-test-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("P6 decode of a hand-written two-pixel file") {
    TempDir tmp;
    const std::string path = tmp.file("two.ppm");
    std::string bytes = "P6\n2 1\n255\n";
    const unsigned char px[6] = {255, 0, 0, 0, 255, 0};
    bytes.append(reinterpret_cast<const char*>(px), 6);
    write_bytes(path, bytes);

    const ImageRgb img = read_rgb(path);
    CHECK(img.width == 2);
    CHECK(img.height == 1);
    CHECK(img.pixels == std::vector<std::uint8_t>{255, 0, 0, 0, 255, 0});
}

TEST_CASE("rgb round-trip is byte-identical") {
    TempDir tmp;
    std::mt19937_64 rng(12);
    ImageRgb img(33, 17);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng());

    const std::string a = tmp.file("a.ppm");
    const std::string b = tmp.file("b.ppm");
    write_rgb(img, a);
    const ImageRgb back = read_rgb(a);
    CHECK(back.pixels == img.pixels);
    write_rgb(back, b);
    CHECK(read_bytes(a) == read_bytes(b));
}

TEST_CASE("ppm reader handles comments and reports truncation offsets") {
    TempDir tmp;
    const std::string ok = tmp.file("c.ppm");
    std::string bytes = "P6 # comment\n# another\n 2 1 255 ";
    bytes += std::string("\xff\x00\x00\x00\xff\x00", 6);
    write_bytes(ok, bytes);
    CHECK(read_rgb(ok).width == 2);

    // header claims 4x4 but payload has 47 of 48 bytes
    const std::string trunc = tmp.file("t.ppm");
    std::string bad = "P6\n4 4\n255\n" + std::string(47, 'x');
    write_bytes(trunc, bad);
    CHECK_THROWS_WITH_AS(read_rgb(trunc),
                         doctest::Contains("truncated pixel payload at byte"), FormatError);

    const std::string magic = tmp.file("m.ppm");
    write_bytes(magic, "P5\n2 1\n255\nxx");
    CHECK_THROWS_AS(read_rgb(magic), FormatError);

    const std::string maxval = tmp.file("mv.ppm");
    write_bytes(maxval, "P6\n1 1\n65535\nxxxxxx");
    CHECK_THROWS_AS(read_rgb(maxval), FormatError);
}

TEST_CASE("pfm stores meters and non-finite no-return values") {
    TempDir tmp;
    const std::string path = tmp.file("d.pfm");

    DepthMap one(1, 1);
    one.at(0, 0) = 2.5f;
    write_depth(one, path);
    const DepthMap back = read_depth(path);
    CHECK(back.width == 1);
    CHECK(back.height == 1);
    CHECK(back.at(0, 0) == 2.5f);

    DepthMap pair(2, 1);
    pair.at(0, 0) = 1.0f;
    pair.at(1, 0) = std::numeric_limits<float>::infinity();
    write_depth(pair, path);
    const DepthMap pback = read_depth(path);
    CHECK(pback.at(0, 0) == 1.0f);
    CHECK(std::isinf(pback.at(1, 0)));
}

TEST_CASE("pfm round-trip is byte-identical and row order survives") {
    TempDir tmp;
    std::mt19937_64 rng(34);
    DepthMap depth(7, 5);
    for (auto& d : depth.values) d = 0.25f + static_cast<float>(rng() % 10000) / 256.0f;
    depth.at(3, 0) = std::numeric_limits<float>::infinity();  // top row marker

    const std::string a = tmp.file("a.pfm");
    const std::string b = tmp.file("b.pfm");
    write_depth(depth, a);
    const DepthMap back = read_depth(a);
    CHECK(back.values == depth.values);
    write_depth(back, b);
    CHECK(read_bytes(a) == read_bytes(b));
}

TEST_CASE("pfm rejects color magic and positive scale") {
    TempDir tmp;
    const std::string color = tmp.file("c.pfm");
    write_bytes(color, "PF\n1 1\n-1\n" + std::string(12, '\0'));
    CHECK_THROWS_WITH_AS(read_depth(color), doctest::Contains("'PF'"), FormatError);

    const std::string big = tmp.file("b.pfm");
    write_bytes(big, "Pf\n1 1\n1.0\n" + std::string(4, '\0'));
    CHECK_THROWS_WITH_AS(read_depth(big), doctest::Contains("big-endian"), FormatError);
}

TEST_CASE("mask pgm uses 0/255 strictly") {
    TempDir tmp;
    const std::string path = tmp.file("m.pgm");
    Bitmap mask(4, 2);
    mask.set(1, 0);
    mask.set(3, 1);
    write_mask(mask, path);
    const Bitmap back = read_mask(path);
    CHECK(back.bits == mask.bits);

    const std::string bad = tmp.file("bad.pgm");
    write_bytes(bad, std::string("P5\n2 1\n255\n") + char(0) + char(7));
    CHECK_THROWS_WITH_AS(read_mask(bad), doctest::Contains("neither 0 nor 255"), FormatError);
}

TEST_CASE("fuzzed truncations of every format raise FormatError, never crash") {
    TempDir tmp;
    ImageRgb img(5, 3);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = static_cast<std::uint8_t>(i);
    const std::string ppm = tmp.file("f.ppm");
    write_rgb(img, ppm);
    const std::string full = read_bytes(ppm);
    for (std::size_t cut = 0; cut < full.size(); ++cut) {
        const std::string part = tmp.file("cut.ppm");
        write_bytes(part, full.substr(0, cut));
        CHECK_THROWS_AS(read_rgb(part), FormatError);
    }

    DepthMap depth(3, 2, 1.5f);
    const std::string pfm = tmp.file("f.pfm");
    write_depth(depth, pfm);
    const std::string dfull = read_bytes(pfm);
    for (std::size_t cut = 0; cut < dfull.size(); ++cut) {
        const std::string part = tmp.file("cut.pfm");
        write_bytes(part, dfull.substr(0, cut));
        CHECK_THROWS_AS(read_depth(part), FormatError);
    }
}

TEST_CASE("scene json accepts the minimal document") {
    const SceneSpec spec = parse_scene_json(
        R"({"camera_height":2.5,"objects":[],"walls":[],"render":{"width":512,"height":256}})");
    CHECK(spec.camera_height == 2.5);
    CHECK(spec.walls.empty());
    CHECK(spec.objects.empty());
    CHECK(spec.render_width == 512);
    CHECK(spec.ground_tilt_deg == 0.0);
}

TEST_CASE("scene json rejects unknown fields naming the path") {
    CHECK_THROWS_WITH_AS(
        parse_scene_json(
            R"({"camera_height":2.5,"render":{"width":512,"height":256},"wibble":1})"),
        doctest::Contains("wibble"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_scene_json(
            R"({"camera_height":2.5,"render":{"width":512,"height":256,"depth":3}})"),
        doctest::Contains("render.depth"), ConfigError);
}

TEST_CASE("scene json enforces the 2 m object rule") {
    const char* tall = R"({"camera_height":2.5,"render":{"width":512,"height":256},
        "objects":[{"class":"face","center":[4,0,2.05],"width":0.5,"height":0.5}]})";
    CHECK_THROWS_WITH_AS(parse_scene_json(tall), doctest::Contains("2 m rule"), ConfigError);

    const char* flagged = R"({"camera_height":2.5,"render":{"width":512,"height":256},
        "objects":[{"class":"face","center":[4,0,2.05],"width":0.5,"height":0.5,
                    "violates_height_assumption":true}]})";
    CHECK(parse_scene_json(flagged).objects[0].violates_height_assumption);
}

TEST_CASE("scene round-trip through disk") {
    TempDir tmp;
    SceneSpec spec = catalog_scene("street_canyon", 512, 256);
    const std::string path = tmp.file("scene.json");
    write_scene(spec, path);
    const SceneSpec back = read_scene(path);
    CHECK(back.walls.size() == spec.walls.size());
    CHECK(back.objects.size() == spec.objects.size());
    CHECK(back.camera_height == spec.camera_height);
    CHECK(back.objects[0].center.x == spec.objects[0].center.x);
}

TEST_CASE("config defaults follow the documented values") {
    const PipelineConfig cfg = parse_config_json(R"({"input":{"fixture":"flat_empty"}})");
    CHECK(cfg.ransac.distance_threshold_m == 0.5);
    CHECK(cfg.ransac.max_iterations == 500);
    CHECK(cfg.ransac.top_k == 10);
    CHECK(cfg.ransac.min_inliers == 50);
    CHECK(cfg.mask.buffer_px == 350);
    CHECK(cfg.mask.reference_height_px == 11180);
    CHECK(cfg.tiler.patch_w == 1200);
    CHECK(cfg.tiler.patch_h == 600);
    CHECK(cfg.tiler.overlap_px == 120);
    CHECK(cfg.downsample_factor == 10);
    CHECK(cfg.blur.sigma_frac == 0.35);
    CHECK(cfg.detector.kind == DetectorKind::oracle);

    // partial override keeps the remaining defaults
    const PipelineConfig half = parse_config_json(
        R"({"input":{"fixture":"flat_empty"},"ransac":{"max_iterations":100}})");
    CHECK(half.ransac.max_iterations == 100);
    CHECK(half.ransac.distance_threshold_m == 0.5);
}

TEST_CASE("config rejects conflicting input sources and unknown keys") {
    CHECK_THROWS_WITH_AS(
        parse_config_json(
            R"({"input":{"fixture":"flat_empty","rgb":"a.ppm","depth":"a.pfm"}})"),
        doctest::Contains("exactly one source"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"input":{}})"),
                         doctest::Contains("exactly one source"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config_json(R"({"input":{"fixture":"flat_empty"},"ransca":{}})"),
        doctest::Contains("ransca"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config_json(
            R"({"input":{"rgb":"a.ppm","depth":"a.pfm"},"detector":{"type":"oracle"}})"),
        doctest::Contains("oracle"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config_json(R"({"input":{"fixture":"flat_empty"},"detector":{"type":"external"}})"),
        doctest::Contains("command"), ConfigError);
}

TEST_CASE("detections round-trip losslessly") {
    TempDir tmp;
    std::vector<DetectionRecord> dets;
    dets.push_back({ObjectClass::face, {10.0, 20.0, 110.5, 70.25}, 0.97});
    dets.push_back({ObjectClass::plate, {0.0, 0.0, 33.0, 12.0}, 0.125});
    const std::string path = tmp.file("dets.json");
    write_detections(dets, path);
    const auto back = read_detections(path);
    REQUIRE(back.size() == 2u);
    CHECK(back[0].cls == ObjectClass::face);
    CHECK(back[0].box.u_max == 110.5);
    CHECK(back[0].score == 0.97);
    CHECK(back[1].score == 0.125);

    // a second write of the read-back values is byte-identical
    const std::string again = tmp.file("dets2.json");
    write_detections(back, again);
    CHECK(read_bytes(path) == read_bytes(again));
}

TEST_CASE("detection file validation names the offending entry") {
    TempDir tmp;
    const std::string path = tmp.file("bad.json");
    write_bytes(path, R"([{"class":"face","box":[10,0,5,5],"score":0.5}])");
    CHECK_THROWS_WITH_AS(read_detections(path), doctest::Contains("[0].box"), ConfigError);
    write_bytes(path, R"([{"class":"cat","box":[0,0,5,5],"score":0.5}])");
    CHECK_THROWS_AS(read_detections(path), ConfigError);
    write_bytes(path, R"([{"class":"face","box":[0,0,5,5],"score":1.5}])");
    CHECK_THROWS_WITH_AS(read_detections(path), doctest::Contains("score"), ConfigError);
}

TEST_CASE("truth files round-trip") {
    TempDir tmp;
    SceneTruth truth;
    truth.planes.push_back({{0, 0, 1}, 2.5});
    truth.objects.push_back({ObjectClass::plate, {5, 10, 25, 30}, {1, 2, 0.3}, false});
    const std::string path = tmp.file("truth.json");
    write_truth(truth, path);
    const SceneTruth back = read_truth(path);
    REQUIRE(back.planes.size() == 1u);
    REQUIRE(back.objects.size() == 1u);
    CHECK(back.planes[0].offset == 2.5);
    CHECK(back.objects[0].box.u_max == 25);
}

}  // TEST_SUITE
