#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "panoreduce/pipeline.hpp"

using namespace panoreduce;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("panoreduce-pipe-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

PipelineConfig small_fixture_config(const std::string& fixture, const std::string& out_dir) {
    PipelineConfig cfg;
    cfg.input.fixture = fixture;
    cfg.input.fixture_width = 1024;
    cfg.input.fixture_height = 512;
    cfg.tiler.patch_w = 300;
    cfg.tiler.patch_h = 150;
    cfg.tiler.overlap_px = 40;
    cfg.outputs.dir = out_dir;
    return cfg;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("flat_empty with the oracle yields no detections but real coverage") {
    TempDir tmp;
    const PipelineConfig cfg = small_fixture_config("flat_empty", tmp.sub("out"));
    const RunMetrics metrics = run(cfg);
    CHECK(metrics.detections_post_merge == 0);
    CHECK(metrics.detections_pre_merge == 0);
    CHECK(metrics.coverage_fraction > 0.2);
    CHECK(metrics.coverage_fraction < 0.45);
    CHECK(metrics.patch_count > 0);
    CHECK(fs::exists(tmp.sub("out") + "/mask.pgm"));
    CHECK(fs::exists(tmp.sub("out") + "/detections.json"));
    CHECK(fs::exists(tmp.sub("out") + "/blurred.ppm"));
    CHECK(fs::exists(tmp.sub("out") + "/metrics.json"));
    CHECK(read_detections(tmp.sub("out") + "/detections.json").empty());
    // stage timings present
    for (const char* stage : {"unproject", "ransac", "mask", "tile", "detect", "merge", "blur"}) {
        REQUIRE(metrics.stage_seconds.count(stage) == 1u);
        CHECK(metrics.stage_seconds.at(stage) >= 0.0);
    }
}

TEST_CASE("street_canyon end to end: every object detected, merged and blurred") {
    TempDir tmp;
    PipelineConfig cfg = small_fixture_config("street_canyon", tmp.sub("out"));
    cfg.outputs.overlay = true;
    cfg.outputs.patches = true;
    const RunMetrics metrics = run(cfg);

    const RenderedScene scene = render(catalog_scene("street_canyon", 1024, 512));
    const auto detections = read_detections(tmp.sub("out") + "/detections.json");
    CHECK(metrics.detections_post_merge == static_cast<int>(detections.size()));

    // recall: each ground-truth box is covered by a merged detection
    for (const auto& gt : scene.gt_objects) {
        double best = 0.0;
        for (const auto& d : detections) best = std::max(best, iou(gt.box, d.box, 1024));
        CHECK(best >= 0.9);
    }

    // mask recall: ground-truth boxes fully inside the processing bitmap
    const Bitmap mask = read_mask(tmp.sub("out") + "/mask.pgm");
    for (const auto& gt : scene.gt_objects) {
        for (int v = static_cast<int>(gt.box.v_min); v < static_cast<int>(gt.box.v_max); ++v)
            for (int u = static_cast<int>(gt.box.u_min); u < static_cast<int>(gt.box.u_max); ++u)
                CHECK(mask.get(u, v));
    }

    // blurred output differs from the render only inside padded boxes
    const ImageRgb blurred = read_rgb(tmp.sub("out") + "/blurred.ppm");
    const ImageRgb& original = scene.panorama.rgb;
    REQUIRE(blurred.pixels.size() == original.pixels.size());
    std::size_t changed = 0;
    for (int v = 0; v < 512; ++v) {
        for (int u = 0; u < 1024; ++u) {
            if (std::memcmp(blurred.at(u, v), original.at(u, v), 3) == 0) continue;
            ++changed;
            bool in_any = false;
            for (const auto& d : detections) {
                if (u >= d.box.u_min - 4 && u < d.box.u_max + 4 && v >= d.box.v_min - 4 &&
                    v < d.box.v_max + 4)
                    in_any = true;
            }
            CHECK(in_any);
        }
    }
    CHECK(changed > 0u);
    CHECK(fs::exists(tmp.sub("out") + "/overlay.ppm"));
    CHECK(fs::directory_iterator(tmp.sub("out") + "/patches") != fs::directory_iterator{});
}

TEST_CASE("config invariants reject ambiguous input") {
    PipelineConfig cfg;
    cfg.input.fixture = "flat_empty";
    cfg.input.rgb_path = "a.ppm";
    cfg.input.depth_path = "a.pfm";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("file inputs with a truth file reproduce the fixture run") {
    TempDir tmp;
    const SceneSpec spec = catalog_scene("street_canyon", 1024, 512);
    const RenderedScene scene = render(spec);
    write_rgb(scene.panorama.rgb, tmp.sub("rgb.ppm"));
    write_depth(scene.panorama.depth, tmp.sub("depth.pfm"));
    write_truth({scene.gt_planes, scene.gt_objects}, tmp.sub("truth.json"));

    PipelineConfig cfg = small_fixture_config("street_canyon", tmp.sub("out_files"));
    cfg.input.fixture.reset();
    cfg.input.rgb_path = tmp.sub("rgb.ppm");
    cfg.input.depth_path = tmp.sub("depth.pfm");
    cfg.input.truth_path = tmp.sub("truth.json");
    const RunMetrics from_files = run(cfg);

    PipelineConfig fix = small_fixture_config("street_canyon", tmp.sub("out_fix"));
    const RunMetrics from_fixture = run(fix);

    CHECK(from_files.coverage_fraction == from_fixture.coverage_fraction);
    CHECK(from_files.detections_post_merge == from_fixture.detections_post_merge);
    CHECK(read_bytes(tmp.sub("out_files") + "/detections.json") ==
          read_bytes(tmp.sub("out_fix") + "/detections.json"));
}

TEST_CASE("identical config and seed give byte-identical outputs") {
    TempDir tmp;
    PipelineConfig a = small_fixture_config("street_canyon", tmp.sub("a"));
    PipelineConfig b = small_fixture_config("street_canyon", tmp.sub("b"));
    run(a);
    run(b);
    for (const char* f : {"/detections.json", "/mask.pgm", "/blurred.ppm"}) {
        CAPTURE(f);
        const std::string ba = read_bytes(tmp.sub("a") + f);
        CHECK(!ba.empty());
        CHECK(ba == read_bytes(tmp.sub("b") + f));
    }
}

TEST_CASE("metrics coverage equals a recount of the emitted mask") {
    TempDir tmp;
    const RunMetrics metrics = run(small_fixture_config("sloped_street", tmp.sub("out")));
    const Bitmap mask = read_mask(tmp.sub("out") + "/mask.pgm");
    CHECK(metrics.coverage_fraction == doctest::Approx(coverage_fraction(mask)).epsilon(1e-12));
}

TEST_CASE("failing stages abort the run and leave no outputs behind") {
    TempDir tmp;
    // unreadable input -> stage error before anything is produced
    PipelineConfig cfg = small_fixture_config("flat_empty", tmp.sub("out"));
    cfg.input.fixture.reset();
    cfg.input.rgb_path = tmp.sub("missing.ppm");
    cfg.input.depth_path = tmp.sub("missing.pfm");
    cfg.detector.kind = DetectorKind::external;
    cfg.detector.external.command = {"true"};
    CHECK_THROWS_AS(run(cfg), StageError);
    CHECK_FALSE(fs::exists(tmp.sub("out") + "/mask.pgm"));

    // detector dying mid-run keeps its own error type and writes nothing
    PipelineConfig broken = small_fixture_config("flat_empty", tmp.sub("out2"));
    broken.detector.kind = DetectorKind::external;
    broken.detector.external.command = {"true"};  // exits without answering
    CHECK_THROWS_AS(run(broken), DetectorError);
    CHECK_FALSE(fs::exists(tmp.sub("out2") + "/mask.pgm"));
    CHECK_FALSE(fs::exists(tmp.sub("out2") + "/detections.json"));
}

TEST_CASE("rooftop objects above the band are not blurred (documented limitation)") {
    TempDir tmp;
    const RunMetrics metrics = run(small_fixture_config("rooftop_person", tmp.sub("out")));
    CHECK(metrics.detections_post_merge == 0);

    const RenderedScene scene = render(catalog_scene("rooftop_person", 1024, 512));
    const Bitmap mask = read_mask(tmp.sub("out") + "/mask.pgm");
    const auto& box = scene.gt_objects.at(0).box;
    bool fully_covered = true;
    for (int v = static_cast<int>(box.v_min); v < static_cast<int>(box.v_max); ++v)
        for (int u = static_cast<int>(box.u_min); u < static_cast<int>(box.u_max); ++u)
            fully_covered = fully_covered && mask.get(u, v);
    CHECK_FALSE(fully_covered);
}

TEST_CASE("compare_baseline ratios") {
    Bitmap a(64, 32);
    Bitmap b(64, 32);
    for (int v = 0; v < 16; ++v)
        for (int u = 0; u < 64; ++u) a.set(u, v), b.set(u, v);
    const BaselineReport same = compare_baseline(a, b);
    CHECK(same.ratio == 1.0);
    CHECK(same.coverage_a == 0.5);

    const Bitmap empty(64, 32);
    CHECK(compare_baseline(empty, b).ratio == 0.0);

    Bitmap smaller(64, 32);
    for (int v = 0; v < 8; ++v)
        for (int u = 0; u < 64; ++u) smaller.set(u, v);
    const BaselineReport half = compare_baseline(a, smaller);
    CHECK(half.ratio == doctest::Approx(0.5));
    CHECK(half.only_a.count() == 64u * 8u);
    CHECK(half.only_b.count() == 0u);
    CHECK(half.both.count() == 64u * 8u);

    Bitmap mism(32, 32);
    CHECK_THROWS_AS(compare_baseline(a, mism), ContractViolation);
}

TEST_CASE("dynamic mask beats the static band on flat ground") {
    TempDir tmp;
    const RunMetrics metrics = run(small_fixture_config("flat_empty", tmp.sub("out")));
    const Bitmap dynamic = read_mask(tmp.sub("out") + "/mask.pgm");
    const Bitmap band = static_band_mask(1024, 512, 0.66);
    const BaselineReport report = compare_baseline(band, dynamic);
    CHECK(report.ratio < 1.0);
    CHECK(report.ratio == doctest::Approx(metrics.coverage_fraction / 0.66).epsilon(0.01));
}

}  // TEST_SUITE
