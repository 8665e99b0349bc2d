#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "panoreduce/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using namespace panoreduce;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;
constexpr int kExitDetector = 4;

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::string> out_dir) {
    PipelineConfig config = read_config(config_path);
    if (seed) config.ransac.seed = *seed;
    if (out_dir) config.outputs.dir = *out_dir;

    const RunMetrics metrics = run(config);
    std::cout << "coverage " << metrics.coverage_fraction << ", " << metrics.patch_count
              << " patches, " << metrics.detections_post_merge << " detections ("
              << metrics.detections_pre_merge << " pre-merge)\n"
              << "outputs written to " << config.outputs.dir << "\n";
    return kExitOk;
}

int cmd_render_fixture(const std::string& name, const std::string& out_dir, int width,
                       int height) {
    const SceneSpec spec = catalog_scene(name, width, height);
    const RenderedScene scene = render(spec);
    fs::create_directories(out_dir);
    const auto at = [&](const char* f) { return (fs::path(out_dir) / f).string(); };
    write_rgb(scene.panorama.rgb, at("rgb.ppm"));
    write_depth(scene.panorama.depth, at("depth.pfm"));
    write_scene(spec, at("scene.json"));
    write_truth({scene.gt_planes, scene.gt_objects}, at("truth.json"));
    std::cout << name << ": " << width << "x" << height << ", " << scene.gt_planes.size()
              << " planes, " << scene.gt_objects.size() << " objects -> " << out_dir << "\n";
    return kExitOk;
}

int cmd_compare_baseline(const std::string& path_a, const std::string& path_b,
                         std::optional<std::string> diff_path) {
    const Bitmap a = read_mask(path_a);
    const Bitmap b = read_mask(path_b);
    const BaselineReport report = compare_baseline(a, b);
    nlohmann::json j = {{"coverage_a", report.coverage_a},
                        {"coverage_b", report.coverage_b},
                        {"ratio", report.ratio},
                        {"pixels_only_a", report.only_a.count()},
                        {"pixels_only_b", report.only_b.count()},
                        {"pixels_both", report.both.count()}};
    std::cout << j.dump(2) << "\n";
    if (diff_path) write_rgb(baseline_diff_image(report), *diff_path);
    return kExitOk;
}

int cmd_static_band(int width, int height, double fraction, const std::string& out_path) {
    write_mask(static_band_mask(width, height, fraction), out_path);
    std::cout << "static band " << fraction << " -> " << out_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LiDAR-driven search-space reduction for panorama privacy blurring"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    auto* run_cmd = app.add_subcommand("run", "execute the full pipeline");
    run_cmd->add_option("--config", config_path, "pipeline config JSON")->required();
    run_cmd->add_option("--seed", seed, "override ransac.seed");
    run_cmd->add_option("--out", out_dir, "override outputs.dir");

    std::string fixture_name;
    std::string fixture_out;
    int fx_width = 1024;
    int fx_height = 512;
    auto* render_cmd = app.add_subcommand("render-fixture", "write a catalog scene to disk");
    render_cmd->add_option("--name", fixture_name, "fixture name")->required();
    render_cmd->add_option("--out", fixture_out, "output directory")->required();
    render_cmd->add_option("--width", fx_width, "render width");
    render_cmd->add_option("--height", fx_height, "render height");

    std::string mask_a;
    std::string mask_b;
    std::optional<std::string> diff_path;
    auto* cmp_cmd = app.add_subcommand("compare-baseline", "compare two processing masks");
    cmp_cmd->add_option("--a", mask_a, "baseline mask PGM")->required();
    cmp_cmd->add_option("--b", mask_b, "candidate mask PGM")->required();
    cmp_cmd->add_option("--diff", diff_path, "write an RGB difference image");

    int sb_width = 4096;
    int sb_height = 2048;
    double sb_fraction = 0.66;
    std::string sb_out;
    auto* band_cmd = app.add_subcommand("static-band", "write the fixed-band baseline mask");
    band_cmd->add_option("--width", sb_width, "mask width");
    band_cmd->add_option("--height", sb_height, "mask height");
    band_cmd->add_option("--fraction", sb_fraction, "band coverage fraction");
    band_cmd->add_option("--out", sb_out, "output PGM path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(config_path, seed, out_dir);
        if (render_cmd->parsed()) return cmd_render_fixture(fixture_name, fixture_out, fx_width, fx_height);
        if (cmp_cmd->parsed()) return cmd_compare_baseline(mask_a, mask_b, diff_path);
        if (band_cmd->parsed()) return cmd_static_band(sb_width, sb_height, sb_fraction, sb_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DetectorError& e) {
        std::cerr << "detector error: " << e.what() << "\n";
        return kExitDetector;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    }
    return kExitConfig;
}
