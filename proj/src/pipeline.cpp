#include "panoreduce/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "panoreduce/geometry.hpp"

namespace panoreduce {

namespace fs = std::filesystem;

namespace {

class StageTimer {
public:
    explicit StageTimer(RunMetrics& metrics) : metrics_(metrics) {}

    template <typename Fn>
    auto time(const std::string& stage, Fn&& fn) -> decltype(fn()) {
        const auto start = std::chrono::steady_clock::now();
        try {
            if constexpr (std::is_void_v<decltype(fn())>) {
                fn();
                record(stage, start);
            } else {
                auto result = fn();
                record(stage, start);
                return result;
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const DetectorError& e) {
            throw DetectorError("stage '" + stage + "': " + e.what());
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(stage, e.what());
        }
    }

private:
    void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
        const auto end = std::chrono::steady_clock::now();
        metrics_.stage_seconds[stage] = std::chrono::duration<double>(end - start).count();
    }

    RunMetrics& metrics_;
};

// Removes everything this run wrote if it dies half way.
class OutputTracker {
public:
    ~OutputTracker() {
        if (!armed_) return;
        for (const auto& p : paths_) {
            std::error_code ec;
            fs::remove_all(p, ec);
        }
    }

    std::string track(const std::string& path) {
        paths_.push_back(path);
        return path;
    }

    void disarm() { armed_ = false; }

private:
    std::vector<std::string> paths_;
    bool armed_ = true;
};

nlohmann::json metrics_to_json(const RunMetrics& m) {
    nlohmann::json j;
    j["coverage_fraction"] = m.coverage_fraction;
    j["patch_count"] = m.patch_count;
    j["detections_pre_merge"] = m.detections_pre_merge;
    j["detections_post_merge"] = m.detections_post_merge;
    j["stage_seconds"] = m.stage_seconds;
    j["planes"] = nlohmann::json::array();
    for (const auto& p : m.planes)
        j["planes"].push_back(
            {{"orientation", to_string(p.orientation)}, {"inliers", p.inlier_count}});
    return j;
}

}  // namespace

RunMetrics run(const PipelineConfig& config, Detector* detector_override) {
    config.validate();
    RunMetrics metrics;
    StageTimer timer(metrics);

    fs::create_directories(config.outputs.dir);
    const auto out_path = [&](const std::string& name) {
        return (fs::path(config.outputs.dir) / name).string();
    };
    OutputTracker tracker;

    // load
    DepthPanorama pano;
    std::vector<GroundTruthObject> truth;
    timer.time("load", [&] {
        if (config.input.fixture) {
            const SceneSpec spec = catalog_scene(*config.input.fixture, config.input.fixture_width,
                                                 config.input.fixture_height);
            RenderedScene scene = render(spec);
            pano = std::move(scene.panorama);
            truth = std::move(scene.gt_objects);
        } else {
            pano.rgb = read_rgb(*config.input.rgb_path);
            pano.depth = read_depth(*config.input.depth_path);
            if (config.input.truth_path) truth = read_truth(*config.input.truth_path).objects;
        }
        validate(pano);
    });
    const int w = pano.width();
    const int h = pano.height();

    const PointCloud cloud =
        timer.time("unproject", [&] { return unproject(pano, config.downsample_factor); });

    std::vector<Plane> horizontal;
    timer.time("ransac", [&] {
        const auto planes = extract_top_planes(cloud, config.ransac);
        for (const auto& p : planes) {
            metrics.planes.push_back({p.orientation, static_cast<int>(p.inliers.size())});
            if (p.orientation == Orientation::horizontal) horizontal.push_back(p);
        }
    });

    const ProcessingMask mask = timer.time("mask", [&] {
        const Bitmap plane_region =
            reproject_planes(horizontal, cloud, config.downsample_factor, w, h);
        return build_band(plane_region, config.mask);
    });
    metrics.coverage_fraction = mask.coverage;

    const std::vector<Patch> patches =
        timer.time("tile", [&] { return tile(mask.bitmap, pano.rgb, config.tiler); });
    metrics.patch_count = static_cast<int>(patches.size());

    // detect
    std::vector<std::vector<DetectionRecord>> local_results(patches.size());
    timer.time("detect", [&] {
        std::unique_ptr<Detector> owned;
        Detector* detector = detector_override;
        if (!detector) {
            if (config.detector.kind == DetectorKind::oracle) {
                owned = std::make_unique<OracleDetector>(truth, w);
            } else {
                owned = std::make_unique<ExternalDetector>(config.detector.external);
            }
            detector = owned.get();
        }

        const int limit = detector->max_parallelism();
        const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        std::size_t workers = limit == 0 ? hw : static_cast<std::size_t>(limit);
        workers = std::min(workers, patches.size());

        if (workers <= 1) {
            for (std::size_t i = 0; i < patches.size(); ++i)
                local_results[i] = detector->detect(patches[i]);
            return;
        }

        std::atomic<std::size_t> next{0};
        std::mutex err_mu;
        std::exception_ptr error;
        const auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= patches.size()) return;
                {
                    std::lock_guard lock(err_mu);
                    if (error) return;
                }
                try {
                    local_results[i] = detector->detect(patches[i]);
                } catch (...) {
                    std::lock_guard lock(err_mu);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    });

    // merge (patch order keeps the input deterministic)
    std::vector<DetectionRecord> merged;
    timer.time("merge", [&] {
        std::vector<DetectionRecord> global;
        for (std::size_t i = 0; i < patches.size(); ++i) {
            for (const auto& local : local_results[i]) {
                for (const Box& box : to_global(patches[i], local.box, w)) {
                    DetectionRecord d = local;
                    d.box = box;
                    global.push_back(d);
                }
            }
        }
        metrics.detections_pre_merge = static_cast<int>(global.size());
        merged = merge_detections(std::move(global), config.tiler.merge_iou, w);
        metrics.detections_post_merge = static_cast<int>(merged.size());
    });

    const ImageRgb blurred =
        timer.time("blur", [&] { return blur_regions(pano.rgb, merged, config.blur); });

    // outputs
    timer.time("write", [&] {
        write_mask(mask.bitmap, tracker.track(out_path("mask.pgm")));
        write_detections(merged, tracker.track(out_path("detections.json")));
        if (config.outputs.blurred) write_rgb(blurred, tracker.track(out_path("blurred.ppm")));
        if (config.outputs.overlay)
            write_rgb(overlay(pano.rgb, mask), tracker.track(out_path("overlay.ppm")));
        if (config.outputs.patches) {
            const std::string dir = tracker.track(out_path("patches"));
            fs::create_directories(dir);
            for (std::size_t i = 0; i < patches.size(); ++i) {
                const auto& p = patches[i];
                write_rgb(p.pixels, (fs::path(dir) / ("patch_" + std::to_string(i) + "_" +
                                                      std::to_string(p.u0) + "_" +
                                                      std::to_string(p.v0) + ".ppm"))
                                        .string());
            }
        }
        if (config.outputs.metrics) {
            std::ofstream out(tracker.track(out_path("metrics.json")));
            out << metrics_to_json(metrics).dump(2) << "\n";
            if (!out) throw FormatError("failed to write metrics.json");
        }
    });

    tracker.disarm();
    return metrics;
}

BaselineReport compare_baseline(const Bitmap& mask_a, const Bitmap& mask_b) {
    if (!mask_a.same_dims(mask_b))
        throw ContractViolation("compare_baseline: mask dimensions differ");
    BaselineReport report;
    report.coverage_a = coverage_fraction(mask_a);
    report.coverage_b = coverage_fraction(mask_b);
    report.ratio = report.coverage_a == 0.0 ? 0.0 : report.coverage_b / report.coverage_a;
    report.only_a = bitmap_difference(mask_a, mask_b);
    report.only_b = bitmap_difference(mask_b, mask_a);
    report.both = Bitmap(mask_a.width, mask_a.height);
    for (std::size_t i = 0; i < mask_a.bits.size(); ++i)
        report.both.bits[i] = (mask_a.bits[i] && mask_b.bits[i]) ? 1 : 0;
    return report;
}

ImageRgb baseline_diff_image(const BaselineReport& report) {
    const int w = report.only_a.width;
    const int h = report.only_a.height;
    ImageRgb img(w, h);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            if (report.both.get(u, v))
                img.set(u, v, 255, 255, 255);
            else if (report.only_a.get(u, v))
                img.set(u, v, 220, 40, 40);
            else if (report.only_b.get(u, v))
                img.set(u, v, 40, 200, 40);
        }
    }
    return img;
}

}  // namespace panoreduce
