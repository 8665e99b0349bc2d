#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "panoreduce/config.hpp"
#include "panoreduce/io.hpp"

namespace panoreduce {

struct PlaneSummary {
    Orientation orientation = Orientation::oblique;
    int inlier_count = 0;
};

struct RunMetrics {
    double coverage_fraction = 0.0;
    int patch_count = 0;
    int detections_pre_merge = 0;
    int detections_post_merge = 0;
    std::map<std::string, double> stage_seconds;  // unproject, ransac, mask, tile, detect, merge, blur
    std::vector<PlaneSummary> planes;
};

/// Stage tag + underlying cause, raised by run() so callers can map the
/// failure to an exit code. Detector protocol failures keep their own type.
class StageError : public Error {
public:
    StageError(const std::string& stage, const std::string& msg)
        : Error("stage '" + stage + "': " + msg), stage_(stage) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/// Executes the full pipeline: load -> unproject -> plane extraction ->
/// horizontal filter -> reprojection -> band mask -> tiling -> detection ->
/// merge -> blur, writing enabled outputs into outputs.dir. mask.pgm and
/// detections.json are always written; metrics.json is written when the
/// metrics toggle is on. Partial outputs are removed on failure.
/// `detector_override` replaces the configured detector (used by tests).
RunMetrics run(const PipelineConfig& config, Detector* detector_override = nullptr);

struct BaselineReport {
    double coverage_a = 0.0;  // baseline
    double coverage_b = 0.0;  // candidate
    double ratio = 0.0;       // coverage_b / coverage_a; 0 when baseline empty
    Bitmap only_a;
    Bitmap only_b;
    Bitmap both;
};

/// Coverage comparison of two equal-sized masks (a = baseline, b = candidate).
BaselineReport compare_baseline(const Bitmap& mask_a, const Bitmap& mask_b);

/// Difference visualization: red = a only, green = b only, white = both.
ImageRgb baseline_diff_image(const BaselineReport& report);

}  // namespace panoreduce
