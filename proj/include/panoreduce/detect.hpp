#pragma once

#include <memory>
#include <string>
#include <vector>

#include "panoreduce/image.hpp"
#include "panoreduce/scene.hpp"
#include "panoreduce/tiler.hpp"
#include "panoreduce/types.hpp"

namespace panoreduce {

struct BlurParams {
    double sigma_frac = 0.35;     // Gaussian sigma as fraction of min box side
    int pad_px = 4;               // box dilation before blurring
    double score_threshold = 0.3;

    void validate() const;
};

/// Contract every detector implements. detect() must be stateless (same
/// patch -> same result) and return boxes inside patch bounds with scores
/// in [0, 1]. Implementations are either safe for concurrent calls or
/// declare max_parallelism() == 1.
class Detector {
public:
    virtual ~Detector() = default;

    /// Detections in patch-local coordinates.
    virtual std::vector<DetectionRecord> detect(const Patch& patch) = 0;

    /// Maximum concurrent detect() calls; 0 = unlimited.
    virtual int max_parallelism() const { return 0; }
};

/// Test double that returns every ground-truth box overlapping the patch by
/// at least min_visible_frac of the box area, clipped to the patch, score 1.
class OracleDetector : public Detector {
public:
    OracleDetector(std::vector<GroundTruthObject> truth, int pano_width,
                   double min_visible_frac = 0.25);

    std::vector<DetectionRecord> detect(const Patch& patch) override;

private:
    std::vector<GroundTruthObject> truth_;
    int pano_width_;
    double min_visible_frac_;
};

struct ExternalDetectorConfig {
    std::vector<std::string> command;  // argv of the adapter process
    int max_parallelism = 1;
    double timeout_s = 30.0;
    std::string tmp_dir;  // run-scoped directory for patch PPM files
};

// Line protocol, one JSON document per line on the adapter's stdin/stdout:
//   request:  {"patch_path": "...", "origin": [u0, v0], "width": W, "height": H}
//   response: {"detections": [{"class": "face", "box": [x0,y0,x1,y1], "score": 0.87}]}
// Responses must arrive in request order. Out-of-bounds boxes, scores outside
// [0, 1], NaN scores, unknown classes, timeouts and process exits all raise
// DetectorError carrying the offending line.

/// Adapter that feeds patches to a pool of child processes speaking the line
/// protocol above. Patch images are written as PPM files under tmp_dir.
class ExternalDetector : public Detector {
public:
    explicit ExternalDetector(ExternalDetectorConfig config);
    ~ExternalDetector() override;

    std::vector<DetectionRecord> detect(const Patch& patch) override;
    int max_parallelism() const override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Gaussian-blurs each padded detection box with score >= threshold in
/// place of a copy of `pano`. sigma = sigma_frac * min(box_w, box_h), kernel
/// truncated at 3*sigma; reads wrap horizontally and clamp vertically, so
/// constant regions are preserved exactly. Pixels outside the padded boxes
/// are byte-identical to the input.
ImageRgb blur_regions(const ImageRgb& pano, const std::vector<DetectionRecord>& detections,
                      const BlurParams& params);

}  // namespace panoreduce
