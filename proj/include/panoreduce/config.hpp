#pragma once

#include <optional>
#include <string>

#include "panoreduce/detect.hpp"
#include "panoreduce/mask.hpp"
#include "panoreduce/ransac.hpp"
#include "panoreduce/tiler.hpp"

namespace panoreduce {

struct InputConfig {
    // Exactly one source: a named catalog fixture, or an rgb+depth file pair.
    std::optional<std::string> fixture;
    std::optional<std::string> rgb_path;
    std::optional<std::string> depth_path;
    // Scene-truth JSON; required for the oracle detector with file inputs.
    std::optional<std::string> truth_path;
    int fixture_width = 1024;
    int fixture_height = 512;
};

enum class DetectorKind { oracle, external };

struct DetectorConfig {
    DetectorKind kind = DetectorKind::oracle;
    ExternalDetectorConfig external;
};

struct OutputsConfig {
    std::string dir = "out";
    bool overlay = false;
    bool patches = false;
    bool blurred = true;
    bool metrics = true;
};

struct PipelineConfig {
    InputConfig input;
    int downsample_factor = 10;
    RansacParams ransac;
    MaskParams mask;
    TilerParams tiler;
    DetectorConfig detector;
    BlurParams blur;
    OutputsConfig outputs;

    void validate() const;  // throws ConfigError naming the offending field
};

}  // namespace panoreduce
