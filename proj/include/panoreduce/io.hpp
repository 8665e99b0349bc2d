#pragma once

#include <string>
#include <vector>

#include "panoreduce/config.hpp"
#include "panoreduce/image.hpp"
#include "panoreduce/scene.hpp"
#include "panoreduce/types.hpp"

namespace panoreduce {

// File formats, bit-exact round-trips on valid inputs:
//   RGB    binary PPM (P6), maxval 255
//   depth  grayscale PFM ("Pf"), scale -1.0 (little-endian), bottom-up rows,
//          meters; non-finite values encode no-return/sky
//   masks  binary PGM (P5), 0 = excluded, 255 = process
// Malformed and truncated files raise FormatError naming the byte offset.

ImageRgb read_rgb(const std::string& path);
void write_rgb(const ImageRgb& image, const std::string& path);

DepthMap read_depth(const std::string& path);
void write_depth(const DepthMap& depth, const std::string& path);

Bitmap read_mask(const std::string& path);
void write_mask(const Bitmap& mask, const std::string& path);

// JSON documents. Parsers reject unknown fields (naming the field path) and
// apply documented defaults for absent optional fields.

SceneSpec read_scene(const std::string& path);
void write_scene(const SceneSpec& spec, const std::string& path);
SceneSpec parse_scene_json(const std::string& text, const std::string& origin = "scene");

PipelineConfig read_config(const std::string& path);
PipelineConfig parse_config_json(const std::string& text, const std::string& origin = "config");

std::vector<DetectionRecord> read_detections(const std::string& path);
void write_detections(const std::vector<DetectionRecord>& detections, const std::string& path);

/// Ground truth emitted next to rendered fixtures (planes + object boxes).
struct SceneTruth {
    std::vector<GroundTruthPlane> planes;
    std::vector<GroundTruthObject> objects;
};

SceneTruth read_truth(const std::string& path);
void write_truth(const SceneTruth& truth, const std::string& path);

}  // namespace panoreduce
