#include "panoreduce/config.hpp"

namespace panoreduce {

void PipelineConfig::validate() const {
    const bool has_fixture = input.fixture.has_value();
    const bool has_rgb = input.rgb_path.has_value();
    const bool has_depth = input.depth_path.has_value();
    if (has_rgb != has_depth)
        throw ConfigError("config.input: rgb and depth paths must be given together");
    if (has_fixture == has_rgb)
        throw ConfigError("config.input: exactly one source required (fixture, or rgb+depth)");
    if (has_fixture && input.truth_path)
        throw ConfigError("config.input.truth: only valid with rgb+depth inputs");
    if (has_fixture && (input.fixture_width <= 0 || input.fixture_height <= 0))
        throw ConfigError("config.input: fixture render dimensions must be positive");
    if (downsample_factor < 1) throw ConfigError("config.downsample_factor must be >= 1");

    try {
        ransac.validate();
        mask.validate();
        tiler.validate();
        blur.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("config.") + e.what());
    }

    if (detector.kind == DetectorKind::external) {
        if (detector.external.command.empty())
            throw ConfigError("config.detector.command: required for the external detector");
        if (detector.external.max_parallelism < 1)
            throw ConfigError("config.detector.max_parallelism must be >= 1");
        if (!(detector.external.timeout_s > 0.0))
            throw ConfigError("config.detector.timeout_s must be > 0");
    } else if (!has_fixture && !input.truth_path) {
        throw ConfigError(
            "config.detector: the oracle detector needs a fixture input or input.truth");
    }
    if (outputs.dir.empty()) throw ConfigError("config.outputs.dir must not be empty");
}

}  // namespace panoreduce
