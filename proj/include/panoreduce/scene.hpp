#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "panoreduce/image.hpp"
#include "panoreduce/types.hpp"

namespace panoreduce {

// World frame: ground passes through z = 0 under the camera, which sits at
// (0, 0, camera_height). Rendering happens in the camera frame (camera at
// the origin), so world z maps to camera z - camera_height.

/// Vertical axis-aligned wall rectangle. axis "x" walls span x in
/// [min_coord, max_coord] on the plane {y = position}; axis "y" walls span y
/// on {x = position}. Walls rise from local ground level to ground + height.
struct Wall {
    char axis = 'x';
    double position = 0.0;
    double min_coord = 0.0;
    double max_coord = 0.0;
    double height = 0.0;
};

/// Camera-facing vertical rectangle standing in for a face/plate carrier.
struct Billboard {
    ObjectClass cls = ObjectClass::face;
    Vec3 center;  // world frame, z above ground datum
    double width = 0.0;
    double height = 0.0;
    bool violates_height_assumption = false;
};

struct SceneSpec {
    double camera_height = 2.5;
    double ground_z = 0.0;         // fixed at 0; kept for schema completeness
    double ground_tilt_deg = 0.0;  // rotation about +y; ground rises toward +x
    std::vector<Wall> walls;
    std::vector<Billboard> objects;
    int render_width = 1024;
    int render_height = 512;
    double depth_noise_sigma = 0.0;
    std::uint64_t noise_seed = 1;

    /// Ground elevation (world z) under a point; nonzero only when tilted.
    double ground_height_at(double x, double y) const;

    /// Throws ConfigError on an invalid spec; enforces the <= 2 m object
    /// top-edge rule unless violates_height_assumption is set.
    void validate() const;
};

struct GroundTruthPlane {
    Vec3 normal;     // camera frame, canonical sign
    double offset = 0.0;
};

struct GroundTruthObject {
    ObjectClass cls = ObjectClass::face;
    Box box;  // exact pixel bounding box of the rendered footprint
    Vec3 center;
    bool violates_height_assumption = false;
};

struct RenderedScene {
    DepthPanorama panorama;
    std::vector<GroundTruthPlane> gt_planes;
    std::vector<GroundTruthObject> gt_objects;  // only objects with >= 1 rendered pixel
    std::vector<std::int32_t> surface_ids;      // per pixel: -1 sky, 0 ground, 1+k wall k, 1+#walls+j object j
};

/// Analytic ray cast of the spec: nearest positive hit among ground, walls
/// and billboards; misses get +inf depth and sky color. Depth noise, when
/// enabled, perturbs finite depths with seeded zero-mean Gaussian noise.
RenderedScene render(const SceneSpec& spec);

/// Names of the standard fixtures: flat_empty, street_canyon, sloped_street,
/// rooftop_person.
std::vector<std::string> scene_catalog();

/// Deterministic fixture spec at the requested render size.
/// Throws ConfigError for an unknown name.
SceneSpec catalog_scene(const std::string& name, int width = 1024, int height = 512);

}  // namespace panoreduce
