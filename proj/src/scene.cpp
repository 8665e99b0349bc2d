#include "panoreduce/scene.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include "panoreduce/geometry.hpp"
#include "panoreduce/ransac.hpp"

namespace panoreduce {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double SceneSpec::ground_height_at(double x, double /*y*/) const {
    return ground_z + std::tan(ground_tilt_deg * kPi / 180.0) * x;
}

void SceneSpec::validate() const {
    if (!(camera_height > 0.0)) throw ConfigError("scene.camera_height must be > 0");
    if (ground_z != 0.0) throw ConfigError("scene.ground_z is fixed at 0 in the world frame");
    if (!(ground_tilt_deg > -45.0 && ground_tilt_deg < 45.0))
        throw ConfigError("scene.ground_tilt_deg must lie in (-45, 45)");
    if (render_width <= 0 || render_height <= 0)
        throw ConfigError("scene.render dimensions must be positive");
    if (render_width != 2 * render_height)
        throw ConfigError("scene.render requires width == 2 * height");
    if (depth_noise_sigma < 0.0) throw ConfigError("scene.depth_noise_sigma must be >= 0");
    for (std::size_t i = 0; i < walls.size(); ++i) {
        const auto& w = walls[i];
        const std::string p = "scene.walls[" + std::to_string(i) + "]";
        if (w.axis != 'x' && w.axis != 'y') throw ConfigError(p + ".axis must be 'x' or 'y'");
        if (!(w.min_coord < w.max_coord)) throw ConfigError(p + ": min must be < max");
        if (!(w.height > 0.0)) throw ConfigError(p + ".height must be > 0");
    }
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const auto& o = objects[i];
        const std::string p = "scene.objects[" + std::to_string(i) + "]";
        if (!(o.width > 0.0 && o.height > 0.0)) throw ConfigError(p + ": width/height must be > 0");
        if (o.center.x == 0.0 && o.center.y == 0.0)
            throw ConfigError(p + ".center must not sit on the camera axis");
        const double local_ground = ground_height_at(o.center.x, o.center.y);
        const double top = o.center.z + o.height / 2.0 - local_ground;
        if (!o.violates_height_assumption && top > 2.0 + 1e-9)
            throw ConfigError(p + ": top edge " + std::to_string(top) +
                              " m above ground exceeds the 2 m rule "
                              "(set violates_height_assumption to keep it)");
    }
}

namespace {

struct GroundSurface {
    Vec3 normal;    // camera frame, unit, z > 0
    double offset;  // normal . p + offset = 0

    // Returns hit distance or +inf.
    double hit(const Vec3& d) const {
        const double denom = normal.dot(d);
        if (denom >= 0.0) return kInf;  // off > 0: only descending rays hit
        const double t = -offset / denom;
        return t > 0.0 ? t : kInf;
    }
};

struct WallSurface {
    const Wall* wall;
    const SceneSpec* spec;

    double hit(const Vec3& d) const {
        // Plane {y = pos} for axis 'x', {x = pos} for axis 'y'; camera at origin.
        const double axis_dir = wall->axis == 'x' ? d.y : d.x;
        if (axis_dir == 0.0) return kInf;
        const double t = wall->position / axis_dir;
        if (t <= 0.0) return kInf;
        const Vec3 p{t * d.x, t * d.y, t * d.z};
        const double along = wall->axis == 'x' ? p.x : p.y;
        if (along < wall->min_coord || along > wall->max_coord) return kInf;
        const double x_world = wall->axis == 'x' ? p.x : wall->position;
        const double y_world = wall->axis == 'x' ? wall->position : p.y;
        const double base = spec->ground_height_at(x_world, y_world);
        const double z_world = p.z + spec->camera_height;
        if (z_world < base || z_world > base + wall->height) return kInf;
        return t;
    }
};

struct BillboardSurface {
    Vec3 center_cam;  // camera frame
    Vec3 facing;      // horizontal unit normal toward the camera
    Vec3 side;        // horizontal in-plane axis
    double half_w;
    double half_h;

    static BillboardSurface make(const Billboard& b, double camera_height) {
        BillboardSurface s;
        s.center_cam = {b.center.x, b.center.y, b.center.z - camera_height};
        const double r = std::hypot(b.center.x, b.center.y);
        s.facing = {-b.center.x / r, -b.center.y / r, 0.0};
        s.side = {-s.facing.y, s.facing.x, 0.0};
        s.half_w = b.width / 2.0;
        s.half_h = b.height / 2.0;
        return s;
    }

    double hit(const Vec3& d) const {
        const double denom = facing.dot(d);
        if (denom == 0.0) return kInf;
        const double t = facing.dot(center_cam) / denom;
        if (t <= 0.0) return kInf;
        const Vec3 q = Vec3{t * d.x, t * d.y, t * d.z} - center_cam;
        if (std::abs(q.dot(side)) > half_w || std::abs(q.z) > half_h) return kInf;
        return t;
    }
};

void parallel_rows(int height, const std::function<void(int, int)>& body) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int chunks = static_cast<int>(std::min<unsigned>(hw, 8));
    if (chunks <= 1 || height < 64) {
        body(0, height);
        return;
    }
    std::vector<std::thread> workers;
    const int rows_per = (height + chunks - 1) / chunks;
    for (int c = 0; c < chunks; ++c) {
        const int lo = c * rows_per;
        const int hi = std::min(height, lo + rows_per);
        if (lo >= hi) break;
        workers.emplace_back(body, lo, hi);
    }
    for (auto& w : workers) w.join();
}

// Deterministic standard normal stream (Box-Muller over xorshift64*).
class NormalRng {
public:
    explicit NormalRng(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = unit();
        const double u2 = unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

private:
    double unit() {  // uniform in (0, 1)
        return (static_cast<double>(rng_.next() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    SplitRng rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace

RenderedScene render(const SceneSpec& spec) {
    spec.validate();
    const int w = spec.render_width;
    const int h = spec.render_height;

    const double tilt = spec.ground_tilt_deg * kPi / 180.0;
    GroundSurface ground{{-std::sin(tilt), 0.0, std::cos(tilt)},
                         spec.camera_height * std::cos(tilt)};

    std::vector<WallSurface> walls;
    for (const auto& wall : spec.walls) walls.push_back({&wall, &spec});
    std::vector<BillboardSurface> boards;
    for (const auto& b : spec.objects)
        boards.push_back(BillboardSurface::make(b, spec.camera_height));

    RenderedScene scene;
    scene.panorama.rgb = ImageRgb(w, h);
    scene.panorama.depth = DepthMap(w, h);
    scene.surface_ids.assign(static_cast<std::size_t>(w) * h, -1);

    const int n_walls = static_cast<int>(walls.size());
    parallel_rows(h, [&](int v_lo, int v_hi) {
        for (int v = v_lo; v < v_hi; ++v) {
            for (int u = 0; u < w; ++u) {
                const Vec3 d = pixel_to_ray(u, v, w, h);
                double best_t = ground.hit(d);
                int id = std::isfinite(best_t) ? 0 : -1;
                for (int k = 0; k < n_walls; ++k) {
                    const double t = walls[k].hit(d);
                    if (t < best_t) {
                        best_t = t;
                        id = 1 + k;
                    }
                }
                for (std::size_t j = 0; j < boards.size(); ++j) {
                    const double t = boards[j].hit(d);
                    if (t < best_t) {
                        best_t = t;
                        id = 1 + n_walls + static_cast<int>(j);
                    }
                }
                scene.surface_ids[static_cast<std::size_t>(v) * w + u] = id;
                scene.panorama.depth.at(u, v) =
                    std::isfinite(best_t) ? static_cast<float>(best_t)
                                          : std::numeric_limits<float>::infinity();
                if (id < 0) {
                    scene.panorama.rgb.set(u, v, 136, 206, 235);  // sky
                } else if (id == 0) {
                    scene.panorama.rgb.set(u, v, 120, 120, 120);  // asphalt
                } else if (id <= n_walls) {
                    scene.panorama.rgb.set(u, v, 168, 96, 56);  // facade
                } else {
                    const auto& obj = spec.objects[static_cast<std::size_t>(id - 1 - n_walls)];
                    if (obj.cls == ObjectClass::face)
                        scene.panorama.rgb.set(u, v, 236, 188, 148);
                    else
                        scene.panorama.rgb.set(u, v, 240, 216, 48);
                }
            }
        }
    });

    if (spec.depth_noise_sigma > 0.0) {
        NormalRng noise(spec.noise_seed);
        for (auto& d : scene.panorama.depth.values) {
            if (!std::isfinite(d)) continue;
            const double noisy = d + spec.depth_noise_sigma * noise.next();
            d = static_cast<float>(std::max(noisy, 1e-3));
        }
    }

    scene.gt_planes.push_back({ground.normal, ground.offset});
    for (const auto& wall : spec.walls) {
        // Wall normals already satisfy the canonical sign rule (z = 0, y or x positive).
        GroundTruthPlane p;
        p.normal = wall.axis == 'x' ? Vec3{0.0, 1.0, 0.0} : Vec3{1.0, 0.0, 0.0};
        p.offset = -wall.position;
        scene.gt_planes.push_back(p);
    }

    for (std::size_t j = 0; j < spec.objects.size(); ++j) {
        const int id = 1 + n_walls + static_cast<int>(j);
        int u_min = w;
        int u_max = -1;
        int v_min = h;
        int v_max = -1;
        for (int v = 0; v < h; ++v) {
            for (int u = 0; u < w; ++u) {
                if (scene.surface_ids[static_cast<std::size_t>(v) * w + u] == id) {
                    u_min = std::min(u_min, u);
                    u_max = std::max(u_max, u);
                    v_min = std::min(v_min, v);
                    v_max = std::max(v_max, v);
                }
            }
        }
        if (u_max < 0) continue;  // fully occluded
        GroundTruthObject gt;
        gt.cls = spec.objects[j].cls;
        gt.box = {static_cast<double>(u_min), static_cast<double>(v_min),
                  static_cast<double>(u_max + 1), static_cast<double>(v_max + 1)};
        gt.center = spec.objects[j].center;
        gt.violates_height_assumption = spec.objects[j].violates_height_assumption;
        scene.gt_objects.push_back(gt);
    }
    return scene;
}

std::vector<std::string> scene_catalog() {
    return {"flat_empty", "street_canyon", "sloped_street", "rooftop_person"};
}

SceneSpec catalog_scene(const std::string& name, int width, int height) {
    SceneSpec spec;
    spec.render_width = width;
    spec.render_height = height;
    spec.camera_height = 2.5;

    const auto person = [](double x, double y) {
        return Billboard{ObjectClass::face, {x, y, 0.85}, 0.55, 1.7, false};
    };
    const auto plate = [](double x, double y) {
        return Billboard{ObjectClass::plate, {x, y, 0.30}, 0.52, 0.6, false};
    };

    if (name == "flat_empty") {
        return spec;
    }
    if (name == "street_canyon") {
        spec.walls = {{'x', 8.0, -30.0, 30.0, 4.0}, {'x', -8.0, -30.0, 30.0, 4.0}};
        spec.objects = {
            person(5.0, 0.8),  plate(7.0, -1.2), person(-6.0, 1.0),
            plate(-4.5, -0.9), person(2.0, 1.5), plate(3.0, -2.0),
        };
        return spec;
    }
    if (name == "sloped_street") {
        spec.ground_tilt_deg = 8.0;
        const double slope = std::tan(8.0 * kPi / 180.0);
        spec.objects = {person(6.0, 1.0), plate(5.0, -1.5), person(-7.0, 0.8), plate(-5.5, -1.0)};
        for (auto& o : spec.objects) o.center.z += slope * o.center.x;  // feet on the slope
        return spec;
    }
    if (name == "rooftop_person") {
        spec.walls = {{'y', 6.0, -6.0, 6.0, 4.0}};
        Billboard roof{ObjectClass::face, {5.9, 0.0, 4.85}, 0.55, 1.7, true};
        spec.objects = {roof};
        return spec;
    }
    throw ConfigError("unknown scene fixture '" + name + "'");
}

}  // namespace panoreduce
