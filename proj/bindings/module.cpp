#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "panoreduce/pipeline.hpp"

namespace py = pybind11;
using namespace panoreduce;

namespace {

py::array_t<std::uint8_t> rgb_to_numpy(const ImageRgb& img) {
    py::array_t<std::uint8_t> arr({img.height, img.width, 3});
    std::memcpy(arr.mutable_data(), img.pixels.data(), img.pixels.size());
    return arr;
}

py::array_t<float> depth_to_numpy(const DepthMap& depth) {
    py::array_t<float> arr({depth.height, depth.width});
    std::memcpy(arr.mutable_data(), depth.values.data(), depth.values.size() * sizeof(float));
    return arr;
}

DepthMap depth_from_numpy(const py::array_t<float, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw py::value_error("depth must be a 2-D float32 array");
    DepthMap d(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
    std::memcpy(d.values.data(), arr.data(), d.values.size() * sizeof(float));
    return d;
}

ImageRgb rgb_from_numpy(
    const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 3 || arr.shape(2) != 3)
        throw py::value_error("rgb must be an (H, W, 3) uint8 array");
    ImageRgb img(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
    std::memcpy(img.pixels.data(), arr.data(), img.pixels.size());
    return img;
}

py::array_t<std::uint8_t> bitmap_to_numpy(const Bitmap& b) {
    py::array_t<std::uint8_t> arr({b.height, b.width});
    std::memcpy(arr.mutable_data(), b.bits.data(), b.bits.size());
    return arr;
}

py::dict plane_to_dict(const Plane& p) {
    py::dict d;
    d["normal"] = py::make_tuple(p.normal.x, p.normal.y, p.normal.z);
    d["offset"] = p.offset;
    d["inliers"] = p.inliers;
    d["orientation"] = to_string(p.orientation);
    return d;
}

RansacParams ransac_params_from_kwargs(double distance_threshold_m, int max_iterations, int top_k,
                                       int min_inliers, double horizontal_angle_deg,
                                       std::uint64_t seed) {
    RansacParams p;
    p.distance_threshold_m = distance_threshold_m;
    p.max_iterations = max_iterations;
    p.top_k = top_k;
    p.min_inliers = min_inliers;
    p.horizontal_angle_deg = horizontal_angle_deg;
    p.seed = seed;
    return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Search-space reduction for privacy blurring in RGB-D panoramas";
#ifdef PANOREDUCE_VERSION
    m.attr("__version__") = PANOREDUCE_VERSION;
#else
    m.attr("__version__") = "dev";
#endif

    py::register_exception<Error>(m, "PanoreduceError");

    m.def(
        "pixel_to_ray",
        [](double u, double v, int width, int height) {
            const Vec3 d = pixel_to_ray(u, v, width, height);
            return py::make_tuple(d.x, d.y, d.z);
        },
        py::arg("u"), py::arg("v"), py::arg("width"), py::arg("height"),
        "Unit ray through an equirectangular pixel.");

    m.def(
        "ray_to_pixel",
        [](double x, double y, double z, int width, int height) {
            double u = 0.0;
            double v = 0.0;
            ray_to_pixel({x, y, z}, width, height, u, v);
            return py::make_tuple(u, v);
        },
        py::arg("x"), py::arg("y"), py::arg("z"), py::arg("width"), py::arg("height"),
        "Continuous pixel position of a direction (u wraps, v clamps at the poles).");

    m.def("scene_catalog", &scene_catalog, "Names of the standard synthetic fixtures.");

    m.def(
        "render_fixture",
        [](const std::string& name, int width, int height) {
            const RenderedScene scene = render(catalog_scene(name, width, height));
            py::dict out;
            out["rgb"] = rgb_to_numpy(scene.panorama.rgb);
            out["depth"] = depth_to_numpy(scene.panorama.depth);
            py::list planes;
            for (const auto& p : scene.gt_planes) {
                py::dict d;
                d["normal"] = py::make_tuple(p.normal.x, p.normal.y, p.normal.z);
                d["offset"] = p.offset;
                planes.append(d);
            }
            out["gt_planes"] = planes;
            py::list objects;
            for (const auto& o : scene.gt_objects) {
                py::dict d;
                d["class"] = to_string(o.cls);
                d["box"] = py::make_tuple(o.box.u_min, o.box.v_min, o.box.u_max, o.box.v_max);
                d["violates_height_assumption"] = o.violates_height_assumption;
                objects.append(d);
            }
            out["gt_objects"] = objects;
            return out;
        },
        py::arg("name"), py::arg("width") = 1024, py::arg("height") = 512,
        "Render a catalog scene with exact ground truth.");

    m.def(
        "unproject",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& depth,
           const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& rgb,
           int stride) {
            DepthPanorama pano{rgb_from_numpy(rgb), depth_from_numpy(depth)};
            const PointCloud cloud = unproject(pano, stride);
            py::array_t<double> pts({static_cast<py::ssize_t>(cloud.size()), py::ssize_t(3)});
            py::array_t<std::int32_t> src({static_cast<py::ssize_t>(cloud.size()), py::ssize_t(2)});
            auto* pd = pts.mutable_data();
            auto* sd = src.mutable_data();
            for (std::size_t i = 0; i < cloud.size(); ++i) {
                pd[3 * i + 0] = cloud[i].x;
                pd[3 * i + 1] = cloud[i].y;
                pd[3 * i + 2] = cloud[i].z;
                sd[2 * i + 0] = cloud[i].src_u;
                sd[2 * i + 1] = cloud[i].src_v;
            }
            return py::make_tuple(pts, src);
        },
        py::arg("depth"), py::arg("rgb"), py::arg("stride") = 10,
        "Stride-sampled point cloud: (points Nx3, source pixels Nx2).");

    m.def(
        "extract_planes",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points,
           double distance_threshold_m, int max_iterations, int top_k, int min_inliers,
           double horizontal_angle_deg, std::uint64_t seed) {
            if (points.ndim() != 2 || points.shape(1) != 3)
                throw py::value_error("points must be an (N, 3) array");
            PointCloud cloud(static_cast<std::size_t>(points.shape(0)));
            const auto* d = points.data();
            for (std::size_t i = 0; i < cloud.size(); ++i)
                cloud[i] = {d[3 * i], d[3 * i + 1], d[3 * i + 2], 0, 0};
            const auto planes = extract_top_planes(
                cloud, ransac_params_from_kwargs(distance_threshold_m, max_iterations, top_k,
                                                 min_inliers, horizontal_angle_deg, seed));
            py::list out;
            for (const auto& p : planes) out.append(plane_to_dict(p));
            return out;
        },
        py::arg("points"), py::arg("distance_threshold_m") = 0.5, py::arg("max_iterations") = 500,
        py::arg("top_k") = 10, py::arg("min_inliers") = 50, py::arg("horizontal_angle_deg") = 20.0,
        py::arg("seed") = 1,
        "Sequential top-k consensus plane extraction over an (N, 3) cloud.");

    m.def(
        "compute_mask",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast>& depth,
           const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& rgb,
           int stride, double distance_threshold_m, int max_iterations, int top_k, int min_inliers,
           double horizontal_angle_deg, std::uint64_t seed, int buffer_px, bool auto_scale_buffer,
           double band_cap_frac, double ego_elevation_cutoff_deg) {
            DepthPanorama pano{rgb_from_numpy(rgb), depth_from_numpy(depth)};
            validate(pano);
            const PointCloud cloud = unproject(pano, stride);
            const auto planes = extract_top_planes(
                cloud, ransac_params_from_kwargs(distance_threshold_m, max_iterations, top_k,
                                                 min_inliers, horizontal_angle_deg, seed));
            std::vector<Plane> horizontal;
            for (const auto& p : planes)
                if (p.orientation == Orientation::horizontal) horizontal.push_back(p);
            MaskParams params;
            params.buffer_px = buffer_px;
            params.auto_scale_buffer = auto_scale_buffer;
            params.band_cap_frac = band_cap_frac;
            params.ego_elevation_cutoff_deg = ego_elevation_cutoff_deg;
            const ProcessingMask mask = build_band(
                reproject_planes(horizontal, cloud, stride, pano.width(), pano.height()), params);
            return py::make_tuple(bitmap_to_numpy(mask.bitmap), mask.coverage);
        },
        py::arg("depth"), py::arg("rgb"), py::arg("stride") = 10,
        py::arg("distance_threshold_m") = 0.5, py::arg("max_iterations") = 500,
        py::arg("top_k") = 10, py::arg("min_inliers") = 50, py::arg("horizontal_angle_deg") = 20.0,
        py::arg("seed") = 1, py::arg("buffer_px") = 350, py::arg("auto_scale_buffer") = true,
        py::arg("band_cap_frac") = 1.0 / 3.0, py::arg("ego_elevation_cutoff_deg") = -62.0,
        "Depth map -> processing mask: returns (mask uint8 HxW, coverage fraction).");

    m.def(
        "merge_detections",
        [](const std::vector<py::dict>& dets, double merge_iou, int pano_width) {
            std::vector<DetectionRecord> records;
            for (const auto& d : dets) {
                DetectionRecord r;
                r.cls = object_class_from_string(d["class"].cast<std::string>());
                const auto box = d["box"].cast<std::vector<double>>();
                if (box.size() != 4) throw py::value_error("box must have 4 entries");
                r.box = {box[0], box[1], box[2], box[3]};
                r.score = d["score"].cast<double>();
                records.push_back(r);
            }
            const auto merged = merge_detections(std::move(records), merge_iou, pano_width);
            py::list out;
            for (const auto& r : merged) {
                py::dict d;
                d["class"] = to_string(r.cls);
                d["box"] = py::make_tuple(r.box.u_min, r.box.v_min, r.box.u_max, r.box.v_max);
                d["score"] = r.score;
                out.append(d);
            }
            return out;
        },
        py::arg("detections"), py::arg("merge_iou") = 0.5, py::arg("pano_width") = 0,
        "Greedy class-wise duplicate suppression in panorama coordinates.");

    m.def(
        "blur_regions",
        [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& rgb,
           const std::vector<py::dict>& dets, double sigma_frac, int pad_px,
           double score_threshold) {
            std::vector<DetectionRecord> records;
            for (const auto& d : dets) {
                DetectionRecord r;
                r.cls = object_class_from_string(d["class"].cast<std::string>());
                const auto box = d["box"].cast<std::vector<double>>();
                if (box.size() != 4) throw py::value_error("box must have 4 entries");
                r.box = {box[0], box[1], box[2], box[3]};
                r.score = d["score"].cast<double>();
                records.push_back(r);
            }
            BlurParams params;
            params.sigma_frac = sigma_frac;
            params.pad_px = pad_px;
            params.score_threshold = score_threshold;
            return rgb_to_numpy(blur_regions(rgb_from_numpy(rgb), records, params));
        },
        py::arg("rgb"), py::arg("detections"), py::arg("sigma_frac") = 0.35, py::arg("pad_px") = 4,
        py::arg("score_threshold") = 0.3, "Gaussian-blur detection boxes in a panorama.");

    m.def(
        "run_pipeline",
        [](const std::string& config_path, const std::string& out_dir, std::uint64_t seed) {
            PipelineConfig config = read_config(config_path);
            if (!out_dir.empty()) config.outputs.dir = out_dir;
            if (seed != 0) config.ransac.seed = seed;
            const RunMetrics metrics = run(config);
            py::dict out;
            out["coverage_fraction"] = metrics.coverage_fraction;
            out["patch_count"] = metrics.patch_count;
            out["detections_pre_merge"] = metrics.detections_pre_merge;
            out["detections_post_merge"] = metrics.detections_post_merge;
            out["stage_seconds"] = metrics.stage_seconds;
            return out;
        },
        py::arg("config_path"), py::arg("out_dir") = "", py::arg("seed") = 0,
        "Execute the full pipeline from a config file; returns run metrics.");

    m.def("static_band_mask",
          [](int width, int height, double fraction) {
              return bitmap_to_numpy(static_band_mask(width, height, fraction));
          },
          py::arg("width"), py::arg("height"), py::arg("fraction") = 0.66,
          "Fixed-band baseline mask.");
}
