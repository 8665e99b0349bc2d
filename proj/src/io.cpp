#include "panoreduce/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace panoreduce {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(path + ": cannot open file for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw FormatError(path + ": write failed");
}

// Cursor over an in-memory netpbm file; every error carries the byte offset.
struct PnmCursor {
    const std::string& data;
    const std::string& path;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw FormatError(path + ": " + what + " at byte " + std::to_string(pos));
    }

    bool eof() const { return pos >= data.size(); }

    static bool is_space(char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    }

    void skip_space_and_comments() {
        while (!eof()) {
            const char c = data[pos];
            if (is_space(c)) {
                ++pos;
            } else if (c == '#') {
                while (!eof() && data[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    }

    std::string token() {
        skip_space_and_comments();
        if (eof()) fail("unexpected end of header");
        const std::size_t start = pos;
        while (!eof() && !is_space(data[pos]) && data[pos] != '#') ++pos;
        return data.substr(start, pos - start);
    }

    long int_token(const std::string& name) {
        const std::size_t at = pos;
        const std::string t = token();
        try {
            std::size_t used = 0;
            const long value = std::stol(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
            return value;
        } catch (const std::exception&) {
            pos = at;
            fail("invalid " + name + " '" + t + "'");
        }
    }

    double float_token(const std::string& name) {
        const std::size_t at = pos;
        const std::string t = token();
        try {
            std::size_t used = 0;
            const double value = std::stod(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
            return value;
        } catch (const std::exception&) {
            pos = at;
            fail("invalid " + name + " '" + t + "'");
        }
    }

    // Exactly one whitespace byte separates the header from the payload.
    void expect_single_space() {
        if (eof() || !is_space(data[pos])) fail("expected whitespace before payload");
        ++pos;
    }

    const char* payload(std::size_t need, const std::string& what) {
        if (data.size() - pos < need)
            fail("truncated " + what + ": need " + std::to_string(need) + " bytes, have " +
                 std::to_string(data.size() - pos));
        const char* p = data.data() + pos;
        pos += need;
        return p;
    }
};

void check_pnm_dims(PnmCursor& cur, long w, long h) {
    if (w <= 0 || h <= 0)
        cur.fail("non-positive dimensions " + std::to_string(w) + "x" + std::to_string(h));
    if (w > 1 << 20 || h > 1 << 20) cur.fail("implausible dimensions");
}

}  // namespace

ImageRgb read_rgb(const std::string& path) {
    const std::string data = read_file(path);
    PnmCursor cur{data, path};
    const std::string magic = cur.token();
    if (magic != "P6") cur.fail("bad magic '" + magic + "', expected P6");
    const long w = cur.int_token("width");
    const long h = cur.int_token("height");
    check_pnm_dims(cur, w, h);
    const long maxval = cur.int_token("maxval");
    if (maxval != 255) cur.fail("unsupported maxval " + std::to_string(maxval));
    cur.expect_single_space();

    ImageRgb img(static_cast<int>(w), static_cast<int>(h));
    const char* p = cur.payload(img.pixels.size(), "pixel payload");
    std::memcpy(img.pixels.data(), p, img.pixels.size());
    return img;
}

void write_rgb(const ImageRgb& image, const std::string& path) {
    if (image.width <= 0 || image.height <= 0 ||
        image.pixels.size() != static_cast<std::size_t>(3) * image.width * image.height)
        throw ContractViolation("write_rgb: inconsistent image buffer");
    std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                      "\n255\n";
    out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
    write_file(path, out);
}

Bitmap read_mask(const std::string& path) {
    const std::string data = read_file(path);
    PnmCursor cur{data, path};
    const std::string magic = cur.token();
    if (magic != "P5") cur.fail("bad magic '" + magic + "', expected P5");
    const long w = cur.int_token("width");
    const long h = cur.int_token("height");
    check_pnm_dims(cur, w, h);
    const long maxval = cur.int_token("maxval");
    if (maxval != 255) cur.fail("unsupported maxval " + std::to_string(maxval));
    cur.expect_single_space();

    Bitmap mask(static_cast<int>(w), static_cast<int>(h));
    const std::size_t n = mask.bits.size();
    const char* p = cur.payload(n, "mask payload");
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t v = static_cast<std::uint8_t>(p[i]);
        if (v != 0 && v != 255) {
            cur.pos = cur.pos - n + i;
            cur.fail("mask value " + std::to_string(v) + " is neither 0 nor 255");
        }
        mask.bits[i] = v == 255 ? 1 : 0;
    }
    return mask;
}

void write_mask(const Bitmap& mask, const std::string& path) {
    if (mask.width <= 0 || mask.height <= 0 ||
        mask.bits.size() != static_cast<std::size_t>(mask.width) * mask.height)
        throw ContractViolation("write_mask: inconsistent bitmap");
    std::string out =
        "P5\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n255\n";
    out.reserve(out.size() + mask.bits.size());
    for (const auto b : mask.bits) out.push_back(b ? char(255) : char(0));
    write_file(path, out);
}

DepthMap read_depth(const std::string& path) {
    const std::string data = read_file(path);
    PnmCursor cur{data, path};
    const std::string magic = cur.token();
    if (magic == "PF") cur.fail("color PFM ('PF') unsupported, expected grayscale 'Pf'");
    if (magic != "Pf") cur.fail("bad magic '" + magic + "', expected Pf");
    const long w = cur.int_token("width");
    const long h = cur.int_token("height");
    check_pnm_dims(cur, w, h);
    const double scale = cur.float_token("scale");
    if (scale > 0.0) cur.fail("big-endian PFM (positive scale) unsupported");
    if (scale == 0.0) cur.fail("invalid zero scale");
    cur.expect_single_space();

    DepthMap depth(static_cast<int>(w), static_cast<int>(h));
    const std::size_t n = depth.values.size();
    const char* p = cur.payload(n * sizeof(float), "float payload");
    // PFM scanlines run bottom-up.
    for (long v = 0; v < h; ++v) {
        float* row = depth.values.data() + static_cast<std::size_t>(h - 1 - v) * w;
        std::memcpy(row, p + static_cast<std::size_t>(v) * w * sizeof(float),
                    static_cast<std::size_t>(w) * sizeof(float));
    }
    return depth;
}

void write_depth(const DepthMap& depth, const std::string& path) {
    if (depth.width <= 0 || depth.height <= 0 ||
        depth.values.size() != static_cast<std::size_t>(depth.width) * depth.height)
        throw ContractViolation("write_depth: inconsistent depth buffer");
    std::string out =
        "Pf\n" + std::to_string(depth.width) + " " + std::to_string(depth.height) + "\n-1\n";
    const std::size_t row_bytes = static_cast<std::size_t>(depth.width) * sizeof(float);
    out.reserve(out.size() + row_bytes * depth.height);
    for (int v = depth.height - 1; v >= 0; --v) {
        const char* row =
            reinterpret_cast<const char*>(depth.values.data() + static_cast<std::size_t>(v) * depth.width);
        out.append(row, row_bytes);
    }
    write_file(path, out);
}

// ---------------------------------------------------------------------------
// JSON helpers: strict schemas, field-path error messages
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void bad_field(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) bad_field(path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) { ok = true; break; }
        if (!ok) bad_field(path + "." + key, "unknown field");
    }
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) bad_field(path, "expected a number");
    return j.get<double>();
}

double num_field(const json& obj, const std::string& path, const char* key) {
    const json* j = find(obj, key);
    if (!j) bad_field(path + "." + key, "missing required field");
    return as_number(*j, path + "." + key);
}

double num_or(const json& obj, const std::string& path, const char* key, double def) {
    const json* j = find(obj, key);
    return j ? as_number(*j, path + "." + key) : def;
}

long int_or(const json& obj, const std::string& path, const char* key, long def) {
    const json* j = find(obj, key);
    if (!j) return def;
    if (!j->is_number_integer()) bad_field(path + "." + key, "expected an integer");
    return j->get<long>();
}

long int_field(const json& obj, const std::string& path, const char* key) {
    const json* j = find(obj, key);
    if (!j) bad_field(path + "." + key, "missing required field");
    if (!j->is_number_integer()) bad_field(path + "." + key, "expected an integer");
    return j->get<long>();
}

bool bool_or(const json& obj, const std::string& path, const char* key, bool def) {
    const json* j = find(obj, key);
    if (!j) return def;
    if (!j->is_boolean()) bad_field(path + "." + key, "expected a boolean");
    return j->get<bool>();
}

std::string str_field(const json& obj, const std::string& path, const char* key) {
    const json* j = find(obj, key);
    if (!j) bad_field(path + "." + key, "missing required field");
    if (!j->is_string()) bad_field(path + "." + key, "expected a string");
    return j->get<std::string>();
}

Vec3 vec3_field(const json& obj, const std::string& path, const char* key) {
    const json* j = find(obj, key);
    if (!j) bad_field(path + "." + key, "missing required field");
    if (!j->is_array() || j->size() != 3) bad_field(path + "." + key, "expected [x, y, z]");
    return {as_number((*j)[0], path + "." + key + "[0]"),
            as_number((*j)[1], path + "." + key + "[1]"),
            as_number((*j)[2], path + "." + key + "[2]")};
}

Box box_field(const json& obj, const std::string& path, const char* key) {
    const json* j = find(obj, key);
    if (!j) bad_field(path + "." + key, "missing required field");
    if (!j->is_array() || j->size() != 4)
        bad_field(path + "." + key, "expected [u_min, v_min, u_max, v_max]");
    Box b;
    b.u_min = as_number((*j)[0], path + "." + key + "[0]");
    b.v_min = as_number((*j)[1], path + "." + key + "[1]");
    b.u_max = as_number((*j)[2], path + "." + key + "[2]");
    b.v_max = as_number((*j)[3], path + "." + key + "[3]");
    if (!b.valid()) bad_field(path + "." + key, "box requires u_min < u_max and v_min < v_max");
    return b;
}

json parse_text(const std::string& text, const std::string& origin) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw FormatError(origin + ": invalid JSON");
    return j;
}

json load_json(const std::string& path) { return parse_text(read_file(path), path); }

void dump_json(const json& j, const std::string& path) { write_file(path, j.dump(2) + "\n"); }

json scene_to_json(const SceneSpec& spec) {
    json j;
    j["camera_height"] = spec.camera_height;
    if (spec.ground_tilt_deg != 0.0) j["ground_tilt_deg"] = spec.ground_tilt_deg;
    j["walls"] = json::array();
    for (const auto& w : spec.walls) {
        j["walls"].push_back({{"axis", std::string(1, w.axis)},
                              {"position", w.position},
                              {"min", w.min_coord},
                              {"max", w.max_coord},
                              {"height", w.height}});
    }
    j["objects"] = json::array();
    for (const auto& o : spec.objects) {
        json jo = {{"class", to_string(o.cls)},
                   {"center", {o.center.x, o.center.y, o.center.z}},
                   {"width", o.width},
                   {"height", o.height}};
        if (o.violates_height_assumption) jo["violates_height_assumption"] = true;
        j["objects"].push_back(jo);
    }
    j["render"] = {{"width", spec.render_width}, {"height", spec.render_height}};
    if (spec.depth_noise_sigma != 0.0) j["depth_noise_sigma"] = spec.depth_noise_sigma;
    if (spec.noise_seed != 1) j["noise_seed"] = spec.noise_seed;
    return j;
}

SceneSpec scene_from_json(const json& j, const std::string& path) {
    check_keys(j, path,
               {"camera_height", "ground_z", "ground_tilt_deg", "walls", "objects", "render",
                "depth_noise_sigma", "noise_seed"});
    SceneSpec spec;
    spec.camera_height = num_field(j, path, "camera_height");
    spec.ground_z = num_or(j, path, "ground_z", 0.0);
    spec.ground_tilt_deg = num_or(j, path, "ground_tilt_deg", 0.0);

    if (const json* walls = find(j, "walls")) {
        if (!walls->is_array()) bad_field(path + ".walls", "expected an array");
        for (std::size_t i = 0; i < walls->size(); ++i) {
            const std::string wp = path + ".walls[" + std::to_string(i) + "]";
            const json& jw = (*walls)[i];
            check_keys(jw, wp, {"axis", "position", "min", "max", "height"});
            Wall w;
            const std::string axis = str_field(jw, wp, "axis");
            if (axis != "x" && axis != "y") bad_field(wp + ".axis", "expected \"x\" or \"y\"");
            w.axis = axis[0];
            w.position = num_field(jw, wp, "position");
            w.min_coord = num_field(jw, wp, "min");
            w.max_coord = num_field(jw, wp, "max");
            w.height = num_field(jw, wp, "height");
            spec.walls.push_back(w);
        }
    }
    if (const json* objects = find(j, "objects")) {
        if (!objects->is_array()) bad_field(path + ".objects", "expected an array");
        for (std::size_t i = 0; i < objects->size(); ++i) {
            const std::string op = path + ".objects[" + std::to_string(i) + "]";
            const json& jo = (*objects)[i];
            check_keys(jo, op, {"class", "center", "width", "height", "violates_height_assumption"});
            Billboard o;
            try {
                o.cls = object_class_from_string(str_field(jo, op, "class"));
            } catch (const FormatError&) {
                bad_field(op + ".class", "expected \"face\" or \"plate\"");
            }
            o.center = vec3_field(jo, op, "center");
            o.width = num_field(jo, op, "width");
            o.height = num_field(jo, op, "height");
            o.violates_height_assumption = bool_or(jo, op, "violates_height_assumption", false);
            spec.objects.push_back(o);
        }
    }
    const json* render = find(j, "render");
    if (!render) bad_field(path + ".render", "missing required field");
    check_keys(*render, path + ".render", {"width", "height"});
    spec.render_width = static_cast<int>(int_field(*render, path + ".render", "width"));
    spec.render_height = static_cast<int>(int_field(*render, path + ".render", "height"));
    spec.depth_noise_sigma = num_or(j, path, "depth_noise_sigma", 0.0);
    spec.noise_seed = static_cast<std::uint64_t>(int_or(j, path, "noise_seed", 1));
    spec.validate();
    return spec;
}

}  // namespace

SceneSpec parse_scene_json(const std::string& text, const std::string& origin) {
    return scene_from_json(parse_text(text, origin), origin);
}

SceneSpec read_scene(const std::string& path) { return scene_from_json(load_json(path), path); }

void write_scene(const SceneSpec& spec, const std::string& path) {
    dump_json(scene_to_json(spec), path);
}

namespace {

PipelineConfig config_from_json(const json& j, const std::string& path) {
    check_keys(j, path,
               {"input", "downsample_factor", "ransac", "mask", "tiler", "detector", "blur",
                "outputs"});
    PipelineConfig cfg;

    const json* input = find(j, "input");
    if (!input) bad_field(path + ".input", "missing required field");
    const std::string ip = path + ".input";
    check_keys(*input, ip, {"fixture", "width", "height", "rgb", "depth", "truth"});
    if (find(*input, "fixture")) cfg.input.fixture = str_field(*input, ip, "fixture");
    if (find(*input, "rgb")) cfg.input.rgb_path = str_field(*input, ip, "rgb");
    if (find(*input, "depth")) cfg.input.depth_path = str_field(*input, ip, "depth");
    if (find(*input, "truth")) cfg.input.truth_path = str_field(*input, ip, "truth");
    cfg.input.fixture_width = static_cast<int>(int_or(*input, ip, "width", 1024));
    cfg.input.fixture_height = static_cast<int>(int_or(*input, ip, "height", 512));

    cfg.downsample_factor = static_cast<int>(int_or(j, path, "downsample_factor", 10));

    if (const json* r = find(j, "ransac")) {
        const std::string rp = path + ".ransac";
        check_keys(*r, rp,
                   {"distance_threshold_m", "max_iterations", "top_k", "min_inliers",
                    "horizontal_angle_deg", "seed", "refine"});
        cfg.ransac.distance_threshold_m = num_or(*r, rp, "distance_threshold_m", 0.5);
        cfg.ransac.max_iterations = static_cast<int>(int_or(*r, rp, "max_iterations", 500));
        cfg.ransac.top_k = static_cast<int>(int_or(*r, rp, "top_k", 10));
        cfg.ransac.min_inliers = static_cast<int>(int_or(*r, rp, "min_inliers", 50));
        cfg.ransac.horizontal_angle_deg = num_or(*r, rp, "horizontal_angle_deg", 20.0);
        cfg.ransac.seed = static_cast<std::uint64_t>(int_or(*r, rp, "seed", 1));
        cfg.ransac.refine = bool_or(*r, rp, "refine", false);
    }

    if (const json* m = find(j, "mask")) {
        const std::string mp = path + ".mask";
        check_keys(*m, mp,
                   {"buffer_px", "auto_scale_buffer", "reference_height_px", "band_cap_frac",
                    "gap_bridge_columns", "ego"});
        cfg.mask.buffer_px = static_cast<int>(int_or(*m, mp, "buffer_px", 350));
        cfg.mask.auto_scale_buffer = bool_or(*m, mp, "auto_scale_buffer", true);
        cfg.mask.reference_height_px =
            static_cast<int>(int_or(*m, mp, "reference_height_px", 11180));
        cfg.mask.band_cap_frac = num_or(*m, mp, "band_cap_frac", 1.0 / 3.0);
        cfg.mask.gap_bridge_columns = static_cast<int>(int_or(*m, mp, "gap_bridge_columns", 50));
        if (const json* ego = find(*m, "ego")) {
            const std::string ep = mp + ".ego";
            check_keys(*ego, ep, {"elevation_cutoff_deg", "mask_file"});
            const bool has_cutoff = find(*ego, "elevation_cutoff_deg") != nullptr;
            const bool has_file = find(*ego, "mask_file") != nullptr;
            if (has_cutoff && has_file)
                bad_field(ep, "give either elevation_cutoff_deg or mask_file, not both");
            if (has_file)
                cfg.mask.ego_mask_file = str_field(*ego, ep, "mask_file");
            else
                cfg.mask.ego_elevation_cutoff_deg = num_or(*ego, ep, "elevation_cutoff_deg", -62.0);
        }
    }

    if (const json* t = find(j, "tiler")) {
        const std::string tp = path + ".tiler";
        check_keys(*t, tp, {"patch_w", "patch_h", "overlap_px", "merge_iou"});
        cfg.tiler.patch_w = static_cast<int>(int_or(*t, tp, "patch_w", 1200));
        cfg.tiler.patch_h = static_cast<int>(int_or(*t, tp, "patch_h", 600));
        cfg.tiler.overlap_px = static_cast<int>(int_or(*t, tp, "overlap_px", 120));
        cfg.tiler.merge_iou = num_or(*t, tp, "merge_iou", 0.5);
    }

    if (const json* d = find(j, "detector")) {
        const std::string dp = path + ".detector";
        check_keys(*d, dp, {"type", "command", "max_parallelism", "timeout_s"});
        const std::string type = str_field(*d, dp, "type");
        if (type == "oracle") {
            cfg.detector.kind = DetectorKind::oracle;
            if (find(*d, "command"))
                bad_field(dp + ".command", "only valid for the external detector");
        } else if (type == "external") {
            cfg.detector.kind = DetectorKind::external;
            const json* cmd = find(*d, "command");
            if (!cmd) bad_field(dp + ".command", "missing required field");
            if (!cmd->is_array() || cmd->empty())
                bad_field(dp + ".command", "expected a non-empty argv array");
            for (std::size_t i = 0; i < cmd->size(); ++i) {
                const json& a = (*cmd)[i];
                if (!a.is_string()) bad_field(dp + ".command[" + std::to_string(i) + "]", "expected a string");
                cfg.detector.external.command.push_back(a.get<std::string>());
            }
            cfg.detector.external.max_parallelism =
                static_cast<int>(int_or(*d, dp, "max_parallelism", 1));
            cfg.detector.external.timeout_s = num_or(*d, dp, "timeout_s", 30.0);
        } else {
            bad_field(dp + ".type", "expected \"oracle\" or \"external\"");
        }
    }

    if (const json* b = find(j, "blur")) {
        const std::string bp = path + ".blur";
        check_keys(*b, bp, {"sigma_frac", "pad_px", "score_threshold"});
        cfg.blur.sigma_frac = num_or(*b, bp, "sigma_frac", 0.35);
        cfg.blur.pad_px = static_cast<int>(int_or(*b, bp, "pad_px", 4));
        cfg.blur.score_threshold = num_or(*b, bp, "score_threshold", 0.3);
    }

    if (const json* o = find(j, "outputs")) {
        const std::string op = path + ".outputs";
        check_keys(*o, op, {"dir", "overlay", "patches", "blurred", "metrics"});
        if (find(*o, "dir")) cfg.outputs.dir = str_field(*o, op, "dir");
        cfg.outputs.overlay = bool_or(*o, op, "overlay", false);
        cfg.outputs.patches = bool_or(*o, op, "patches", false);
        cfg.outputs.blurred = bool_or(*o, op, "blurred", true);
        cfg.outputs.metrics = bool_or(*o, op, "metrics", true);
    }

    cfg.validate();
    return cfg;
}

}  // namespace

PipelineConfig parse_config_json(const std::string& text, const std::string& origin) {
    return config_from_json(parse_text(text, origin), origin);
}

PipelineConfig read_config(const std::string& path) {
    return config_from_json(load_json(path), path);
}

namespace {

json detection_to_json(const DetectionRecord& d) {
    return {{"class", to_string(d.cls)},
            {"box", {d.box.u_min, d.box.v_min, d.box.u_max, d.box.v_max}},
            {"score", d.score}};
}

DetectionRecord detection_from_json(const json& j, const std::string& path) {
    check_keys(j, path, {"class", "box", "score"});
    DetectionRecord d;
    try {
        d.cls = object_class_from_string(str_field(j, path, "class"));
    } catch (const FormatError&) {
        bad_field(path + ".class", "expected \"face\" or \"plate\"");
    }
    d.box = box_field(j, path, "box");
    d.score = num_field(j, path, "score");
    if (!(d.score >= 0.0 && d.score <= 1.0)) bad_field(path + ".score", "expected a value in [0, 1]");
    return d;
}

}  // namespace

std::vector<DetectionRecord> read_detections(const std::string& path) {
    const json j = load_json(path);
    if (!j.is_array()) throw ConfigError(path + ": expected a top-level array");
    std::vector<DetectionRecord> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(detection_from_json(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

void write_detections(const std::vector<DetectionRecord>& detections, const std::string& path) {
    json j = json::array();
    for (const auto& d : detections) j.push_back(detection_to_json(d));
    dump_json(j, path);
}

SceneTruth read_truth(const std::string& path) {
    const json j = load_json(path);
    check_keys(j, path, {"planes", "objects"});
    SceneTruth truth;
    if (const json* planes = find(j, "planes")) {
        if (!planes->is_array()) bad_field(path + ".planes", "expected an array");
        for (std::size_t i = 0; i < planes->size(); ++i) {
            const std::string pp = path + ".planes[" + std::to_string(i) + "]";
            const json& jp = (*planes)[i];
            check_keys(jp, pp, {"normal", "offset"});
            GroundTruthPlane p;
            p.normal = vec3_field(jp, pp, "normal");
            p.offset = num_field(jp, pp, "offset");
            truth.planes.push_back(p);
        }
    }
    if (const json* objects = find(j, "objects")) {
        if (!objects->is_array()) bad_field(path + ".objects", "expected an array");
        for (std::size_t i = 0; i < objects->size(); ++i) {
            const std::string op = path + ".objects[" + std::to_string(i) + "]";
            const json& jo = (*objects)[i];
            check_keys(jo, op, {"class", "box", "center", "violates_height_assumption"});
            GroundTruthObject o;
            try {
                o.cls = object_class_from_string(str_field(jo, op, "class"));
            } catch (const FormatError&) {
                bad_field(op + ".class", "expected \"face\" or \"plate\"");
            }
            o.box = box_field(jo, op, "box");
            o.center = vec3_field(jo, op, "center");
            o.violates_height_assumption = bool_or(jo, op, "violates_height_assumption", false);
            truth.objects.push_back(o);
        }
    }
    return truth;
}

void write_truth(const SceneTruth& truth, const std::string& path) {
    json j;
    j["planes"] = json::array();
    for (const auto& p : truth.planes)
        j["planes"].push_back(
            {{"normal", {p.normal.x, p.normal.y, p.normal.z}}, {"offset", p.offset}});
    j["objects"] = json::array();
    for (const auto& o : truth.objects) {
        json jo = {{"class", to_string(o.cls)},
                   {"box", {o.box.u_min, o.box.v_min, o.box.u_max, o.box.v_max}},
                   {"center", {o.center.x, o.center.y, o.center.z}}};
        if (o.violates_height_assumption) jo["violates_height_assumption"] = true;
        j["objects"].push_back(jo);
    }
    dump_json(j, path);
}

}  // namespace panoreduce
