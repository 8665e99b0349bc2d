#include "panoreduce/mask.hpp"

#include <algorithm>
#include <cmath>

#include "panoreduce/io.hpp"

namespace panoreduce {

void MaskParams::validate() const {
    if (buffer_px < 0) throw ConfigError("mask.buffer_px must be >= 0");
    if (reference_height_px <= 0) throw ConfigError("mask.reference_height_px must be > 0");
    if (!(band_cap_frac > 0.0 && band_cap_frac <= 1.0))
        throw ConfigError("mask.band_cap_frac must lie in (0, 1]");
    if (gap_bridge_columns < 0) throw ConfigError("mask.gap_bridge_columns must be >= 0");
    if (!ego_mask_file &&
        !(ego_elevation_cutoff_deg >= -90.0 && ego_elevation_cutoff_deg < 0.0))
        throw ConfigError("mask.ego.elevation_cutoff_deg must lie in [-90, 0)");
}

int MaskParams::effective_buffer_px(int h) const {
    if (!auto_scale_buffer) return buffer_px;
    return static_cast<int>(
        std::llround(static_cast<double>(buffer_px) * h / reference_height_px));
}

Bitmap reproject_planes(const std::vector<Plane>& horizontal_planes, const PointCloud& cloud,
                        int factor, int full_width, int full_height) {
    if (factor < 1) throw ContractViolation("reproject_planes: factor must be >= 1");
    Bitmap region(full_width, full_height);
    for (const auto& plane : horizontal_planes) {
        for (const int idx : plane.inliers) {
            const auto& p = cloud.at(static_cast<std::size_t>(idx));
            const int u1 = std::min(p.src_u + factor, full_width);
            const int v1 = std::min(p.src_v + factor, full_height);
            for (int v = std::max(p.src_v, 0); v < v1; ++v)
                for (int u = std::max(p.src_u, 0); u < u1; ++u) region.set(u, v);
        }
    }
    return region;
}

Bitmap ego_mask(const MaskParams& params, int width, int height) {
    if (params.ego_mask_file) {
        Bitmap m = read_mask(*params.ego_mask_file);
        if (m.width != width || m.height != height)
            throw ConfigError("ego mask " + *params.ego_mask_file + " is " +
                              std::to_string(m.width) + "x" + std::to_string(m.height) +
                              ", panorama is " + std::to_string(width) + "x" +
                              std::to_string(height));
        return m;
    }
    Bitmap m(width, height);
    for (int v = 0; v < height; ++v) {
        const double phi_deg = 90.0 - 180.0 * (v + 0.5) / height;
        if (phi_deg < params.ego_elevation_cutoff_deg) {
            for (int u = 0; u < width; ++u) m.set(u, v);
        }
    }
    return m;
}

namespace {

constexpr int kNone = -1;

// Linear interpolation of column tops/bottoms across circular runs of empty
// columns no longer than the bridge threshold.
void bridge_gaps(std::vector<int>& top, std::vector<int>& bot, int max_gap) {
    const int w = static_cast<int>(top.size());
    std::vector<int> occupied;
    for (int u = 0; u < w; ++u)
        if (top[u] != kNone) occupied.push_back(u);
    const int m = static_cast<int>(occupied.size());
    if (m == 0 || m == w || max_gap == 0) return;

    for (int i = 0; i < m; ++i) {
        const int left = occupied[i];
        const int right = occupied[(i + 1) % m];
        const int gap = (right - left - 1 + w) % w;  // circular run length
        if (gap < 1 || gap > max_gap) continue;
        for (int t = 1; t <= gap; ++t) {
            const int u = (left + t) % w;
            const double f = static_cast<double>(t) / (gap + 1);
            top[u] = static_cast<int>(std::llround(top[left] + (top[right] - top[left]) * f));
            bot[u] = static_cast<int>(std::llround(bot[left] + (bot[right] - bot[left]) * f));
        }
    }
}

}  // namespace

ProcessingMask build_band(const Bitmap& plane_region, const MaskParams& params) {
    params.validate();
    const int w = plane_region.width;
    const int h = plane_region.height;

    std::vector<int> top(w, kNone);
    std::vector<int> bot(w, kNone);
    for (int u = 0; u < w; ++u) {
        for (int v = 0; v < h; ++v) {
            if (plane_region.get(u, v)) {
                if (top[u] == kNone) top[u] = v;
                bot[u] = v;
            }
        }
    }
    bridge_gaps(top, bot, params.gap_bridge_columns);

    const int buffer_px = params.effective_buffer_px(h);
    const int cap_px = static_cast<int>(std::llround(params.band_cap_frac * h));

    ProcessingMask mask;
    mask.width = w;
    mask.height = h;
    mask.plane_region = Bitmap(w, h);
    mask.buffer_region = Bitmap(w, h);
    for (int u = 0; u < w; ++u) {
        if (top[u] == kNone) continue;
        const int band_end = std::max(top[u], std::min(bot[u], top[u] + cap_px));
        for (int v = top[u]; v <= band_end; ++v) mask.plane_region.set(u, v);
        const int buf_start = std::max(0, top[u] - buffer_px);
        for (int v = buf_start; v < top[u]; ++v) mask.buffer_region.set(u, v);
    }

    mask.ego_region = ego_mask(params, w, h);
    mask.bitmap = bitmap_difference(bitmap_union(mask.plane_region, mask.buffer_region),
                                    mask.ego_region);
    mask.coverage = coverage_fraction(mask.bitmap);
    return mask;
}

double coverage_fraction(const Bitmap& mask) {
    if (mask.width <= 0 || mask.height <= 0) throw ContractViolation("coverage of empty bitmap");
    return static_cast<double>(mask.count()) /
           (static_cast<double>(mask.width) * static_cast<double>(mask.height));
}

Bitmap static_band_mask(int width, int height, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw ContractViolation("static band fraction must lie in (0, 1]");
    Bitmap m(width, height);
    const int start = std::min<int>(static_cast<int>(std::llround(0.18 * height)), height);
    const int rows = static_cast<int>(std::llround(fraction * height));
    const int end = std::min(height, start + rows);
    for (int v = start; v < end; ++v)
        for (int u = 0; u < width; ++u) m.set(u, v);
    return m;
}

ImageRgb overlay(const ImageRgb& pano, const ProcessingMask& mask) {
    if (pano.width != mask.width || pano.height != mask.height)
        throw ContractViolation("overlay: mask and panorama dimensions differ");
    ImageRgb out = pano;
    const auto blend = [&](int u, int v, int r, int g, int b) {
        auto* p = out.at(u, v);
        p[0] = static_cast<std::uint8_t>((p[0] + r) / 2);
        p[1] = static_cast<std::uint8_t>((p[1] + g) / 2);
        p[2] = static_cast<std::uint8_t>((p[2] + b) / 2);
    };
    for (int v = 0; v < mask.height; ++v) {
        for (int u = 0; u < mask.width; ++u) {
            if (mask.ego_region.get(u, v))
                blend(u, v, 255, 0, 0);
            else if (mask.plane_region.get(u, v))
                blend(u, v, 255, 230, 0);
            else if (mask.buffer_region.get(u, v))
                blend(u, v, 0, 220, 0);
        }
    }
    return out;
}

}  // namespace panoreduce
