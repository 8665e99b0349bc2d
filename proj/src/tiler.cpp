#include "panoreduce/tiler.hpp"

#include <algorithm>

namespace panoreduce {

void TilerParams::validate() const {
    if (patch_w < 1 || patch_h < 1) throw ConfigError("tiler patch dimensions must be >= 1");
    if (overlap_px < 0 || overlap_px >= std::min(patch_w, patch_h))
        throw ConfigError("tiler.overlap_px must lie in [0, min(patch_w, patch_h))");
    if (!(merge_iou > 0.0 && merge_iou <= 1.0))
        throw ConfigError("tiler.merge_iou must lie in (0, 1]");
}

namespace {

bool patch_touches_mask(const Bitmap& mask, int u0, int v0, int pw, int ph) {
    const int w = mask.width;
    for (int dv = 0; dv < ph; ++dv) {
        const int v = v0 + dv;
        for (int du = 0; du < pw; ++du) {
            const int u = (u0 + du) % w;
            if (mask.get(u, v)) return true;
        }
    }
    return false;
}

ImageRgb crop_wrapped(const ImageRgb& pano, int u0, int v0, int pw, int ph) {
    ImageRgb out(pw, ph);
    for (int dv = 0; dv < ph; ++dv) {
        const int v = v0 + dv;
        for (int du = 0; du < pw; ++du) {
            const int u = (u0 + du) % pano.width;
            const auto* p = pano.at(u, v);
            out.set(du, dv, p[0], p[1], p[2]);
        }
    }
    return out;
}

}  // namespace

std::vector<Patch> tile(const Bitmap& mask, const ImageRgb& pano, const TilerParams& params) {
    params.validate();
    if (mask.width != pano.width || mask.height != pano.height)
        throw ContractViolation("tile: mask and panorama dimensions differ");
    const int w = pano.width;
    const int h = pano.height;
    const int pw = params.patch_w;
    const int ph = params.patch_h;
    if (pw > w || ph > h)
        throw ContractViolation("tile: patch " + std::to_string(pw) + "x" + std::to_string(ph) +
                                " exceeds panorama " + std::to_string(w) + "x" + std::to_string(h));

    // Occupied bounding box of the mask.
    int v_lo = h;
    int v_hi = -1;
    int u_lo = w;
    int u_hi = -1;
    for (int v = 0; v < h; ++v) {
        const auto* row = mask.bits.data() + static_cast<std::size_t>(v) * w;
        for (int u = 0; u < w; ++u) {
            if (!row[u]) continue;
            v_lo = std::min(v_lo, v);
            v_hi = std::max(v_hi, v);
            u_lo = std::min(u_lo, u);
            u_hi = std::max(u_hi, u);
        }
    }
    if (v_hi < 0) return {};

    const int stride_u = pw - params.overlap_px;
    const int stride_v = ph - params.overlap_px;

    // Vertical origins clamp inside the image; horizontal origins sweep the
    // occupied columns and may wrap past the seam.
    std::vector<int> v_origins;
    int v = std::clamp(v_lo, 0, h - ph);
    for (;;) {
        v = std::clamp(v, 0, h - ph);
        v_origins.push_back(v);
        if (v + ph > v_hi) break;
        v += stride_v;
    }
    std::vector<int> u_origins;
    int u = u_lo;
    for (;;) {
        u_origins.push_back(u);
        if (u + pw > u_hi) break;
        u += stride_u;
    }

    std::vector<Patch> patches;
    for (const int v0 : v_origins) {
        for (const int u0 : u_origins) {
            if (!patch_touches_mask(mask, u0, v0, pw, ph)) continue;
            Patch patch;
            patch.u0 = u0;
            patch.v0 = v0;
            patch.width = pw;
            patch.height = ph;
            patch.wraps_seam = u0 + pw > w;
            patch.pixels = crop_wrapped(pano, u0, v0, pw, ph);
            patches.push_back(std::move(patch));
        }
    }
    return patches;
}

std::vector<Box> to_global(const Patch& patch, const Box& local_box, int pano_width) {
    const double w = pano_width;
    Box g;
    g.u_min = patch.u0 + local_box.u_min;
    g.v_min = patch.v0 + local_box.v_min;
    g.u_max = patch.u0 + local_box.u_max;
    g.v_max = patch.v0 + local_box.v_max;

    if (g.u_max <= w) return {g};
    if (g.u_min >= w) {  // entirely beyond the seam
        g.u_min -= w;
        g.u_max -= w;
        return {g};
    }
    Box left = g;
    left.u_max = w;
    Box right = g;
    right.u_min = 0.0;
    right.u_max = g.u_max - w;
    return {left, right};
}

std::vector<DetectionRecord> merge_detections(std::vector<DetectionRecord> detections,
                                              double merge_iou, int pano_width) {
    std::sort(detections.begin(), detections.end(),
              [](const DetectionRecord& a, const DetectionRecord& b) {
                  if (a.score != b.score) return a.score > b.score;
                  if (a.box.u_min != b.box.u_min) return a.box.u_min < b.box.u_min;
                  if (a.box.v_min != b.box.v_min) return a.box.v_min < b.box.v_min;
                  if (a.box.u_max != b.box.u_max) return a.box.u_max < b.box.u_max;
                  if (a.box.v_max != b.box.v_max) return a.box.v_max < b.box.v_max;
                  return a.cls < b.cls;
              });
    std::vector<DetectionRecord> kept;
    for (const auto& d : detections) {
        bool suppressed = false;
        for (const auto& k : kept) {
            if (k.cls != d.cls) continue;
            if (iou(d.box, k.box, pano_width) >= merge_iou) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(d);
    }
    return kept;
}

}  // namespace panoreduce
