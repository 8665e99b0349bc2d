#pragma once

#include <vector>

#include "panoreduce/image.hpp"
#include "panoreduce/mask.hpp"

namespace panoreduce {

struct TilerParams {
    int patch_w = 1200;
    int patch_h = 600;
    int overlap_px = 120;
    double merge_iou = 0.5;

    void validate() const;
};

/// Fixed-size crop of the panorama. Horizontal coordinates wrap at the seam;
/// `pixels` already contains the wrapped columns, so detectors never see the
/// spherical topology.
struct Patch {
    int u0 = 0;  // origin column in [0, W)
    int v0 = 0;
    int width = 0;
    int height = 0;
    bool wraps_seam = false;
    ImageRgb pixels;
};

/// Tiles the mask's occupied rows with a grid of patch_w x patch_h patches
/// advancing by (patch_w - overlap, patch_h - overlap), wrapping horizontally.
/// Every mask pixel is covered by at least one patch; patches that do not
/// intersect the mask are dropped. Ordering is row-major by origin.
/// Throws ContractViolation when patch dims exceed the panorama.
std::vector<Patch> tile(const Bitmap& mask, const ImageRgb& pano, const TilerParams& params);

/// Patch-local box -> panorama coordinates. A box crossing u = W splits into
/// two wrapped boxes.
std::vector<Box> to_global(const Patch& patch, const Box& local_box, int pano_width);

/// Greedy score-descending suppression within each class: a box is dropped
/// when IoU with an already-kept box of the same class >= merge_iou (wrapped
/// horizontal metric). Output sorted by score descending, ties by
/// (u_min, v_min).
std::vector<DetectionRecord> merge_detections(std::vector<DetectionRecord> detections,
                                              double merge_iou, int pano_width);

}  // namespace panoreduce
