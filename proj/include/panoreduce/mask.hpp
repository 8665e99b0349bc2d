#pragma once

#include <optional>
#include <string>
#include <vector>

#include "panoreduce/image.hpp"
#include "panoreduce/ransac.hpp"

namespace panoreduce {

struct MaskParams {
    // 350 px at the reference cyclorama height; scaled to
    // round(buffer_px * H / reference_height_px) when auto_scale_buffer.
    int buffer_px = 350;
    bool auto_scale_buffer = true;
    int reference_height_px = 11180;

    double band_cap_frac = 1.0 / 3.0;  // band height ceiling, fraction of H
    int gap_bridge_columns = 50;       // bridge runs of <= this many empty columns

    // Ego-vehicle region: either an elevation cutoff (pixels with
    // phi < cutoff are ego) or an explicit P5 mask file (255 = ego).
    double ego_elevation_cutoff_deg = -62.0;
    std::optional<std::string> ego_mask_file;

    void validate() const;

    /// Effective buffer in pixels for an image of height h.
    int effective_buffer_px(int h) const;
};

/// Full-resolution processing mask plus its constituent regions.
/// Invariant: bitmap == (plane_region | buffer_region) & ~ego_region,
/// and buffer_region does not intersect plane_region.
struct ProcessingMask {
    int width = 0;
    int height = 0;
    Bitmap bitmap;
    Bitmap plane_region;   // per-column band over the reprojected planes
    Bitmap buffer_region;  // band added above each column's plane boundary
    Bitmap ego_region;
    double coverage = 0.0;
};

/// Paints the factor x factor full-resolution block anchored at each inlier's
/// (src_u, src_v) for every horizontal plane; blocks clip at image bounds.
Bitmap reproject_planes(const std::vector<Plane>& horizontal_planes, const PointCloud& cloud,
                        int factor, int full_width, int full_height);

/// Ego region bitmap. Elevation-cutoff variant sets every pixel row whose
/// center elevation is below the cutoff; a file-based mask is returned
/// verbatim (dims must match).
Bitmap ego_mask(const MaskParams& params, int width, int height);

/// Per-column band construction over a reprojected plane bitmap:
///   top(u)    = first plane row; bottom(u) = last plane row
///   buffer(u) = rows [top - buffer_px, top)
///   band(u)   = rows [top, min(bottom, top + band_cap_frac*H)]
/// Runs of <= gap_bridge_columns empty columns flanked by bands are bridged
/// by linear interpolation of top/bottom; columns wrap at the seam. The ego
/// region is cleared last.
ProcessingMask build_band(const Bitmap& plane_region, const MaskParams& params);

/// set bits / (width * height)
double coverage_fraction(const Bitmap& mask);

/// Fixed row band covering `fraction` of the sphere, the static baseline the
/// dynamic mask is compared against. The band starts at row
/// round(0.18 * H) to stand in for the usual sky / ego trims.
Bitmap static_band_mask(int width, int height, double fraction = 0.66);

/// RGB copy with ego tinted red, plane band yellow, buffer green.
ImageRgb overlay(const ImageRgb& pano, const ProcessingMask& mask);

}  // namespace panoreduce
