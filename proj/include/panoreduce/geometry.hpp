#pragma once

#include <vector>

#include "panoreduce/image.hpp"
#include "panoreduce/types.hpp"

namespace panoreduce {

// Camera frame convention, inherited by every other module:
//   camera at the origin; +x forward, +y left, +z up.
//   azimuth   theta in [-pi, pi), measured from +x toward +y
//   elevation phi   in [-pi/2, pi/2], from the horizon toward +z
// Pixel (u, v) of a WxH equirectangular panorama maps to
//   theta = 2*pi*(u + 0.5)/W - pi
//   phi   = pi/2 - pi*(v + 0.5)/H
//   dir   = (cos(phi)*cos(theta), cos(phi)*sin(theta), sin(phi))
// u and v may be continuous; integer indices address pixel centers.

/// Ray through pixel (u, v). Throws ContractViolation outside [0,W) x [0,H).
Vec3 pixel_to_ray(double u, double v, int width, int height);

/// Continuous pixel position of a direction. u wraps into [0, W); v is
/// clamped to [0, H-1]; azimuth at the exact poles is defined as 0.
/// Throws ContractViolation for the zero vector.
void ray_to_pixel(const Vec3& dir, int width, int height, double& u, double& v);

struct CloudPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    int src_u = 0;  // full-resolution source pixel
    int src_v = 0;

    Vec3 pos() const { return {x, y, z}; }
};

/// 3D points in the camera frame, each carrying its source pixel.
using PointCloud = std::vector<CloudPoint>;

/// Samples the depth map on a stride lattice (rows/cols 0, stride, 2*stride,
/// ...) and unprojects every finite sample: point = depth * pixel_to_ray.
/// Output is row-major; an all-non-finite map yields an empty cloud.
PointCloud unproject(const DepthPanorama& pano, int stride);

/// ceil(extent / factor) for both axes.
void downsampled_dims(int width, int height, int factor, int& out_w, int& out_h);

/// Point-sampled downsampling: output pixel k takes input pixel k*factor
/// (top-left of each block) for both RGB and depth. factor 1 is the identity.
DepthPanorama downsample(const DepthPanorama& pano, int factor);

}  // namespace panoreduce
