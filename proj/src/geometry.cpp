#include "panoreduce/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace panoreduce {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Vec3 pixel_to_ray(double u, double v, int width, int height) {
    if (width <= 0 || height <= 0) throw ContractViolation("pixel_to_ray: empty image");
    if (!(u >= 0.0 && u < width) || !(v >= 0.0 && v < height))
        throw ContractViolation("pixel_to_ray: pixel (" + std::to_string(u) + ", " +
                                std::to_string(v) + ") outside " + std::to_string(width) + "x" +
                                std::to_string(height));
    const double theta = 2.0 * kPi * (u + 0.5) / width - kPi;
    const double phi = kPi / 2.0 - kPi * (v + 0.5) / height;
    const double c = std::cos(phi);
    return {c * std::cos(theta), c * std::sin(theta), std::sin(phi)};
}

void ray_to_pixel(const Vec3& dir, int width, int height, double& u, double& v) {
    if (width <= 0 || height <= 0) throw ContractViolation("ray_to_pixel: empty image");
    const double n = dir.norm();
    if (n == 0.0) throw ContractViolation("ray_to_pixel: zero direction");

    const double horiz = std::hypot(dir.x, dir.y);
    // Azimuth at the exact poles is defined as 0.
    const double theta = horiz == 0.0 ? 0.0 : std::atan2(dir.y, dir.x);
    const double phi = std::asin(std::clamp(dir.z / n, -1.0, 1.0));

    u = (theta + kPi) * width / (2.0 * kPi) - 0.5;
    v = (kPi / 2.0 - phi) * height / kPi - 0.5;

    // Wrap u into [0, W); clamp v to [0, H-1] (pole rule).
    u = std::fmod(u, static_cast<double>(width));
    if (u < 0.0) u += width;
    if (u >= width) u = 0.0;  // fmod of values epsilon-below W can round up
    v = std::clamp(v, 0.0, static_cast<double>(height - 1));
}

PointCloud unproject(const DepthPanorama& pano, int stride) {
    if (stride < 1) throw ContractViolation("unproject: stride must be >= 1");
    const int w = pano.width();
    const int h = pano.height();
    PointCloud cloud;
    cloud.reserve((static_cast<std::size_t>(w) / stride + 1) * (h / stride + 1));
    for (int v = 0; v < h; v += stride) {
        for (int u = 0; u < w; u += stride) {
            const float d = pano.depth.at(u, v);
            if (!std::isfinite(d)) continue;
            const Vec3 ray = pixel_to_ray(u, v, w, h);
            cloud.push_back({d * ray.x, d * ray.y, d * ray.z, u, v});
        }
    }
    return cloud;
}

void downsampled_dims(int width, int height, int factor, int& out_w, int& out_h) {
    if (factor < 1) throw ContractViolation("downsample: factor must be >= 1");
    out_w = (width + factor - 1) / factor;
    out_h = (height + factor - 1) / factor;
}

DepthPanorama downsample(const DepthPanorama& pano, int factor) {
    int ow = 0;
    int oh = 0;
    downsampled_dims(pano.width(), pano.height(), factor, ow, oh);
    DepthPanorama out;
    out.rgb = ImageRgb(ow, oh);
    out.depth = DepthMap(ow, oh);
    for (int v = 0; v < oh; ++v) {
        const int sv = v * factor;
        for (int u = 0; u < ow; ++u) {
            const int su = u * factor;
            const auto* p = pano.rgb.at(su, sv);
            out.rgb.set(u, v, p[0], p[1], p[2]);
            out.depth.at(u, v) = pano.depth.at(su, sv);
        }
    }
    return out;
}

}  // namespace panoreduce
