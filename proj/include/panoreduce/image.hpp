#pragma once

#include <cstdint>
#include <vector>

#include "panoreduce/types.hpp"

namespace panoreduce {

/// Interleaved 8-bit RGB, row-major from the top-left pixel.
struct ImageRgb {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // 3 * width * height

    ImageRgb() = default;
    ImageRgb(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(3) * w * h, fill) {}

    std::uint8_t* at(int u, int v) { return pixels.data() + 3 * (static_cast<std::size_t>(v) * width + u); }
    const std::uint8_t* at(int u, int v) const {
        return pixels.data() + 3 * (static_cast<std::size_t>(v) * width + u);
    }
    void set(int u, int v, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        auto* p = at(u, v);
        p[0] = r; p[1] = g; p[2] = b;
    }
};

/// Per-pixel metric depth, row-major. Non-finite = no LiDAR return / sky.
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<float> values;  // width * height

    DepthMap() = default;
    DepthMap(int w, int h, float fill = 0.0f)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    float& at(int u, int v) { return values[static_cast<std::size_t>(v) * width + u]; }
    float at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
};

/// Equirectangular 360x180 RGB-D frame, the system input.
struct DepthPanorama {
    ImageRgb rgb;
    DepthMap depth;

    int width() const { return rgb.width; }
    int height() const { return rgb.height; }
};

/// Throws ContractViolation unless width == 2*height, buffers are sized
/// width*height, and every finite depth value is > 0.
void validate(const DepthPanorama& pano);

/// One bit per pixel (stored as bytes), row-major. 1 = set.
struct Bitmap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  // width * height, values 0/1

    Bitmap() = default;
    Bitmap(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill) {}

    bool get(int u, int v) const { return bits[static_cast<std::size_t>(v) * width + u] != 0; }
    void set(int u, int v, bool on = true) {
        bits[static_cast<std::size_t>(v) * width + u] = on ? 1 : 0;
    }
    std::size_t count() const;
    bool same_dims(const Bitmap& o) const { return width == o.width && height == o.height; }
};

Bitmap bitmap_union(const Bitmap& a, const Bitmap& b);
Bitmap bitmap_difference(const Bitmap& a, const Bitmap& b);  // a \ b

}  // namespace panoreduce
