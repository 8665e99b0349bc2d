#include "panoreduce/image.hpp"

#include <algorithm>
#include <cmath>

namespace panoreduce {

void validate(const DepthPanorama& pano) {
    const int w = pano.rgb.width;
    const int h = pano.rgb.height;
    if (w <= 0 || h <= 0) throw ContractViolation("panorama has empty dimensions");
    if (w != 2 * h)
        throw ContractViolation("equirectangular panorama requires width == 2 * height, got " +
                                std::to_string(w) + "x" + std::to_string(h));
    if (pano.depth.width != w || pano.depth.height != h)
        throw ContractViolation("rgb and depth dimensions differ");
    if (pano.rgb.pixels.size() != static_cast<std::size_t>(3) * w * h)
        throw ContractViolation("rgb buffer size does not match dimensions");
    if (pano.depth.values.size() != static_cast<std::size_t>(w) * h)
        throw ContractViolation("depth buffer size does not match dimensions");
    for (const float d : pano.depth.values) {
        if (std::isfinite(d) && d <= 0.0f)
            throw ContractViolation("finite depth values must be > 0");
    }
}

std::size_t Bitmap::count() const {
    std::size_t n = 0;
    for (const auto b : bits) n += b != 0;
    return n;
}

Bitmap bitmap_union(const Bitmap& a, const Bitmap& b) {
    if (!a.same_dims(b)) throw ContractViolation("bitmap dimension mismatch in union");
    Bitmap out(a.width, a.height);
    for (std::size_t i = 0; i < a.bits.size(); ++i) out.bits[i] = (a.bits[i] | b.bits[i]) ? 1 : 0;
    return out;
}

Bitmap bitmap_difference(const Bitmap& a, const Bitmap& b) {
    if (!a.same_dims(b)) throw ContractViolation("bitmap dimension mismatch in difference");
    Bitmap out(a.width, a.height);
    for (std::size_t i = 0; i < a.bits.size(); ++i) out.bits[i] = (a.bits[i] && !b.bits[i]) ? 1 : 0;
    return out;
}

}  // namespace panoreduce
