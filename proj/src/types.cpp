#include "panoreduce/types.hpp"

#include <algorithm>

namespace panoreduce {

std::string to_string(ObjectClass c) {
    return c == ObjectClass::face ? "face" : "plate";
}

ObjectClass object_class_from_string(const std::string& s) {
    if (s == "face") return ObjectClass::face;
    if (s == "plate") return ObjectClass::plate;
    throw FormatError("unknown object class '" + s + "'");
}

Box intersect(const Box& a, const Box& b) {
    Box r;
    r.u_min = std::max(a.u_min, b.u_min);
    r.v_min = std::max(a.v_min, b.v_min);
    r.u_max = std::min(a.u_max, b.u_max);
    r.v_max = std::min(a.v_max, b.v_max);
    return r;
}

namespace {

double interval_overlap(double a0, double a1, double b0, double b1) {
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace

double intersection_area(const Box& a, const Box& b, int wrap_width) {
    const double dv = interval_overlap(a.v_min, a.v_max, b.v_min, b.v_max);
    if (dv <= 0.0) return 0.0;
    double du = interval_overlap(a.u_min, a.u_max, b.u_min, b.u_max);
    if (wrap_width > 0) {
        // Normalized boxes live inside [0, W]; shifting one of them by +-W
        // catches every adjacency across the seam.
        du = std::max(du, interval_overlap(a.u_min + wrap_width, a.u_max + wrap_width,
                                           b.u_min, b.u_max));
        du = std::max(du, interval_overlap(a.u_min - wrap_width, a.u_max - wrap_width,
                                           b.u_min, b.u_max));
    }
    return du * dv;
}

double iou(const Box& a, const Box& b, int wrap_width) {
    const double inter = intersection_area(a, b, wrap_width);
    if (inter <= 0.0) return 0.0;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace panoreduce
