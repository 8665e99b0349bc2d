#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace panoreduce {

// ----------------------------------------------------------------------------
// Errors
// ----------------------------------------------------------------------------

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or truncated file content (PPM/PGM/PFM/JSON).
class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

/// Invalid configuration or scene document; message names the field path.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// A caller violated a documented precondition.
class ContractViolation : public Error {
public:
    explicit ContractViolation(const std::string& msg) : Error(msg) {}
};

/// Consensus search could not produce a plane (too few points or
/// best support below min_inliers).
class NoPlaneFound : public Error {
public:
    explicit NoPlaneFound(const std::string& msg) : Error(msg) {}
};

/// Collinear or coincident sample points cannot define a plane.
class DegenerateSample : public Error {
public:
    explicit DegenerateSample(const std::string& msg) : Error(msg) {}
};

/// External detector failed: process exit, timeout, or protocol violation.
class DetectorError : public Error {
public:
    explicit DetectorError(const std::string& msg) : Error(msg) {}
};

// ----------------------------------------------------------------------------
// Small vector math
// ----------------------------------------------------------------------------

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const {
        const double n = norm();
        if (n == 0.0) throw ContractViolation("cannot normalize a zero vector");
        return *this / n;
    }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// ----------------------------------------------------------------------------
// Detections
// ----------------------------------------------------------------------------

enum class ObjectClass { face, plate };

std::string to_string(ObjectClass c);
ObjectClass object_class_from_string(const std::string& s);

/// Axis-aligned box, half-open in both axes: [u_min, u_max) x [v_min, v_max).
struct Box {
    double u_min = 0.0;
    double v_min = 0.0;
    double u_max = 0.0;
    double v_max = 0.0;

    double width() const { return u_max - u_min; }
    double height() const { return v_max - v_min; }
    double area() const { return width() * height(); }
    bool valid() const { return u_min < u_max && v_min < v_max; }
};

/// Plain axis-aligned intersection (no horizontal wrap).
Box intersect(const Box& a, const Box& b);

/// Intersection area; `wrap_width > 0` treats u as periodic with that period.
double intersection_area(const Box& a, const Box& b, int wrap_width = 0);

/// Intersection-over-union; `wrap_width > 0` enables the wrapped metric.
double iou(const Box& a, const Box& b, int wrap_width = 0);

struct DetectionRecord {
    ObjectClass cls = ObjectClass::face;
    Box box;
    double score = 0.0;
};

}  // namespace panoreduce
