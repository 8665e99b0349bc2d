#pragma once

#include <cstdint>
#include <vector>

#include "panoreduce/geometry.hpp"
#include "panoreduce/types.hpp"

namespace panoreduce {

enum class Orientation { horizontal, vertical, oblique };

std::string to_string(Orientation o);

/// Plane {p : normal . p + offset = 0} with unit normal, canonicalized to
/// normal.z >= 0 (ties: normal.y >= 0, then normal.x >= 0).
struct Plane {
    Vec3 normal{0.0, 0.0, 1.0};
    double offset = 0.0;
    std::vector<int> inliers;  // indices into the source cloud, ascending
    Orientation orientation = Orientation::oblique;
};

struct RansacParams {
    double distance_threshold_m = 0.5;
    int max_iterations = 500;
    int top_k = 10;
    int min_inliers = 50;
    double horizontal_angle_deg = 20.0;
    std::uint64_t seed = 1;
    bool refine = false;  // optional least-squares refit of the winning plane

    void validate() const;
};

// Deterministic candidate generation, identical across platforms:
//   * When C(n,3) <= max_iterations, all point triples are enumerated in
//     lexicographic order (i < j < k).
//   * Otherwise triples are sampled with an xorshift64* generator seeded from
//     params.seed (state 0 is remapped to 0x9E3779B97F4A7C15):
//         s ^= s >> 12; s ^= s << 25; s ^= s >> 27;
//         output = s * 0x2545F4914F6CDD1D
//     Each index is output % n; repeated indices are redrawn.

/// xorshift64* stream used for triple sampling; exposed so tests and other
/// language ports can reproduce the exact candidate sequence.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed);
    std::uint64_t next();
    /// Uniform-by-modulo draw in [0, n).
    std::uint64_t next_below(std::uint64_t n);

private:
    std::uint64_t state_;
};

/// Exact plane through three distinct, non-collinear points (no inliers set).
/// Throws DegenerateSample when the points are collinear or coincident.
Plane plane_from_points(const Vec3& p1, const Vec3& p2, const Vec3& p3);

/// |normal . p + offset|
double point_plane_distance(const Plane& plane, const Vec3& point);

/// Consensus search for the single best plane. The winner maximizes inlier
/// count; ties break on lower mean inlier distance, then lower candidate
/// index. Inliers (distance <= threshold) are recomputed against the final
/// plane. Throws NoPlaneFound when the cloud has < 3 points or the best
/// support is below min_inliers.
Plane ransac_fit(const PointCloud& cloud, const RansacParams& params);

/// Sequential extraction: fit, remove inliers, repeat, stopping at top_k
/// planes or the first failed fit. Inlier indices always refer to the
/// original cloud and are pairwise disjoint across planes.
std::vector<Plane> extract_top_planes(const PointCloud& cloud, const RansacParams& params);

/// horizontal iff angle(normal, +z) <= horizontal_angle_deg,
/// vertical  iff angle(normal, +z) >= 90 - horizontal_angle_deg.
Orientation classify_plane(const Plane& plane, const RansacParams& params);

}  // namespace panoreduce
