#include "panoreduce/ransac.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace panoreduce {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::string to_string(Orientation o) {
    switch (o) {
        case Orientation::horizontal: return "horizontal";
        case Orientation::vertical: return "vertical";
        default: return "oblique";
    }
}

void RansacParams::validate() const {
    if (!(distance_threshold_m > 0.0)) throw ConfigError("ransac.distance_threshold_m must be > 0");
    if (max_iterations < 1) throw ConfigError("ransac.max_iterations must be >= 1");
    if (top_k < 1) throw ConfigError("ransac.top_k must be >= 1");
    if (min_inliers < 3) throw ConfigError("ransac.min_inliers must be >= 3");
    if (!(horizontal_angle_deg > 0.0 && horizontal_angle_deg < 90.0))
        throw ConfigError("ransac.horizontal_angle_deg must lie in (0, 90)");
}

SplitRng::SplitRng(std::uint64_t seed) : state_(seed ? seed : 0x9E3779B97F4A7C15ULL) {}

std::uint64_t SplitRng::next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
}

std::uint64_t SplitRng::next_below(std::uint64_t n) { return next() % n; }

namespace {

// Deterministic canonical sign: z >= 0, ties broken by y then x.
Vec3 canonicalize(const Vec3& n) {
    if (n.z > 0.0) return n;
    if (n.z < 0.0) return n * -1.0;
    if (n.y > 0.0) return n;
    if (n.y < 0.0) return n * -1.0;
    return n.x >= 0.0 ? n : n * -1.0;
}

}  // namespace

Plane plane_from_points(const Vec3& p1, const Vec3& p2, const Vec3& p3) {
    const Vec3 e1 = p2 - p1;
    const Vec3 e2 = p3 - p1;
    const Vec3 cross = e1.cross(e2);
    const double scale = e1.norm() * e2.norm();
    if (cross.norm() <= 1e-12 * scale)
        throw DegenerateSample("collinear or coincident sample points");
    Plane plane;
    plane.normal = canonicalize(cross / cross.norm());
    plane.offset = -plane.normal.dot(p1);
    return plane;
}

double point_plane_distance(const Plane& plane, const Vec3& point) {
    return std::abs(plane.normal.dot(point) + plane.offset);
}

namespace {

struct Candidate {
    Plane plane;
    std::size_t count = 0;
    double mean_dist = 0.0;
    std::uint64_t index = 0;
    bool valid = false;

    bool better_than(const Candidate& o) const {
        if (!o.valid) return true;
        if (count != o.count) return count > o.count;
        if (mean_dist != o.mean_dist) return mean_dist < o.mean_dist;
        return index < o.index;
    }
};

void score(Candidate& c, const PointCloud& cloud, double threshold) {
    std::size_t count = 0;
    double sum = 0.0;
    for (const auto& p : cloud) {
        const double d = point_plane_distance(c.plane, p.pos());
        if (d <= threshold) {
            ++count;
            sum += d;
        }
    }
    c.count = count;
    c.mean_dist = count ? sum / static_cast<double>(count) : 0.0;
    c.valid = true;
}

std::uint64_t triple_count(std::size_t n) {
    if (n < 3) return 0;
    return static_cast<std::uint64_t>(n) * (n - 1) / 2 * (n - 2) / 3;
}

std::vector<int> collect_inliers(const Plane& plane, const PointCloud& cloud, double threshold) {
    std::vector<int> inliers;
    for (std::size_t i = 0; i < cloud.size(); ++i)
        if (point_plane_distance(plane, cloud[i].pos()) <= threshold)
            inliers.push_back(static_cast<int>(i));
    return inliers;
}

// Jacobi eigen decomposition of a symmetric 3x3; returns the eigenvector of
// the smallest eigenvalue. Used only by the optional least-squares refit.
Vec3 smallest_eigenvector(std::array<std::array<double, 3>, 3> a) {
    std::array<std::array<double, 3>, 3> v{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    for (int sweep = 0; sweep < 32; ++sweep) {
        double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off < 1e-15) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(a[p][q]) < 1e-18) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < 3; ++k) {
                    const double vkp = v[k][p];
                    const double vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    int best = 0;
    for (int i = 1; i < 3; ++i)
        if (a[i][i] < a[best][best]) best = i;
    return {v[0][best], v[1][best], v[2][best]};
}

bool refit_least_squares(Plane& plane, const PointCloud& cloud, const std::vector<int>& inliers) {
    if (inliers.size() < 3) return false;
    Vec3 centroid{0, 0, 0};
    for (const int i : inliers) centroid = centroid + cloud[i].pos();
    centroid = centroid / static_cast<double>(inliers.size());
    std::array<std::array<double, 3>, 3> cov{};
    for (const int i : inliers) {
        const Vec3 d = cloud[i].pos() - centroid;
        cov[0][0] += d.x * d.x;
        cov[0][1] += d.x * d.y;
        cov[0][2] += d.x * d.z;
        cov[1][1] += d.y * d.y;
        cov[1][2] += d.y * d.z;
        cov[2][2] += d.z * d.z;
    }
    cov[1][0] = cov[0][1];
    cov[2][0] = cov[0][2];
    cov[2][1] = cov[1][2];
    const Vec3 n = smallest_eigenvector(cov);
    const double len = n.norm();
    if (len < 1e-12) return false;
    plane.normal = canonicalize(n / len);
    plane.offset = -plane.normal.dot(centroid);
    return true;
}

}  // namespace

Plane ransac_fit(const PointCloud& cloud, const RansacParams& params) {
    params.validate();
    const std::size_t n = cloud.size();
    if (n < 3) throw NoPlaneFound("cloud has fewer than 3 points");

    const double threshold = params.distance_threshold_m;
    Candidate best;

    const bool exhaustive = n < (1u << 21) &&
                            triple_count(n) <= static_cast<std::uint64_t>(params.max_iterations);
    if (exhaustive) {
        std::uint64_t index = 0;
        for (std::size_t i = 0; i + 2 < n; ++i) {
            for (std::size_t j = i + 1; j + 1 < n; ++j) {
                for (std::size_t k = j + 1; k < n; ++k) {
                    Candidate c;
                    c.index = index++;
                    try {
                        c.plane = plane_from_points(cloud[i].pos(), cloud[j].pos(), cloud[k].pos());
                    } catch (const DegenerateSample&) {
                        continue;
                    }
                    score(c, cloud, threshold);
                    if (c.better_than(best)) best = c;
                }
            }
        }
    } else {
        SplitRng rng(params.seed);
        std::uint64_t evaluated = 0;
        // Degenerate draws do not consume iterations; the attempt cap keeps
        // pathological clouds (all points collinear) from spinning forever.
        std::uint64_t attempts = 0;
        const std::uint64_t max_attempts =
            std::max<std::uint64_t>(10u * static_cast<std::uint64_t>(params.max_iterations), 1000u);
        while (evaluated < static_cast<std::uint64_t>(params.max_iterations) &&
               attempts < max_attempts) {
            ++attempts;
            const auto a = rng.next_below(n);
            auto b = rng.next_below(n);
            while (b == a) b = rng.next_below(n);
            auto c = rng.next_below(n);
            while (c == a || c == b) c = rng.next_below(n);

            Candidate cand;
            cand.index = evaluated;
            try {
                cand.plane = plane_from_points(cloud[a].pos(), cloud[b].pos(), cloud[c].pos());
            } catch (const DegenerateSample&) {
                continue;
            }
            ++evaluated;
            score(cand, cloud, threshold);
            if (cand.better_than(best)) best = cand;
        }
    }

    if (!best.valid || best.count < static_cast<std::size_t>(params.min_inliers))
        throw NoPlaneFound("best consensus " + std::to_string(best.valid ? best.count : 0) +
                           " below min_inliers " + std::to_string(params.min_inliers));

    Plane plane = best.plane;
    plane.inliers = collect_inliers(plane, cloud, threshold);
    if (params.refine && refit_least_squares(plane, cloud, plane.inliers)) {
        auto refined = collect_inliers(plane, cloud, threshold);
        if (refined.size() >= static_cast<std::size_t>(params.min_inliers))
            plane.inliers = std::move(refined);
        else
            plane = best.plane, plane.inliers = collect_inliers(plane, cloud, threshold);
    }
    plane.orientation = classify_plane(plane, params);
    return plane;
}

std::vector<Plane> extract_top_planes(const PointCloud& cloud, const RansacParams& params) {
    params.validate();
    std::vector<int> live(cloud.size());
    std::iota(live.begin(), live.end(), 0);

    std::vector<Plane> planes;
    while (static_cast<int>(planes.size()) < params.top_k && live.size() >= 3) {
        PointCloud residual;
        residual.reserve(live.size());
        for (const int i : live) residual.push_back(cloud[i]);

        Plane plane;
        try {
            plane = ransac_fit(residual, params);
        } catch (const NoPlaneFound&) {
            break;
        }

        // Map inlier indices back to the original cloud; remove them from
        // the residual so later planes stay disjoint.
        std::vector<int> original;
        original.reserve(plane.inliers.size());
        for (const int i : plane.inliers) original.push_back(live[i]);
        plane.inliers = original;

        std::vector<int> remaining;
        remaining.reserve(live.size() - original.size());
        std::size_t cursor = 0;
        for (const int idx : live) {
            if (cursor < original.size() && original[cursor] == idx)
                ++cursor;
            else
                remaining.push_back(idx);
        }
        live = std::move(remaining);
        planes.push_back(std::move(plane));
    }
    return planes;
}

Orientation classify_plane(const Plane& plane, const RansacParams& params) {
    const double cosz = std::clamp(std::abs(plane.normal.z), 0.0, 1.0);
    const double angle_deg = std::acos(cosz) * 180.0 / kPi;
    if (angle_deg <= params.horizontal_angle_deg) return Orientation::horizontal;
    if (angle_deg >= 90.0 - params.horizontal_angle_deg) return Orientation::vertical;
    return Orientation::oblique;
}

}  // namespace panoreduce
