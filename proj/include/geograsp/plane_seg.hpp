#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "geograsp/cloud.hpp"
#include "geograsp/rng.hpp"

namespace geograsp {

/// Plane {p : normal . p + offset = 0} with unit normal and normal.z >= 0.
struct PlaneModel {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;

  double signed_distance(const Vec3& p) const { return normal.dot(p) + offset; }

  /// z where the plane crosses the vertical through the origin.
  double height() const { return -offset / normal.z(); }

  double tilt_radians() const { return std::acos(std::clamp(normal.z(), -1.0, 1.0)); }
};

struct RansacParams {
  double inlier_threshold = 0.008;
  int max_iterations = 500;
  double min_inlier_fraction = 0.30;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(inlier_threshold > 0.0)) throw InvalidArgument("inlier_threshold must be positive");
    if (max_iterations < 1) throw InvalidArgument("max_iterations must be at least 1");
    if (!(min_inlier_fraction > 0.0 && min_inlier_fraction <= 1.0))
      throw InvalidArgument("min_inlier_fraction must lie in (0, 1]");
  }
};

/// Support surface tilt beyond which the dominant plane is rejected.
inline constexpr double kMaxSupportTiltDeg = 15.0;

struct Segmentation {
  PlaneModel plane;
  double plane_height = 0.0;
  PointCloud object;
  PointCloud support_inliers;
};

/// Best minimal-sample hypothesis found by the consensus search, before
/// least-squares refinement.
struct RansacResult {
  PlaneModel sample_plane;
  std::vector<std::size_t> inliers;
  int iteration = -1;
  int degenerate_samples = 0;
};

inline PlaneModel canonical_plane(Vec3 normal, double offset) {
  if (normal.z() < 0.0) {
    normal = -normal;
    offset = -offset;
  }
  return {normal, offset};
}

/// Plane through three points; nullopt when they are (numerically) collinear.
inline std::optional<PlaneModel> plane_from_points(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a;
  const Vec3 n = ab.cross(ac);
  const double scale = ab.norm() * ac.norm();
  if (!(scale > 0.0) || n.norm() <= 1e-12 * scale) return std::nullopt;
  const Vec3 unit = n.normalized();
  return canonical_plane(unit, -unit.dot(a));
}

/// Draws max_iterations minimal samples. Iteration i uses Rng(seed, i); the
/// largest inlier set wins, ties going to the lowest iteration index.
inline RansacResult ransac_search(const PointCloud& cloud, const RansacParams& params) {
  params.validate();
  const std::size_t n = cloud.size();
  if (n < 3) throw InsufficientPoints("need at least 3 points, got " + std::to_string(n));
  const auto& pts = cloud.points;

  RansacResult best;
  std::size_t best_count = 0;
  for (int it = 0; it < params.max_iterations; ++it) {
    Rng rng(params.seed, static_cast<std::uint64_t>(it));
    const std::size_t i0 = rng.index(n);
    std::size_t i1 = rng.index(n - 1);
    if (i1 >= i0) ++i1;
    std::size_t i2 = rng.index(n - 2);
    for (std::size_t taken : {std::min(i0, i1), std::max(i0, i1)})
      if (i2 >= taken) ++i2;

    const auto plane = plane_from_points(pts[i0], pts[i1], pts[i2]);
    if (!plane) {
      ++best.degenerate_samples;
      continue;
    }
    std::size_t count = 0;
    for (const auto& p : pts)
      if (std::abs(plane->signed_distance(p)) <= params.inlier_threshold) ++count;
    if (best.iteration < 0 || count > best_count) {
      best_count = count;
      best.sample_plane = *plane;
      best.iteration = it;
    }
  }
  if (best.iteration < 0) throw DegenerateSample("every sampled triple was collinear");

  best.inliers.reserve(best_count);
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(best.sample_plane.signed_distance(pts[i])) <= params.inlier_threshold) best.inliers.push_back(i);
  return best;
}

/// Total least squares: plane through the centroid, normal along the
/// smallest-eigenvalue eigenvector of the scatter matrix.
inline PlaneModel refine_plane(const PointCloud& cloud, const std::vector<std::size_t>& indices) {
  if (indices.size() < 3) throw InsufficientPoints("plane refinement needs 3 points");
  Vec3 mean = Vec3::Zero();
  for (auto i : indices) mean += cloud.points[i];
  mean /= static_cast<double>(indices.size());
  Mat3 scatter = Mat3::Zero();
  for (auto i : indices) {
    const Vec3 d = cloud.points[i] - mean;
    scatter.noalias() += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> solver(scatter);
  const Vec3 normal = solver.eigenvectors().col(0).normalized();
  return canonical_plane(normal, -normal.dot(mean));
}

inline double sum_squared_distance(const PointCloud& cloud, const std::vector<std::size_t>& indices,
                                   const PlaneModel& plane) {
  double s = 0.0;
  for (auto i : indices) {
    const double d = plane.signed_distance(cloud.points[i]);
    s += d * d;
  }
  return s;
}

inline PlaneModel fit_dominant_plane(const PointCloud& cloud, const RansacParams& params) {
  const RansacResult search = ransac_search(cloud, params);
  const double fraction = static_cast<double>(search.inliers.size()) / static_cast<double>(cloud.size());
  if (fraction < params.min_inlier_fraction)
    throw TooFewInliers("best plane explains only " + std::to_string(fraction * 100.0) + "% of points");
  const PlaneModel plane = refine_plane(cloud, search.inliers);
  const double tilt_deg = plane.tilt_radians() * 180.0 / std::numbers::pi;
  if (tilt_deg > kMaxSupportTiltDeg)
    throw NonHorizontalPlane("dominant plane is tilted " + std::to_string(tilt_deg) + " deg from horizontal");
  return plane;
}

/// Points more than `threshold` above the plane form the object; everything
/// else (near the plane or below it) is support.
inline Segmentation split_by_plane(const PointCloud& cloud, const PlaneModel& plane, double threshold) {
  if (!(threshold > 0.0)) throw InvalidArgument("threshold must be positive");
  if (!(plane.normal.z() > 0.0)) throw InvalidArgument("plane normal must point upward");
  Segmentation seg;
  seg.plane = plane;
  seg.plane_height = plane.height();
  seg.object.frame = cloud.frame;
  seg.support_inliers.frame = cloud.frame;
  for (const auto& p : cloud.points) {
    if (plane.signed_distance(p) > threshold)
      seg.object.points.push_back(p);
    else
      seg.support_inliers.points.push_back(p);
  }
  if (seg.object.empty()) throw NoObjectFound("no points above the support plane");
  return seg;
}

}  // namespace geograsp
