#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "geograsp/errors.hpp"

namespace geograsp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Point3 = Vec3;

enum class Frame { Camera, World };

inline std::string_view to_string(Frame f) { return f == Frame::Camera ? "camera" : "world"; }

inline Frame frame_from_string(std::string_view s) {
  if (s == "camera") return Frame::Camera;
  if (s == "world") return Frame::World;
  throw InvalidArgument("unknown frame label '" + std::string(s) + "'");
}

inline bool is_finite(const Vec3& p) {
  return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

/// Unordered point set in a named frame. Points keep insertion order.
struct PointCloud {
  std::vector<Point3> points;
  Frame frame = Frame::Camera;

  PointCloud() = default;
  explicit PointCloud(Frame f) : frame(f) {}
  PointCloud(std::vector<Point3> pts, Frame f) : points(std::move(pts)), frame(f) {}

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  const Point3& operator[](std::size_t i) const { return points[i]; }
};

/// Throws InvalidArgument if any point is NaN/Inf.
inline void validate(const PointCloud& cloud) {
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!is_finite(cloud.points[i]))
      throw InvalidArgument("point " + std::to_string(i) + " is not finite");
  }
}

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  Aabb() = default;
  Aabb(const Vec3& lo, const Vec3& hi) : min(lo), max(hi) {
    if ((lo.array() > hi.array()).any()) throw InvalidArgument("Aabb min exceeds max");
  }

  /// Closed on every face.
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }

  static Aabb bounding(const PointCloud& cloud) {
    if (cloud.empty()) return {};
    Vec3 lo = cloud.points.front(), hi = lo;
    for (const auto& p : cloud.points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    return {lo, hi};
  }
};

/// Rotation plus translation, applied as R * p + t.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static constexpr double kTolerance = 1e-9;

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }

  bool is_valid() const {
    if (!rotation.allFinite() || !translation.allFinite()) return false;
    const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    return ortho <= kTolerance && std::abs(rotation.determinant() - 1.0) <= kTolerance;
  }

  void validate() const {
    if (!is_valid()) throw InvalidTransform("rotation is not a proper orthonormal matrix");
  }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    const Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  /// (*this) after `first`: p -> this(first(p)).
  RigidTransform compose(const RigidTransform& first) const {
    return {rotation * first.rotation, rotation * first.translation + translation};
  }
};

/// Camera looking straight down from `height` above the world origin:
/// camera x = world x, camera y = -world y, optical axis = -world z.
inline RigidTransform overhead_camera(double height) {
  RigidTransform t;
  t.rotation = Vec3(1.0, -1.0, -1.0).asDiagonal();
  t.translation = Vec3(0.0, 0.0, height);
  return t;
}

inline PointCloud apply_rigid_transform(const PointCloud& cloud, const RigidTransform& t, Frame new_frame) {
  t.validate();
  PointCloud out(new_frame);
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(t.apply(p));
  return out;
}

/// Keeps points inside the closed box, in their original order.
inline PointCloud crop_workspace(const PointCloud& cloud, const Aabb& box) {
  if (cloud.frame != Frame::World) throw InvalidArgument("crop_workspace expects a world-frame cloud");
  PointCloud out(cloud.frame);
  for (const auto& p : cloud.points)
    if (box.contains(p)) out.points.push_back(p);
  return out;
}

}  // namespace geograsp
