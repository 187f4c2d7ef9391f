#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string_view>
#include <vector>

#include "geograsp/cloud.hpp"

namespace geograsp {

enum class PoseClass { Upright, Lying };

inline std::string_view to_string(PoseClass c) { return c == PoseClass::Upright ? "upright" : "lying"; }

/// Principal axes of a point set, largest variance first.
struct PrincipalAxes {
  std::array<Vec3, 3> axes;
  std::array<double, 3> eigenvalues{};
  Vec3 mean = Vec3::Zero();
  Mat3 covariance = Mat3::Zero();
};

struct ObjectEstimate {
  Point3 centroid = Point3::Zero();
  std::array<Vec3, 3> axes{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  std::array<double, 3> eigenvalues{};
  PoseClass pose_class = PoseClass::Lying;
  double z_top = 0.0;
  double z_plane = 0.0;
};

/// Fraction of the object's height distribution used as its top.
inline constexpr double kTopPercentile = 0.95;
/// Relative eigenvalue gap below which the leading axes count as tied.
inline constexpr double kIsotropyTieRatio = 1e-3;

/// Linear-interpolation percentile (the "type 7" estimator); q in [0, 1].
inline double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

inline double robust_top(const PointCloud& object) {
  std::vector<double> zs;
  zs.reserve(object.size());
  for (const auto& p : object.points) zs.push_back(p.z());
  return percentile(std::move(zs), kTopPercentile);
}

/// x, y: mean of the object points. z: halfway between the support plane and
/// the robust top of the object, which removes the upward bias of a cloud
/// that only sees the object's upper surfaces.
inline Point3 corrected_centroid(const PointCloud& object, double plane_height) {
  if (object.empty()) throw EmptyObject("object cloud is empty");
  double sx = 0.0, sy = 0.0;
  for (const auto& p : object.points) {
    sx += p.x();
    sy += p.y();
  }
  const double n = static_cast<double>(object.size());
  return {sx / n, sy / n, 0.5 * (plane_height + robust_top(object))};
}

inline Point3 raw_mean(const PointCloud& object) {
  if (object.empty()) throw EmptyObject("object cloud is empty");
  Vec3 s = Vec3::Zero();
  for (const auto& p : object.points) s += p;
  return s / static_cast<double>(object.size());
}

/// Population covariance about the raw mean (two-pass).
inline Mat3 covariance(const PointCloud& cloud, const Vec3& mean) {
  Mat3 c = Mat3::Zero();
  for (const auto& p : cloud.points) {
    const Vec3 d = p - mean;
    c.noalias() += d * d.transpose();
  }
  return c / static_cast<double>(cloud.size());
}

namespace detail {

inline Vec3 canonical_sign(const Vec3& v) {
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  return v(k) < 0.0 ? Vec3(-v) : v;
}

}  // namespace detail

inline PrincipalAxes principal_axes(const PointCloud& object) {
  if (object.size() < 3) throw DegenerateCloud("need at least 3 points, got " + std::to_string(object.size()));
  PrincipalAxes out;
  out.mean = raw_mean(object);
  out.covariance = covariance(object, out.mean);

  Eigen::SelfAdjointEigenSolver<Mat3> solver(out.covariance);
  if (solver.info() != Eigen::Success) throw DegenerateCloud("eigen-decomposition failed");
  // Eigen sorts ascending.
  for (int i = 0; i < 3; ++i) {
    out.eigenvalues[i] = std::max(0.0, solver.eigenvalues()(2 - i));
    out.axes[i] = detail::canonical_sign(solver.eigenvectors().col(2 - i).normalized());
  }
  const double scale = 1.0 + out.mean.squaredNorm();
  if (out.eigenvalues[0] <= 1e-14 * scale) throw DegenerateCloud("points are coincident");

  // Near-isotropic leading block: prefer the candidate closest to vertical.
  std::size_t pick = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (out.eigenvalues[0] - out.eigenvalues[i] >= kIsotropyTieRatio * out.eigenvalues[0]) break;
    if (std::abs(out.axes[i].z()) > std::abs(out.axes[pick].z())) pick = i;
  }
  if (pick != 0) {
    std::swap(out.axes[0], out.axes[pick]);
    std::swap(out.eigenvalues[0], out.eigenvalues[pick]);
  }
  // Right-handed frame; u3 follows from u1 and u2 rather than its own sign rule.
  out.axes[2] = out.axes[0].cross(out.axes[1]).normalized();
  return out;
}

/// Upright when the elongation axis is within 45 degrees of vertical
/// (boundary inclusive).
inline PoseClass classify_pose(const std::array<Vec3, 3>& axes, const std::array<double, 3>& /*eigenvalues*/) {
  const double cos45 = std::cos(std::numbers::pi / 4.0);
  return std::abs(axes[0].z()) >= cos45 - 1e-12 ? PoseClass::Upright : PoseClass::Lying;
}

inline ObjectEstimate estimate_object(const PointCloud& object, double plane_height) {
  ObjectEstimate est;
  est.centroid = corrected_centroid(object, plane_height);
  const PrincipalAxes pa = principal_axes(object);
  est.axes = pa.axes;
  est.eigenvalues = pa.eigenvalues;
  est.pose_class = classify_pose(pa.axes, pa.eigenvalues);
  est.z_top = robust_top(object);
  est.z_plane = plane_height;
  return est;
}

}  // namespace geograsp
