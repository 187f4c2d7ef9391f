#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "geograsp/cloud.hpp"
#include "geograsp/rng.hpp"
#include "geograsp/shapes.hpp"

namespace geograsp {

/// Table top is a 0.6 m square centered on the world origin at z = 0.
inline constexpr double kTableHalfSize = 0.30;
inline constexpr double kTableHeight = 0.0;
inline constexpr double kDefaultCameraHeight = 1.72;

enum class Placement { Standing, LyingX, LyingY };

inline std::string_view to_string(Placement p) {
  switch (p) {
    case Placement::Standing: return "standing";
    case Placement::LyingX: return "lying_x";
    case Placement::LyingY: return "lying_y";
  }
  return "standing";
}

inline Placement placement_from_string(std::string_view s) {
  if (s == "standing") return Placement::Standing;
  if (s == "lying_x" || s == "lying-x") return Placement::LyingX;
  if (s == "lying_y" || s == "lying-y") return Placement::LyingY;
  throw InvalidArgument("unknown placement '" + std::string(s) + "'");
}

struct ScenePose {
  Placement placement = Placement::Standing;
  double yaw = 0.0;
  Eigen::Vector2d xy_offset = Eigen::Vector2d::Zero();
};

struct SensorModel {
  Point3 camera_position{0.0, 0.0, kDefaultCameraHeight};
  double surface_sample_density = 40000.0;  // points per m^2
  double noise_sigma = 0.0015;              // m, along the viewing ray
  std::uint64_t seed = 0;

  void validate() const {
    if (!camera_position.allFinite()) throw InvalidArgument("camera position must be finite");
    if (!(surface_sample_density > 0.0)) throw InvalidArgument("surface_sample_density must be positive");
    if (!(noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be non-negative");
  }
};

struct SceneTruth {
  PrimitiveShape shape;
  RigidTransform pose;  // local -> world
  Point3 true_centroid = Point3::Zero();
  std::array<Vec3, 3> true_axes{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  std::vector<std::size_t> object_point_indices;
  double plane_height = kTableHeight;

  PlacedShape placed() const { return {shape, pose}; }
};

struct SyntheticScene {
  PointCloud cloud;  // world frame
  SceneTruth truth;
};

/// Orientation of the shape on the table before yaw: the local axis goes to
/// world z (standing), world x or world y.
inline Mat3 placement_rotation(Placement p) {
  switch (p) {
    case Placement::Standing: return Mat3::Identity();
    case Placement::LyingX: return Eigen::AngleAxisd(std::numbers::pi / 2.0, Vec3::UnitY()).toRotationMatrix();
    case Placement::LyingY: return Eigen::AngleAxisd(-std::numbers::pi / 2.0, Vec3::UnitX()).toRotationMatrix();
  }
  return Mat3::Identity();
}

/// Pose that rests the shape on the table (lowest point at the table height).
inline RigidTransform resting_pose(const PrimitiveShape& shape, const ScenePose& pose) {
  RigidTransform t;
  t.rotation = Eigen::AngleAxisd(pose.yaw, Vec3::UnitZ()).toRotationMatrix() * placement_rotation(pose.placement);
  const double below = support(shape, t.rotation, -Vec3::UnitZ());
  t.translation = Vec3(pose.xy_offset.x(), pose.xy_offset.y(), kTableHeight + below);
  return t;
}

/// World images of the local axes, longest local extent first.
inline std::array<Vec3, 3> principal_truth_axes(const PrimitiveShape& shape, const Mat3& rotation) {
  const Vec3 half = local_half_extents(shape);
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return half(a) > half(b); });
  return {rotation.col(order[0]), rotation.col(order[1]), rotation.col(order[2])};
}

/// Renders a single overhead view of `shape` resting on the table.
///
/// Samples the object and table surfaces at the sensor density, keeps
/// samples whose outward normal faces the camera, ray-casts self-occlusion
/// for non-convex shapes, drops table samples under the object or in its
/// shadow, then perturbs every point along its viewing ray. Table points
/// come first in the cloud, object points after them.
inline SyntheticScene generate_scene(const PrimitiveShape& shape, const ScenePose& pose, const SensorModel& sensor) {
  validate_shape(shape);
  sensor.validate();

  SyntheticScene scene;
  SceneTruth& truth = scene.truth;
  truth.shape = shape;
  truth.pose = resting_pose(shape, pose);
  truth.plane_height = kTableHeight;
  const PlacedShape placed = truth.placed();

  for (const Vec3 e : {Vec3::UnitX(), Vec3::UnitY()}) {
    if (placed.support(e) > kTableHalfSize || placed.support(-e) > kTableHalfSize)
      throw InvalidScene("object does not fit on the table");
  }
  const Vec3& cam = sensor.camera_position;
  if (cam.z() <= placed.support(Vec3::UnitZ())) throw InvalidScene("camera must be above the object");
  if (placed.contains(cam)) throw InvalidScene("camera is inside the object");

  truth.true_centroid = placed.centroid();
  truth.true_axes = principal_truth_axes(shape, truth.pose.rotation);

  Rng sample_rng(sensor.seed, 0);
  Rng noise_rng(sensor.seed, 1);

  auto occluded = [&](const Vec3& p, const Vec3& offset_dir) {
    const Vec3 start = p + 1e-7 * offset_dir;
    const Vec3 to_cam = cam - start;
    const double dist = to_cam.norm();
    return placed.intersect(start, to_cam / dist, 0.0, dist).has_value();
  };

  std::vector<Point3> table, object;
  const double table_area = 4.0 * kTableHalfSize * kTableHalfSize;
  const auto n_table = static_cast<std::size_t>(std::llround(table_area * sensor.surface_sample_density));
  table.reserve(n_table);
  for (std::size_t i = 0; i < n_table; ++i) {
    const Vec3 p(sample_rng.uniform(-kTableHalfSize, kTableHalfSize), sample_rng.uniform(-kTableHalfSize, kTableHalfSize),
                 kTableHeight);
    if (placed.intersect(p - Vec3::UnitZ(), Vec3::UnitZ(), 0.0, 2.0).has_value()) continue;  // footprint
    if (occluded(p, Vec3::UnitZ())) continue;
    table.push_back(p);
  }

  const bool convex = is_convex(shape);
  for (const auto& s : sample_surface(shape, sensor.surface_sample_density, sample_rng)) {
    const Vec3 p = truth.pose.apply(s.point);
    const Vec3 n = truth.pose.rotation * s.normal;
    if (!(n.dot(cam - p) > 0.0)) continue;
    if (!convex && occluded(p, n)) continue;
    object.push_back(p);
  }

  auto add_noise = [&](Point3& p) {
    if (sensor.noise_sigma == 0.0) return;
    p += noise_rng.normal(0.0, sensor.noise_sigma) * (p - cam).normalized();
  };

  scene.cloud.frame = Frame::World;
  scene.cloud.points.reserve(table.size() + object.size());
  for (auto& p : table) {
    add_noise(p);
    scene.cloud.points.push_back(p);
  }
  truth.object_point_indices.reserve(object.size());
  for (auto& p : object) {
    add_noise(p);
    truth.object_point_indices.push_back(scene.cloud.size());
    scene.cloud.points.push_back(p);
  }
  return scene;
}

/// One scene of a benchmark suite.
struct TrialDescriptor {
  std::size_t index = 0;
  std::string shape_name;
  PrimitiveShape shape;
  ScenePose pose;
  SensorModel sensor;
};

/// Parametric stand-ins for the benchmark objects, in suite order.
inline std::vector<std::pair<std::string, PrimitiveShape>> standard_shapes() {
  return {
      {"tall_cylinder", Cylinder{0.0175, 0.22}},
      {"thin_long_box", Box{Vec3(0.03, 0.02, 0.18)}},
      {"flat_thin_box", Box{Vec3(0.13, 0.07, 0.015)}},
      {"short_wide_tube", Tube{0.04, 0.028, 0.05}},
      {"box_pair", BoxPair{Box{Vec3(0.07, 0.05, 0.03)}, Box{Vec3(0.03, 0.03, 0.05)}, Vec3(0.025, 0.0, 0.01)}},
  };
}

inline constexpr std::size_t kSuiteRepetitions = 5;
inline constexpr double kSuitePlacementRadius = 0.10;

/// 5 shapes x 3 placements x 5 repetitions. Placements are fixed by the grid;
/// only the per-trial sensor seeds depend on `seed`.
inline std::vector<TrialDescriptor> standard_suite(std::uint64_t seed, const SensorModel& base = {}) {
  std::vector<TrialDescriptor> suite;
  const auto shapes = standard_shapes();
  const std::array<Placement, 3> placements{Placement::Standing, Placement::LyingX, Placement::LyingY};
  for (const auto& [name, shape] : shapes) {
    for (Placement placement : placements) {
      for (std::size_t rep = 0; rep < kSuiteRepetitions; ++rep) {
        TrialDescriptor d;
        d.index = suite.size();
        d.shape_name = name;
        d.shape = shape;
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(rep) / kSuiteRepetitions + 0.3;
        d.pose.placement = placement;
        d.pose.yaw = angle;
        d.pose.xy_offset = kSuitePlacementRadius * Eigen::Vector2d(std::cos(angle), std::sin(angle));
        d.sensor = base;
        d.sensor.seed = derive_seed(seed, d.index);
        suite.push_back(std::move(d));
      }
    }
  }
  return suite;
}

}  // namespace geograsp
