#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <numbers>
#include <string_view>

#include "geograsp/cloud.hpp"
#include "geograsp/object_model.hpp"

namespace geograsp {

struct GripperSpec {
  double finger_length = 0.06;
  double max_opening = 0.10;
  double palm_clearance = 0.01;
  /// Thickness of the fingers and palm across the closing plane.
  double finger_width = 0.02;

  void validate() const {
    if (!(finger_length > 0.0 && max_opening > 0.0 && palm_clearance > 0.0 && finger_width > 0.0))
      throw InvalidArgument("gripper dimensions must be positive");
    if (!(max_opening > 2.0 * palm_clearance)) throw InvalidArgument("max_opening must exceed 2 * palm_clearance");
  }
};

struct GraspConfig {
  double h_pre = 0.15;
  Eigen::Vector2d side_preference = Eigen::Vector2d::UnitX();
  double table_clearance_min = 0.02;

  double upright_top_max_reach(const GripperSpec& g) const { return g.finger_length - g.palm_clearance; }

  void validate(const GripperSpec& g) const {
    if (!(h_pre > g.finger_length)) throw InvalidArgument("h_pre must exceed finger_length");
    if (std::abs(side_preference.norm() - 1.0) > 1e-9) throw InvalidArgument("side_preference must be a unit vector");
    if (!(table_clearance_min >= 0.0)) throw InvalidArgument("table_clearance_min must be non-negative");
  }
};

enum class GraspMode { Top, Side };

inline std::string_view to_string(GraspMode m) { return m == GraspMode::Top ? "top" : "side"; }

/// Fixed-axis XYZ angles: R = Rz(z) * Ry(y) * Rx(x).
struct EulerXYZ {
  double x = 0.0, y = 0.0, z = 0.0;
};

/// Tool frame columns: x = closing axis, y = z cross x, z = approach (palm to object).
struct GraspPlan {
  Point3 grasp_position = Point3::Zero();
  Point3 pregrasp_position = Point3::Zero();
  Mat3 rotation = Mat3::Identity();
  EulerXYZ euler;
  GraspMode mode = GraspMode::Top;
  Vec3 offset_axis = Vec3::UnitZ();
  double est_width = 0.0;

  Vec3 closing_axis() const { return rotation.col(0); }
  Vec3 approach_axis() const { return rotation.col(2); }
};

struct OffsetChoice {
  Vec3 axis;
  GraspMode mode;
};

/// Width margin kept below max_opening.
inline constexpr double kWidthMargin = 0.002;
/// Below this norm a horizontal projection is considered degenerate.
inline constexpr double kProjectionEps = 1e-6;

namespace detail {

inline Vec3 horizontal(const Vec3& v) { return {v.x(), v.y(), 0.0}; }

inline Vec3 upward(const Vec3& v) { return v.z() < 0.0 ? Vec3(-v) : v; }

inline Vec3 toward(const Vec3& u, const Eigen::Vector2d& pref) {
  double s = u.x() * pref.x() + u.y() * pref.y();
  if (std::abs(s) < 1e-12) s = -u.x() * pref.y() + u.y() * pref.x();
  return s < 0.0 ? Vec3(-u) : u;
}

inline bool mostly_vertical(const Vec3& v) { return std::abs(v.z()) >= std::cos(std::numbers::pi / 4.0) - 1e-12; }

}  // namespace detail

inline OffsetChoice select_offset_axis(const ObjectEstimate& est, const GripperSpec& gripper, const GraspConfig& cfg) {
  const Vec3& u1 = est.axes[0];
  const Vec3& u2 = est.axes[1];
  const Vec3& u3 = est.axes[2];

  auto side_axis = [&]() -> Vec3 {
    Vec3 p = detail::horizontal(u2);
    if (p.norm() < kProjectionEps) p = detail::horizontal(u3);
    if (p.norm() < kProjectionEps) throw DegenerateAxes("no horizontal axis available for a side grasp");
    return detail::toward(p.normalized(), cfg.side_preference);
  };

  if (est.pose_class == PoseClass::Upright) {
    if (est.z_top - est.centroid.z() <= cfg.upright_top_max_reach(gripper)) return {detail::upward(u1), GraspMode::Top};
    return {side_axis(), GraspMode::Side};
  }

  if (std::abs(u2.z()) >= std::cos(std::numbers::pi / 3.0)) return {detail::upward(u2), GraspMode::Top};

  const Vec3 u = side_axis();
  if (est.centroid.z() < est.z_plane + cfg.table_clearance_min) {
    const Vec3& vertical = std::abs(u2.z()) >= std::abs(u3.z()) ? u2 : u3;
    return {detail::upward(vertical), GraspMode::Top};
  }
  return {u, GraspMode::Side};
}

inline Mat3 build_orientation(const Vec3& u, GraspMode mode, const ObjectEstimate& est) {
  Vec3 x_t, z_t;
  if (mode == GraspMode::Top) {
    z_t = -Vec3::UnitZ();
    // Close across the object's narrow horizontal width.
    Vec3 along = detail::horizontal(detail::mostly_vertical(est.axes[0]) ? est.axes[1] : est.axes[0]);
    if (along.norm() < kProjectionEps) along = detail::horizontal(est.axes[1]);
    if (along.norm() < kProjectionEps)
      x_t = Vec3::UnitX();
    else
      x_t = Vec3::UnitZ().cross(along).normalized();
  } else {
    z_t = -u;
    const Vec3 c = Vec3::UnitZ().cross(z_t);
    if (c.norm() < kProjectionEps) throw DegenerateAxes("side approach is vertical");
    x_t = c.normalized();
  }
  const Vec3 y_t = z_t.cross(x_t);
  Mat3 r;
  r.col(0) = x_t;
  r.col(1) = y_t;
  r.col(2) = z_t;
  return r;
}

inline Mat3 rotation_from_euler(const EulerXYZ& e) {
  using Eigen::AngleAxisd;
  return (AngleAxisd(e.z, Vec3::UnitZ()) * AngleAxisd(e.y, Vec3::UnitY()) * AngleAxisd(e.x, Vec3::UnitX()))
      .toRotationMatrix();
}

/// Inverse of rotation_from_euler with y in [-pi/2, pi/2]. At gimbal lock
/// (|cos y| < 1e-9) x is pinned to 0.
inline EulerXYZ euler_from_rotation(const Mat3& r) {
  EulerXYZ e;
  const double cy = std::hypot(r(0, 0), r(1, 0));
  e.y = std::atan2(-r(2, 0), cy);
  if (cy < 1e-9) {
    e.x = 0.0;
    e.z = std::atan2(-r(0, 1), r(1, 1));
  } else {
    e.x = std::atan2(r(2, 1), r(2, 2));
    e.z = std::atan2(r(1, 0), r(0, 0));
  }
  return e;
}

/// Spread of the object along the closing axis, over the points the fingers
/// can reach (within finger_length of the palm plane).
inline double estimate_width(const PointCloud& object, const Point3& grasp_position, const Mat3& rotation,
                             double finger_length) {
  const Vec3 x_t = rotation.col(0), z_t = rotation.col(2);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : object.points) {
    const Vec3 d = p - grasp_position;
    if (std::abs(d.dot(z_t)) > finger_length) continue;
    const double s = d.dot(x_t);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return hi >= lo ? hi - lo : 0.0;
}

/// Positions at centroid + h * u, orientation as given, Euler angles derived.
inline GraspPlan assemble_plan(const Point3& centroid, const Vec3& u, GraspMode mode, const Mat3& rotation,
                               const PointCloud& object, const GripperSpec& gripper, const GraspConfig& cfg) {
  GraspPlan plan;
  plan.mode = mode;
  plan.offset_axis = u;
  plan.grasp_position = centroid + gripper.finger_length * u;
  plan.pregrasp_position = centroid + cfg.h_pre * u;
  plan.rotation = rotation;
  plan.euler = euler_from_rotation(rotation);
  plan.est_width = estimate_width(object, plan.grasp_position, rotation, gripper.finger_length);
  return plan;
}

/// Throws InfeasibleWidth, TableCollision or PalmCollision.
inline void check_feasibility(const GraspPlan& plan, const PointCloud& object, const ObjectEstimate& est,
                              const GripperSpec& gripper, const GraspConfig& cfg) {
  if (plan.est_width > gripper.max_opening - kWidthMargin)
    throw InfeasibleWidth("object spans " + std::to_string(plan.est_width) + " m across the closing axis");
  if (plan.mode == GraspMode::Side && plan.grasp_position.z() < est.z_plane + cfg.table_clearance_min)
    throw TableCollision("side grasp is too close to the support plane");
  const Vec3 x_t = plan.rotation.col(0), y_t = plan.rotation.col(1), z_t = plan.rotation.col(2);
  for (const auto& p : object.points) {
    const Vec3 d = p - plan.grasp_position;
    if (d.dot(z_t) < 0.0 && std::abs(d.dot(x_t)) <= 0.5 * gripper.max_opening &&
        std::abs(d.dot(y_t)) <= 0.5 * gripper.finger_width)
      throw PalmCollision("object points lie behind the palm");
  }
}

inline GraspPlan plan_grasp(const ObjectEstimate& est, const PointCloud& object, const GripperSpec& gripper,
                            const GraspConfig& cfg) {
  gripper.validate();
  cfg.validate(gripper);
  if (object.empty()) throw EmptyObject("object cloud is empty");
  const OffsetChoice choice = select_offset_axis(est, gripper, cfg);
  const Mat3 r = build_orientation(choice.axis, choice.mode, est);
  GraspPlan plan = assemble_plan(est.centroid, choice.axis, choice.mode, r, object, gripper, cfg);
  check_feasibility(plan, object, est, gripper, cfg);
  return plan;
}

}  // namespace geograsp
