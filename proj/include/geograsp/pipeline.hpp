#pragma once

#include "geograsp/cloud.hpp"
#include "geograsp/grasp.hpp"
#include "geograsp/object_model.hpp"
#include "geograsp/plane_seg.hpp"

namespace geograsp {

struct DetectionParams {
  Aabb workspace{Vec3(-0.35, -0.35, -0.05), Vec3(0.35, 0.35, 0.60)};
  RansacParams ransac;
  GripperSpec gripper;
  GraspConfig grasp;
};

struct Segmented {
  Segmentation segmentation;
  std::size_t cropped_points = 0;
};

/// Crop, fit the support plane and split off the object.
inline Segmented segment_scene(const PointCloud& world_cloud, const DetectionParams& params) {
  Segmented out;
  const PointCloud cropped = crop_workspace(world_cloud, params.workspace);
  out.cropped_points = cropped.size();
  const PlaneModel plane = fit_dominant_plane(cropped, params.ransac);
  out.segmentation = split_by_plane(cropped, plane, params.ransac.inlier_threshold);
  return out;
}

struct Detection {
  Segmentation segmentation;
  ObjectEstimate estimate;
  GraspPlan plan;
};

/// Full single-view pipeline on a world-frame cloud.
inline Detection detect_grasp(const PointCloud& world_cloud, const DetectionParams& params) {
  Detection d;
  d.segmentation = segment_scene(world_cloud, params).segmentation;
  d.estimate = estimate_object(d.segmentation.object, d.segmentation.plane_height);
  d.plan = plan_grasp(d.estimate, d.segmentation.object, params.gripper, params.grasp);
  return d;
}

}  // namespace geograsp
