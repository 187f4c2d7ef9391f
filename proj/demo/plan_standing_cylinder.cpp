// Synthesizes a tall standing cylinder, plans a grasp for it and prints the
// plan next to the one the top-only baseline would produce.
#include <iostream>

#include "geograsp/geograsp.hpp"

int main() {
  using namespace geograsp;
  const PrimitiveShape shape = Cylinder{0.03, 0.25};
  ScenePose pose;
  pose.xy_offset = {0.08, 0.05};
  SensorModel sensor;
  sensor.seed = 42;
  const SyntheticScene scene = generate_scene(shape, pose, sensor);

  DetectionParams params;
  const Detection det = detect_grasp(scene.cloud, params);
  std::cout << "ours:\n" << to_json(det.plan).dump(2) << "\n";
  const auto ours = simulate_outcome(det.plan, scene.truth, params.gripper, StabilityParams{});
  std::cout << "outcome " << to_string(ours.outcome) << "\n\n";

  const GraspPlan base =
      baseline_plan(det.segmentation.object, det.estimate.axes, params.gripper, params.grasp);
  std::cout << "baseline:\n" << to_json(base).dump(2) << "\n";
  const auto theirs = simulate_outcome(base, scene.truth, params.gripper, StabilityParams{});
  std::cout << "outcome " << to_string(theirs.outcome) << "\n";
}
