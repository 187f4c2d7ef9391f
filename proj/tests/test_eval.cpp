#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "contact_oracle.hpp"
#include "geograsp/eval.hpp"
#include "geograsp/json_io.hpp"
#include "geograsp/pipeline.hpp"
#include "oracles.hpp"

using namespace geograsp;

namespace {

SceneTruth standing_cylinder_truth(double r, double h) {
  SceneTruth t;
  t.shape = Cylinder{r, h};
  t.pose.translation = Vec3(0, 0, 0.5 * h);
  t.true_centroid = t.pose.translation;
  t.true_axes = {Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitY()};
  return t;
}

/// Side grasp from +x whose closing line passes through `center` along world y.
GraspPlan side_plan_through(const Vec3& center, const GripperSpec& g, double h_pre = 0.15) {
  GraspPlan p;
  p.mode = GraspMode::Side;
  p.offset_axis = Vec3::UnitX();
  p.rotation.col(0) = Vec3::UnitY();
  p.rotation.col(2) = -Vec3::UnitX();
  p.rotation.col(1) = p.rotation.col(2).cross(p.rotation.col(0));
  p.grasp_position = center + g.finger_length * Vec3::UnitX();
  p.pregrasp_position = center + h_pre * Vec3::UnitX();
  p.euler = euler_from_rotation(p.rotation);
  return p;
}

SensorModel noiseless(std::uint64_t seed) {
  SensorModel s;
  s.noise_sigma = 0.0;
  s.seed = seed;
  return s;
}

PointCloud object_points(const SyntheticScene& scene) {
  PointCloud c(Frame::World);
  for (std::size_t i : scene.truth.object_point_indices) c.points.push_back(scene.cloud.points[i]);
  return c;
}

}  // namespace

TEST(BaselinePlan, UsesTheRawMeanOfATopFace) {
  PointCloud top(Frame::World);
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j) top.points.emplace_back(-0.05 + 0.005 * i, -0.05 + 0.005 * j, 0.1);
  std::vector<Vec3> pts(top.points.begin(), top.points.end());
  Vec3 mean = Vec3::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());

  const GripperSpec g;
  const GraspPlan plan = baseline_plan(top, {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()}, g, GraspConfig{});
  const Vec3 centroid = plan.grasp_position - g.finger_length * Vec3::UnitZ();
  EXPECT_NEAR(centroid.z(), 0.1, 1e-12);
  EXPECT_NEAR((centroid - mean).norm(), 0.0, 1e-12);
  // The plane-aware estimate of the same cloud halves the height.
  EXPECT_NEAR(corrected_centroid(top, 0.0).z(), 0.05, 1e-12);
  EXPECT_EQ(plan.mode, GraspMode::Top);
  EXPECT_NEAR((plan.pregrasp_position - plan.grasp_position - (0.15 - g.finger_length) * Vec3::UnitZ()).norm(), 0.0,
              1e-15);
  EXPECT_NEAR((plan.approach_axis() + Vec3::UnitZ()).norm(), 0.0, 1e-12);
}

TEST(BaselinePlan, AlwaysTopEvenForLyingObjects) {
  ScenePose pose;
  pose.placement = Placement::LyingX;
  pose.yaw = 0.6;
  const auto scene = generate_scene(Cylinder{0.03, 0.2}, pose, noiseless(2));
  const PointCloud obj = object_points(scene);
  const auto plan = baseline_plan(obj, principal_axes(obj).axes, GripperSpec{}, GraspConfig{});
  EXPECT_EQ(plan.mode, GraspMode::Top);
}

TEST(BaselinePlan, RejectsEmptyObject) {
  EXPECT_THROW(baseline_plan(PointCloud(Frame::World), {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()}, GripperSpec{},
                             GraspConfig{}),
               EmptyObject);
}

TEST(BaselinePlan, TallStandingCylinderCollidesWithThePalm) {
  ScenePose pose;
  pose.xy_offset = Eigen::Vector2d(0.1, 0.0);
  const auto scene = generate_scene(Cylinder{0.03, 0.25}, pose, noiseless(4));
  const PointCloud obj = object_points(scene);
  const GripperSpec g;
  const auto plan = baseline_plan(obj, principal_axes(obj).axes, g, GraspConfig{});
  // Palm sits below the top of the object.
  EXPECT_LT(plan.grasp_position.z(), 0.25);
  const auto out = simulate_outcome(plan, scene.truth, g, StabilityParams{});
  EXPECT_EQ(out.outcome, Outcome::FailedAttempt);
  EXPECT_LE(out.contact_points.size(), 1u);
}

TEST(SimulateOutcome, FarAwayPlanFindsNoContacts) {
  const GripperSpec g;
  const auto truth = standing_cylinder_truth(0.03, 0.25);
  const auto plan = side_plan_through(Vec3(0.5, 0.0, 0.125), g);
  const auto out = simulate_outcome(plan, truth, g, StabilityParams{});
  EXPECT_EQ(out.outcome, Outcome::FailedAttempt);
  EXPECT_TRUE(out.contact_points.empty());
  EXPECT_FALSE(out.torque_margin.has_value());
}

TEST(SimulateOutcome, DiametralGraspSucceedsWithZeroMargin) {
  const GripperSpec g;
  const auto truth = standing_cylinder_truth(0.03, 0.25);
  const auto plan = side_plan_through(Vec3(0.0, 0.0, 0.125), g);
  const auto out = simulate_outcome(plan, truth, g, StabilityParams{});
  ASSERT_EQ(out.outcome, Outcome::Success) << out.reason;
  ASSERT_EQ(out.contact_points.size(), 2u);
  EXPECT_NEAR((out.contact_points[0] - Vec3(0, 0.03, 0.125)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((out.contact_points[1] - Vec3(0, -0.03, 0.125)).norm(), 0.0, 1e-12);
  // Normals oppose each finger's travel exactly.
  EXPECT_NEAR(out.contact_normals[0].dot(Vec3::UnitY()), 1.0, 1e-12);
  EXPECT_NEAR(out.contact_normals[1].dot(-Vec3::UnitY()), 1.0, 1e-12);
  ASSERT_TRUE(out.torque_margin.has_value());
  EXPECT_NEAR(*out.torque_margin, 0.0, 1e-12);

  // Cross-check contacts against dense surface sampling of the cylinder.
  const oracle::SurfaceGrid grid(Cylinder{0.03, 0.25}, 0.0002);
  const Vec3 center(0, 0, 0.125);
  for (double sgn : {1.0, -1.0}) {
    const Vec3 start = center + sgn * 0.05 * Vec3::UnitY() - truth.pose.translation;
    const auto brute = grid.first_contact(start, -sgn * Vec3::UnitY(), 0.0, 0.1, 0.0002);
    ASSERT_TRUE(brute.has_value());
    const Vec3 expected = sgn > 0 ? out.contact_points[0] : out.contact_points[1];
    EXPECT_LE((*brute + truth.pose.translation - expected).norm(), 0.001);
  }
}

TEST(SimulateOutcome, OffsetAlongTheAxisIsDropped) {
  const GripperSpec g;
  const auto truth = standing_cylinder_truth(0.03, 0.25);
  const auto plan = side_plan_through(Vec3(0.0, 0.0, 0.125 + 0.04), g);
  StabilityParams params;
  params.torque_margin_max = 0.02;
  const auto out = simulate_outcome(plan, truth, g, params);
  EXPECT_EQ(out.outcome, Outcome::Dropped);
  ASSERT_TRUE(out.torque_margin.has_value());
  EXPECT_NEAR(*out.torque_margin, 0.04, 1e-12);
}

TEST(SimulateOutcome, OffCenterContactsAreUnstable) {
  // Closing line 0.025 m off the axis of an r = 0.03 cylinder: the surface
  // normals tilt by asin(0.025 / 0.03) = 56 deg, outside atan(0.5) = 26.6 deg.
  const GripperSpec g;
  const auto truth = standing_cylinder_truth(0.03, 0.25);
  const auto plan = side_plan_through(Vec3(0.025, 0.0, 0.125), g);
  const auto out = simulate_outcome(plan, truth, g, StabilityParams{});
  EXPECT_EQ(out.outcome, Outcome::Unstable);
  EXPECT_EQ(out.contact_points.size(), 2u);
}

TEST(SimulateOutcome, FingersHittingTheObjectFail) {
  const GripperSpec g;
  const auto truth = standing_cylinder_truth(0.06, 0.25);  // wider than the opening
  const auto plan = side_plan_through(Vec3(0.0, 0.0, 0.125), g);
  EXPECT_EQ(simulate_outcome(plan, truth, g, StabilityParams{}).outcome, Outcome::FailedAttempt);
}

TEST(SimulateOutcome, RejectsInvalidParams) {
  StabilityParams p;
  p.friction_mu = 0.0;
  EXPECT_THROW(simulate_outcome(GraspPlan{}, standing_cylinder_truth(0.03, 0.25), GripperSpec{}, p), InvalidArgument);
  p = StabilityParams{};
  p.torque_margin_max = -1.0;
  EXPECT_THROW(simulate_outcome(GraspPlan{}, standing_cylinder_truth(0.03, 0.25), GripperSpec{}, p), InvalidArgument);
}

TEST(SimulateOutcome, LargerMarginNeverTurnsSuccessIntoDropped) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> along(-0.1, 0.1), across(-0.01, 0.01);
  const GripperSpec g;
  const std::vector<double> margins{0.002, 0.005, 0.01, 0.02, 0.04, 0.08};
  for (const auto& truth : {standing_cylinder_truth(0.03, 0.25), standing_cylinder_truth(0.02, 0.15)}) {
    for (int i = 0; i < 200; ++i) {
      const Vec3 c(across(gen), 0.0, truth.true_centroid.z() + along(gen));
      const auto plan = side_plan_through(c, g);
      bool succeeded = false;
      for (double m : margins) {
        StabilityParams p;
        p.torque_margin_max = m;
        const Outcome o = simulate_outcome(plan, truth, g, p).outcome;
        if (succeeded) EXPECT_EQ(o, Outcome::Success) << "margin " << m;
        succeeded = succeeded || o == Outcome::Success;
      }
    }
  }
}

TEST(SimulateOutcome, BaselineFailsAndOursSucceedsOnTallCylinders) {
  const GripperSpec g;
  ASSERT_GT(0.22, 2 * (g.finger_length - g.palm_clearance));
  for (const auto& shape : {PrimitiveShape{Cylinder{0.0175, 0.22}}, PrimitiveShape{Cylinder{0.03, 0.25}}}) {
    for (int k = 0; k < 12; ++k) {
      const double yaw = 2 * std::numbers::pi * k / 12;
      ScenePose pose;
      pose.yaw = yaw;
      pose.xy_offset = Eigen::Vector2d(0.1 * std::cos(yaw), 0.1 * std::sin(yaw));
      const auto scene = generate_scene(shape, pose, noiseless(100 + k));
      DetectionParams det;
      det.ransac.seed = 9;
      const auto ours = detect_grasp(scene.cloud, det).plan;
      EXPECT_EQ(simulate_outcome(ours, scene.truth, det.gripper, StabilityParams{}).outcome, Outcome::Success)
          << "yaw " << yaw;
      const auto seg = segment_scene(scene.cloud, det).segmentation;
      const auto base = baseline_plan(seg.object, principal_axes(seg.object).axes, det.gripper, det.grasp);
      EXPECT_EQ(simulate_outcome(base, scene.truth, det.gripper, StabilityParams{}).outcome, Outcome::FailedAttempt)
          << "yaw " << yaw;
    }
  }
}

TEST(Rates, SeventyFiveTrialExamples) {
  EvalReport baseline;
  auto fill = [](EvalReport& r, int failed, int unstable, int dropped) {
    for (int i = 0; i < 75; ++i) {
      TrialRecord t;
      t.trial = i;
      t.outcome = i < failed                         ? Outcome::FailedAttempt
                  : i < failed + unstable            ? Outcome::Unstable
                  : i < failed + unstable + dropped ? Outcome::Dropped
                                                     : Outcome::Success;
      r.trials.push_back(t);
    }
  };
  fill(baseline, 17, 5, 8);
  EXPECT_DOUBLE_EQ(baseline.failed_pct(), 22.7);
  EXPECT_DOUBLE_EQ(baseline.unstable_pct(), 6.7);
  EXPECT_DOUBLE_EQ(baseline.dropped_pct(), 10.7);
  EvalReport ours;
  fill(ours, 3, 0, 1);
  EXPECT_DOUBLE_EQ(ours.failed_pct(), 4.0);
  EXPECT_DOUBLE_EQ(ours.unstable_pct(), 0.0);
  EXPECT_DOUBLE_EQ(ours.dropped_pct(), 1.3);
  EXPECT_EQ(ours.counts().total(), 75u);
}

TEST(Rates, RoundToOneDecimal) {
  for (std::size_t total = 1; total <= 200; ++total)
    for (std::size_t count = 0; count <= total; ++count) {
      const double exact = 100.0 * count / total;
      const double r = rate_pct(count, total);
      EXPECT_LE(std::abs(r - exact), 0.05 + 1e-9);
      EXPECT_NEAR(r * 10.0, std::round(r * 10.0), 1e-9);
    }
  EXPECT_EQ(rate_pct(0, 0), 0.0);
}

TEST(RunBenchmark, EmptySuiteThrows) {
  EXPECT_THROW(run_benchmark({}, Method::Ours, 1), EmptySuite);
}

TEST(RunBenchmark, ReportIsDeterministicAndComplete) {
  const auto suite = standard_suite(7);
  const auto a = run_benchmark(suite, Method::Baseline, 7);
  const auto b = run_benchmark(suite, Method::Baseline, 7);
  EXPECT_EQ(to_json(a).dump(2), to_json(b).dump(2));
  ASSERT_EQ(a.trial_count(), 75u);
  EXPECT_EQ(a.counts().total(), 75u);
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    EXPECT_EQ(a.trials[i].trial, i);
    if (a.trials[i].outcome == Outcome::Success || a.trials[i].outcome == Outcome::Dropped)
      EXPECT_TRUE(a.trials[i].torque_margin.has_value());
  }
}

TEST(RunBenchmark, MethodNamesRoundTrip) {
  EXPECT_EQ(method_from_string("ours"), Method::Ours);
  EXPECT_EQ(method_from_string("baseline"), Method::Baseline);
  EXPECT_EQ(method_from_string(to_string(Method::Baseline)), Method::Baseline);
  EXPECT_THROW(method_from_string("random"), InvalidArgument);
  for (Outcome o : {Outcome::FailedAttempt, Outcome::Unstable, Outcome::Dropped, Outcome::Success})
    EXPECT_EQ(outcome_from_string(to_string(o)), o);
}

TEST(SignificanceTest, IdenticalMarginsGiveOne) { EXPECT_EQ(significance_test(0, 75, 0, 75), 1.0); }

TEST(SignificanceTest, SeventeenVersusThreeOfSeventyFive) {
  // Enumeration oracle: 0.0012619689...; one-sided half is 0.00063.
  const double p = significance_test(17, 75, 3, 75);
  EXPECT_NEAR(p, oracle::fisher_two_sided(17, 75, 3, 75), 1e-9 * p);
  EXPECT_NEAR(p, 0.0012619689011244, 1e-15);
}

TEST(SignificanceTest, ExtremeTable) {
  const double p = significance_test(75, 75, 0, 75);
  EXPECT_LT(p, 1e-30);
  EXPECT_GT(p, 0.0);
  EXPECT_NEAR(p, oracle::fisher_two_sided(75, 75, 0, 75), 1e-9 * p);
}

TEST(SignificanceTest, SymmetricAndAgreesWithOracle) {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 300; ++i) {
    const int n_a = std::uniform_int_distribution<int>(1, 80)(gen);
    const int n_b = std::uniform_int_distribution<int>(1, 80)(gen);
    const int a = std::uniform_int_distribution<int>(0, n_a)(gen);
    const int b = std::uniform_int_distribution<int>(0, n_b)(gen);
    const double p = significance_test(a, n_a, b, n_b);
    EXPECT_EQ(p, significance_test(b, n_b, a, n_a));
    EXPECT_GT(p, 0.0);
    EXPECT_LE(p, 1.0);
    EXPECT_NEAR(p, oracle::fisher_two_sided(a, n_a, b, n_b), 1e-9 * std::max(p, 1e-300) + 1e-12);
  }
}

TEST(SignificanceTest, InvalidCounts) {
  EXPECT_THROW(significance_test(76, 75, 0, 75), InvalidCounts);
  EXPECT_THROW(significance_test(-1, 75, 0, 75), InvalidCounts);
  EXPECT_THROW(significance_test(0, 75, 3, 2), InvalidCounts);
}
