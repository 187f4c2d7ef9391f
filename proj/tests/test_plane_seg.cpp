#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "geograsp/plane_seg.hpp"
#include "geograsp/synthscene.hpp"
#include "oracles.hpp"

using namespace geograsp;

namespace {

struct TableScene {
  PointCloud cloud{Frame::World};
  std::vector<Vec3> table_points;
};

/// Table at `height` with Gaussian z-noise plus a block of object points
/// floating above it, `outlier_fraction` of the total.
TableScene noisy_table(std::uint64_t seed, double height, double sigma, double outlier_fraction, int n = 2000) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> xy(-0.3, 0.3), obj(-0.05, 0.05), oz(0.02, 0.15);
  std::normal_distribution<double> noise(0.0, sigma);
  TableScene s;
  const int n_obj = static_cast<int>(std::round(outlier_fraction * n));
  for (int i = 0; i < n - n_obj; ++i) {
    const Vec3 p(xy(gen), xy(gen), height + noise(gen));
    s.cloud.points.push_back(p);
    s.table_points.push_back(p);
  }
  for (int i = 0; i < n_obj; ++i) s.cloud.points.emplace_back(obj(gen), obj(gen), height + oz(gen));
  return s;
}

}  // namespace

TEST(PlaneModel, HeightAndTilt) {
  const PlaneModel p{Vec3::UnitZ(), -0.02};
  EXPECT_DOUBLE_EQ(p.height(), 0.02);
  EXPECT_DOUBLE_EQ(p.tilt_radians(), 0.0);
  EXPECT_DOUBLE_EQ(p.signed_distance(Vec3(5, 5, 0.05)), 0.03);
}

TEST(RansacParams, Validation) {
  RansacParams p;
  EXPECT_NO_THROW(p.validate());
  p.inlier_threshold = 0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.max_iterations = 0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.min_inlier_fraction = 1.5;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(FitDominantPlane, NoiselessPlaneIsExact) {
  PointCloud c(Frame::World);
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> xy(-0.3, 0.3);
  for (int i = 0; i < 1000; ++i) c.points.emplace_back(xy(gen), xy(gen), 0.0);
  for (int i = 0; i < 10; ++i) c.points.emplace_back(0.01 * i, 0.0, 0.1);
  const PlaneModel p = fit_dominant_plane(c, RansacParams{});
  EXPECT_EQ(p.normal, Vec3::UnitZ());
  EXPECT_EQ(p.offset + 0.0, 0.0);
}

TEST(FitDominantPlane, NoisyTableMatchesLeastSquaresOnTrueInliers) {
  const TableScene s = noisy_table(42, 0.02, 0.001, 0.30);
  RansacParams params;
  params.seed = 42;
  const PlaneModel p = fit_dominant_plane(s.cloud, params);
  EXPECT_LE(oracle::angle_deg(p.normal, Vec3::UnitZ()), 1.0);
  EXPECT_LE(std::abs(p.height() - 0.02), 0.003);

  const auto [n_ref, d_ref] = oracle::lsq_plane(s.table_points);
  EXPECT_LE(oracle::angle_deg(p.normal, n_ref), 0.1);
  EXPECT_LE(std::abs(p.height() - (-d_ref / n_ref.z())), 5e-4);
}

TEST(FitDominantPlane, TooFewPoints) {
  PointCloud c(Frame::World);
  c.points = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  EXPECT_THROW(fit_dominant_plane(c, RansacParams{}), InsufficientPoints);
}

TEST(FitDominantPlane, CollinearCloudIsDegenerate) {
  PointCloud c(Frame::World);
  for (int i = 0; i < 50; ++i) c.points.emplace_back(0.01 * i, 0.0, 0.0);
  EXPECT_THROW(fit_dominant_plane(c, RansacParams{}), DegenerateSample);
}

TEST(FitDominantPlane, ScatteredCloudHasTooFewInliers) {
  PointCloud c(Frame::World);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 300; ++i) c.points.emplace_back(u(gen), u(gen), u(gen));
  EXPECT_THROW(fit_dominant_plane(c, RansacParams{}), TooFewInliers);
}

TEST(FitDominantPlane, WallIsNotASupportSurface) {
  PointCloud c(Frame::World);
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int i = 0; i < 500; ++i) c.points.emplace_back(0.1, u(gen), u(gen));
  EXPECT_THROW(fit_dominant_plane(c, RansacParams{}), NonHorizontalPlane);
}

TEST(FitDominantPlane, DeterministicForEqualSeeds) {
  const TableScene s = noisy_table(7, 0.0, 0.002, 0.3);
  RansacParams params;
  params.seed = 99;
  const PlaneModel a = fit_dominant_plane(s.cloud, params), b = fit_dominant_plane(s.cloud, params);
  EXPECT_EQ(a.normal, b.normal);
  EXPECT_EQ(a.offset, b.offset);
}

TEST(FitDominantPlane, NormalIsCanonicalUnitVector) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TableScene s = noisy_table(seed, 0.01, 0.002, 0.3);
    RansacParams params;
    params.seed = seed;
    const PlaneModel p = fit_dominant_plane(s.cloud, params);
    EXPECT_NEAR(p.normal.norm(), 1.0, 1e-9);
    EXPECT_GE(p.normal.z(), 0.0);
  }
}

TEST(RefinePlane, NeverWorseThanTheSamplePlane) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TableScene s = noisy_table(seed, 0.0, 0.002, 0.3);
    RansacParams params;
    params.seed = seed;
    const RansacResult r = ransac_search(s.cloud, params);
    const PlaneModel refined = refine_plane(s.cloud, r.inliers);
    EXPECT_LE(sum_squared_distance(s.cloud, r.inliers, refined),
              sum_squared_distance(s.cloud, r.inliers, r.sample_plane) * (1 + 1e-12));
  }
}

TEST(SplitByPlane, ThresholdingByDefinition) {
  PointCloud c(Frame::World);
  c.points = {Vec3(0, 0, 0.004), Vec3(0, 0, 0.05), Vec3(0, 0, -0.02)};
  const Segmentation seg = split_by_plane(c, PlaneModel{}, 0.008);
  ASSERT_EQ(seg.object.size(), 1u);
  EXPECT_EQ(seg.object[0], Vec3(0, 0, 0.05));
  ASSERT_EQ(seg.support_inliers.size(), 2u);
  EXPECT_EQ(seg.plane_height + 0.0, 0.0);
}

TEST(SplitByPlane, AllNearPlaneMeansNoObject) {
  PointCloud c(Frame::World);
  c.points = {Vec3(0, 0, 0.001), Vec3(1, 0, -0.007), Vec3(0, 1, 0.008)};
  EXPECT_THROW(split_by_plane(c, PlaneModel{}, 0.008), NoObjectFound);
}

TEST(SplitByPlane, PartitionAndMonotonicity) {
  const TableScene s = noisy_table(5, 0.0, 0.003, 0.3);
  std::size_t previous = s.cloud.size() + 1;
  for (double t : {0.002, 0.004, 0.008, 0.016, 0.03}) {
    const Segmentation seg = split_by_plane(s.cloud, PlaneModel{}, t);
    EXPECT_EQ(seg.object.size() + seg.support_inliers.size(), s.cloud.size());
    for (const auto& p : seg.object.points) EXPECT_GT(seg.plane.signed_distance(p), t);
    EXPECT_LE(seg.object.size(), previous);
    previous = seg.object.size();
  }
}

TEST(SplitByPlane, SyntheticCylinderMatchesGeneratorLabels) {
  SensorModel sensor;
  sensor.seed = 7;
  ScenePose pose;
  pose.xy_offset = {0.1, 0.05};
  const SyntheticScene scene = generate_scene(Cylinder{0.03, 0.25}, pose, sensor);
  RansacParams params;
  params.seed = 7;
  const PlaneModel plane = fit_dominant_plane(scene.cloud, params);
  const Segmentation seg = split_by_plane(scene.cloud, plane, params.inlier_threshold);

  // Generator-labeled object points that sit within the threshold of the
  // fitted plane are legitimately classed as support.
  std::size_t labeled_near_plane = 0;
  for (auto i : scene.truth.object_point_indices)
    if (plane.signed_distance(scene.cloud[i]) <= params.inlier_threshold) ++labeled_near_plane;
  std::size_t table_above = 0;
  std::vector<bool> is_object(scene.cloud.size(), false);
  for (auto i : scene.truth.object_point_indices) is_object[i] = true;
  for (std::size_t i = 0; i < scene.cloud.size(); ++i)
    if (!is_object[i] && plane.signed_distance(scene.cloud[i]) > params.inlier_threshold) ++table_above;

  EXPECT_EQ(table_above, 0u);
  EXPECT_EQ(seg.object.size(), scene.truth.object_point_indices.size() - labeled_near_plane);
}
