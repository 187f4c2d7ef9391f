#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geograsp/grasp.hpp"
#include "geograsp/pipeline.hpp"
#include "geograsp/shapes.hpp"
#include "geograsp/synthscene.hpp"

namespace geograsp {

enum class Outcome { FailedAttempt, Unstable, Dropped, Success };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::FailedAttempt: return "failed_attempt";
    case Outcome::Unstable: return "unstable";
    case Outcome::Dropped: return "dropped";
    case Outcome::Success: return "success";
  }
  return "failed_attempt";
}

inline Outcome outcome_from_string(std::string_view s) {
  for (Outcome o : {Outcome::FailedAttempt, Outcome::Unstable, Outcome::Dropped, Outcome::Success})
    if (to_string(o) == s) return o;
  throw ParseError("unknown outcome '" + std::string(s) + "'");
}

struct GraspOutcome {
  Outcome outcome = Outcome::FailedAttempt;
  std::vector<Vec3> contact_points;
  std::vector<Vec3> contact_normals;
  std::optional<double> torque_margin;
  std::string reason;
};

struct StabilityParams {
  double friction_mu = 0.5;
  double torque_margin_max = 0.02;

  void validate() const {
    if (!(friction_mu > 0.0)) throw InvalidArgument("friction_mu must be positive");
    if (!(torque_margin_max > 0.0)) throw InvalidArgument("torque_margin_max must be positive");
  }
};

/// Top grasp at the raw mean of the object points: no plane correction and
/// no side grasps.
inline GraspPlan baseline_plan(const PointCloud& object, const std::array<Vec3, 3>& axes, const GripperSpec& gripper,
                               const GraspConfig& cfg) {
  if (object.empty()) throw EmptyObject("object cloud is empty");
  ObjectEstimate est;
  est.centroid = raw_mean(object);
  est.axes = axes;
  const Vec3 up = Vec3::UnitZ();
  const Mat3 r = build_orientation(up, GraspMode::Top, est);
  return assemble_plan(est.centroid, up, GraspMode::Top, r, object, gripper, cfg);
}

inline double distance_to_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

namespace detail {

/// Lateral sample positions across [-half, half], always including both ends.
inline std::vector<double> span_samples(double half, double step) {
  const int n = std::max(1, static_cast<int>(std::ceil(2.0 * half / step)));
  std::vector<double> out;
  for (int i = 0; i <= n; ++i) out.push_back(-half + 2.0 * half * i / n);
  return out;
}

}  // namespace detail

/// Geometric stand-in for executing `plan` on the true object.
///
///  1. Approach: the palm footprint and both fingers sweep from the pregrasp
///     to the grasp pose; touching the solid is a failed attempt.
///  2. Closing: each finger travels along the closing axis through the
///     fingertip point (grasp + finger_length * approach). Fewer than two
///     contacts is a failed attempt.
///  3. Static hold: both contact normals must lie inside the friction cone
///     around the closing direction, otherwise the grasp is unstable.
///  4. Shake: if the contact line passes farther than torque_margin_max from
///     the true center of mass the object is dropped.
inline GraspOutcome simulate_outcome(const GraspPlan& plan, const SceneTruth& truth, const GripperSpec& gripper,
                                     const StabilityParams& params) {
  params.validate();
  const PlacedShape solid = truth.placed();
  const Vec3 x_t = plan.rotation.col(0), y_t = plan.rotation.col(1), z_t = plan.rotation.col(2);
  const Point3& g = plan.grasp_position;
  const double half = 0.5 * gripper.max_opening;
  GraspOutcome out;

  Vec3 travel = plan.grasp_position - plan.pregrasp_position;
  const double travel_len = travel.norm();
  const Vec3 approach = travel_len > 0.0 ? Vec3(travel / travel_len) : z_t;

  constexpr double kSweepStep = 0.002;
  const auto across = detail::span_samples(half, kSweepStep);
  const auto thick = detail::span_samples(0.5 * gripper.finger_width, kSweepStep);
  auto swept = [&](const Vec3& end_at_grasp) {
    const Vec3 start = end_at_grasp - travel_len * approach;
    return solid.contains(start) || solid.intersect(start, approach, 0.0, travel_len).has_value();
  };
  for (double a : across)
    for (double b : thick)
      if (swept(g + a * x_t + b * y_t)) {
        out.reason = "palm collides with the object during approach";
        return out;
      }
  for (double side : {-half, half})
    for (double b : thick)
      for (double depth : detail::span_samples(0.5 * gripper.finger_length, kSweepStep))
        if (swept(g + side * x_t + b * y_t + (depth + 0.5 * gripper.finger_length) * z_t)) {
          out.reason = "finger collides with the object during approach";
          return out;
        }

  const Vec3 center = g + gripper.finger_length * z_t;
  for (double sgn : {1.0, -1.0}) {
    const Vec3 start = center + sgn * half * x_t;
    const Vec3 dir = -sgn * x_t;
    const auto hit = solid.intersect(start, dir, 0.0, 2.0 * half);
    if (hit && hit->entering) {
      out.contact_points.push_back(hit->point);
      out.contact_normals.push_back(hit->normal);
    }
  }
  if (out.contact_points.size() < 2) {
    out.reason = "gripper closed on " + std::to_string(out.contact_points.size()) + " contact(s)";
    return out;
  }

  const double cos_cone = 1.0 / std::sqrt(1.0 + params.friction_mu * params.friction_mu);
  // Finger starting at +x pushes along -x; its contact normal must face +x.
  if (out.contact_normals[0].dot(x_t) < cos_cone || out.contact_normals[1].dot(-x_t) < cos_cone) {
    out.outcome = Outcome::Unstable;
    out.reason = "contact normal outside the friction cone";
    return out;
  }

  out.torque_margin = distance_to_segment(truth.true_centroid, out.contact_points[0], out.contact_points[1]);
  if (*out.torque_margin > params.torque_margin_max) {
    out.outcome = Outcome::Dropped;
    out.reason = "contact line too far from the center of mass";
    return out;
  }
  out.outcome = Outcome::Success;
  return out;
}

enum class Method { Ours, Baseline };

inline std::string_view to_string(Method m) { return m == Method::Ours ? "ours" : "baseline-as-described"; }

inline Method method_from_string(std::string_view s) {
  if (s == "ours") return Method::Ours;
  if (s == "baseline" || s == "baseline-as-described") return Method::Baseline;
  throw InvalidArgument("unknown method '" + std::string(s) + "'");
}

struct TrialRecord {
  std::size_t trial = 0;
  std::string shape;
  std::string pose;
  Outcome outcome = Outcome::FailedAttempt;
  std::optional<double> torque_margin;
  std::string detail;
};

struct OutcomeCounts {
  std::size_t failed = 0, unstable = 0, dropped = 0, success = 0;

  std::size_t total() const { return failed + unstable + dropped + success; }

  void add(Outcome o) {
    switch (o) {
      case Outcome::FailedAttempt: ++failed; break;
      case Outcome::Unstable: ++unstable; break;
      case Outcome::Dropped: ++dropped; break;
      case Outcome::Success: ++success; break;
    }
  }
};

/// 100 * count / total rounded to one decimal.
inline double rate_pct(std::size_t count, std::size_t total) {
  if (total == 0) return 0.0;
  const auto tenths = static_cast<long long>(
      (2000 * static_cast<long long>(count) + static_cast<long long>(total)) / (2 * static_cast<long long>(total)));
  return static_cast<double>(tenths) / 10.0;
}

struct EvalReport {
  Method method = Method::Ours;
  std::uint64_t seed = 0;
  std::vector<TrialRecord> trials;

  OutcomeCounts counts() const {
    OutcomeCounts c;
    for (const auto& t : trials) c.add(t.outcome);
    return c;
  }
  std::size_t trial_count() const { return trials.size(); }
  double failed_pct() const { return rate_pct(counts().failed, trial_count()); }
  double unstable_pct() const { return rate_pct(counts().unstable, trial_count()); }
  double dropped_pct() const { return rate_pct(counts().dropped, trial_count()); }
};

struct BenchmarkParams {
  DetectionParams detection;
  StabilityParams stability;
};

/// Runs one trial; pipeline errors become failed attempts.
inline TrialRecord run_trial(const TrialDescriptor& trial, Method method, std::uint64_t seed,
                             const BenchmarkParams& params) {
  TrialRecord rec;
  rec.trial = trial.index;
  rec.shape = trial.shape_name;
  rec.pose = std::string(to_string(trial.pose.placement));

  const SyntheticScene scene = generate_scene(trial.shape, trial.pose, trial.sensor);
  DetectionParams det = params.detection;
  det.ransac.seed = derive_seed(seed, trial.index);
  try {
    GraspPlan plan;
    if (method == Method::Ours) {
      plan = detect_grasp(scene.cloud, det).plan;
    } else {
      const Segmentation seg = segment_scene(scene.cloud, det).segmentation;
      plan = baseline_plan(seg.object, principal_axes(seg.object).axes, det.gripper, det.grasp);
    }
    const GraspOutcome outcome = simulate_outcome(plan, scene.truth, det.gripper, params.stability);
    rec.outcome = outcome.outcome;
    rec.torque_margin = outcome.torque_margin;
    rec.detail = outcome.reason;
  } catch (const PerceptionError& e) {
    rec.outcome = Outcome::FailedAttempt;
    rec.detail = e.what();
  } catch (const InfeasibleGrasp& e) {
    rec.outcome = Outcome::FailedAttempt;
    rec.detail = e.what();
  }
  return rec;
}

inline EvalReport run_benchmark(const std::vector<TrialDescriptor>& suite, Method method, std::uint64_t seed,
                                const BenchmarkParams& params = {}) {
  if (suite.empty()) throw EmptySuite("benchmark suite has no trials");
  EvalReport report;
  report.method = method;
  report.seed = seed;
  report.trials.reserve(suite.size());
  for (const auto& trial : suite) report.trials.push_back(run_trial(trial, method, seed, params));
  std::sort(report.trials.begin(), report.trials.end(), [](const auto& a, const auto& b) { return a.trial < b.trial; });
  return report;
}

/// Two-sided Fisher exact test on the 2x2 table
///   [failures_a, n_a - failures_a; failures_b, n_b - failures_b].
/// Sums the hypergeometric probabilities of every table with the observed
/// margins that is no more likely than the observed one. All probabilities
/// are exact integers over a common denominator; only the final ratio is
/// rounded to double.
inline double significance_test(std::int64_t failures_a, std::int64_t n_a, std::int64_t failures_b, std::int64_t n_b) {
  if (n_a < 0 || n_b < 0 || failures_a < 0 || failures_b < 0 || failures_a > n_a || failures_b > n_b)
    throw InvalidCounts("counts must satisfy 0 <= failures <= n");
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;

  auto binomial = [](std::int64_t n, std::int64_t k) {
    cpp_int r = 1;
    if (k < 0 || k > n) return cpp_int(0);
    k = std::min(k, n - k);
    for (std::int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };

  const std::int64_t total_fail = failures_a + failures_b;
  const std::int64_t lo = std::max<std::int64_t>(0, total_fail - n_b);
  const std::int64_t hi = std::min(total_fail, n_a);
  auto weight = [&](std::int64_t x) { return binomial(n_a, x) * binomial(n_b, total_fail - x); };

  const cpp_int observed = weight(failures_a);
  cpp_int tail = 0, denom = 0;
  for (std::int64_t x = lo; x <= hi; ++x) {
    const cpp_int w = weight(x);
    denom += w;
    if (w <= observed) tail += w;
  }
  return cpp_rational(tail, denom).convert_to<double>();
}

}  // namespace geograsp
