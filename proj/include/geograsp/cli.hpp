#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "geograsp/cloud_io.hpp"
#include "geograsp/eval.hpp"
#include "geograsp/json_io.hpp"
#include "geograsp/pipeline.hpp"
#include "geograsp/synthscene.hpp"

namespace geograsp {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNoObject = 2, kExitInfeasible = 3, kExitIo = 4 };

namespace detail {

inline PipelineConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return pipeline_config_from_json(read_json_file(path));
}

template <class T>
void override_if(T& target, const std::optional<T>& value) {
  if (value) target = *value;
}

/// Marker points along the tool axes at the grasp and pregrasp positions.
inline std::vector<Point3> gripper_markers(const GraspPlan& plan) {
  std::vector<Point3> out;
  for (const Point3& origin : {plan.grasp_position, plan.pregrasp_position}) {
    for (int axis = 0; axis < 3; ++axis) {
      for (int k = 0; k <= 20; ++k) out.push_back(origin + 0.0025 * k * plan.rotation.col(axis));
    }
  }
  return out;
}

inline std::string format_p(double p) {
  std::ostringstream os;
  os << std::setprecision(6) << p;
  return os.str();
}

struct SynthArgs {
  std::string shape;
  std::optional<double> radius, height, inner_radius;
  std::vector<double> size;
  std::string pose = "standing";
  double yaw = 0.0;
  std::vector<double> offset{0.0, 0.0};
  std::optional<std::uint64_t> seed;
  std::optional<double> density, noise;
  std::string out, truth, format = "auto", frame = "camera", config;
};

inline PrimitiveShape shape_from_args(const SynthArgs& a) {
  auto need = [&](const std::optional<double>& v, const char* flag) {
    if (!v) throw InvalidArgument("--shape " + a.shape + " requires " + flag);
    return *v;
  };
  auto need_size = [&](const std::vector<double>& v) {
    if (v.size() != 3) throw InvalidArgument("--size takes three values");
    return Vec3(v[0], v[1], v[2]);
  };
  PrimitiveShape s;
  if (a.shape == "box")
    s = Box{need_size(a.size)};
  else if (a.shape == "cylinder")
    s = Cylinder{need(a.radius, "--radius"), need(a.height, "--height")};
  else if (a.shape == "sphere")
    s = Sphere{need(a.radius, "--radius")};
  else if (a.shape == "tube")
    s = Tube{need(a.radius, "--radius"), need(a.inner_radius, "--inner-radius"), need(a.height, "--height")};
  else
    throw InvalidArgument("unknown shape '" + a.shape + "'");
  validate_shape(s);
  return s;
}

inline CloudFormat output_format(const std::string& name, const std::filesystem::path& path) {
  const CloudFormat f = format_from_string(name);
  if (f != CloudFormat::Auto) return f;
  return path.extension() == ".ply" ? CloudFormat::PlyAscii : CloudFormat::PcdAscii;
}

inline int cmd_synth(const SynthArgs& a, std::ostream& out) {
  PipelineConfig cfg = load_config(a.config);
  override_if(cfg.sensor.seed, a.seed);
  override_if(cfg.sensor.surface_sample_density, a.density);
  override_if(cfg.sensor.noise_sigma, a.noise);
  cfg.validate();

  const PrimitiveShape shape = shape_from_args(a);
  ScenePose pose;
  pose.placement = placement_from_string(a.pose);
  pose.yaw = a.yaw;
  if (a.offset.size() != 2) throw InvalidArgument("--offset takes two values");
  pose.xy_offset = {a.offset[0], a.offset[1]};

  const SyntheticScene scene = generate_scene(shape, pose, cfg.sensor);
  const Frame frame = frame_from_string(a.frame);
  const PointCloud written =
      frame == Frame::World ? scene.cloud : apply_rigid_transform(scene.cloud, cfg.camera.inverse(), Frame::Camera);
  save_cloud(written, a.out, output_format(a.format, a.out));
  if (!a.truth.empty()) write_json_file(a.truth, to_json(scene.truth));
  out << "points " << written.size() << " (object " << scene.truth.object_point_indices.size() << ")\n";
  return kExitOk;
}

struct DetectArgs {
  std::string cloud, out, format = "auto", frame = "camera", config, debug_ply;
  std::optional<double> h_pre, finger_length, max_opening, inlier_threshold;
  std::optional<std::uint64_t> seed;
};

inline int cmd_detect(const DetectArgs& a, std::ostream& out) {
  PipelineConfig cfg = load_config(a.config);
  auto& d = cfg.detection;
  override_if(d.grasp.h_pre, a.h_pre);
  override_if(d.gripper.finger_length, a.finger_length);
  override_if(d.gripper.max_opening, a.max_opening);
  override_if(d.ransac.inlier_threshold, a.inlier_threshold);
  override_if(d.ransac.seed, a.seed);
  cfg.validate();

  PointCloud cloud = load_cloud(a.cloud, format_from_string(a.format));
  cloud.frame = frame_from_string(a.frame);
  if (cloud.frame == Frame::Camera) cloud = apply_rigid_transform(cloud, cfg.camera, Frame::World);

  const Detection det = detect_grasp(cloud, d);
  const Json plan = to_json(det.plan);
  if (a.out.empty())
    out << plan.dump(2) << "\n";
  else
    write_json_file(a.out, plan);
  if (!a.debug_ply.empty()) {
    PointCloud debug = cloud;
    for (const auto& p : gripper_markers(det.plan)) debug.points.push_back(p);
    save_cloud(debug, a.debug_ply, CloudFormat::PlyAscii);
  }
  out << "mode " << to_string(det.plan.mode) << ", pose " << to_string(det.estimate.pose_class) << ", object points "
      << det.segmentation.object.size() << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string method, report, config;
  std::uint64_t seed = 7;
};

inline int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const Method method = method_from_string(a.method);
  const PipelineConfig cfg = load_config(a.config);
  const auto suite = standard_suite(a.seed, cfg.sensor);
  const EvalReport report = run_benchmark(suite, method, a.seed, {cfg.detection, cfg.stability});
  write_json_file(a.report, to_json(report));
  out << to_string(method) << ": " << report.trial_count() << " trials, failed " << report.failed_pct()
      << "%, unstable " << report.unstable_pct() << "%, dropped " << report.dropped_pct() << "%\n";
  return kExitOk;
}

inline int cmd_compare(const std::string& path_a, const std::string& path_b, std::ostream& out) {
  const EvalReport a = eval_report_from_json(read_json_file(path_a));
  const EvalReport b = eval_report_from_json(read_json_file(path_b));
  const auto ca = a.counts(), cb = b.counts();
  const auto na = static_cast<std::int64_t>(ca.total()), nb = static_cast<std::int64_t>(cb.total());
  auto line = [&](const char* name, std::size_t xa, std::size_t xb) {
    const double p = significance_test(static_cast<std::int64_t>(xa), na, static_cast<std::int64_t>(xb), nb);
    out << name << " " << xa << "/" << na << " vs " << xb << "/" << nb << " p=" << format_p(p) << "\n";
  };
  line("failed_attempt", ca.failed, cb.failed);
  line("unstable", ca.unstable, cb.unstable);
  line("dropped", ca.dropped, cb.dropped);
  line("overall_failure", ca.total() - ca.success, cb.total() - cb.success);
  return kExitOk;
}

}  // namespace detail

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-view geometric grasp pose detection"};
  app.require_subcommand(1);

  detail::SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic single-view scene");
  s->add_option("--shape", synth.shape, "box | cylinder | sphere | tube")->required();
  s->add_option("--radius", synth.radius, "Radius (outer radius for tube)");
  s->add_option("--inner-radius", synth.inner_radius, "Bore radius for tube");
  s->add_option("--height", synth.height, "Height");
  s->add_option("--size", synth.size, "Box extents x y z")->expected(3);
  s->add_option("--pose", synth.pose, "standing | lying_x | lying_y");
  s->add_option("--yaw", synth.yaw, "Yaw about the table normal, radians");
  s->add_option("--offset", synth.offset, "Table-plane offset x y")->expected(2);
  s->add_option("--seed", synth.seed, "Sensor seed");
  s->add_option("--density", synth.density, "Surface samples per square meter");
  s->add_option("--noise", synth.noise, "Depth noise sigma, meters");
  s->add_option("--out", synth.out, "Cloud output path")->required();
  s->add_option("--truth", synth.truth, "Ground-truth JSON output path");
  s->add_option("--format", synth.format, "pcd | ply | auto");
  s->add_option("--frame", synth.frame, "camera | world");
  s->add_option("--config", synth.config, "Pipeline config JSON");

  detail::DetectArgs detect;
  auto* d = app.add_subcommand("detect", "Plan a grasp for the object in a cloud");
  d->add_option("cloud", detect.cloud, "Input cloud")->required();
  d->add_option("--out", detect.out, "Grasp plan JSON output path (stdout if omitted)");
  d->add_option("--format", detect.format, "pcd | ply | auto");
  d->add_option("--frame", detect.frame, "Frame of the input cloud: camera | world");
  d->add_option("--config", detect.config, "Pipeline config JSON");
  d->add_option("--dump-debug-ply", detect.debug_ply, "Write scene plus gripper markers as PLY");
  d->add_option("--h-pre", detect.h_pre, "Pregrasp standoff, meters");
  d->add_option("--finger-length", detect.finger_length, "Finger length, meters");
  d->add_option("--max-opening", detect.max_opening, "Maximum gripper opening, meters");
  d->add_option("--inlier-threshold", detect.inlier_threshold, "Plane inlier distance, meters");
  d->add_option("--seed", detect.seed, "RANSAC seed");

  detail::EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Run the 75-trial benchmark");
  e->add_option("--method", eval.method, "ours | baseline")->required();
  e->add_option("--seed", eval.seed, "Suite seed");
  e->add_option("--report", eval.report, "Report JSON output path")->required();
  e->add_option("--config", eval.config, "Pipeline config JSON");

  std::string report_a, report_b;
  auto* c = app.add_subcommand("compare", "Fisher exact tests between two reports");
  c->add_option("report_a", report_a)->required();
  c->add_option("report_b", report_b)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (s->parsed()) return detail::cmd_synth(synth, out);
    if (d->parsed()) return detail::cmd_detect(detect, out);
    if (e->parsed()) return detail::cmd_eval(eval, out);
    return detail::cmd_compare(report_a, report_b, out);
  } catch (const PerceptionError& ex) {
    err << ex.what() << "\n";
    return kExitNoObject;
  } catch (const InfeasibleGrasp& ex) {
    err << ex.what() << "\n";
    return kExitInfeasible;
  } catch (const IoError& ex) {
    err << ex.what() << "\n";
    return kExitIo;
  } catch (const ParseError& ex) {
    err << ex.what() << "\n";
    return kExitIo;
  } catch (const Error& ex) {
    err << ex.what() << "\n";
    return kExitUsage;
  } catch (const Json::exception& ex) {
    // Well-formed JSON with missing or mistyped fields.
    err << "ParseError: " << ex.what() << "\n";
    return kExitIo;
  }
}

}  // namespace geograsp
