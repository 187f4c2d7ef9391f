#pragma once

#include <json.hpp>

#include <filesystem>
#include <set>
#include <string>
#include <type_traits>

#include "geograsp/cloud.hpp"
#include "geograsp/cloud_io.hpp"
#include "geograsp/eval.hpp"
#include "geograsp/grasp.hpp"
#include "geograsp/pipeline.hpp"
#include "geograsp/synthscene.hpp"

namespace geograsp {

using Json = nlohmann::json;

namespace detail {

inline Json vec_json(const Vec3& v) { return Json::array({v.x() + 0.0, v.y() + 0.0, v.z() + 0.0}); }

inline Json mat_json(const Mat3& m) {
  Json a = Json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c) + 0.0);
  return a;
}

inline double num(const Json& j, std::string_view what) {
  if (!j.is_number()) throw InvalidConfig(std::string(what) + " must be a number");
  return j.get<double>();
}

template <typename Int>
Int integer(const Json& j, std::string_view what) {
  if (!j.is_number_integer() || (std::is_unsigned_v<Int> && j.get<std::int64_t>() < 0))
    throw InvalidConfig(std::string(what) + " must be an integer" + (std::is_unsigned_v<Int> ? " >= 0" : ""));
  return j.get<Int>();
}

inline Vec3 vec_from(const Json& j, std::string_view what) {
  if (!j.is_array() || j.size() != 3) throw InvalidConfig(std::string(what) + " must be an array of 3 numbers");
  return {num(j[0], what), num(j[1], what), num(j[2], what)};
}

inline Mat3 mat_from(const Json& j, std::string_view what) {
  if (!j.is_array() || j.size() != 9) throw InvalidConfig(std::string(what) + " must be an array of 9 numbers");
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = num(j[3 * r + c], what);
  return m;
}

inline void reject_unknown(const Json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!obj.is_object()) throw InvalidConfig(std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw InvalidConfig("unknown key '" + key + "' in " + std::string(where));
  }
}

}  // namespace detail

// ---- grasp plan --------------------------------------------------------------

inline Json to_json(const GraspPlan& plan) {
  return Json{{"mode", std::string(to_string(plan.mode))},
              {"grasp_position", detail::vec_json(plan.grasp_position)},
              {"pregrasp_position", detail::vec_json(plan.pregrasp_position)},
              {"rotation", detail::mat_json(plan.rotation)},
              {"euler_xyz", Json::array({plan.euler.x + 0.0, plan.euler.y + 0.0, plan.euler.z + 0.0})},
              {"offset_axis", detail::vec_json(plan.offset_axis)},
              {"est_width", plan.est_width}};
}

inline GraspPlan grasp_plan_from_json(const Json& j) {
  GraspPlan p;
  const auto mode = j.at("mode").get<std::string>();
  if (mode != "top" && mode != "side") throw ParseError("unknown grasp mode '" + mode + "'");
  p.mode = mode == "top" ? GraspMode::Top : GraspMode::Side;
  p.grasp_position = detail::vec_from(j.at("grasp_position"), "grasp_position");
  p.pregrasp_position = detail::vec_from(j.at("pregrasp_position"), "pregrasp_position");
  p.rotation = detail::mat_from(j.at("rotation"), "rotation");
  const Vec3 e = detail::vec_from(j.at("euler_xyz"), "euler_xyz");
  p.euler = {e.x(), e.y(), e.z()};
  p.offset_axis = detail::vec_from(j.at("offset_axis"), "offset_axis");
  p.est_width = j.at("est_width").get<double>();
  return p;
}

// ---- shapes and scene truth --------------------------------------------------

inline Json to_json(const PrimitiveShape& s) {
  Json j{{"kind", std::string(shape_kind(s))}};
  std::visit(Overloaded{[&](const Box& b) { j["size"] = detail::vec_json(b.size); },
                        [&](const Cylinder& c) {
                          j["radius"] = c.radius;
                          j["height"] = c.height;
                        },
                        [&](const Sphere& sp) { j["radius"] = sp.radius; },
                        [&](const Tube& t) {
                          j["outer_radius"] = t.outer_radius;
                          j["inner_radius"] = t.inner_radius;
                          j["height"] = t.height;
                        },
                        [&](const BoxPair& bp) {
                          j["first_size"] = detail::vec_json(bp.first.size);
                          j["second_size"] = detail::vec_json(bp.second.size);
                          j["second_offset"] = detail::vec_json(bp.second_offset);
                        }},
             s);
  return j;
}

inline PrimitiveShape shape_from_json(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  PrimitiveShape s;
  if (kind == "box")
    s = Box{detail::vec_from(j.at("size"), "size")};
  else if (kind == "cylinder")
    s = Cylinder{j.at("radius").get<double>(), j.at("height").get<double>()};
  else if (kind == "sphere")
    s = Sphere{j.at("radius").get<double>()};
  else if (kind == "tube")
    s = Tube{j.at("outer_radius").get<double>(), j.at("inner_radius").get<double>(), j.at("height").get<double>()};
  else if (kind == "boxpair")
    s = BoxPair{Box{detail::vec_from(j.at("first_size"), "first_size")},
                Box{detail::vec_from(j.at("second_size"), "second_size")},
                detail::vec_from(j.at("second_offset"), "second_offset")};
  else
    throw ParseError("unknown shape kind '" + kind + "'");
  validate_shape(s);
  return s;
}

inline Json to_json(const RigidTransform& t) {
  return Json{{"rotation", detail::mat_json(t.rotation)}, {"translation", detail::vec_json(t.translation)}};
}

inline RigidTransform transform_from_json(const Json& j) {
  detail::reject_unknown(j, {"rotation", "translation"}, "transform");
  RigidTransform t;
  if (j.contains("rotation")) t.rotation = detail::mat_from(j.at("rotation"), "rotation");
  if (j.contains("translation")) t.translation = detail::vec_from(j.at("translation"), "translation");
  t.validate();
  return t;
}

inline Json to_json(const SceneTruth& t) {
  Json axes = Json::array();
  for (const auto& a : t.true_axes) axes.push_back(detail::vec_json(a));
  return Json{{"shape", to_json(t.shape)},
              {"transform", to_json(t.pose)},
              {"true_centroid", detail::vec_json(t.true_centroid)},
              {"true_axes", axes},
              {"object_point_indices", t.object_point_indices},
              {"plane_height", t.plane_height}};
}

inline SceneTruth scene_truth_from_json(const Json& j) {
  SceneTruth t;
  t.shape = shape_from_json(j.at("shape"));
  t.pose = transform_from_json(j.at("transform"));
  t.true_centroid = detail::vec_from(j.at("true_centroid"), "true_centroid");
  const auto& axes = j.at("true_axes");
  for (std::size_t i = 0; i < 3; ++i) t.true_axes[i] = detail::vec_from(axes.at(i), "true_axes");
  t.object_point_indices = j.at("object_point_indices").get<std::vector<std::size_t>>();
  t.plane_height = j.at("plane_height").get<double>();
  return t;
}

// ---- evaluation reports ------------------------------------------------------

inline Json to_json(const EvalReport& r) {
  Json trials = Json::array();
  for (const auto& t : r.trials) {
    trials.push_back(Json{{"trial", t.trial},
                          {"shape", t.shape},
                          {"pose", t.pose},
                          {"outcome", std::string(to_string(t.outcome))},
                          {"torque_margin", t.torque_margin ? Json(*t.torque_margin) : Json(nullptr)}});
  }
  return Json{{"method", std::string(to_string(r.method))},
              {"seed", r.seed},
              {"trial_count", r.trial_count()},
              {"trials", trials},
              {"rates", Json{{"failed_pct", r.failed_pct()},
                             {"unstable_pct", r.unstable_pct()},
                             {"dropped_pct", r.dropped_pct()}}}};
}

inline EvalReport eval_report_from_json(const Json& j) {
  EvalReport r;
  r.method = method_from_string(j.at("method").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& t : j.at("trials")) {
    TrialRecord rec;
    rec.trial = t.at("trial").get<std::size_t>();
    rec.shape = t.at("shape").get<std::string>();
    rec.pose = t.at("pose").get<std::string>();
    rec.outcome = outcome_from_string(t.at("outcome").get<std::string>());
    if (!t.at("torque_margin").is_null()) rec.torque_margin = t.at("torque_margin").get<double>();
    r.trials.push_back(std::move(rec));
  }
  return r;
}

// ---- pipeline configuration --------------------------------------------------

/// Everything the command-line tool can be configured with.
struct PipelineConfig {
  DetectionParams detection;
  StabilityParams stability;
  SensorModel sensor;
  RigidTransform camera = overhead_camera(kDefaultCameraHeight);

  void validate() const {
    detection.ransac.validate();
    detection.gripper.validate();
    detection.grasp.validate(detection.gripper);
    stability.validate();
    sensor.validate();
    camera.validate();
  }
};

inline Json to_json(const PipelineConfig& c) {
  const auto& d = c.detection;
  return Json{
      {"workspace", Json{{"min", detail::vec_json(d.workspace.min)}, {"max", detail::vec_json(d.workspace.max)}}},
      {"ransac", Json{{"inlier_threshold", d.ransac.inlier_threshold},
                      {"max_iterations", d.ransac.max_iterations},
                      {"min_inlier_fraction", d.ransac.min_inlier_fraction},
                      {"seed", d.ransac.seed}}},
      {"gripper", Json{{"finger_length", d.gripper.finger_length},
                       {"max_opening", d.gripper.max_opening},
                       {"palm_clearance", d.gripper.palm_clearance},
                       {"finger_width", d.gripper.finger_width}}},
      {"grasp", Json{{"h_pre", d.grasp.h_pre},
                     {"side_preference", Json::array({d.grasp.side_preference.x(), d.grasp.side_preference.y()})},
                     {"table_clearance_min", d.grasp.table_clearance_min}}},
      {"stability", Json{{"friction_mu", c.stability.friction_mu}, {"torque_margin_max", c.stability.torque_margin_max}}},
      {"sensor", Json{{"camera_position", detail::vec_json(c.sensor.camera_position)},
                      {"surface_sample_density", c.sensor.surface_sample_density},
                      {"noise_sigma", c.sensor.noise_sigma},
                      {"seed", c.sensor.seed}}},
      {"camera", to_json(c.camera)}};
}

/// Reads a (possibly partial) config document over the defaults. Unknown
/// keys are rejected at every level.
inline PipelineConfig pipeline_config_from_json(const Json& j) {
  using detail::num;
  PipelineConfig c;
  detail::reject_unknown(j, {"workspace", "ransac", "gripper", "grasp", "stability", "sensor", "camera"}, "config");
  auto& d = c.detection;
  if (j.contains("workspace")) {
    const auto& w = j["workspace"];
    detail::reject_unknown(w, {"min", "max"}, "workspace");
    Vec3 lo = d.workspace.min, hi = d.workspace.max;
    if (w.contains("min")) lo = detail::vec_from(w["min"], "workspace.min");
    if (w.contains("max")) hi = detail::vec_from(w["max"], "workspace.max");
    try {
      d.workspace = Aabb(lo, hi);
    } catch (const InvalidArgument& e) {
      throw InvalidConfig(e.what());
    }
  }
  if (j.contains("ransac")) {
    const auto& r = j["ransac"];
    detail::reject_unknown(r, {"inlier_threshold", "max_iterations", "min_inlier_fraction", "seed"}, "ransac");
    if (r.contains("inlier_threshold")) d.ransac.inlier_threshold = num(r["inlier_threshold"], "inlier_threshold");
    if (r.contains("max_iterations")) d.ransac.max_iterations = detail::integer<int>(r["max_iterations"], "max_iterations");
    if (r.contains("min_inlier_fraction")) d.ransac.min_inlier_fraction = num(r["min_inlier_fraction"], "min_inlier_fraction");
    if (r.contains("seed")) d.ransac.seed = detail::integer<std::uint64_t>(r["seed"], "ransac.seed");
  }
  if (j.contains("gripper")) {
    const auto& g = j["gripper"];
    detail::reject_unknown(g, {"finger_length", "max_opening", "palm_clearance", "finger_width"}, "gripper");
    if (g.contains("finger_length")) d.gripper.finger_length = num(g["finger_length"], "finger_length");
    if (g.contains("max_opening")) d.gripper.max_opening = num(g["max_opening"], "max_opening");
    if (g.contains("palm_clearance")) d.gripper.palm_clearance = num(g["palm_clearance"], "palm_clearance");
    if (g.contains("finger_width")) d.gripper.finger_width = num(g["finger_width"], "finger_width");
  }
  if (j.contains("grasp")) {
    const auto& g = j["grasp"];
    detail::reject_unknown(g, {"h_pre", "side_preference", "table_clearance_min"}, "grasp");
    if (g.contains("h_pre")) d.grasp.h_pre = num(g["h_pre"], "h_pre");
    if (g.contains("side_preference")) {
      const auto& s = g["side_preference"];
      if (!s.is_array() || s.size() != 2) throw InvalidConfig("side_preference must be an array of 2 numbers");
      d.grasp.side_preference = {num(s[0], "side_preference"), num(s[1], "side_preference")};
    }
    if (g.contains("table_clearance_min")) d.grasp.table_clearance_min = num(g["table_clearance_min"], "table_clearance_min");
  }
  if (j.contains("stability")) {
    const auto& s = j["stability"];
    detail::reject_unknown(s, {"friction_mu", "torque_margin_max"}, "stability");
    if (s.contains("friction_mu")) c.stability.friction_mu = num(s["friction_mu"], "friction_mu");
    if (s.contains("torque_margin_max")) c.stability.torque_margin_max = num(s["torque_margin_max"], "torque_margin_max");
  }
  if (j.contains("sensor")) {
    const auto& s = j["sensor"];
    detail::reject_unknown(s, {"camera_position", "surface_sample_density", "noise_sigma", "seed"}, "sensor");
    if (s.contains("camera_position")) c.sensor.camera_position = detail::vec_from(s["camera_position"], "camera_position");
    if (s.contains("surface_sample_density"))
      c.sensor.surface_sample_density = num(s["surface_sample_density"], "surface_sample_density");
    if (s.contains("noise_sigma")) c.sensor.noise_sigma = num(s["noise_sigma"], "noise_sigma");
    if (s.contains("seed")) c.sensor.seed = detail::integer<std::uint64_t>(s["seed"], "sensor.seed");
  }
  if (j.contains("camera")) {
    try {
      c.camera = transform_from_json(j["camera"]);
    } catch (const InvalidTransform& e) {
      throw InvalidConfig(e.what());
    }
  }
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw InvalidConfig(e.what());
  }
  return c;
}

inline Json read_json_file(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace geograsp
