#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "geograsp/cloud.hpp"
#include "geograsp/rng.hpp"

namespace geograsp {

// Solid primitives in their local frame. Every primitive is centered on its
// local origin except BoxPair, whose origin is the center of its first box.
// The local z axis is the primitive's own axis (cylinder/tube axis, box wz).

struct Box {
  Vec3 size;  // full extents wx, wy, wz
};

struct Cylinder {
  double radius;
  double height;
};

struct Sphere {
  double radius;
};

/// Hollow cylinder; the bore runs the full height.
struct Tube {
  double outer_radius;
  double inner_radius;
  double height;
};

/// Union of two axis-aligned boxes; `second_offset` is the second box's
/// center relative to the first.
struct BoxPair {
  Box first;
  Box second;
  Vec3 second_offset;
};

using PrimitiveShape = std::variant<Box, Cylinder, Sphere, Tube, BoxPair>;

struct SurfaceSample {
  Vec3 point;
  Vec3 normal;  // outward
};

struct RayHit {
  double t = 0.0;
  Vec3 point;
  Vec3 normal;  // outward normal of the solid at the hit
  bool entering = true;
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

inline std::string_view shape_kind(const PrimitiveShape& s) {
  return std::visit(Overloaded{[](const Box&) { return std::string_view("box"); },
                               [](const Cylinder&) { return std::string_view("cylinder"); },
                               [](const Sphere&) { return std::string_view("sphere"); },
                               [](const Tube&) { return std::string_view("tube"); },
                               [](const BoxPair&) { return std::string_view("boxpair"); }},
                    s);
}

inline bool is_convex(const PrimitiveShape& s) { return !std::holds_alternative<Tube>(s) && !std::holds_alternative<BoxPair>(s); }

inline void validate_shape(const PrimitiveShape& s) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  auto box_ok = [&](const Box& b) { return positive(b.size.x()) && positive(b.size.y()) && positive(b.size.z()); };
  const bool ok = std::visit(
      Overloaded{[&](const Box& b) { return box_ok(b); },
                 [&](const Cylinder& c) { return positive(c.radius) && positive(c.height); },
                 [&](const Sphere& sp) { return positive(sp.radius); },
                 [&](const Tube& t) {
                   return positive(t.outer_radius) && positive(t.inner_radius) && positive(t.height) &&
                          t.inner_radius < t.outer_radius;
                 },
                 [&](const BoxPair& p) { return box_ok(p.first) && box_ok(p.second) && p.second_offset.allFinite(); }},
      s);
  if (!ok) throw InvalidArgument("invalid " + std::string(shape_kind(s)) + " dimensions");
}

namespace detail {

inline bool box_contains(const Vec3& half, const Vec3& p) { return (p.cwiseAbs().array() <= half.array()).all(); }

inline bool box_strictly_contains(const Vec3& half, const Vec3& p) {
  return (p.cwiseAbs().array() < (half.array() - 1e-12)).all();
}

struct Candidate {
  double t;
  Vec3 normal;
};

inline void box_candidates(const Vec3& half, const Vec3& center, const Vec3& o, const Vec3& d,
                           std::vector<Candidate>& out) {
  const Vec3 oc = o - center;
  for (int k = 0; k < 3; ++k) {
    if (d(k) == 0.0) continue;
    for (double sgn : {-1.0, 1.0}) {
      const double t = (sgn * half(k) - oc(k)) / d(k);
      const Vec3 p = oc + t * d;
      bool on_face = true;
      for (int j = 0; j < 3; ++j)
        if (j != k && std::abs(p(j)) > half(j) + 1e-12) on_face = false;
      if (on_face) {
        Vec3 n = Vec3::Zero();
        n(k) = sgn;
        out.push_back({t, n});
      }
    }
  }
}

/// Roots of |o_xy + t d_xy|^2 = r^2, restricted to |z| <= half_h.
inline void lateral_candidates(double r, double half_h, const Vec3& o, const Vec3& d, double normal_sign,
                               std::vector<Candidate>& out) {
  const double a = d.x() * d.x() + d.y() * d.y();
  if (a == 0.0) return;
  const double b = 2.0 * (o.x() * d.x() + o.y() * d.y());
  const double c = o.x() * o.x() + o.y() * o.y() - r * r;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return;
  const double sq = std::sqrt(disc);
  // Numerically stable pair of roots.
  const double q = -0.5 * (b + std::copysign(sq, b));
  std::array<double, 2> roots{q / a, q != 0.0 ? c / q : -b / (2.0 * a)};
  for (double t : roots) {
    const Vec3 p = o + t * d;
    if (std::abs(p.z()) > half_h + 1e-12) continue;
    out.push_back({t, normal_sign * Vec3(p.x(), p.y(), 0.0).normalized()});
  }
}

inline void cap_candidates(double r_in, double r_out, double half_h, const Vec3& o, const Vec3& d,
                           std::vector<Candidate>& out) {
  if (d.z() == 0.0) return;
  for (double sgn : {-1.0, 1.0}) {
    const double t = (sgn * half_h - o.z()) / d.z();
    const Vec3 p = o + t * d;
    const double rho2 = p.x() * p.x() + p.y() * p.y();
    if (rho2 <= r_out * r_out * (1.0 + 1e-12) && rho2 >= r_in * r_in * (1.0 - 1e-12))
      out.push_back({t, Vec3(0.0, 0.0, sgn)});
  }
}

inline void sphere_candidates(double r, const Vec3& o, const Vec3& d, std::vector<Candidate>& out) {
  const double a = d.squaredNorm();
  const double b = 2.0 * o.dot(d);
  const double c = o.squaredNorm() - r * r;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + std::copysign(sq, b));
  std::array<double, 2> roots{q / a, q != 0.0 ? c / q : -b / (2.0 * a)};
  for (double t : roots) out.push_back({t, (o + t * d).normalized()});
}

}  // namespace detail

/// Closed-solid membership in the local frame.
inline bool contains(const PrimitiveShape& s, const Vec3& p) {
  return std::visit(
      Overloaded{[&](const Box& b) { return detail::box_contains(0.5 * b.size, p); },
                 [&](const Cylinder& c) {
                   return std::abs(p.z()) <= 0.5 * c.height && p.x() * p.x() + p.y() * p.y() <= c.radius * c.radius;
                 },
                 [&](const Sphere& sp) { return p.squaredNorm() <= sp.radius * sp.radius; },
                 [&](const Tube& t) {
                   const double rho2 = p.x() * p.x() + p.y() * p.y();
                   return std::abs(p.z()) <= 0.5 * t.height && rho2 <= t.outer_radius * t.outer_radius &&
                          rho2 >= t.inner_radius * t.inner_radius;
                 },
                 [&](const BoxPair& bp) {
                   return detail::box_contains(0.5 * bp.first.size, p) ||
                          detail::box_contains(0.5 * bp.second.size, p - bp.second_offset);
                 }},
      s);
}

/// First point in (t_min, t_max] where the ray crosses the solid's boundary,
/// in the local frame. `dir` must be unit length. A hit with entering ==
/// false means the ray started inside the solid.
inline std::optional<RayHit> intersect(const PrimitiveShape& s, const Vec3& origin, const Vec3& dir,
                                       double t_min = 0.0,
                                       double t_max = std::numeric_limits<double>::infinity()) {
  std::vector<detail::Candidate> cands;
  cands.reserve(8);
  std::visit(Overloaded{[&](const Box& b) { detail::box_candidates(0.5 * b.size, Vec3::Zero(), origin, dir, cands); },
                        [&](const Cylinder& c) {
                          detail::lateral_candidates(c.radius, 0.5 * c.height, origin, dir, 1.0, cands);
                          detail::cap_candidates(0.0, c.radius, 0.5 * c.height, origin, dir, cands);
                        },
                        [&](const Sphere& sp) { detail::sphere_candidates(sp.radius, origin, dir, cands); },
                        [&](const Tube& t) {
                          detail::lateral_candidates(t.outer_radius, 0.5 * t.height, origin, dir, 1.0, cands);
                          detail::lateral_candidates(t.inner_radius, 0.5 * t.height, origin, dir, -1.0, cands);
                          detail::cap_candidates(t.inner_radius, t.outer_radius, 0.5 * t.height, origin, dir, cands);
                        },
                        [&](const BoxPair& bp) {
                          detail::box_candidates(0.5 * bp.first.size, Vec3::Zero(), origin, dir, cands);
                          detail::box_candidates(0.5 * bp.second.size, bp.second_offset, origin, dir, cands);
                        }},
             s);
  std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  constexpr double eps = 1e-9;
  for (const auto& c : cands) {
    if (c.t <= t_min || c.t > t_max) continue;
    const bool before = contains(s, origin + (c.t - eps) * dir);
    const bool after = contains(s, origin + (c.t + eps) * dir);
    if (before == after) continue;
    return RayHit{c.t, origin + c.t * dir, c.normal, after};
  }
  return std::nullopt;
}

inline double volume(const PrimitiveShape& s) {
  constexpr double pi = std::numbers::pi;
  auto box_vol = [](const Box& b) { return b.size.prod(); };
  return std::visit(
      Overloaded{[&](const Box& b) { return box_vol(b); },
                 [&](const Cylinder& c) { return pi * c.radius * c.radius * c.height; },
                 [&](const Sphere& sp) { return 4.0 / 3.0 * pi * sp.radius * sp.radius * sp.radius; },
                 [&](const Tube& t) {
                   return pi * (t.outer_radius * t.outer_radius - t.inner_radius * t.inner_radius) * t.height;
                 },
                 [&](const BoxPair& bp) {
                   const Vec3 lo = (-0.5 * bp.first.size).cwiseMax(bp.second_offset - 0.5 * bp.second.size);
                   const Vec3 hi = (0.5 * bp.first.size).cwiseMin(bp.second_offset + 0.5 * bp.second.size);
                   const double overlap = (hi - lo).cwiseMax(0.0).prod();
                   return box_vol(bp.first) + box_vol(bp.second) - overlap;
                 }},
      s);
}

/// Center of mass of the uniform-density solid, local frame.
inline Vec3 solid_centroid(const PrimitiveShape& s) {
  if (const auto* bp = std::get_if<BoxPair>(&s)) {
    const Vec3 lo = (-0.5 * bp->first.size).cwiseMax(bp->second_offset - 0.5 * bp->second.size);
    const Vec3 hi = (0.5 * bp->first.size).cwiseMin(bp->second_offset + 0.5 * bp->second.size);
    const Vec3 ext = (hi - lo).cwiseMax(0.0);
    const double va = bp->first.size.prod(), vb = bp->second.size.prod(), vo = ext.prod();
    const Vec3 co = 0.5 * (lo + hi);
    return (vb * bp->second_offset - vo * co) / (va + vb - vo);
  }
  return Vec3::Zero();
}

/// Half extents of the local bounding box, about the local origin.
inline Vec3 local_half_extents(const PrimitiveShape& s) {
  return std::visit(Overloaded{[](const Box& b) -> Vec3 { return 0.5 * b.size; },
                               [](const Cylinder& c) -> Vec3 { return {c.radius, c.radius, 0.5 * c.height}; },
                               [](const Sphere& sp) -> Vec3 { return Vec3::Constant(sp.radius); },
                               [](const Tube& t) -> Vec3 { return {t.outer_radius, t.outer_radius, 0.5 * t.height}; },
                               [](const BoxPair& bp) -> Vec3 {
                                 const Vec3 hi = (0.5 * bp.first.size).cwiseMax(bp.second_offset + 0.5 * bp.second.size);
                                 const Vec3 lo = (-0.5 * bp.first.size).cwiseMin(bp.second_offset - 0.5 * bp.second.size);
                                 return hi.cwiseMax(-lo);
                               }},
                    s);
}

/// max over the solid of (R p) . e, i.e. the support function of the rotated
/// shape along world direction e.
inline double support(const PrimitiveShape& s, const Mat3& rotation, const Vec3& e) {
  const Vec3 local = rotation.transpose() * e;
  auto box_support = [&](const Vec3& half, const Vec3& center) {
    return center.dot(local) + half.dot(local.cwiseAbs());
  };
  auto round_support = [&](double r, double half_h) {
    const double a = std::abs(local.z());
    const double radial = std::sqrt(std::max(0.0, local.squaredNorm() - a * a));
    return a * half_h + r * radial;
  };
  return std::visit(Overloaded{[&](const Box& b) { return box_support(0.5 * b.size, Vec3::Zero()); },
                               [&](const Cylinder& c) { return round_support(c.radius, 0.5 * c.height); },
                               [&](const Sphere& sp) { return sp.radius * local.norm(); },
                               [&](const Tube& t) { return round_support(t.outer_radius, 0.5 * t.height); },
                               [&](const BoxPair& bp) {
                                 return std::max(box_support(0.5 * bp.first.size, Vec3::Zero()),
                                                 box_support(0.5 * bp.second.size, bp.second_offset));
                               }},
                    s);
}

namespace detail {

inline std::size_t sample_count(double area, double density) {
  return static_cast<std::size_t>(std::llround(area * density));
}

inline void sample_box_faces(const Vec3& half, const Vec3& center, double density, Rng& rng,
                             std::vector<SurfaceSample>& out) {
  for (int k = 0; k < 3; ++k) {
    const int a = (k + 1) % 3, b = (k + 2) % 3;
    const double area = 4.0 * half(a) * half(b);
    for (double sgn : {-1.0, 1.0}) {
      const std::size_t n = sample_count(area, density);
      Vec3 normal = Vec3::Zero();
      normal(k) = sgn;
      for (std::size_t i = 0; i < n; ++i) {
        Vec3 p;
        p(k) = sgn * half(k);
        p(a) = rng.uniform(-half(a), half(a));
        p(b) = rng.uniform(-half(b), half(b));
        out.push_back({p + center, normal});
      }
    }
  }
}

inline void sample_lateral(double r, double h, double density, double normal_sign, Rng& rng,
                           std::vector<SurfaceSample>& out) {
  const std::size_t n = sample_count(2.0 * std::numbers::pi * r * h, density);
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double z = rng.uniform(-0.5 * h, 0.5 * h);
    const Vec3 radial(std::cos(phi), std::sin(phi), 0.0);
    out.push_back({r * radial + Vec3(0.0, 0.0, z), normal_sign * radial});
  }
}

inline void sample_annulus_caps(double r_in, double r_out, double h, double density, Rng& rng,
                                std::vector<SurfaceSample>& out) {
  const double area = std::numbers::pi * (r_out * r_out - r_in * r_in);
  for (double sgn : {-1.0, 1.0}) {
    const std::size_t n = sample_count(area, density);
    for (std::size_t i = 0; i < n; ++i) {
      const double rho = std::sqrt(rng.uniform(r_in * r_in, r_out * r_out));
      const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
      out.push_back({Vec3(rho * std::cos(phi), rho * std::sin(phi), sgn * 0.5 * h), Vec3(0.0, 0.0, sgn)});
    }
  }
}

}  // namespace detail

/// Uniform random samples over the solid's boundary at `density` points per
/// square meter, local frame, with outward normals.
inline std::vector<SurfaceSample> sample_surface(const PrimitiveShape& s, double density, Rng& rng) {
  std::vector<SurfaceSample> out;
  std::visit(Overloaded{[&](const Box& b) { detail::sample_box_faces(0.5 * b.size, Vec3::Zero(), density, rng, out); },
                        [&](const Cylinder& c) {
                          detail::sample_lateral(c.radius, c.height, density, 1.0, rng, out);
                          detail::sample_annulus_caps(0.0, c.radius, c.height, density, rng, out);
                        },
                        [&](const Sphere& sp) {
                          const std::size_t n = detail::sample_count(4.0 * std::numbers::pi * sp.radius * sp.radius, density);
                          for (std::size_t i = 0; i < n; ++i) {
                            const double z = rng.uniform(-1.0, 1.0);
                            const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
                            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
                            const Vec3 n_out(rho * std::cos(phi), rho * std::sin(phi), z);
                            out.push_back({sp.radius * n_out, n_out});
                          }
                        },
                        [&](const Tube& t) {
                          detail::sample_lateral(t.outer_radius, t.height, density, 1.0, rng, out);
                          detail::sample_lateral(t.inner_radius, t.height, density, -1.0, rng, out);
                          detail::sample_annulus_caps(t.inner_radius, t.outer_radius, t.height, density, rng, out);
                        },
                        [&](const BoxPair& bp) {
                          const Vec3 ha = 0.5 * bp.first.size, hb = 0.5 * bp.second.size;
                          std::vector<SurfaceSample> a, b;
                          detail::sample_box_faces(ha, Vec3::Zero(), density, rng, a);
                          detail::sample_box_faces(hb, bp.second_offset, density, rng, b);
                          for (const auto& smp : a)
                            if (!detail::box_strictly_contains(hb, smp.point - bp.second_offset)) out.push_back(smp);
                          for (const auto& smp : b)
                            if (!detail::box_strictly_contains(ha, smp.point)) out.push_back(smp);
                        }},
             s);
  return out;
}

/// A primitive placed in the world by a rigid transform (local -> world).
struct PlacedShape {
  PrimitiveShape shape;
  RigidTransform pose;

  bool contains(const Vec3& world) const {
    return geograsp::contains(shape, pose.rotation.transpose() * (world - pose.translation));
  }

  std::optional<RayHit> intersect(const Vec3& origin, const Vec3& dir, double t_min = 0.0,
                                  double t_max = std::numeric_limits<double>::infinity()) const {
    const Mat3 rt = pose.rotation.transpose();
    auto hit = geograsp::intersect(shape, rt * (origin - pose.translation), rt * dir, t_min, t_max);
    if (hit) {
      hit->point = pose.apply(hit->point);
      hit->normal = pose.rotation * hit->normal;
    }
    return hit;
  }

  Vec3 centroid() const { return pose.apply(solid_centroid(shape)); }

  double support(const Vec3& e) const { return geograsp::support(shape, pose.rotation, e) + pose.translation.dot(e); }
};

}  // namespace geograsp
