#pragma once

// Independent reference computations used by the tests. None of these call
// into the library's numerical kernels.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using V3 = Eigen::Vector3d;
using M3 = Eigen::Matrix3d;

struct EigenPairs {
  std::array<double, 3> values;  // descending
  std::array<V3, 3> vectors;
};

/// Cyclic Jacobi rotations on a symmetric 3x3 matrix.
inline EigenPairs jacobi_eigen(M3 a) {
  M3 v = M3::Identity();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 3; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-300) break;
    for (int p = 0; p < 3; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        M3 j = M3::Identity();
        j(p, p) = c;
        j(q, q) = c;
        j(p, q) = s;
        j(q, p) = -s;
        a = j.transpose() * a * j;
        v = v * j;
      }
    }
  }
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });
  EigenPairs out;
  for (int k = 0; k < 3; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors[k] = v.col(order[k]).normalized();
  }
  return out;
}

inline M3 covariance(const std::vector<V3>& pts) {
  V3 mean = V3::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  M3 c = M3::Zero();
  for (const auto& p : pts) c += (p - mean) * (p - mean).transpose();
  return c / static_cast<double>(pts.size());
}

/// Total least-squares plane through the points: (unit normal with z >= 0, offset).
inline std::pair<V3, double> lsq_plane(const std::vector<V3>& pts) {
  V3 mean = V3::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  const EigenPairs e = jacobi_eigen(covariance(pts));
  V3 n = e.vectors[2];
  if (n.z() < 0) n = -n;
  return {n, -n.dot(mean)};
}

inline double angle_deg(const V3& a, const V3& b) {
  const double c = std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0);
  return std::acos(c) * 180.0 / 3.14159265358979323846;
}

inline double axis_angle_deg(const V3& a, const V3& b) {
  const double c = std::clamp(std::abs(a.normalized().dot(b.normalized())), 0.0, 1.0);
  return std::acos(c) * 180.0 / 3.14159265358979323846;
}

/// Two-sided Fisher exact test evaluated in log space with lgamma.
inline double fisher_two_sided(int a, int n_a, int b, int n_b) {
  auto lchoose = [](int n, int k) {
    return std::lgamma(n + 1.0L) - std::lgamma(k + 1.0L) - std::lgamma(n - k + 1.0L);
  };
  const int m = a + b;
  const int lo = std::max(0, m - n_b), hi = std::min(m, n_a);
  const long double lden = lchoose(n_a + n_b, m);
  auto logp = [&](int x) { return lchoose(n_a, x) + lchoose(n_b, m - x) - lden; };
  const long double obs = logp(a);
  long double p = 0.0L;
  for (int x = lo; x <= hi; ++x) {
    const long double lp = logp(x);
    if (lp <= obs + 1e-9L) p += std::exp(lp);
  }
  return static_cast<double>(std::min(p, 1.0L));
}

inline M3 rot_z(double a) {
  M3 r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}
inline M3 rot_y(double a) {
  M3 r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}
inline M3 rot_x(double a) {
  M3 r;
  r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return r;
}

/// Uniformly random rotation from a normalized Gaussian quaternion.
inline M3 random_rotation(std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(gen), n(gen), n(gen), n(gen));
  q.normalize();
  return q.toRotationMatrix();
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("geograsp_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
