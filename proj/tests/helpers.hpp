#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "camlidar/geometry.hpp"
#include "camlidar/rng.hpp"

namespace camlidar::testing {

// Uniformly distributed random rotation (normalized 4-normal method).
inline Eigen::Quaterniond random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return q;
}

inline PoseSE3 random_pose(Rng& rng, double t_range = 10.0) {
  const Eigen::Quaterniond q = random_rotation(rng);
  const Eigen::Vector3d t(rng.uniform(-t_range, t_range),
                          rng.uniform(-t_range, t_range),
                          rng.uniform(-t_range, t_range));
  return PoseSE3(q, t);
}

// Rotation with geodesic angle <= max_angle_rad around identity.
inline Eigen::Quaterniond random_small_rotation(Rng& rng, double max_angle_rad) {
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  const double n = axis.norm();
  axis = n > 0 ? Eigen::Vector3d(axis / n) : Eigen::Vector3d::UnitX();
  const double angle = rng.uniform(0.0, max_angle_rad);
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis));
}

// Synthetic street scene in a map frame: ground plane plus two building
// facades, sampled so that every point is visible from `view` (a map-to-camera
// transform) at depths between roughly near_z and far_z.
//
// Geometry is constructed in the camera frame of `view` (X right, Y down,
// Z forward) and pushed through view^-1 into the map frame:
//   ground:        y = +1.5 (1.5 m below the optical axis)
//   left facade:   x = -10, y in [-10.5, 1.5]
//   right facade:  x = +10, y in [-10.5, 1.5]
inline PointCloud make_street_scene(const PoseSE3& view, std::size_t n_points,
                                    Rng& rng, double near_z = 5.0,
                                    double far_z = 80.0) {
  const PoseSE3 cam_to_map = view.inverse();
  PointCloud cloud;
  cloud.points.reserve(n_points);
  const std::size_t n_ground = (n_points * 2) / 5;
  const std::size_t n_left = (n_points - n_ground) / 2;
  for (std::size_t i = 0; i < n_points; ++i) {
    Eigen::Vector3d p_cam;
    const double z = rng.uniform(near_z, far_z);
    // Keep lateral extent inside the frustum of a ~53 deg horizontal FoV
    // camera: |x| <= 0.45 z stays within fx=500, W=640 at all depths used.
    const double half_width = std::min(10.0, 0.45 * z);
    if (i < n_ground) {
      p_cam = {rng.uniform(-half_width, half_width), 1.5, z};
    } else {
      const double x = (i < n_ground + n_left) ? -1.0 : 1.0;
      const double max_up = std::min(10.5, 0.33 * z);
      p_cam = {x * std::min(10.0, 0.45 * z), rng.uniform(-max_up, 1.5), z};
    }
    cloud.points.push_back(cam_to_map.apply(p_cam));
  }
  return cloud;
}

inline CameraIntrinsics default_intrinsics() {
  return CameraIntrinsics(500.0, 500.0, 320.0, 240.0, 640, 480);
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Two-sided Kolmogorov-Smirnov p-value against U(lo, hi).
inline double ks_uniform_pvalue(std::vector<double> samples, double lo,
                                double hi) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = (samples[i] - lo) / (hi - lo);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    p += 2.0 * (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  }
  return std::clamp(p, 0.0, 1.0);
}

// Spearman rank correlation.
inline double rank_correlation(const std::vector<double>& a,
                               const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
    return r;
  };
  const std::vector<double> ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) { ma += ra[i]; mb += rb[i]; }
  ma /= n; mb /= n;
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(da * db);
}

}  // namespace camlidar::testing
