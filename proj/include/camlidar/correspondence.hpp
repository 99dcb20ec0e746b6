#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "camlidar/geometry.hpp"
#include "camlidar/projection.hpp"

namespace camlidar {

// Dense pixel displacement field with per-pixel uncertainty.
//
// Grids are row-major, length width*height. Invalid pixels hold du = dv = 0,
// sigma_u = sigma_v = 1 and valid = 0. Sigmas of valid pixels are positive.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<double> du;
  std::vector<double> dv;
  std::vector<double> sigma_u;
  std::vector<double> sigma_v;
  std::vector<std::uint8_t> valid;

  static FlowField empty(int width, int height);
  std::size_t at(int u, int v) const {
    return static_cast<std::size_t>(v) * width + u;
  }
  int valid_count() const;
};

// Renders `cloud` at the initial pose and pairs every valid pixel with the
// displacement to the same point's projection at the ground-truth pose.
//
// Both endpoints use continuous (sub-pixel) projections, so rendering at
// init == gt yields an exactly zero field. Points that fall behind the
// camera at the ground-truth pose are invalidated; ground-truth projections
// landing outside the image bounds are kept. Valid pixels carry unit sigmas.
// Returns the rendered image alongside the field.
std::pair<LidarImage, FlowField> ground_truth_flow(const PointCloud& cloud,
                                                   const PoseSE3& init,
                                                   const PoseSE3& gt,
                                                   const CameraIntrinsics& k,
                                                   const ProjectionConfig& cfg = {});

// Stand-in for a learned matcher: corrupts a ground-truth field with Gaussian
// noise and uniform outliers, reporting uncertainties that reflect the
// corruption (unless blind).
struct OracleNoiseConfig {
  double gaussian_sigma = 0.0;    // per-axis noise on inlier displacements
  double outlier_fraction = 0.0;  // in [0, 1]; exact count round(f * n)
  double outlier_range = 50.0;    // outliers drawn uniform in +-range
  std::uint64_t rng_seed = 0;
  bool blind_sigma = false;  // report sigma 1 everywhere instead
};

// Draw order from rng_seed (fixed; reordering would change results):
//  1. per valid pixel in row-major order: normal for du, normal for dv
//     (added scaled by gaussian_sigma);
//  2. outlier selection: partial Fisher-Yates over the valid pixels,
//     round(outlier_fraction * n) swaps;
//  3. per selected outlier pixel in ascending flat-index order: uniform du in
//     +-outlier_range, uniform dv, uniform sigma_u and sigma_v in
//     [5 * gaussian_sigma + 1, max(outlier_range, 5 * gaussian_sigma + 1)].
// Inlier sigmas are max(gaussian_sigma, 0.1). Blind mode consumes the same
// draws but reports sigma 1 everywhere, so displacements match the sighted
// field bit for bit.
FlowField oracle_match(const FlowField& gt_flow, const OracleNoiseConfig& cfg);

// Keeps the ceil(keep_quantile * valid_count) most certain pixels, ordered by
// (sigma_u + sigma_v, flat index) ascending; the rest are invalidated.
// keep_quantile must lie in (0, 1]; 1 keeps every valid pixel.
FlowField filter_by_uncertainty(const FlowField& flow, double keep_quantile);

// 2D-3D correspondences: pixel = sub-pixel render position + displacement,
// point = the pixel's source point (map frame), weight = 1 / (sigma_u +
// sigma_v). One entry per valid flow pixel, row-major order.
struct CorrespondenceSet {
  std::vector<Eigen::Vector3d> points3d;
  std::vector<Eigen::Vector2d> pixels2d;
  std::vector<double> weights;

  std::size_t size() const { return points3d.size(); }
};

CorrespondenceSet to_correspondences(const LidarImage& image,
                                     const FlowField& flow,
                                     const PointCloud& cloud);

// Block nearest-neighbor upsampling by an integer factor; displacements and
// sigmas scale by the factor (they are measured in pixels).
FlowField upscale_flow(const FlowField& flow, int factor);

// Binary format: magic "FLOW", u32 width, u32 height, then four row-major f32
// grids (du, dv, sigma_u, sigma_v) and one row-major u8 validity grid.
// Little-endian.
void save_flow_field(const FlowField& flow, const std::string& path);
FlowField load_flow_field(const std::string& path);

}  // namespace camlidar
