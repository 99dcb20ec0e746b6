#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "camlidar/correspondence.hpp"
#include "camlidar/pnp.hpp"
#include "camlidar/projection.hpp"

namespace camlidar {

// Per-axis bounds for the uniform noise applied to a ground-truth pose when
// sampling an initial estimate.
struct NoiseRange {
  double max_translation_m = 0.0;
  double max_rotation_deg = 0.0;
};

// Matcher used by one stage: the built-in oracle unless an external
// serialized flow field is named.
struct MatcherConfig {
  OracleNoiseConfig oracle;
  std::string external_flow_path;  // when nonempty, load this field instead
};

struct StageConfig {
  NoiseRange noise_range;  // initial-error range this stage is tuned for
  MatcherConfig matcher;
  RansacConfig ransac;
  double keep_quantile = 1.0;  // fraction of matches kept, in (0, 1]
};

// Outcome of one stage of the refinement chain. On failure `result.pose`
// is the stage's input pose and `failure` names the error.
struct StageResult {
  PnPResult result;
  bool succeeded = false;
  std::string failure;
  double runtime_ms = 0.0;
};

// Projection defaults with the occlusion filter enabled.
inline ProjectionConfig occlusion_projection() {
  ProjectionConfig cfg;
  cfg.occlusion = OcclusionConfig{};
  return cfg;
}

// Perturbs `gt` by uniform noise: translation offsets per axis in
// +-max_translation_m, then an intrinsic roll/pitch/yaw rotation with each
// angle uniform in +-max_rotation_deg (R' = R * Rx * Ry * Rz). Draw order is
// tx, ty, tz, roll, pitch, yaw. Deterministic per seed; a zero range returns
// `gt` unchanged.
PoseSE3 sample_initial_pose(const PoseSE3& gt, const NoiseRange& range,
                            std::uint64_t seed);

// One matching + localization pass: renders the cloud at `init`, produces a
// flow field (oracle displacements toward `gt_for_oracle`, or an external
// serialized field), keeps the most certain quantile, converts to
// correspondences, and solves the robust PnP problem. EmptyProjection and
// NoConsensus propagate to the caller.
PnPResult run_stage(const PointCloud& cloud, const PoseSE3& init,
                    const CameraIntrinsics& k, const StageConfig& stage,
                    const PoseSE3& gt_for_oracle,
                    const ProjectionConfig& projection = {});

// Runs the stages in order, feeding each stage's estimate to the next. A
// NoConsensus failure passes the stage's input pose through unchanged and
// continues; any other failure terminates the chain. Every attempted stage
// contributes one entry.
std::vector<StageResult> iterative_localize(
    const PointCloud& cloud, const PoseSE3& init, const CameraIntrinsics& k,
    const std::vector<StageConfig>& stages, const PoseSE3& gt_for_oracle,
    const ProjectionConfig& projection = {});

using PosePair = std::pair<PoseSE3, PoseSE3>;

struct CalibrationMetrics {
  double msee = 0.0;
  double mrr = 0.0;  // in [0, inf); 1.0 means fully re-calibrated
};

// MSEE = mean SE(3) log-norm of the final pairs; MRR = mean of
// |(eta_i - E_i) / eta_i| where eta_i is the log-norm of the initial pairs.
// Throws ZeroInitialError when any eta_i is zero.
CalibrationMetrics msee_mrr(const std::vector<PosePair>& initial,
                            const std::vector<PosePair>& final_pairs);

struct AggregationResult {
  PoseSE3 mean_pose;    // chordal mean rotation, component-wise mean translation
  PoseSE3 mode_pose;    // per-component mode after rounding (see below)
  Eigen::Vector3d median_translation = Eigen::Vector3d::Zero();
  int frame_count = 0;
};

// Aggregates per-frame extrinsic estimates. Mean rotation is the principal
// eigenvector of (1/n) sum q q^T; translations are averaged component-wise.
// Median translation is the component-wise median (midpoint for even n).
// The mode rounds translations to 2 decimals and quaternion components to 4,
// takes each component's most frequent value (ties: first occurrence in
// frame order), and renormalizes the assembled quaternion; if normalization
// moves any component by more than the rounding quantum, the most frequent
// complete rounded quaternion is used instead.
AggregationResult aggregate_extrinsics(const std::vector<PoseSE3>& poses);

// 8-bit RGB raster, row-major.
struct ColorImage {
  int width = 0;
  int height = 0;
  std::vector<std::array<std::uint8_t, 3>> rgb;

  std::size_t at(int u, int v) const {
    return static_cast<std::size_t>(v) * width + u;
  }
};

// Paints map points from posed images: each point takes the bilinear sample
// at its sub-pixel projection in the first image (in array order) where it
// is visible after z-buffering and occlusion filtering. Points never visible
// keep color_valid = 0. Geometry is returned bit-identical.
PointCloud colorize_map(
    const PointCloud& cloud,
    const std::vector<std::pair<ColorImage, PoseSE3>>& images,
    const CameraIntrinsics& k,
    const ProjectionConfig& projection = occlusion_projection());

}  // namespace camlidar
