#pragma once

#include <cstdint>
#include <vector>

#include "camlidar/correspondence.hpp"
#include "camlidar/geometry.hpp"

namespace camlidar {

// Closed-form pose from 2D-3D correspondences via the control-point method:
// four control points from the centroid and scaled principal axes, camera
// coordinates recovered from the null space of the projection constraints,
// combination weights polished by Gauss-Newton on the inter-point distance
// constraints, rigid alignment of the two control-point sets, and the
// candidate with the lowest total reprojection error returned.
//
// Handles planar clouds (the fourth control point collapses onto the
// centroid and the barycentric basis is pseudo-inverted). Ignores weights.
// Throws TooFewPoints (n < 4) and DegenerateConfiguration (collinear input).
PoseSE3 epnp(const CorrespondenceSet& set, const CameraIntrinsics& k);

// Euclidean pixel distance between each projected point and its pixel.
// Points with camera-frame depth <= 1e-6 get +infinity.
std::vector<double> reprojection_errors(const PoseSE3& pose,
                                        const CorrespondenceSet& set,
                                        const CameraIntrinsics& k);

// Jacobian of the projected pixel of a map-frame point with respect to a
// left-multiplicative tangent perturbation of the pose: columns are
// (translation xyz, rotation xyz) of d pi(exp(delta) pose p) / d delta at
// delta = 0. Throws NonPositiveDepth if the point sits behind the camera.
Eigen::Matrix<double, 2, 6> reprojection_jacobian(const PoseSE3& pose,
                                                  const Eigen::Vector3d& p_map,
                                                  const CameraIntrinsics& k);

// Weighted Levenberg-Marquardt refinement of a pose on all correspondences
// in the set, minimizing sum_i w_i ||pi(pose p_i) - x_i||^2 over
// left-multiplicative updates exp(delta) * pose.
//
// Damping starts at 1e-3, divides by 10 on accepted steps and multiplies by
// 10 on rejected ones; a candidate that puts any point at depth <= 1e-6 has
// infinite cost and is rejected. Stops after max_iterations solver steps or
// when the relative cost decrease of an accepted step falls below 1e-10.
// The returned pose never has higher cost than the input; with no improving
// step it is the input pose.
PoseSE3 lm_refine(const PoseSE3& initial, const CorrespondenceSet& set,
                  const CameraIntrinsics& k, int max_iterations = 50);

struct RansacConfig {
  int iterations = 1000;        // fixed hypothesis budget
  double reproj_threshold = 2.0;  // inlier test: error <= threshold, pixels
  int min_inliers = 6;          // consensus floor, must be >= 4
  std::uint64_t rng_seed = 0;
  bool refine_with_lm = false;  // LM on the consensus set after the refit
};

struct PnPResult {
  PoseSE3 pose;
  std::vector<int> inlier_indices;  // under the final pose, ascending
  double inlier_rms = 0.0;          // pixels, over inlier_indices
  int hypothesis_count = 0;         // samples that produced a pose
};

// Robust pose estimation. All `iterations` 4-point samples are drawn up
// front from rng_seed (samples within 1 degree of collinear are discarded
// and still consume budget), scored independently, and the best hypothesis
// chosen by (inlier count desc, inlier rms asc, sample index asc). The pose
// is refit on the winning consensus set, optionally LM-refined, and inliers
// are recounted under the final pose. Hypothesis scoring may run in
// parallel; results are independent of thread count.
// Throws TooFewPoints (n < 4), NoConsensus (best count < min_inliers).
PnPResult ransac_pnp(const CorrespondenceSet& set, const CameraIntrinsics& k,
                     const RansacConfig& cfg);

}  // namespace camlidar
