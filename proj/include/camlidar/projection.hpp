#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "camlidar/geometry.hpp"

namespace camlidar {

inline constexpr std::uint32_t kEmptyIndex = 0xFFFFFFFFu;

// Sparse depth image produced by projecting a point cloud.
//
// Grids are row-major, length width*height, indexed [v * width + u].
// Empty pixels hold depth 0 and source_index kEmptyIndex. For valid pixels,
// u_sub/v_sub retain the continuous projection of the winning point (the
// integer pixel is its rounding); after loading from disk they fall back to
// the integer pixel centers and has_subpixel is false.
struct LidarImage {
  int width = 0;
  int height = 0;
  std::vector<double> depth;
  std::vector<std::uint32_t> source_index;
  std::vector<double> u_sub;
  std::vector<double> v_sub;
  bool has_subpixel = true;

  std::size_t at(int u, int v) const {
    return static_cast<std::size_t>(v) * width + u;
  }
  bool valid(std::size_t i) const { return source_index[i] != kEmptyIndex; }
  int valid_count() const;
};

enum class OcclusionComparison {
  // Visible when the four-sector score exceeds the threshold.
  VisibleIfGreater,
  // Complement: visible when the score does not exceed the threshold. This is
  // the physically meaningful direction (the score grows when neighbors lie
  // between the point and the camera).
  VisibleIfSmaller,
};

struct OcclusionConfig {
  int kernel_size = 9;  // odd, >= 3
  double threshold = 3.0;
  OcclusionComparison comparison = OcclusionComparison::VisibleIfGreater;
};

struct ProjectionConfig {
  double max_depth = 160.0;  // points farther than this are dropped
  std::optional<OcclusionConfig> occlusion;
};

// Z-buffer projection of `cloud` (map frame) through `pose` (map-to-camera)
// into a sparse depth image. Nearest depth wins each pixel; exact depth ties
// go to the lower point index. Points behind the camera (z <= 1e-6) or beyond
// max_depth are dropped. Applies the occlusion filter when configured.
// Throws EmptyProjection if no valid pixel remains.
LidarImage render_lidar_image(const PointCloud& cloud, const PoseSE3& pose,
                              const CameraIntrinsics& k,
                              const ProjectionConfig& cfg = {});

// Removes occluded pixels using a four-sector visibility score.
//
// For each valid pixel with camera-frame point P and window neighbors P_j,
// alpha_j = dot(unit(camera - P), unit(P_j - P)). The kernel window is split
// into north/east/south/west sectors by its diagonals (pixels exactly on a
// diagonal join the clockwise-adjacent sector), and the score is the sum of
// the per-sector maxima of alpha_j. The comparison direction decides whether
// a high score marks visibility or occlusion. Pixels with no valid neighbor
// in the window stay visible. Never throws on an all-removed result.
LidarImage occlusion_filter(const LidarImage& image, const PointCloud& cloud,
                            const PoseSE3& pose, const OcclusionConfig& cfg);

// Periodic feature mapping of a scalar: [d, sin(d pi 2^0), cos(d pi 2^0), ...,
// sin(d pi 2^(m-1)), cos(d pi 2^(m-1))], length 2m + 1.
std::vector<double> fourier_map(double d, int m);

// Left-right scene mirroring for a robot-frame cloud (Y axis points left):
// point Y coordinates are negated and the principal point is reflected,
// cx' = width - cx. Projections of mirrored points land at u' = width - u.
std::pair<PointCloud, CameraIntrinsics> mirror_augmentation(
    const PointCloud& cloud, const CameraIntrinsics& k);

// Binary image format: magic "LIMG", u32 width, u32 height, then row-major
// f32 depth grid and row-major u32 source-index grid (kEmptyIndex for empty
// pixels). Little-endian. Sub-pixel coordinates are not stored.
void save_lidar_image(const LidarImage& image, const std::string& path);
LidarImage load_lidar_image(const std::string& path);

}  // namespace camlidar
