#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "camlidar/geometry.hpp"
#include "camlidar/pipeline.hpp"

namespace camlidar {

// Binary scan: little-endian f32 quadruplets (x, y, z, intensity).
PointCloud load_scan(const std::string& path);
void save_scan(const PointCloud& cloud, const std::string& path);

// One trajectory row: a sensor-to-map pose, optionally timestamped. Files
// carry 12 space-separated reals per line (row-major 3x4 [R|t]) with an
// optional leading timestamp column; timestamps must increase strictly.
// Untimestamped files get their 0-based line index as the timestamp.
struct TrajectoryEntry {
  double timestamp = 0.0;
  PoseSE3 pose;
};

std::vector<TrajectoryEntry> load_trajectory(const std::string& path);
void save_trajectory(const std::vector<TrajectoryEntry>& entries,
                     const std::string& path, bool with_timestamps = true);

// Camera description file: structured text with fx, fy, cx, cy, width,
// height, and an optional frame tag. Clouds and poses tagged robot-x-forward
// are converted by the fixed robot-to-pinhole rotation at ingestion.
enum class FrameConvention { PinholeZForward, RobotXForward };

struct IntrinsicsFile {
  CameraIntrinsics k{1.0, 1.0, 0.0, 0.0, 1, 1};
  FrameConvention frame = FrameConvention::PinholeZForward;
};

IntrinsicsFile load_intrinsics(const std::string& path);
void save_intrinsics(const IntrinsicsFile& file, const std::string& path);

struct VoxelGridConfig {
  double voxel_size = 0.1;  // meters, > 0
};

// Aggregates posed scans into one map cloud: points whose label is in
// drop_labels are removed, scans are moved to the map frame, and the result
// is voxel-downsampled to one representative per occupied voxel (coordinate
// centroid, mean intensity). Output order and values are independent of the
// scan order: voxels are emitted sorted by grid index and each voxel's
// members are accumulated in a canonical sorted order.
PointCloud build_map(const std::vector<std::pair<PointCloud, PoseSE3>>& scans,
                     const VoxelGridConfig& grid,
                     const std::vector<std::vector<std::uint32_t>>& labels = {},
                     const std::vector<std::uint32_t>& drop_labels = {});

// ASCII PLY export: x y z, plus intensity when present, plus uchar RGB when
// any point carries a valid color (uncolored points write 0 0 0).
void export_ply(const PointCloud& cloud, const std::string& path);
PointCloud import_ply(const std::string& path);

// Binary PPM (P6, maxval 255) raster IO.
void save_ppm(const ColorImage& image, const std::string& path);
ColorImage load_ppm(const std::string& path);

}  // namespace camlidar
