#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "camlidar/io.hpp"
#include "camlidar/pipeline.hpp"

namespace camlidar {

// Full description of a localization/benchmark run, loadable from a JSON
// config file (see docs/formats.md for the schema).
struct RunConfig {
  std::string map_path;
  std::string trajectory_path;
  std::string intrinsics_path;
  std::string output_path;
  std::vector<std::uint64_t> seeds = {0};
  ProjectionConfig projection = occlusion_projection();
  std::vector<StageConfig> stages;
  bool zero_runtime = false;  // report runtime_ms as 0 for reproducible bytes
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// One line of the newline-delimited benchmark report.
struct StageRecord {
  std::uint64_t seed = 0;
  int stage = 0;  // 1-based
  double e_t = 0.0;
  double e_r = 0.0;
  int inliers = 0;
  double runtime_ms = 0.0;
  bool succeeded = true;
  std::string failure;
};

std::string record_line(const StageRecord& record);

struct BenchmarkSummary {
  double median_e_t = 0.0;
  double median_e_r = 0.0;
  double msee = 0.0;
  double mrr = 0.0;
  bool metrics_valid = true;  // false when an initial error was zero
  int runs = 0;
};

std::string summary_line(const BenchmarkSummary& summary);

struct BenchmarkResult {
  std::vector<StageRecord> records;
  BenchmarkSummary summary;
  std::string report;  // NDJSON: one line per record plus the summary
};

// Seed-swept Monte-Carlo on one frame: every seed samples an initial pose
// inside the first stage's noise range and runs the full stage chain. The
// per-stage oracle and RANSAC seeds are derived from the sweep seed and the
// stage index so runs are independent yet reproducible.
BenchmarkResult run_benchmark(const PointCloud& map, const PoseSE3& gt,
                              const CameraIntrinsics& k, const RunConfig& cfg);

struct CalibrationRun {
  std::vector<StageRecord> records;
  AggregationResult aggregate;
  BenchmarkSummary summary;
  std::string report;
};

// Per-frame extrinsic recovery over a trajectory of ground-truth extrinsics
// followed by temporal aggregation. Frame i uses seeds[i mod seeds.size()].
CalibrationRun run_calibration(const PointCloud& map,
                               const std::vector<PoseSE3>& gt_per_frame,
                               const CameraIntrinsics& k, const RunConfig& cfg);

// Command-line surface. `args` excludes the program name. Returns the
// process exit code: 0 success, 1 user error, 2 pipeline failure.
int cli_dispatch(const std::vector<std::string>& args);

}  // namespace camlidar
