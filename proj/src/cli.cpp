#include "camlidar/cli.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "camlidar/errors.hpp"
#include "camlidar/rng.hpp"

namespace camlidar {

namespace {

using nlohmann::json;

double require_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw MalformedInput(where + ": missing numeric field '" + key + "'");
  }
  return j[key].get<double>();
}

OcclusionConfig parse_occlusion(const json& j, const std::string& where) {
  OcclusionConfig cfg;
  if (j.contains("kernel_size")) {
    cfg.kernel_size = static_cast<int>(require_number(j, "kernel_size", where));
  }
  if (j.contains("threshold")) {
    cfg.threshold = require_number(j, "threshold", where);
  }
  if (j.contains("comparison")) {
    const std::string mode = j["comparison"].is_string()
                                 ? j["comparison"].get<std::string>()
                                 : std::string();
    if (mode == "greater") {
      cfg.comparison = OcclusionComparison::VisibleIfGreater;
    } else if (mode == "smaller") {
      cfg.comparison = OcclusionComparison::VisibleIfSmaller;
    } else {
      throw MalformedInput(where + ": unknown comparison '" + mode + "'");
    }
  }
  return cfg;
}

StageConfig parse_stage(const json& j, const std::string& where) {
  StageConfig stage;
  if (j.contains("noise_range")) {
    const json& r = j["noise_range"];
    stage.noise_range.max_translation_m =
        require_number(r, "translation_m", where + ".noise_range");
    stage.noise_range.max_rotation_deg =
        require_number(r, "rotation_deg", where + ".noise_range");
  }
  if (j.contains("oracle")) {
    const json& o = j["oracle"];
    if (o.contains("sigma")) {
      stage.matcher.oracle.gaussian_sigma = require_number(o, "sigma", where);
    }
    if (o.contains("outlier_fraction")) {
      stage.matcher.oracle.outlier_fraction =
          require_number(o, "outlier_fraction", where);
    }
    if (o.contains("outlier_range")) {
      stage.matcher.oracle.outlier_range =
          require_number(o, "outlier_range", where);
    }
    if (o.contains("blind")) {
      if (!o["blind"].is_boolean()) {
        throw MalformedInput(where + ": oracle.blind must be a boolean");
      }
      stage.matcher.oracle.blind_sigma = o["blind"].get<bool>();
    }
    if (o.contains("seed")) {
      stage.matcher.oracle.rng_seed =
          static_cast<std::uint64_t>(require_number(o, "seed", where));
    }
  }
  if (j.contains("external_flow") && j["external_flow"].is_string()) {
    stage.matcher.external_flow_path = j["external_flow"].get<std::string>();
  }
  if (j.contains("ransac")) {
    const json& r = j["ransac"];
    if (r.contains("iterations")) {
      stage.ransac.iterations =
          static_cast<int>(require_number(r, "iterations", where));
    }
    if (r.contains("threshold")) {
      stage.ransac.reproj_threshold = require_number(r, "threshold", where);
    }
    if (r.contains("min_inliers")) {
      stage.ransac.min_inliers =
          static_cast<int>(require_number(r, "min_inliers", where));
    }
    if (r.contains("refine_with_lm")) {
      if (!r["refine_with_lm"].is_boolean()) {
        throw MalformedInput(where + ": ransac.refine_with_lm must be a boolean");
      }
      stage.ransac.refine_with_lm = r["refine_with_lm"].get<bool>();
    }
    if (r.contains("seed")) {
      stage.ransac.rng_seed =
          static_cast<std::uint64_t>(require_number(r, "seed", where));
    }
  }
  if (j.contains("keep_quantile")) {
    stage.keep_quantile = require_number(j, "keep_quantile", where);
  }
  return stage;
}

double median_value(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Stage seeds for one sweep run: both stochastic components get streams
// derived from the sweep seed and the stage position.
std::vector<StageConfig> stages_for_seed(const std::vector<StageConfig>& stages,
                                         std::uint64_t sweep_seed) {
  std::vector<StageConfig> out = stages;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].matcher.oracle.rng_seed = derive_seed(sweep_seed, 2 * i);
    out[i].ransac.rng_seed = derive_seed(sweep_seed, 2 * i + 1);
  }
  return out;
}

json pose_to_json(const PoseSE3& pose) {
  const Eigen::Quaterniond& q = pose.rotation();
  const Eigen::Vector3d& t = pose.translation();
  return json::array({q.w(), q.x(), q.y(), q.z(), t.x(), t.y(), t.z()});
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw MalformedInput(std::string("run config: ") + e.what());
  }
  RunConfig cfg;
  const auto take_string = [&](const char* key, std::string& into) {
    if (j.contains(key)) {
      if (!j[key].is_string()) {
        throw MalformedInput(std::string("run config: '") + key +
                             "' must be a string");
      }
      into = j[key].get<std::string>();
    }
  };
  take_string("map", cfg.map_path);
  take_string("trajectory", cfg.trajectory_path);
  take_string("intrinsics", cfg.intrinsics_path);
  take_string("output", cfg.output_path);
  if (j.contains("seeds")) {
    if (!j["seeds"].is_array() || j["seeds"].empty()) {
      throw MalformedInput("run config: 'seeds' must be a nonempty array");
    }
    cfg.seeds.clear();
    for (const json& s : j["seeds"]) {
      if (!s.is_number()) {
        throw MalformedInput("run config: seeds must be numeric");
      }
      cfg.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  if (j.contains("projection")) {
    const json& p = j["projection"];
    if (p.contains("max_depth")) {
      cfg.projection.max_depth = require_number(p, "max_depth", "projection");
    }
    if (p.contains("occlusion")) {
      if (p["occlusion"].is_null()) {
        cfg.projection.occlusion.reset();
      } else {
        cfg.projection.occlusion =
            parse_occlusion(p["occlusion"], "projection.occlusion");
      }
    }
  }
  if (j.contains("stages")) {
    if (!j["stages"].is_array() || j["stages"].empty()) {
      throw MalformedInput("run config: 'stages' must be a nonempty array");
    }
    int index = 0;
    for (const json& s : j["stages"]) {
      cfg.stages.push_back(
          parse_stage(s, "stage " + std::to_string(index)));
      ++index;
    }
  }
  if (j.contains("zero_runtime")) {
    if (!j["zero_runtime"].is_boolean()) {
      throw MalformedInput("run config: 'zero_runtime' must be a boolean");
    }
    cfg.zero_runtime = j["zero_runtime"].get<bool>();
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open for reading: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

std::string record_line(const StageRecord& record) {
  json j;
  j["seed"] = record.seed;
  j["stage"] = record.stage;
  j["E_t"] = record.e_t;
  j["E_r"] = record.e_r;
  j["inliers"] = record.inliers;
  j["runtime_ms"] = record.runtime_ms;
  if (!record.succeeded) j["failure"] = record.failure;
  return j.dump();
}

std::string summary_line(const BenchmarkSummary& summary) {
  json j;
  j["summary"] = true;
  j["runs"] = summary.runs;
  j["median_E_t"] = summary.median_e_t;
  j["median_E_r"] = summary.median_e_r;
  if (summary.metrics_valid) {
    j["MSEE"] = summary.msee;
    j["MRR"] = summary.mrr;
  } else {
    j["MSEE"] = nullptr;
    j["MRR"] = nullptr;
  }
  return j.dump();
}

namespace {

struct ChainOutcome {
  std::vector<StageRecord> records;
  PoseSE3 final_pose;
};

ChainOutcome run_chain(const PointCloud& map, const PoseSE3& gt,
                       const PoseSE3& init, const CameraIntrinsics& k,
                       const RunConfig& cfg, std::uint64_t seed) {
  const std::vector<StageConfig> stages = stages_for_seed(cfg.stages, seed);
  const std::vector<StageResult> results =
      iterative_localize(map, init, k, stages, gt, cfg.projection);
  ChainOutcome outcome;
  outcome.final_pose = init;
  for (std::size_t s = 0; s < results.size(); ++s) {
    const StageResult& sr = results[s];
    StageRecord rec;
    rec.seed = seed;
    rec.stage = static_cast<int>(s) + 1;
    const PoseError e = pose_errors(gt, sr.result.pose);
    rec.e_t = e.translation_m;
    rec.e_r = e.rotation_deg;
    rec.inliers = static_cast<int>(sr.result.inlier_indices.size());
    rec.runtime_ms = cfg.zero_runtime ? 0.0 : sr.runtime_ms;
    rec.succeeded = sr.succeeded;
    rec.failure = sr.failure;
    outcome.records.push_back(rec);
    outcome.final_pose = sr.result.pose;
  }
  return outcome;
}

}  // namespace

BenchmarkResult run_benchmark(const PointCloud& map, const PoseSE3& gt,
                              const CameraIntrinsics& k, const RunConfig& cfg) {
  if (cfg.stages.empty()) {
    throw std::invalid_argument("run_benchmark: config has no stages");
  }
  if (cfg.seeds.empty()) {
    throw std::invalid_argument("run_benchmark: config has no seeds");
  }
  BenchmarkResult out;
  std::vector<double> final_e_t, final_e_r;
  std::vector<PosePair> initial_pairs, final_pairs;
  for (const std::uint64_t seed : cfg.seeds) {
    const PoseSE3 init =
        sample_initial_pose(gt, cfg.stages.front().noise_range, seed);
    ChainOutcome chain = run_chain(map, gt, init, k, cfg, seed);
    out.records.insert(out.records.end(), chain.records.begin(),
                       chain.records.end());
    const PoseError fe = pose_errors(gt, chain.final_pose);
    final_e_t.push_back(fe.translation_m);
    final_e_r.push_back(fe.rotation_deg);
    initial_pairs.push_back({gt, init});
    final_pairs.push_back({gt, chain.final_pose});
  }
  out.summary.runs = static_cast<int>(cfg.seeds.size());
  out.summary.median_e_t = median_value(final_e_t);
  out.summary.median_e_r = median_value(final_e_r);
  try {
    const CalibrationMetrics m = msee_mrr(initial_pairs, final_pairs);
    out.summary.msee = m.msee;
    out.summary.mrr = m.mrr;
  } catch (const ZeroInitialError&) {
    out.summary.metrics_valid = false;
  }
  std::ostringstream report;
  for (const StageRecord& rec : out.records) {
    report << record_line(rec) << '\n';
  }
  report << summary_line(out.summary) << '\n';
  out.report = report.str();
  return out;
}

CalibrationRun run_calibration(const PointCloud& map,
                               const std::vector<PoseSE3>& gt_per_frame,
                               const CameraIntrinsics& k, const RunConfig& cfg) {
  if (gt_per_frame.empty()) {
    throw std::invalid_argument("run_calibration: no frames");
  }
  if (cfg.stages.empty()) {
    throw std::invalid_argument("run_calibration: config has no stages");
  }
  if (cfg.seeds.empty()) {
    throw std::invalid_argument("run_calibration: config has no seeds");
  }
  CalibrationRun out;
  std::vector<PoseSE3> finals;
  std::vector<double> final_e_t, final_e_r;
  std::vector<PosePair> initial_pairs, final_pairs;
  for (std::size_t i = 0; i < gt_per_frame.size(); ++i) {
    const PoseSE3& gt = gt_per_frame[i];
    const std::uint64_t run_seed =
        derive_seed(cfg.seeds[i % cfg.seeds.size()], i);
    const PoseSE3 init =
        sample_initial_pose(gt, cfg.stages.front().noise_range, run_seed);
    ChainOutcome chain = run_chain(map, gt, init, k, cfg, run_seed);
    out.records.insert(out.records.end(), chain.records.begin(),
                       chain.records.end());
    finals.push_back(chain.final_pose);
    const PoseError fe = pose_errors(gt, chain.final_pose);
    final_e_t.push_back(fe.translation_m);
    final_e_r.push_back(fe.rotation_deg);
    initial_pairs.push_back({gt, init});
    final_pairs.push_back({gt, chain.final_pose});
  }
  out.aggregate = aggregate_extrinsics(finals);
  out.summary.runs = static_cast<int>(gt_per_frame.size());
  out.summary.median_e_t = median_value(final_e_t);
  out.summary.median_e_r = median_value(final_e_r);
  try {
    const CalibrationMetrics m = msee_mrr(initial_pairs, final_pairs);
    out.summary.msee = m.msee;
    out.summary.mrr = m.mrr;
  } catch (const ZeroInitialError&) {
    out.summary.metrics_valid = false;
  }
  std::ostringstream report;
  for (const StageRecord& rec : out.records) {
    report << record_line(rec) << '\n';
  }
  json agg;
  agg["aggregate"] = true;
  agg["frame_count"] = out.aggregate.frame_count;
  agg["mean_pose"] = pose_to_json(out.aggregate.mean_pose);
  agg["mode_pose"] = pose_to_json(out.aggregate.mode_pose);
  agg["median_translation"] =
      json::array({out.aggregate.median_translation.x(),
                   out.aggregate.median_translation.y(),
                   out.aggregate.median_translation.z()});
  report << agg.dump() << '\n';
  report << summary_line(out.summary) << '\n';
  out.report = report.str();
  return out;
}

namespace {

std::vector<std::string> split_list(const std::string& joined) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream stream(joined);
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::uint32_t> load_labels_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open for reading: " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() % 4 != 0) {
    throw MalformedInput(path + ": label payload is not a multiple of 4 bytes");
  }
  std::vector<std::uint32_t> labels(bytes.size() / 4);
  std::memcpy(labels.data(), bytes.data(), bytes.size());
  return labels;
}

PoseSE3 camera_pose_from_row(const TrajectoryEntry& entry,
                             FrameConvention frame) {
  PoseSE3 cam_from_map = entry.pose.inverse();
  if (frame == FrameConvention::RobotXForward) {
    cam_from_map = compose(robot_to_pinhole(), cam_from_map);
  }
  return cam_from_map;
}

const TrajectoryEntry& trajectory_row(const std::vector<TrajectoryEntry>& rows,
                                      int frame, const std::string& path) {
  if (frame < 0 || static_cast<std::size_t>(frame) >= rows.size()) {
    throw MalformedInput(path + ": frame " + std::to_string(frame) +
                         " out of range (file has " +
                         std::to_string(rows.size()) + " rows)");
  }
  return rows[static_cast<std::size_t>(frame)];
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot open for writing: " + path);
  out << text;
  out.flush();
  if (!out) throw IoFailure("write failed: " + path);
}

// Shared projection flags for the rendering subcommands.
struct ProjectionFlags {
  double max_depth = 160.0;
  bool no_occlusion = false;
  int kernel_size = 9;
  double threshold = 3.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--max-depth", max_depth, "Far clip distance in meters");
    cmd->add_flag("--no-occlusion", no_occlusion,
                  "Disable the occlusion visibility filter");
    cmd->add_option("--occlusion-kernel", kernel_size,
                    "Occlusion window size (odd, >= 3)");
    cmd->add_option("--occlusion-threshold", threshold,
                    "Occlusion score threshold");
  }

  ProjectionConfig config() const {
    ProjectionConfig cfg;
    cfg.max_depth = max_depth;
    if (!no_occlusion) {
      OcclusionConfig occ;
      occ.kernel_size = kernel_size;
      occ.threshold = threshold;
      cfg.occlusion = occ;
    }
    return cfg;
  }
};

}  // namespace

int cli_dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Camera-to-LiDAR geometric matching toolkit"};
  app.require_subcommand(1);

  // build-map
  auto* build = app.add_subcommand(
      "build-map", "Aggregate posed scans into a voxel-downsampled map");
  std::string bm_scans, bm_traj, bm_out, bm_labels, bm_drop;
  double bm_voxel = 0.1;
  build->add_option("--scans", bm_scans, "Comma-separated scan files")
      ->required();
  build->add_option("--trajectory", bm_traj, "Sensor-to-map trajectory file")
      ->required();
  build->add_option("--output", bm_out, "Output map file")->required();
  build->add_option("--voxel", bm_voxel, "Voxel size in meters");
  build->add_option("--labels", bm_labels,
                    "Comma-separated per-scan label files (u32 per point)");
  build->add_option("--drop-labels", bm_drop,
                    "Comma-separated label values to remove");
  build->callback([&]() {
    const std::vector<std::string> scan_paths = split_list(bm_scans);
    const std::vector<TrajectoryEntry> rows = load_trajectory(bm_traj);
    if (rows.size() != scan_paths.size()) {
      throw MalformedInput("build-map: " + std::to_string(scan_paths.size()) +
                           " scans but " + std::to_string(rows.size()) +
                           " trajectory rows");
    }
    std::vector<std::pair<PointCloud, PoseSE3>> scans;
    for (std::size_t i = 0; i < scan_paths.size(); ++i) {
      scans.emplace_back(load_scan(scan_paths[i]), rows[i].pose);
    }
    std::vector<std::vector<std::uint32_t>> labels;
    for (const std::string& path : split_list(bm_labels)) {
      labels.push_back(load_labels_file(path));
    }
    std::vector<std::uint32_t> drop;
    for (const std::string& v : split_list(bm_drop)) {
      drop.push_back(static_cast<std::uint32_t>(std::stoul(v)));
    }
    VoxelGridConfig grid;
    grid.voxel_size = bm_voxel;
    const PointCloud map = build_map(scans, grid, labels, drop);
    save_scan(map, bm_out);
    std::cout << "map: " << map.size() << " points\n";
  });

  // project
  auto* project = app.add_subcommand(
      "project", "Render the map into a sparse LiDAR-image at one frame");
  std::string pr_map, pr_traj, pr_intr, pr_out;
  int pr_frame = 0;
  ProjectionFlags pr_flags;
  project->add_option("--map", pr_map, "Map point cloud file")->required();
  project->add_option("--trajectory", pr_traj, "Sensor-to-map trajectory file")
      ->required();
  project->add_option("--intrinsics", pr_intr, "Intrinsics file")->required();
  project->add_option("--output", pr_out, "Output LiDAR-image file")->required();
  project->add_option("--frame", pr_frame, "Trajectory row to render");
  pr_flags.attach(project);
  project->callback([&]() {
    const PointCloud map = load_scan(pr_map);
    const std::vector<TrajectoryEntry> rows = load_trajectory(pr_traj);
    const IntrinsicsFile intr = load_intrinsics(pr_intr);
    const PoseSE3 pose =
        camera_pose_from_row(trajectory_row(rows, pr_frame, pr_traj), intr.frame);
    const LidarImage image =
        render_lidar_image(map, pose, intr.k, pr_flags.config());
    save_lidar_image(image, pr_out);
    std::cout << "projected: " << image.valid_count() << " valid pixels\n";
  });

  // gen-flow
  auto* gen = app.add_subcommand(
      "gen-flow", "Ground-truth displacement field between two frames");
  std::string gf_map, gf_traj, gf_intr, gf_out;
  int gf_init = 0, gf_gt = 0;
  ProjectionFlags gf_flags;
  gen->add_option("--map", gf_map, "Map point cloud file")->required();
  gen->add_option("--trajectory", gf_traj, "Sensor-to-map trajectory file")
      ->required();
  gen->add_option("--intrinsics", gf_intr, "Intrinsics file")->required();
  gen->add_option("--output", gf_out, "Output flow field file")->required();
  gen->add_option("--init-frame", gf_init, "Row rendered as the initial pose")
      ->required();
  gen->add_option("--gt-frame", gf_gt, "Row used as the ground-truth pose")
      ->required();
  gf_flags.attach(gen);
  gen->callback([&]() {
    const PointCloud map = load_scan(gf_map);
    const std::vector<TrajectoryEntry> rows = load_trajectory(gf_traj);
    const IntrinsicsFile intr = load_intrinsics(gf_intr);
    const PoseSE3 init =
        camera_pose_from_row(trajectory_row(rows, gf_init, gf_traj), intr.frame);
    const PoseSE3 gt =
        camera_pose_from_row(trajectory_row(rows, gf_gt, gf_traj), intr.frame);
    const auto [image, flow] =
        ground_truth_flow(map, init, gt, intr.k, gf_flags.config());
    save_flow_field(flow, gf_out);
    std::cout << "flow: " << flow.valid_count() << " valid pixels\n";
  });

  // localize
  auto* localize = app.add_subcommand(
      "localize", "Staged localization of a single frame");
  std::string lc_config;
  int lc_frame = 0;
  std::int64_t lc_seed = -1;
  localize->add_option("--config", lc_config, "Run config JSON")->required();
  localize->add_option("--frame", lc_frame, "Trajectory row to localize");
  localize->add_option("--seed", lc_seed, "Override the config's first seed");
  localize->callback([&]() {
    RunConfig cfg = load_run_config(lc_config);
    if (cfg.map_path.empty() || cfg.trajectory_path.empty() ||
        cfg.intrinsics_path.empty() || cfg.stages.empty()) {
      throw MalformedInput(
          "localize: config needs map, trajectory, intrinsics, and stages");
    }
    cfg.seeds = {lc_seed >= 0 ? static_cast<std::uint64_t>(lc_seed)
                              : cfg.seeds.front()};
    const PointCloud map = load_scan(cfg.map_path);
    const std::vector<TrajectoryEntry> rows = load_trajectory(cfg.trajectory_path);
    const IntrinsicsFile intr = load_intrinsics(cfg.intrinsics_path);
    const PoseSE3 gt = camera_pose_from_row(
        trajectory_row(rows, lc_frame, cfg.trajectory_path), intr.frame);
    const BenchmarkResult result = run_benchmark(map, gt, intr.k, cfg);
    if (!cfg.output_path.empty()) write_text(cfg.output_path, result.report);
    std::cout << result.report;
  });

  // calibrate
  auto* calibrate = app.add_subcommand(
      "calibrate", "Per-frame extrinsics with temporal aggregation");
  std::string cb_config;
  calibrate->add_option("--config", cb_config, "Run config JSON")->required();
  calibrate->callback([&]() {
    const RunConfig cfg = load_run_config(cb_config);
    if (cfg.map_path.empty() || cfg.trajectory_path.empty() ||
        cfg.intrinsics_path.empty() || cfg.stages.empty()) {
      throw MalformedInput(
          "calibrate: config needs map, trajectory, intrinsics, and stages");
    }
    const PointCloud map = load_scan(cfg.map_path);
    const std::vector<TrajectoryEntry> rows = load_trajectory(cfg.trajectory_path);
    const IntrinsicsFile intr = load_intrinsics(cfg.intrinsics_path);
    std::vector<PoseSE3> gts;
    for (const TrajectoryEntry& row : rows) {
      gts.push_back(camera_pose_from_row(row, intr.frame));
    }
    const CalibrationRun result = run_calibration(map, gts, intr.k, cfg);
    if (!cfg.output_path.empty()) write_text(cfg.output_path, result.report);
    std::cout << result.report;
  });

  // benchmark
  auto* bench = app.add_subcommand(
      "benchmark", "Seed-swept Monte-Carlo on one frame");
  std::string bn_config;
  int bn_frame = 0;
  bench->add_option("--config", bn_config, "Run config JSON")->required();
  bench->add_option("--frame", bn_frame, "Trajectory row to benchmark");
  bench->callback([&]() {
    const RunConfig cfg = load_run_config(bn_config);
    if (cfg.map_path.empty() || cfg.trajectory_path.empty() ||
        cfg.intrinsics_path.empty() || cfg.stages.empty()) {
      throw MalformedInput(
          "benchmark: config needs map, trajectory, intrinsics, and stages");
    }
    const PointCloud map = load_scan(cfg.map_path);
    const std::vector<TrajectoryEntry> rows = load_trajectory(cfg.trajectory_path);
    const IntrinsicsFile intr = load_intrinsics(cfg.intrinsics_path);
    const PoseSE3 gt = camera_pose_from_row(
        trajectory_row(rows, bn_frame, cfg.trajectory_path), intr.frame);
    const BenchmarkResult result = run_benchmark(map, gt, intr.k, cfg);
    if (!cfg.output_path.empty()) write_text(cfg.output_path, result.report);
    std::cout << summary_line(result.summary) << '\n';
  });

  // colorize
  auto* colorize = app.add_subcommand(
      "colorize", "Paint the map from posed images and export a PLY");
  std::string cz_map, cz_images, cz_traj, cz_intr, cz_out;
  ProjectionFlags cz_flags;
  colorize->add_option("--map", cz_map, "Map point cloud file")->required();
  colorize->add_option("--images", cz_images, "Comma-separated PPM images")
      ->required();
  colorize->add_option("--trajectory", cz_traj,
                       "Sensor-to-map trajectory file (row i poses image i)")
      ->required();
  colorize->add_option("--intrinsics", cz_intr, "Intrinsics file")->required();
  colorize->add_option("--output", cz_out, "Output PLY file")->required();
  cz_flags.attach(colorize);
  colorize->callback([&]() {
    const PointCloud map = load_scan(cz_map);
    const std::vector<std::string> image_paths = split_list(cz_images);
    const std::vector<TrajectoryEntry> rows = load_trajectory(cz_traj);
    const IntrinsicsFile intr = load_intrinsics(cz_intr);
    if (rows.size() != image_paths.size()) {
      throw MalformedInput("colorize: " + std::to_string(image_paths.size()) +
                           " images but " + std::to_string(rows.size()) +
                           " trajectory rows");
    }
    std::vector<std::pair<ColorImage, PoseSE3>> posed;
    for (std::size_t i = 0; i < image_paths.size(); ++i) {
      posed.emplace_back(load_ppm(image_paths[i]),
                         camera_pose_from_row(rows[i], intr.frame));
    }
    const PointCloud colored =
        colorize_map(map, posed, intr.k, cz_flags.config());
    export_ply(colored, cz_out);
    int painted = 0;
    for (std::uint8_t v : colored.color_valid) painted += v != 0;
    std::cout << "colorized: " << painted << " of " << colored.size()
              << " points\n";
  });

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("camlidar");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const MalformedInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const MalformedScan& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const IoFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const LabelLengthMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DimensionMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "pipeline failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal failure: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace camlidar
